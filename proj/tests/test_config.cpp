/*
 * Copyright 2026 The imtsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

namespace imtsim {
namespace {

std::string config_dir() { return std::string(IMTSIM_SOURCE_DIR) + "/configs/"; }

std::string spec_text(const RunConfig& c) {
  Json j = {{"model", to_json(c.spec.model)},
            {"hardware", to_json(c.spec.hardware)},
            {"cost_table", to_json(c.spec.cost_table)},
            {"dataflow", c.spec.dataflow.label()},
            {"policy", to_string(c.spec.policy)},
            {"residency", to_string(c.spec.residency)}};
  return j.dump();
}

TEST(Presets, BertBaseModel) {
  const RunConfig c = parse_config("bert-base");
  const auto& m = c.spec.model;
  EXPECT_EQ(m.num_layers, 12u);
  EXPECT_EQ(m.num_heads, 12u);
  EXPECT_EQ(m.hidden_size, 768u);
  EXPECT_EQ(m.head_size, 64u);
  EXPECT_EQ(m.seq_len, 512u);
  EXPECT_EQ(c.spec.dataflow.label(), "seqblock:64");
}

TEST(Presets, SquadSequenceLength) {
  EXPECT_EQ(parse_config("bert-base-squad").spec.model.seq_len, 384u);
  EXPECT_EQ(parse_config("bert-large-squad").spec.model.seq_len, 384u);
  EXPECT_EQ(parse_config("bert-large").spec.model.num_layers, 24u);
}

TEST(Presets, EveryPresetFitsInSomeResidency) {
  for (const auto& [name, text] : preset_texts()) {
    const RunConfig c = parse_config_text(text, name);
    EXPECT_NO_THROW(map_model(c.spec.hardware, c.spec.model, c.spec.policy, ResidencyRequest::Auto)) << name;
  }
}

TEST(Presets, ShippedFilesMatchBuiltins) {
  for (const auto& [name, text] : preset_texts()) {
    const std::string path = config_dir() + name + ".json";
    ASSERT_TRUE(std::filesystem::exists(path)) << path;
    EXPECT_EQ(spec_text(parse_config(path)), spec_text(parse_config_text(text, name))) << name;
  }
}

TEST(Presets, DefaultCostTableFileMatchesCode) {
  const RunConfig c = parse_config(config_dir() + "default-cost-table.json");
  EXPECT_EQ(c.spec.cost_table, CostTable{});
}

TEST(Presets, SampleConfigsParse) {
  const RunConfig s = parse_config(config_dir() + "sweep-seqlen.json");
  ASSERT_TRUE(s.sweep.has_value());
  EXPECT_EQ(s.sweep->axis, SweepAxis::SeqLen);
  EXPECT_EQ(s.sweep->values, (std::vector<std::string>{"64", "128", "256", "384", "512"}));
  const RunConfig f = parse_config(config_dir() + "variation.json");
  EXPECT_EQ(f.funcsim.seed, 7u);
  EXPECT_EQ(f.funcsim.sigmas.size(), 4u);
}

TEST(ParseConfig, OverlaysAndComments) {
  const RunConfig c = parse_config_text(R"({
    // comment
    "schema_version": 1,
    "model": {"seq_len": 128, "num_layers": 2},
    "hardware": {"projection": {"num_tiles": 72}, "memory": {"offchip_bytes_per_cycle": 4}},
    "cost_table": {"e_bus_byte_pj": 1.25},
    "policy": "nvm_all",
    "residency": "per_layer_replay",
    "seed": 42
  })");
  EXPECT_EQ(c.spec.model.seq_len, 128u);
  EXPECT_EQ(c.spec.model.num_layers, 2u);
  EXPECT_EQ(c.spec.model.hidden_size, 768u);
  EXPECT_EQ(c.spec.hardware.projection.num_tiles, 72u);
  EXPECT_EQ(c.spec.hardware.memory.offchip_bytes_per_cycle, 4u);
  EXPECT_EQ(c.spec.cost_table.e_bus_byte_pj, 1.25);
  EXPECT_EQ(c.spec.policy, MappingPolicy::NvmAll);
  EXPECT_EQ(c.spec.residency, ResidencyRequest::PerLayerReplay);
  EXPECT_EQ(c.seed, 42u);
}

void expect_config_error(const std::string& text, const std::string& needle) {
  try {
    parse_config_text(text);
    ADD_FAILURE() << "accepted: " << text;
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

TEST(ParseConfig, StrictRejections) {
  expect_config_error("", "parse error");
  expect_config_error("{\n  \"schema_version\": 1,\n  \"model\": }", "line 3");
  expect_config_error("[]", "top level");
  expect_config_error(R"({"model": "bert-base"})", "schema_version");
  expect_config_error(R"({"schema_version": 2})", "not supported");
  expect_config_error(R"({"schema_version": 1, "modle": "bert-base"})", "unknown key 'modle'");
  expect_config_error(R"({"schema_version": 1, "hardware": {"projection": {"num_tile": 3}}})",
                      "unknown key 'hardware.projection.num_tile'");
  expect_config_error(R"({"schema_version": 1, "model": {"seq_len": -4}})", "model.seq_len");
  expect_config_error(R"({"schema_version": 1, "model": {"seq_len": "long"}})", "model.seq_len");
  expect_config_error(R"({"schema_version": 1, "model": "gpt-3"})", "unknown model preset");
  expect_config_error(R"({"schema_version": 1, "model": {"hidden_size": 700}})", "hidden_size");
  expect_config_error(R"({"schema_version": 1, "cost_table": {"t_sfu_op_cycles": 0}})", "t_sfu_op_cycles");
  expect_config_error(R"({"schema_version": 1, "dataflow": "seqblock:x"})", "dataflow");
  expect_config_error(R"({"schema_version": 1, "policy": "gpu"})", "policy");
  expect_config_error(R"({"schema_version": 1, "sweep": {"values": [1]}})", "axis");
}

TEST(ParseConfig, MissingFileIsIoError) {
  EXPECT_THROW(parse_config("/nonexistent/imtsim.json"), std::ios_base::failure);
}

TEST(ConfigHash, StableAndSensitive) {
  const Json a = to_json(bert_base(512)), b = to_json(bert_base(384));
  EXPECT_EQ(config_hash(a), config_hash(to_json(bert_base(512))));
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Determinism, PresetReportsAreByteIdentical) {
  for (const auto& [name, text] : preset_texts()) {
    const RunConfig c = parse_config_text(text, name);
    EXPECT_EQ(to_json(run(c.spec)).dump(2), to_json(run(c.spec)).dump(2)) << name;
  }
}

}  // namespace
}  // namespace imtsim
