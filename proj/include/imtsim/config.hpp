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

/**
 * @file config.hpp
 * @brief Run configuration files and the built-in presets.
 *
 * A config is a JSON document (comments allowed) with a mandatory
 * "schema_version". "model" and "hardware" take either a preset name or an
 * object whose keys override the bert-base / table1-hw defaults. Units are
 * spelled out in key names (_hz, _bytes, _pj, _cycles).
 */

#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "imtsim/funcsim.hpp"
#include "imtsim/serialize.hpp"
#include "imtsim/simkernel.hpp"

namespace imtsim {

inline constexpr int kConfigSchemaVersion = 1;

struct OutputPaths {
  std::string report;  // JSON report
  std::string trace;   // JSON-lines timeline
  std::string csv;     // sweep / funcsim CSV
};

struct SweepRequest {
  SweepAxis axis = SweepAxis::SeqLen;
  std::vector<std::string> values;
};

struct RunConfig {
  RunSpec spec;
  OutputPaths output;
  std::optional<SweepRequest> sweep;
  std::uint64_t seed = 1;
  VariationSweepSpec funcsim;

  void validate() const {
    spec.hardware.validate();
    spec.model.validate();
    spec.cost_table.validate();
    spec.dataflow.validate(spec.model.seq_len);
    if (funcsim.rows < 1 || funcsim.cols < 1) throw ValidationError("funcsim: rows and cols must be >= 1");
    for (double s : funcsim.sigmas) {
      if (!(s >= 0.0)) throw ValidationError("funcsim: sigmas must be >= 0");
    }
  }
};

/// Text of the shipped presets; the same documents live under configs/.
inline const std::vector<std::pair<std::string, std::string>>& preset_texts() {
  static const std::vector<std::pair<std::string, std::string>> presets = {
      {"bert-base", R"({
  "schema_version": 1,
  "model": "bert-base",
  "hardware": {"auto_scale_tiles": true},
  "dataflow": "seqblock:64",
  "policy": "hybrid",
  "residency": "auto"
})"},
      {"bert-base-squad", R"({
  "schema_version": 1,
  "model": "bert-base-squad",
  "hardware": {"auto_scale_tiles": true},
  "dataflow": "seqblock:64",
  "policy": "hybrid",
  "residency": "auto"
})"},
      {"bert-large", R"({
  "schema_version": 1,
  "model": "bert-large",
  "hardware": {"auto_scale_tiles": true, "projection": {"readonly_tile_bytes": 33554432}},
  "dataflow": "seqblock:64",
  "policy": "hybrid",
  "residency": "auto"
})"},
      {"bert-large-squad", R"({
  "schema_version": 1,
  "model": "bert-large-squad",
  "hardware": {"auto_scale_tiles": true, "projection": {"readonly_tile_bytes": 33554432}},
  "dataflow": "seqblock:64",
  "policy": "hybrid",
  "residency": "auto"
})"},
      {"table1-hw", R"({
  "schema_version": 1,
  "model": "bert-base",
  "hardware": "table1-hw",
  "dataflow": "traditional",
  "policy": "hybrid",
  "residency": "auto"
})"},
  };
  return presets;
}

inline std::optional<ModelSpec> model_preset(const std::string& name) {
  if (name == "bert-base") return bert_base(512);
  if (name == "bert-base-squad") {
    auto m = bert_base(384);
    m.name = "bert-base-squad";
    return m;
  }
  if (name == "bert-large") return bert_large(512);
  if (name == "bert-large-squad") {
    auto m = bert_large(384);
    m.name = "bert-large-squad";
    return m;
  }
  return std::nullopt;
}

inline std::optional<HardwareSpec> hardware_preset(const std::string& name) {
  if (name == "table1-hw") return table1_hardware();
  return std::nullopt;
}

inline std::optional<std::string> preset_text(const std::string& name) {
  for (const auto& [n, text] : preset_texts()) {
    if (n == name) return text;
  }
  return std::nullopt;
}

namespace detail {

inline std::string scalar_text(const Json& v, const std::string& path) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.dump();
  throw ConfigError(path + ": expected strings or integers");
}

}  // namespace detail

/// Parses config text. `origin` names the source in error messages.
inline RunConfig parse_config_text(const std::string& text, const std::string& origin = "config") {
  Json doc;
  try {
    doc = Json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(origin + ": top level must be an object");
  if (!doc.contains("schema_version")) throw ConfigError(origin + ": missing required key 'schema_version'");

  RunConfig cfg;
  int version = 0;
  std::string dataflow, policy, residency;
  detail::ObjectReader top(doc, "");
  top.field("schema_version", version);
  if (version != kConfigSchemaVersion) {
    throw ConfigError(origin + ": schema_version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kConfigSchemaVersion) + ")");
  }
  top.object("model",
             [&](const Json& j, const std::string& at) {
               if (j.is_string()) {
                 auto m = model_preset(j.get<std::string>());
                 if (!m) throw ConfigError(at + ": unknown model preset '" + j.get<std::string>() + "'");
                 cfg.spec.model = *m;
               } else {
                 read_model(j, at, cfg.spec.model);
               }
             })
      .object("hardware",
              [&](const Json& j, const std::string& at) {
                if (j.is_string()) {
                  auto h = hardware_preset(j.get<std::string>());
                  if (!h) throw ConfigError(at + ": unknown hardware preset '" + j.get<std::string>() + "'");
                  cfg.spec.hardware = *h;
                } else {
                  read_hardware(j, at, cfg.spec.hardware);
                }
              })
      .object("cost_table", [&](const Json& j, const std::string& at) { read_cost_table(j, at, cfg.spec.cost_table); })
      .field("dataflow", dataflow)
      .field("policy", policy)
      .field("residency", residency)
      .field("seed", cfg.seed)
      .object("output",
              [&](const Json& j, const std::string& at) {
                detail::ObjectReader(j, at)
                    .field("report", cfg.output.report)
                    .field("trace", cfg.output.trace)
                    .field("csv", cfg.output.csv)
                    .finish();
              })
      .object("sweep",
              [&](const Json& j, const std::string& at) {
                SweepRequest s;
                std::string axis;
                detail::ObjectReader(j, at)
                    .field("axis", axis)
                    .object("values",
                            [&](const Json& v, const std::string& vat) {
                              if (!v.is_array()) throw ConfigError(vat + ": expected an array");
                              for (const auto& e : v) s.values.push_back(detail::scalar_text(e, vat));
                            })
                    .finish();
                if (axis.empty()) throw ConfigError(at + ".axis: required");
                s.axis = parse_sweep_axis(axis);
                cfg.sweep = s;
              })
      .object("funcsim",
              [&](const Json& j, const std::string& at) {
                auto& f = cfg.funcsim;
                detail::ObjectReader(j, at)
                    .object("sigmas",
                            [&](const Json& v, const std::string& vat) {
                              if (!v.is_array()) throw ConfigError(vat + ": expected an array");
                              f.sigmas.clear();
                              for (const auto& e : v) {
                                double s = 0;
                                detail::read_value(e, vat, s);
                                f.sigmas.push_back(s);
                              }
                            })
                    .field("trials", f.trials)
                    .field("rows", f.rows)
                    .field("cols", f.cols)
                    .field("adc_bits", f.adc_bits)
                    .finish();
              })
      .finish();

  if (!dataflow.empty()) cfg.spec.dataflow = DataflowConfig::parse(dataflow);
  if (!policy.empty()) cfg.spec.policy = parse_policy(policy);
  if (!residency.empty()) cfg.spec.residency = parse_residency(residency);
  cfg.funcsim.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

/// Reads a config file, or a built-in preset when `path_or_preset` names one
/// and no such file exists. Throws std::ios_base::failure when unreadable.
inline RunConfig parse_config(const std::string& path_or_preset) {
  std::ifstream in(path_or_preset, std::ios::binary);
  if (!in) {
    if (auto text = preset_text(path_or_preset)) return parse_config_text(*text, path_or_preset);
    throw std::ios_base::failure("cannot open config '" + path_or_preset + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path_or_preset);
}

}  // namespace imtsim
