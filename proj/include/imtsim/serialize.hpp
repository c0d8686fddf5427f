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
 * @file serialize.hpp
 * @brief JSON mapping of the specs. Readers reject unknown keys and
 * mistyped values, naming the offending field.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <type_traits>

#include <nlohmann/json.hpp>

#include "imtsim/common.hpp"
#include "imtsim/costmodel.hpp"
#include "imtsim/hardware.hpp"
#include "imtsim/hwmap.hpp"
#include "imtsim/workload.hpp"

namespace imtsim {

using Json = nlohmann::ordered_json;

namespace detail {

template <class T>
void read_value(const Json& j, const std::string& path, T& out) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!j.is_boolean()) throw ConfigError(path + ": expected a boolean");
    out = j.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
    if (j.is_number_unsigned()) {
      const auto v = j.get<std::uint64_t>();
      if (v > static_cast<std::uint64_t>(std::numeric_limits<T>::max())) throw ConfigError(path + ": value out of range");
      out = static_cast<T>(v);
    } else {
      const auto v = j.get<std::int64_t>();
      if constexpr (std::is_unsigned_v<T>) {
        if (v < 0) throw ConfigError(path + ": must be >= 0");
      }
      out = static_cast<T>(v);
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    out = j.get<T>();
    if (!std::isfinite(out)) throw ConfigError(path + ": must be finite");
  } else {
    if (!j.is_string()) throw ConfigError(path + ": expected a string");
    out = j.get<std::string>();
  }
}

/// Reads fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError((path_.empty() ? std::string("config") : path_) + ": expected an object");
  }

  template <class T>
  ObjectReader& field(const char* key, T& out) {
    known_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) read_value(*it, sub(key), out);
    return *this;
  }

  template <class F>
  ObjectReader& object(const char* key, F&& f) {
    known_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) f(*it, sub(key));
    return *this;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!known_.count(k)) throw ConfigError("unknown key '" + sub(k) + "'");
    }
  }

 private:
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const Json& j_;
  std::string path_;
  std::set<std::string> known_;
};

}  // namespace detail

inline Json to_json(const ModelSpec& m) {
  return Json{{"name", m.name},           {"num_layers", m.num_layers}, {"num_heads", m.num_heads},
              {"hidden_size", m.hidden_size}, {"head_size", m.head_size}, {"seq_len", m.seq_len},
              {"batch", m.batch},         {"ffn_mult", m.ffn_mult},     {"weight_bits", m.weight_bits},
              {"q_bits", m.q_bits},       {"k_bits", m.k_bits},         {"v_bits", m.v_bits},
              {"vocab_size", m.vocab_size}, {"num_labels", m.num_labels}};
}

/// Overlays `j` onto `m`; absent keys keep their current values.
inline void read_model(const Json& j, const std::string& path, ModelSpec& m) {
  detail::ObjectReader(j, path)
      .field("name", m.name)
      .field("num_layers", m.num_layers)
      .field("num_heads", m.num_heads)
      .field("hidden_size", m.hidden_size)
      .field("head_size", m.head_size)
      .field("seq_len", m.seq_len)
      .field("batch", m.batch)
      .field("ffn_mult", m.ffn_mult)
      .field("weight_bits", m.weight_bits)
      .field("q_bits", m.q_bits)
      .field("k_bits", m.k_bits)
      .field("v_bits", m.v_bits)
      .field("vocab_size", m.vocab_size)
      .field("num_labels", m.num_labels)
      .finish();
}

inline Json to_json(const HardwareSpec& h) {
  const auto& p = h.projection;
  const auto& a = h.attention;
  return Json{
      {"name", h.name},
      {"frequency_hz", h.frequency_hz},
      {"auto_scale_tiles", h.auto_scale_tiles},
      {"projection",
       {{"num_tiles", p.num_tiles},
        {"cores_per_tile", p.cores_per_tile},
        {"crossbars_per_core", p.crossbars_per_core},
        {"xbar_rows", p.xbar_rows},
        {"xbar_cols", p.xbar_cols},
        {"cell_bits", p.cell_bits},
        {"dac_bits", p.dac_bits},
        {"adcs_per_xbar", p.adcs_per_xbar},
        {"adc_bits", p.adc_bits},
        {"adc_rate_sps", p.adc_rate_sps},
        {"shared_mem_bytes", p.shared_mem_bytes},
        {"scratchpad_bytes", p.scratchpad_bytes},
        {"readonly_tile_bytes", p.readonly_tile_bytes},
        {"vfu_lanes", p.vfu_lanes}}},
      {"attention",
       {{"num_pe", a.num_pe},
        {"ahct_per_pe", a.ahct_per_pe},
        {"banks_per_ahct", a.banks_per_ahct},
        {"sram_arrays_per_bank", a.sram_arrays_per_bank},
        {"sram_rows", a.sram_rows},
        {"sram_cols", a.sram_cols},
        {"cell_bits", a.cell_bits},
        {"dac_bits", a.dac_bits},
        {"adcs_per_bank", a.adcs_per_bank},
        {"adc_bits", a.adc_bits},
        {"adc_rate_sps", a.adc_rate_sps},
        {"sfu_vector_units", a.sfu_vector_units},
        {"sfu_lanes_per_vu", a.sfu_lanes_per_vu},
        {"block_seq_accum_bytes", a.block_seq_accum_bytes}}},
      {"interconnect", {{"bus_bytes_per_cycle", h.interconnect.bus_bytes_per_cycle}}},
      {"memory",
       {{"scratchpad_bytes_per_cycle", h.memory.scratchpad_bytes_per_cycle},
        {"shared_mem_bytes_per_cycle", h.memory.shared_mem_bytes_per_cycle},
        {"readonly_bytes_per_cycle", h.memory.readonly_bytes_per_cycle},
        {"offchip_bytes_per_cycle", h.memory.offchip_bytes_per_cycle}}},
      {"nvm",
       {{"r_min_ohm", h.nvm.r_min_ohm}, {"r_max_ohm", h.nvm.r_max_ohm}, {"endurance_writes", h.nvm.endurance_writes}}},
  };
}

inline void read_hardware(const Json& j, const std::string& path, HardwareSpec& h) {
  detail::ObjectReader(j, path)
      .field("name", h.name)
      .field("frequency_hz", h.frequency_hz)
      .field("auto_scale_tiles", h.auto_scale_tiles)
      .object("projection",
              [&](const Json& o, const std::string& at) {
                auto& p = h.projection;
                detail::ObjectReader(o, at)
                    .field("num_tiles", p.num_tiles)
                    .field("cores_per_tile", p.cores_per_tile)
                    .field("crossbars_per_core", p.crossbars_per_core)
                    .field("xbar_rows", p.xbar_rows)
                    .field("xbar_cols", p.xbar_cols)
                    .field("cell_bits", p.cell_bits)
                    .field("dac_bits", p.dac_bits)
                    .field("adcs_per_xbar", p.adcs_per_xbar)
                    .field("adc_bits", p.adc_bits)
                    .field("adc_rate_sps", p.adc_rate_sps)
                    .field("shared_mem_bytes", p.shared_mem_bytes)
                    .field("scratchpad_bytes", p.scratchpad_bytes)
                    .field("readonly_tile_bytes", p.readonly_tile_bytes)
                    .field("vfu_lanes", p.vfu_lanes)
                    .finish();
              })
      .object("attention",
              [&](const Json& o, const std::string& at) {
                auto& a = h.attention;
                detail::ObjectReader(o, at)
                    .field("num_pe", a.num_pe)
                    .field("ahct_per_pe", a.ahct_per_pe)
                    .field("banks_per_ahct", a.banks_per_ahct)
                    .field("sram_arrays_per_bank", a.sram_arrays_per_bank)
                    .field("sram_rows", a.sram_rows)
                    .field("sram_cols", a.sram_cols)
                    .field("cell_bits", a.cell_bits)
                    .field("dac_bits", a.dac_bits)
                    .field("adcs_per_bank", a.adcs_per_bank)
                    .field("adc_bits", a.adc_bits)
                    .field("adc_rate_sps", a.adc_rate_sps)
                    .field("sfu_vector_units", a.sfu_vector_units)
                    .field("sfu_lanes_per_vu", a.sfu_lanes_per_vu)
                    .field("block_seq_accum_bytes", a.block_seq_accum_bytes)
                    .finish();
              })
      .object("interconnect",
              [&](const Json& o, const std::string& at) {
                detail::ObjectReader(o, at).field("bus_bytes_per_cycle", h.interconnect.bus_bytes_per_cycle).finish();
              })
      .object("memory",
              [&](const Json& o, const std::string& at) {
                auto& m = h.memory;
                detail::ObjectReader(o, at)
                    .field("scratchpad_bytes_per_cycle", m.scratchpad_bytes_per_cycle)
                    .field("shared_mem_bytes_per_cycle", m.shared_mem_bytes_per_cycle)
                    .field("readonly_bytes_per_cycle", m.readonly_bytes_per_cycle)
                    .field("offchip_bytes_per_cycle", m.offchip_bytes_per_cycle)
                    .finish();
              })
      .object("nvm",
              [&](const Json& o, const std::string& at) {
                detail::ObjectReader(o, at)
                    .field("r_min_ohm", h.nvm.r_min_ohm)
                    .field("r_max_ohm", h.nvm.r_max_ohm)
                    .field("endurance_writes", h.nvm.endurance_writes)
                    .finish();
              })
      .finish();
}

inline Json to_json(const CostTable& t) {
  return Json{{"e_xbar_mac_pj", t.e_xbar_mac_pj},
              {"e_sram_mac_pj", t.e_sram_mac_pj},
              {"e_adc_conv_pj", t.e_adc_conv_pj},
              {"e_attn_adc_conv_pj", t.e_attn_adc_conv_pj},
              {"e_dac_drive_pj", t.e_dac_drive_pj},
              {"e_sna_op_pj", t.e_sna_op_pj},
              {"e_sram_write_bit_pj", t.e_sram_write_bit_pj},
              {"e_nvm_write_bit_pj", t.e_nvm_write_bit_pj},
              {"e_sfu_op_pj", t.e_sfu_op_pj},
              {"e_scratchpad_byte_pj", t.e_scratchpad_byte_pj},
              {"e_shared_mem_byte_pj", t.e_shared_mem_byte_pj},
              {"e_readonly_byte_pj", t.e_readonly_byte_pj},
              {"e_offchip_byte_pj", t.e_offchip_byte_pj},
              {"e_bus_byte_pj", t.e_bus_byte_pj},
              {"t_xbar_settle_cycles", t.t_xbar_settle_cycles},
              {"t_sram_access_cycles", t.t_sram_access_cycles},
              {"t_sfu_op_cycles", t.t_sfu_op_cycles},
              {"t_write_row_cycles", t.t_write_row_cycles},
              {"t_nvm_write_row_cycles", t.t_nvm_write_row_cycles},
              {"simd_lanes", t.simd_lanes},
              {"simd_ops_per_cycle", t.simd_ops_per_cycle}};
}

inline void read_cost_table(const Json& j, const std::string& path, CostTable& t) {
  detail::ObjectReader(j, path)
      .field("e_xbar_mac_pj", t.e_xbar_mac_pj)
      .field("e_sram_mac_pj", t.e_sram_mac_pj)
      .field("e_adc_conv_pj", t.e_adc_conv_pj)
      .field("e_attn_adc_conv_pj", t.e_attn_adc_conv_pj)
      .field("e_dac_drive_pj", t.e_dac_drive_pj)
      .field("e_sna_op_pj", t.e_sna_op_pj)
      .field("e_sram_write_bit_pj", t.e_sram_write_bit_pj)
      .field("e_nvm_write_bit_pj", t.e_nvm_write_bit_pj)
      .field("e_sfu_op_pj", t.e_sfu_op_pj)
      .field("e_scratchpad_byte_pj", t.e_scratchpad_byte_pj)
      .field("e_shared_mem_byte_pj", t.e_shared_mem_byte_pj)
      .field("e_readonly_byte_pj", t.e_readonly_byte_pj)
      .field("e_offchip_byte_pj", t.e_offchip_byte_pj)
      .field("e_bus_byte_pj", t.e_bus_byte_pj)
      .field("t_xbar_settle_cycles", t.t_xbar_settle_cycles)
      .field("t_sram_access_cycles", t.t_sram_access_cycles)
      .field("t_sfu_op_cycles", t.t_sfu_op_cycles)
      .field("t_write_row_cycles", t.t_write_row_cycles)
      .field("t_nvm_write_row_cycles", t.t_nvm_write_row_cycles)
      .field("simd_lanes", t.simd_lanes)
      .field("simd_ops_per_cycle", t.simd_ops_per_cycle)
      .finish();
}

inline Json to_json(const CapacityReport& r) {
  Json j{{"residency", to_string(r.residency)},
         {"pass", r.pass()},
         {"projection",
          {{"ok", r.projection_ok},
           {"crossbars_required", r.projection_crossbars_required},
           {"crossbars_available", r.projection_crossbars_available},
           {"cells_required", r.projection_cells_required},
           {"cells_available", r.projection_cells_available},
           {"occupancy", r.projection_occupancy()},
           {"min_tiles", r.min_tiles}}},
         {"readonly",
          {{"ok", r.readonly_ok},
           {"bytes_required", r.readonly_bytes_required},
           {"bytes_available", r.readonly_bytes_available}}}};
  if (r.attention_checked) {
    j["attention"] = {{"ok", r.attention_ok},
                      {"bits_required_per_ahct", r.attention_bits_required_per_ahct},
                      {"bits_available_per_ahct", r.attention_bits_available_per_ahct}};
  }
  return j;
}

inline Json to_json(const MatrixAllocation& a, const HardwareSpec& hw) {
  const auto first = locate_crossbar(hw, a.first_crossbar);
  const auto last = locate_crossbar(hw, a.end_crossbar() - 1);
  Json j{{"layer", a.layer},
         {"matrix", to_string(a.role)},
         {"rows", a.rows},
         {"cols", a.cols},
         {"slices", a.tiling.slices},
         {"grid_rows", a.tiling.grid_rows},
         {"grid_cols", a.tiling.grid_cols},
         {"crossbars", a.tiling.total_crossbars},
         {"first", {{"tile", first.tile}, {"core", first.core}, {"crossbar", first.crossbar}}},
         {"last", {{"tile", last.tile}, {"core", last.core}, {"crossbar", last.crossbar}}}};
  if (a.head) j["head"] = *a.head;
  return j;
}

/// `hw` is the effective hardware the mapping was built for.
inline Json to_json(const Mapping& m, const HardwareSpec& hw) {
  Json statics = Json::array(), dynamics = Json::array(), heads = Json::array();
  for (const auto& a : m.static_allocations) statics.push_back(to_json(a, hw));
  for (const auto& a : m.dynamic_allocations) dynamics.push_back(to_json(a, hw));
  for (const auto& h : m.heads) heads.push_back({{"head", h.head}, {"ahct", h.ahct}, {"slot", h.slot}});
  return Json{{"policy", to_string(m.policy)},
              {"residency", to_string(m.residency)},
              {"num_tiles", m.num_tiles},
              {"crossbars_used", m.crossbars_used()},
              {"warnings", m.warnings},
              {"capacity", to_json(m.capacity)},
              {"static_allocations", statics},
              {"dynamic_allocations", dynamics},
              {"heads", heads},
              {"time_multiplex_slots", m.time_multiplex_slots},
              {"nvm_write_events_per_inference", m.write_events.size()},
              {"weight_reload_events_per_inference", m.reload_events},
              {"max_writes_per_device_per_inference", m.max_writes_per_device}};
}

/// Stable digest of a serialized spec.
inline std::string config_hash(const Json& j) { return hex64(fnv1a64(j.dump())); }

}  // namespace imtsim
