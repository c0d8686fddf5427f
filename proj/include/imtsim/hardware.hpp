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

#pragma once

#include <cstdint>
#include <string>

#include "imtsim/common.hpp"

namespace imtsim {

/// NVM side: tiles -> cores -> crossbars, plus read-only embedding tiles.
struct ProjectionEngineSpec {
  std::uint32_t num_tiles = 36;
  std::uint32_t cores_per_tile = 8;
  std::uint32_t crossbars_per_core = 6;
  std::uint32_t xbar_rows = 128;
  std::uint32_t xbar_cols = 128;
  std::uint32_t cell_bits = 2;
  std::uint32_t dac_bits = 1;
  std::uint32_t adcs_per_xbar = 2;
  std::uint32_t adc_bits = 8;
  std::uint64_t adc_rate_sps = 1'280'000'000;
  std::uint64_t shared_mem_bytes = 384 * 1024;
  std::uint64_t scratchpad_bytes = 4 * 1024;
  std::uint64_t readonly_tile_bytes = 24 * 1024 * 1024;
  std::uint32_t vfu_lanes = 64;  // vector lanes for layer norm, residuals, activations

  std::uint64_t crossbars_per_tile() const { return std::uint64_t{cores_per_tile} * crossbars_per_core; }
  std::uint64_t total_crossbars() const { return crossbars_per_tile() * num_tiles; }
  std::uint64_t cells_per_crossbar() const { return std::uint64_t{xbar_rows} * xbar_cols; }

  bool operator==(const ProjectionEngineSpec&) const = default;
};

/// CMOS side: processing elements of attention head compute tiles (AHCTs),
/// each made of 8T-SRAM banks with a shared SFU.
struct AttentionEngineSpec {
  std::uint32_t num_pe = 2;
  std::uint32_t ahct_per_pe = 16;
  std::uint32_t banks_per_ahct = 8;
  std::uint32_t sram_arrays_per_bank = 6;
  std::uint32_t sram_rows = 128;
  std::uint32_t sram_cols = 128;
  std::uint32_t cell_bits = 1;
  std::uint32_t dac_bits = 1;
  std::uint32_t adcs_per_bank = 8;
  std::uint32_t adc_bits = 8;
  std::uint64_t adc_rate_sps = 1'000'000'000;
  std::uint32_t sfu_vector_units = 16;
  std::uint32_t sfu_lanes_per_vu = 4;
  std::uint64_t block_seq_accum_bytes = 6 * 1024;

  std::uint32_t num_ahct() const { return num_pe * ahct_per_pe; }
  std::uint32_t sfu_lanes() const { return sfu_vector_units * sfu_lanes_per_vu; }
  std::uint64_t bits_per_ahct() const {
    return std::uint64_t{banks_per_ahct} * sram_arrays_per_bank * sram_rows * sram_cols;
  }

  bool operator==(const AttentionEngineSpec&) const = default;
};

struct InterconnectSpec {
  std::uint32_t bus_bytes_per_cycle = 64;
  bool operator==(const InterconnectSpec&) const = default;
};

struct MemorySpec {
  std::uint32_t scratchpad_bytes_per_cycle = 64;
  std::uint32_t shared_mem_bytes_per_cycle = 32;
  std::uint32_t readonly_bytes_per_cycle = 16;
  std::uint32_t offchip_bytes_per_cycle = 2;
  bool operator==(const MemorySpec&) const = default;
};

struct NvmDeviceSpec {
  double r_min_ohm = 100e3;
  double r_max_ohm = 1e6;
  std::uint64_t endurance_writes = 1'000'000;
  bool operator==(const NvmDeviceSpec&) const = default;
};

struct HardwareSpec {
  std::string name = "table1-hw";
  std::uint64_t frequency_hz = 1'000'000'000;
  ProjectionEngineSpec projection;
  AttentionEngineSpec attention;
  InterconnectSpec interconnect;
  MemorySpec memory;
  NvmDeviceSpec nvm;
  /// Permit the mapper to grow projection.num_tiles until every layer is resident.
  bool auto_scale_tiles = false;

  void validate() const {
    auto positive = [](std::uint64_t v, const char* field) {
      if (v < 1) throw ValidationError(std::string("hardware: ") + field + " must be >= 1");
    };
    positive(frequency_hz, "frequency_hz");
    const auto& p = projection;
    positive(p.num_tiles, "projection.num_tiles");
    positive(p.cores_per_tile, "projection.cores_per_tile");
    positive(p.crossbars_per_core, "projection.crossbars_per_core");
    positive(p.xbar_rows, "projection.xbar_rows");
    positive(p.xbar_cols, "projection.xbar_cols");
    positive(p.cell_bits, "projection.cell_bits");
    positive(p.dac_bits, "projection.dac_bits");
    positive(p.adcs_per_xbar, "projection.adcs_per_xbar");
    positive(p.adc_bits, "projection.adc_bits");
    positive(p.adc_rate_sps, "projection.adc_rate_sps");
    positive(p.shared_mem_bytes, "projection.shared_mem_bytes");
    positive(p.scratchpad_bytes, "projection.scratchpad_bytes");
    positive(p.vfu_lanes, "projection.vfu_lanes");
    if (p.cell_bits > p.adc_bits) throw ValidationError("hardware: projection.cell_bits must be <= adc_bits");
    const auto& a = attention;
    positive(a.num_pe, "attention.num_pe");
    positive(a.ahct_per_pe, "attention.ahct_per_pe");
    positive(a.banks_per_ahct, "attention.banks_per_ahct");
    positive(a.sram_arrays_per_bank, "attention.sram_arrays_per_bank");
    positive(a.sram_rows, "attention.sram_rows");
    positive(a.sram_cols, "attention.sram_cols");
    positive(a.cell_bits, "attention.cell_bits");
    positive(a.dac_bits, "attention.dac_bits");
    positive(a.adcs_per_bank, "attention.adcs_per_bank");
    positive(a.adc_bits, "attention.adc_bits");
    positive(a.adc_rate_sps, "attention.adc_rate_sps");
    positive(a.sfu_vector_units, "attention.sfu_vector_units");
    positive(a.sfu_lanes_per_vu, "attention.sfu_lanes_per_vu");
    positive(a.block_seq_accum_bytes, "attention.block_seq_accum_bytes");
    if (a.cell_bits > a.adc_bits) throw ValidationError("hardware: attention.cell_bits must be <= adc_bits");
    positive(interconnect.bus_bytes_per_cycle, "interconnect.bus_bytes_per_cycle");
    positive(memory.scratchpad_bytes_per_cycle, "memory.scratchpad_bytes_per_cycle");
    positive(memory.shared_mem_bytes_per_cycle, "memory.shared_mem_bytes_per_cycle");
    positive(memory.readonly_bytes_per_cycle, "memory.readonly_bytes_per_cycle");
    positive(memory.offchip_bytes_per_cycle, "memory.offchip_bytes_per_cycle");
    positive(nvm.endurance_writes, "nvm.endurance_writes");
    if (!(nvm.r_min_ohm > 0.0) || !(nvm.r_max_ohm > nvm.r_min_ohm)) {
      throw ValidationError("hardware: nvm resistance range must satisfy 0 < r_min_ohm < r_max_ohm");
    }
  }

  bool operator==(const HardwareSpec&) const = default;
};

inline HardwareSpec table1_hardware() { return HardwareSpec{}; }

}  // namespace imtsim
