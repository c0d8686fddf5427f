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
 * @file costmodel.hpp
 * @brief Latency (cycles) and energy (pJ) of the hardware primitives.
 *
 * Crossbar and SRAM-bank MVMs use bit-streaming over the DAC width: an
 * act_bits activation is applied as act_bits/dac_bits streams, and every
 * stream produces one conversion per output column. Columns share a few
 * ADCs per array, so conversions are serialized per ADC at
 * adc_rate/frequency conversions per cycle. Weight slices live on parallel
 * arrays: they add energy but not latency.
 *
 * The default CostTable is calibrated, not measured. See README for the
 * calibration targets it was fitted to.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "imtsim/common.hpp"
#include "imtsim/hardware.hpp"
#include "imtsim/tiling.hpp"

namespace imtsim {

struct CostTable {
  // energies, pJ
  double e_xbar_mac_pj = 2.0e-5;        // per cell per stream
  double e_sram_mac_pj = 4 * 2.0e-5;    // per cell per stream
  double e_adc_conv_pj = 1.73e-3;         // projection-engine conversion
  double e_attn_adc_conv_pj = 2.57e-3;    // attention-engine conversion
  double e_dac_drive_pj = 4.0e-4;        // per driven row per stream
  double e_sna_op_pj = 1.31e-2;           // shift-and-add, per output per stream per slice
  double e_sram_write_bit_pj = 4.3e-2;
  double e_nvm_write_bit_pj = 2.0;
  double e_sfu_op_pj = 8.0e-5;
  double e_scratchpad_byte_pj = 1.35e-1;
  double e_shared_mem_byte_pj = 2.7e-1;
  double e_readonly_byte_pj = 1.0e-1;
  double e_offchip_byte_pj = 10.0;
  double e_bus_byte_pj = 6.77e-1;
  // latencies, cycles
  Cycles t_xbar_settle_cycles = 8;
  Cycles t_sram_access_cycles = 1;
  Cycles t_sfu_op_cycles = 1;
  Cycles t_write_row_cycles = 1;
  Cycles t_nvm_write_row_cycles = 2000;
  // 1-D SIMD lanes used for dynamic MVMs when no attention engine is present
  std::uint32_t simd_lanes = 48;
  std::uint32_t simd_ops_per_cycle = 1;

  void validate() const {
    const std::pair<double, const char*> energies[] = {
        {e_xbar_mac_pj, "e_xbar_mac_pj"},         {e_sram_mac_pj, "e_sram_mac_pj"},
        {e_adc_conv_pj, "e_adc_conv_pj"},         {e_attn_adc_conv_pj, "e_attn_adc_conv_pj"},
        {e_dac_drive_pj, "e_dac_drive_pj"},       {e_sna_op_pj, "e_sna_op_pj"},
        {e_sram_write_bit_pj, "e_sram_write_bit_pj"}, {e_nvm_write_bit_pj, "e_nvm_write_bit_pj"},
        {e_sfu_op_pj, "e_sfu_op_pj"},             {e_scratchpad_byte_pj, "e_scratchpad_byte_pj"},
        {e_shared_mem_byte_pj, "e_shared_mem_byte_pj"}, {e_readonly_byte_pj, "e_readonly_byte_pj"},
        {e_offchip_byte_pj, "e_offchip_byte_pj"}, {e_bus_byte_pj, "e_bus_byte_pj"},
    };
    for (const auto& [v, name] : energies) {
      if (!(v >= 0.0)) throw ValidationError(std::string("cost_table: ") + name + " must be >= 0");
    }
    const std::pair<Cycles, const char*> latencies[] = {
        {t_xbar_settle_cycles, "t_xbar_settle_cycles"}, {t_sram_access_cycles, "t_sram_access_cycles"},
        {t_sfu_op_cycles, "t_sfu_op_cycles"},           {t_write_row_cycles, "t_write_row_cycles"},
        {t_nvm_write_row_cycles, "t_nvm_write_row_cycles"},
    };
    for (const auto& [v, name] : latencies) {
      if (v < 1) throw ValidationError(std::string("cost_table: ") + name + " must be >= 1 cycle");
    }
    if (simd_lanes < 1) throw ValidationError("cost_table: simd_lanes must be >= 1");
    if (simd_ops_per_cycle < 1) throw ValidationError("cost_table: simd_ops_per_cycle must be >= 1");
  }

  bool operator==(const CostTable&) const = default;
};

enum class EnergyComponent : std::uint8_t { Adc, Dac, Array, Sna, Sfu, Write, Memory, Interconnect };
inline constexpr std::size_t kEnergyComponents = 8;

inline const char* to_string(EnergyComponent c) {
  switch (c) {
    case EnergyComponent::Adc: return "adc";
    case EnergyComponent::Dac: return "dac";
    case EnergyComponent::Array: return "array";
    case EnergyComponent::Sna: return "sna";
    case EnergyComponent::Sfu: return "sfu";
    case EnergyComponent::Write: return "write";
    case EnergyComponent::Memory: return "memory";
    case EnergyComponent::Interconnect: return "interconnect";
  }
  return "?";
}

using EnergyBreakdown = std::array<double, kEnergyComponents>;

struct Cost {
  Cycles cycles = 0;
  EnergyBreakdown breakdown{};  // pJ per component

  double energy() const {
    double s = 0.0;
    for (double e : breakdown) s += e;
    return s;
  }
  double& operator[](EnergyComponent c) { return breakdown[static_cast<std::size_t>(c)]; }
  double operator[](EnergyComponent c) const { return breakdown[static_cast<std::size_t>(c)]; }

  void add_energy(const Cost& o, double times = 1.0) {
    for (std::size_t i = 0; i < kEnergyComponents; ++i) breakdown[i] += o.breakdown[i] * times;
  }
  /// `n` back-to-back repetitions.
  Cost repeated(std::uint64_t n) const {
    Cost c;
    c.cycles = cycles * n;
    c.add_energy(*this, static_cast<double>(n));
    return c;
  }
  Cost& then(const Cost& o) {
    cycles += o.cycles;
    add_energy(o);
    return *this;
  }
};

namespace detail {

inline Cycles conversion_cycles(std::uint64_t conversions, std::uint64_t frequency_hz, std::uint64_t adc_rate_sps) {
  return ceil_div(checked_mul(conversions, frequency_hz, "conversion cycles"), adc_rate_sps);
}

inline void require_positive(std::uint64_t v, const char* what) {
  if (v < 1) throw ValidationError(std::string(what) + " must be >= 1");
}

}  // namespace detail

/// One activation vector through one crossbar (rows x cols used cells) with
/// `slices` bit-sliced copies on parallel crossbars.
inline Cost xbar_mvm_cost(std::uint64_t rows, std::uint64_t cols, std::uint32_t act_bits, std::uint64_t slices,
                          const HardwareSpec& hw, const CostTable& table) {
  detail::require_positive(rows, "xbar_mvm_cost: rows");
  detail::require_positive(cols, "xbar_mvm_cost: cols");
  detail::require_positive(act_bits, "xbar_mvm_cost: act_bits");
  detail::require_positive(slices, "xbar_mvm_cost: slices");
  const auto& p = hw.projection;
  if (act_bits % p.dac_bits != 0) {
    throw ValidationError("xbar_mvm_cost: act_bits (" + std::to_string(act_bits) +
                          ") not divisible by dac_bits (" + std::to_string(p.dac_bits) + ")");
  }
  const std::uint64_t streams = act_bits / p.dac_bits;
  const std::uint64_t per_adc = ceil_div(cols, p.adcs_per_xbar);
  Cost c;
  c.cycles = streams * detail::conversion_cycles(per_adc, hw.frequency_hz, p.adc_rate_sps) + table.t_xbar_settle_cycles;
  const double n = static_cast<double>(streams * slices);
  c[EnergyComponent::Array] = n * static_cast<double>(rows * cols) * table.e_xbar_mac_pj;
  c[EnergyComponent::Dac] = n * static_cast<double>(rows) * table.e_dac_drive_pj;
  c[EnergyComponent::Adc] = n * static_cast<double>(cols) * table.e_adc_conv_pj;
  return c;
}

/// One activation vector against one SRAM array operand (rows x cols),
/// with shift-and-add per output per stream folded in.
inline Cost sram_mvm_cost(std::uint64_t rows, std::uint64_t cols, std::uint32_t act_bits, std::uint64_t slices,
                          const HardwareSpec& hw, const CostTable& table) {
  detail::require_positive(rows, "sram_mvm_cost: rows");
  detail::require_positive(cols, "sram_mvm_cost: cols");
  detail::require_positive(act_bits, "sram_mvm_cost: act_bits");
  detail::require_positive(slices, "sram_mvm_cost: slices");
  const auto& a = hw.attention;
  if (act_bits % a.dac_bits != 0) {
    throw ValidationError("sram_mvm_cost: act_bits (" + std::to_string(act_bits) +
                          ") not divisible by dac_bits (" + std::to_string(a.dac_bits) + ")");
  }
  const std::uint64_t streams = act_bits / a.dac_bits;
  const std::uint64_t per_adc = ceil_div(cols, a.adcs_per_bank);
  Cost c;
  c.cycles = streams * detail::conversion_cycles(per_adc, hw.frequency_hz, a.adc_rate_sps) + table.t_sram_access_cycles;
  const double n = static_cast<double>(streams * slices);
  c[EnergyComponent::Array] = n * static_cast<double>(rows * cols) * table.e_sram_mac_pj;
  c[EnergyComponent::Dac] = n * static_cast<double>(rows) * table.e_dac_drive_pj;
  c[EnergyComponent::Sna] = n * static_cast<double>(cols) * table.e_sna_op_pj;
  c[EnergyComponent::Adc] = n * static_cast<double>(cols) * table.e_attn_adc_conv_pj;
  return c;
}

/// Row-parallel SRAM write: each of `rows` rows takes one write cycle.
inline Cost sram_write_cost(std::uint64_t rows, std::uint64_t cols, std::uint32_t bits, const CostTable& table) {
  detail::require_positive(rows, "sram_write_cost: rows");
  detail::require_positive(cols, "sram_write_cost: cols");
  detail::require_positive(bits, "sram_write_cost: bits");
  Cost c;
  c.cycles = rows * table.t_write_row_cycles;
  c[EnergyComponent::Write] = static_cast<double>(rows * cols * bits) * table.e_sram_write_bit_pj;
  return c;
}

/// Reprogramming NVM cells, row by row (program-and-verify per row).
inline Cost nvm_write_cost(std::uint64_t rows, std::uint64_t cols, std::uint32_t bits, const CostTable& table) {
  detail::require_positive(rows, "nvm_write_cost: rows");
  detail::require_positive(cols, "nvm_write_cost: cols");
  detail::require_positive(bits, "nvm_write_cost: bits");
  Cost c;
  c.cycles = rows * table.t_nvm_write_row_cycles;
  c[EnergyComponent::Write] = static_cast<double>(rows * cols * bits) * table.e_nvm_write_bit_pj;
  return c;
}

/// M x K multiply-accumulates on the temporal 1-D SIMD lanes.
inline Cost simd_mvm_cost(std::uint64_t m, std::uint64_t k, const CostTable& table) {
  detail::require_positive(m, "simd_mvm_cost: M");
  detail::require_positive(k, "simd_mvm_cost: K");
  Cost c;
  const std::uint64_t macs = checked_mul(m, k, "simd_mvm_cost");
  c.cycles = ceil_div(macs, std::uint64_t{table.simd_lanes} * table.simd_ops_per_cycle);
  c[EnergyComponent::Sfu] = static_cast<double>(macs) * table.e_sfu_op_pj;
  return c;
}

enum class SfuKind { Softmax, LayerNorm, Add, Mul, Exp, Div };

/// Element operations per input element.
inline std::uint64_t sfu_ops_per_element(SfuKind k) {
  switch (k) {
    case SfuKind::Softmax: return 5;    // max-subtract, exp, sum-reduce, divide, writeback
    case SfuKind::LayerNorm: return 5;  // mean, subtract, variance, normalize, affine
    default: return 1;
  }
}

inline SfuKind parse_sfu_kind(std::string_view s) {
  if (s == "softmax") return SfuKind::Softmax;
  if (s == "layernorm") return SfuKind::LayerNorm;
  if (s == "add") return SfuKind::Add;
  if (s == "mul") return SfuKind::Mul;
  if (s == "exp") return SfuKind::Exp;
  if (s == "div") return SfuKind::Div;
  throw ValidationError("sfu_cost: unknown kind '" + std::string(s) + "'");
}

inline Cost sfu_cost(SfuKind kind, std::uint64_t length, std::uint32_t lanes, const CostTable& table) {
  detail::require_positive(length, "sfu_cost: length");
  detail::require_positive(lanes, "sfu_cost: lanes");
  const std::uint64_t ops = sfu_ops_per_element(kind);
  Cost c;
  c.cycles = ops * ceil_div(length, lanes) * table.t_sfu_op_cycles;
  c[EnergyComponent::Sfu] = static_cast<double>(ops * length) * table.e_sfu_op_pj;
  return c;
}

/// On the attention engine's SFU.
inline Cost sfu_cost(SfuKind kind, std::uint64_t length, const HardwareSpec& hw, const CostTable& table) {
  return sfu_cost(kind, length, hw.attention.sfu_lanes(), table);
}

inline Cost sfu_cost(std::string_view kind, std::uint64_t length, const HardwareSpec& hw, const CostTable& table) {
  return sfu_cost(parse_sfu_kind(kind), length, hw, table);
}

enum class MemPath { Scratchpad, SharedMem, ReadonlyTile, Bus, Offchip };

inline const char* to_string(MemPath p) {
  switch (p) {
    case MemPath::Scratchpad: return "scratchpad";
    case MemPath::SharedMem: return "shared_mem";
    case MemPath::ReadonlyTile: return "readonly_tile";
    case MemPath::Bus: return "bus";
    case MemPath::Offchip: return "offchip";
  }
  return "?";
}

inline Cost transfer_cost(std::uint64_t bytes, MemPath path, const HardwareSpec& hw, const CostTable& table) {
  Cost c;
  if (bytes == 0) return c;
  std::uint64_t bw = 1;
  double e = 0.0;
  auto comp = EnergyComponent::Memory;
  switch (path) {
    case MemPath::Scratchpad: bw = hw.memory.scratchpad_bytes_per_cycle; e = table.e_scratchpad_byte_pj; break;
    case MemPath::SharedMem: bw = hw.memory.shared_mem_bytes_per_cycle; e = table.e_shared_mem_byte_pj; break;
    case MemPath::ReadonlyTile: bw = hw.memory.readonly_bytes_per_cycle; e = table.e_readonly_byte_pj; break;
    case MemPath::Offchip: bw = hw.memory.offchip_bytes_per_cycle; e = table.e_offchip_byte_pj; break;
    case MemPath::Bus:
      bw = hw.interconnect.bus_bytes_per_cycle;
      e = table.e_bus_byte_pj;
      comp = EnergyComponent::Interconnect;
      break;
  }
  c.cycles = ceil_div(bytes, bw);
  c[comp] = static_cast<double>(bytes) * e;
  return c;
}

// ---------------------------------------------------------------------------
// Matrix-level compositions used by the simulator.

/// One activation vector through a rows x cols weight matrix spread over a
/// crossbar grid. All crossbars fire in parallel.
inline Cost static_matrix_vector_cost(std::uint64_t rows, std::uint64_t cols, std::uint32_t act_bits,
                                      std::uint32_t weight_bits, const HardwareSpec& hw, const CostTable& table) {
  const auto& p = hw.projection;
  const MatrixTiling t = tile_matrix(rows, cols, weight_bits, p.cell_bits, p.xbar_rows, p.xbar_cols);
  Cost total;
  for_each_block_shape(rows, cols, p.xbar_rows, p.xbar_cols, [&](std::uint64_t r, std::uint64_t c, std::uint64_t n) {
    const Cost one = xbar_mvm_cost(r, c, act_bits, t.slices, hw, table);
    total.cycles = std::max(total.cycles, one.cycles);
    total.add_energy(one, static_cast<double>(n));
  });
  return total;
}

/// One streamed vector against an SRAM operand tiled over the arrays of an
/// AHCT's banks (1-bit cells: one slice per operand bit).
inline Cost sram_matrix_vector_cost(std::uint64_t rows, std::uint64_t cols, std::uint32_t act_bits,
                                    std::uint32_t operand_bits, const HardwareSpec& hw, const CostTable& table) {
  const auto& a = hw.attention;
  const std::uint64_t slices = ceil_div(operand_bits, a.cell_bits);
  Cost total;
  for_each_block_shape(rows, cols, a.sram_rows, a.sram_cols, [&](std::uint64_t r, std::uint64_t c, std::uint64_t n) {
    const Cost one = sram_mvm_cost(r, c, act_bits, slices, hw, table);
    total.cycles = std::max(total.cycles, one.cycles);
    total.add_energy(one, static_cast<double>(n));
  });
  return total;
}

/// Attention-engine throughput: cycles per (query, key) element of QK^T or
/// Att x V on one AHCT. Each element needs streams x slices conversions and
/// the AHCT's ADC pool converts banks x adcs_per_bank x rate/f per cycle.
inline Cycles attention_cycles_per_element(std::uint32_t act_bits, std::uint32_t operand_bits, const HardwareSpec& hw) {
  const auto& a = hw.attention;
  if (act_bits % a.dac_bits != 0) {
    throw ValidationError("attention: activation bits not divisible by attention dac_bits");
  }
  const std::uint64_t conversions = (act_bits / a.dac_bits) * ceil_div(operand_bits, a.cell_bits);
  const std::uint64_t adcs = std::uint64_t{a.banks_per_ahct} * a.adcs_per_bank;
  // conversions * f / (adcs * rate), rounded up, at least one cycle
  const Cycles c = ceil_div(checked_mul(conversions, hw.frequency_hz, "attention throughput"),
                            checked_mul(adcs, a.adc_rate_sps, "attention throughput"));
  return c < 1 ? 1 : c;
}

}  // namespace imtsim
