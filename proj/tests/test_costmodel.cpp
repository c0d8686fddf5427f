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

#include <random>

#include "support.hpp"

namespace imtsim {
namespace {

// Counts cycles by stepping a shared ADC one clock at a time until every
// conversion of one input stream is done.
Cycles stepped_adc_cycles(std::uint64_t conversions_per_adc, std::uint64_t freq, std::uint64_t rate) {
  Cycles c = 0;
  while ((c * rate) / freq < conversions_per_adc) ++c;
  return c;
}

double sum(const Cost& c) {
  double s = 0;
  for (double e : c.breakdown) s += e;
  return s;
}

TEST(CostTable, DefaultsValidateAndKeepSramToNvmRatio) {
  CostTable t;
  EXPECT_NO_THROW(t.validate());
  EXPECT_DOUBLE_EQ(t.e_sram_mac_pj, 4 * t.e_xbar_mac_pj);
  t.e_adc_conv_pj = -1;
  EXPECT_THROW(t.validate(), ValidationError);
  t = CostTable{};
  t.t_sfu_op_cycles = 0;
  EXPECT_THROW(t.validate(), ValidationError);
}

TEST(XbarCost, FullCrossbarEightBitStream) {
  const HardwareSpec hw;
  const CostTable t;
  const Cost c = xbar_mvm_cost(128, 128, 8, 4, hw, t);
  EXPECT_EQ(c.cycles, 8u * 50u + t.t_xbar_settle_cycles);
  EXPECT_EQ(stepped_adc_cycles(64, hw.frequency_hz, hw.projection.adc_rate_sps), 50u);
}

TEST(XbarCost, CyclesMatchSteppedAdcModel) {
  std::mt19937_64 rng(3);
  CostTable t;
  for (int trial = 0; trial < 300; ++trial) {
    HardwareSpec hw;
    hw.projection.adcs_per_xbar = 1 + rng() % 8;
    hw.projection.adc_rate_sps = 100'000'000 + rng() % 3'000'000'000ULL;
    hw.projection.dac_bits = 1u << (rng() % 3);
    const std::uint64_t rows = 1 + rng() % 128, cols = 1 + rng() % 128;
    const std::uint32_t act = hw.projection.dac_bits * (1 + rng() % 4);
    const Cost c = xbar_mvm_cost(rows, cols, act, 1, hw, t);
    const std::uint64_t per_adc = ceil_div(cols, hw.projection.adcs_per_xbar);
    const Cycles expect = (act / hw.projection.dac_bits) *
                              stepped_adc_cycles(per_adc, hw.frequency_hz, hw.projection.adc_rate_sps) +
                          t.t_xbar_settle_cycles;
    ASSERT_EQ(c.cycles, expect) << "trial " << trial;
  }
}

TEST(XbarCost, MinimalInstanceEnergy) {
  const HardwareSpec hw;
  const CostTable t;
  const Cost c = xbar_mvm_cost(1, 1, 1, 1, hw, t);
  EXPECT_DOUBLE_EQ(c.energy(), t.e_xbar_mac_pj + t.e_dac_drive_pj + t.e_adc_conv_pj);
  EXPECT_EQ(c.cycles, 1u + t.t_xbar_settle_cycles);
}

TEST(XbarCost, SlicesScaleEnergyNotCycles) {
  const HardwareSpec hw;
  const CostTable t;
  const Cost one = xbar_mvm_cost(100, 60, 8, 1, hw, t);
  for (std::uint64_t s : {2u, 4u, 7u}) {
    const Cost many = xbar_mvm_cost(100, 60, 8, s, hw, t);
    EXPECT_EQ(many.cycles, one.cycles);
    EXPECT_NEAR(many.energy(), static_cast<double>(s) * one.energy(), 1e-12 * many.energy());
  }
}

TEST(XbarCost, RejectsIndivisibleActivation) {
  HardwareSpec hw;
  hw.projection.dac_bits = 2;
  EXPECT_THROW(xbar_mvm_cost(4, 4, 3, 1, hw, CostTable{}), ValidationError);
  EXPECT_THROW(xbar_mvm_cost(0, 4, 8, 1, hw, CostTable{}), ValidationError);
}

TEST(SramCost, ArrayEnergyIsFourTimesCrossbar) {
  HardwareSpec hw;
  hw.attention.dac_bits = hw.projection.dac_bits;
  const CostTable t;
  const Cost nvm = xbar_mvm_cost(64, 100, 8, 3, hw, t);
  const Cost sram = sram_mvm_cost(64, 100, 8, 3, hw, t);
  EXPECT_DOUBLE_EQ(sram[EnergyComponent::Array], 4 * nvm[EnergyComponent::Array]);
  EXPECT_GT(sram[EnergyComponent::Sna], 0.0);
}

TEST(SramCost, QueryBankStreamFormula) {
  const HardwareSpec hw;
  const CostTable t;
  // 64 x 512 operand: 4 column blocks of 128 run in parallel, 8 key-bit streams.
  const Cost c = sram_matrix_vector_cost(64, 512, 8, 8, hw, t);
  const std::uint64_t per_adc = ceil_div(128, hw.attention.adcs_per_bank);
  EXPECT_EQ(c.cycles,
            8 * stepped_adc_cycles(per_adc, hw.frequency_hz, hw.attention.adc_rate_sps) + t.t_sram_access_cycles);
  EXPECT_THROW(sram_mvm_cost(0, 4, 8, 1, hw, t), ValidationError);
}

TEST(SramWrite, RowParallel) {
  const CostTable t;
  const Cost one = sram_write_cost(1, 1, 1, t);
  EXPECT_EQ(one.cycles, 1u);
  EXPECT_DOUBLE_EQ(one.energy(), t.e_sram_write_bit_pj);
  // Q and V of one head at SL=512, stored one token per row.
  const Cost qv = sram_write_cost(512, 64, 8, t).repeated(2);
  EXPECT_EQ(qv.cycles, 2u * 512u);
  EXPECT_DOUBLE_EQ(qv[EnergyComponent::Write], 2.0 * 512 * 64 * 8 * t.e_sram_write_bit_pj);
}

TEST(SimdCost, StatedFormula) {
  CostTable t;
  t.simd_lanes = 1;
  t.simd_ops_per_cycle = 1;
  EXPECT_EQ(simd_mvm_cost(1, 1, t).cycles, 1u);
  t.simd_lanes = 64;
  // QK^T of one head at SL=256: 256 x 64 x 256 MACs over 64 lanes.
  EXPECT_EQ(simd_mvm_cost(256ull * 64, 256, t).cycles, 65'536u);
  EXPECT_EQ(simd_mvm_cost(7, 10, t).cycles, 2u);
  EXPECT_DOUBLE_EQ(simd_mvm_cost(3, 5, t).energy(), 15 * t.e_sfu_op_pj);
}

TEST(SfuCost, SoftmaxAndAdd) {
  const HardwareSpec hw;
  CostTable t;
  t.t_sfu_op_cycles = 3;
  EXPECT_EQ(hw.attention.sfu_lanes(), 64u);
  EXPECT_EQ(sfu_cost(SfuKind::Softmax, 512, hw, t).cycles, 5u * 8u * 3u);
  EXPECT_EQ(sfu_cost("add", 1, hw, t).cycles, 3u);
  EXPECT_THROW(sfu_cost("tanh", 1, hw, t), ValidationError);
  EXPECT_THROW(sfu_cost(SfuKind::Add, 0, hw, t), ValidationError);
}

TEST(TransferCost, BusAndMemoryPaths) {
  const HardwareSpec hw;
  const CostTable t;
  const Cost zero = transfer_cost(0, MemPath::Bus, hw, t);
  EXPECT_EQ(zero.cycles, 0u);
  EXPECT_EQ(zero.energy(), 0.0);
  const std::uint64_t qkv = 3 * 64 * 768;
  const Cost bus = transfer_cost(qkv, MemPath::Bus, hw, t);
  EXPECT_EQ(bus.cycles, ceil_div(qkv, hw.interconnect.bus_bytes_per_cycle));
  EXPECT_DOUBLE_EQ(bus[EnergyComponent::Interconnect], static_cast<double>(qkv) * t.e_bus_byte_pj);
  const Cost emb = transfer_cost(512 * 768, MemPath::ReadonlyTile, hw, t);
  EXPECT_DOUBLE_EQ(emb[EnergyComponent::Memory], 512.0 * 768.0 * t.e_readonly_byte_pj);
}

TEST(Cost, BreakdownSumsAndMonotone) {
  const HardwareSpec hw;
  const CostTable t;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint64_t r = 1 + rng() % 200, c = 1 + rng() % 200, bytes = rng() % 100000;
    const std::uint32_t act = 1u << (rng() % 4);
    for (const Cost& x : {static_matrix_vector_cost(r, c, act, 8, hw, t), sram_matrix_vector_cost(r, c, act, 8, hw, t),
                          transfer_cost(bytes, MemPath::SharedMem, hw, t)}) {
      EXPECT_NEAR(sum(x), x.energy(), 1e-9 * (1 + x.energy()));
    }
    const Cost a = static_matrix_vector_cost(r, c, act, 8, hw, t), b = static_matrix_vector_cost(2 * r, c, act, 8, hw, t);
    EXPECT_GE(b.cycles, a.cycles);
    EXPECT_GE(b.energy(), a.energy());
    const Cost s1 = sram_matrix_vector_cost(r, c, act, 8, hw, t), s2 = sram_matrix_vector_cost(r, c, 2 * act, 8, hw, t);
    EXPECT_GE(s2.cycles, s1.cycles);
    EXPECT_GE(s2.energy(), s1.energy());
    EXPECT_GE(transfer_cost(2 * bytes, MemPath::Bus, hw, t).cycles, transfer_cost(bytes, MemPath::Bus, hw, t).cycles);
  }
}

TEST(Cost, RepeatAndThen) {
  Cost a;
  a.cycles = 3;
  a[EnergyComponent::Adc] = 1.5;
  const Cost r = a.repeated(4);
  EXPECT_EQ(r.cycles, 12u);
  EXPECT_DOUBLE_EQ(r[EnergyComponent::Adc], 6.0);
  Cost b = a;
  b.then(r);
  EXPECT_EQ(b.cycles, 15u);
  EXPECT_DOUBLE_EQ(b.energy(), 7.5);
}

TEST(AttentionThroughput, OneElementPerCycleAtDefaults) {
  const HardwareSpec hw;
  EXPECT_EQ(attention_cycles_per_element(8, 8, hw), 1u);
  HardwareSpec slow = hw;
  slow.attention.adcs_per_bank = 1;
  EXPECT_EQ(attention_cycles_per_element(8, 8, slow), 8u);
}

}  // namespace
}  // namespace imtsim
