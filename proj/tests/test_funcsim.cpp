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

#include <cmath>
#include <random>
#include <sstream>

#include "support.hpp"

namespace imtsim {
namespace {

QuantMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, std::uint32_t bits) {
  QuantMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.bits = bits;
  const std::int32_t hi = (1 << (bits - 1)) - 1;
  std::uniform_int_distribution<std::int32_t> d(-hi - 1, hi);
  for (std::size_t i = 0; i < rows * cols; ++i) m.values.push_back(d(rng));
  return m;
}

std::vector<std::int32_t> random_vector(std::mt19937_64& rng, std::size_t n, std::uint32_t bits) {
  const std::int32_t hi = (1 << (bits - 1)) - 1;
  std::uniform_int_distribution<std::int32_t> d(-hi - 1, hi);
  std::vector<std::int32_t> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// Schoolbook product, written independently of ideal_mvm.
std::vector<std::int64_t> schoolbook(const QuantMatrix& m, const std::vector<std::int32_t>& v) {
  std::vector<std::int64_t> y(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) y[r] += static_cast<std::int64_t>(m.values[r * m.cols + c]) * v[c];
  return y;
}

TEST(Quantize, Examples) {
  const std::vector<double> zeros(4, 0.0);
  const auto z = quantize(zeros, 2, 2, 8);
  EXPECT_EQ(z.scale, 1.0);
  for (auto v : z.values) EXPECT_EQ(v, 0);
  const std::vector<double> pm = {-1.0, 1.0};
  const auto q = quantize(pm, 1, 2, 8);
  EXPECT_EQ(q.values, (std::vector<std::int32_t>{-127, 127}));
  EXPECT_DOUBLE_EQ(q.scale, 1.0 / 127.0);
  EXPECT_THROW(quantize(pm, 1, 2, 3), ValidationError);
  const std::vector<double> bad = {NAN, 1.0};
  EXPECT_THROW(quantize(bad, 1, 2, 8), ValidationError);
}

TEST(Quantize, RoundTripWithinHalfStep) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0, 3);
  for (std::uint32_t bits : {2u, 4u, 8u}) {
    std::vector<double> x(256);
    for (auto& v : x) v = d(rng);
    const auto q = quantize(x, 16, 16, bits);
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_LE(std::fabs(q.dequantized(i / 16, i % 16) - x[i]), q.scale / 2 + 1e-12) << bits;
    }
  }
}

TEST(Quantize, HalfToEven) {
  const std::vector<double> y = {0.5, 1.5, 2.5, 7.0};  // 4-bit scale is 7 / 7 = 1
  EXPECT_EQ(quantize(y, 1, 4, 4).values, (std::vector<std::int32_t>{0, 2, 2, 7}));
}

TEST(IdealMvm, Examples) {
  QuantMatrix m;
  m.rows = m.cols = 2;
  m.values = {1, 2, 3, 4};
  const std::vector<std::int32_t> ones = {1, 1};
  EXPECT_EQ(ideal_mvm(m, ones), (std::vector<std::int64_t>{3, 7}));
  QuantMatrix eye;
  eye.rows = eye.cols = 3;
  eye.values = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  const std::vector<std::int32_t> v = {5, -6, 7};
  EXPECT_EQ(ideal_mvm(eye, v), (std::vector<std::int64_t>{5, -6, 7}));
  const std::vector<std::int32_t> short_v = {1};
  EXPECT_THROW(ideal_mvm(m, short_v), ValidationError);
  std::mt19937_64 rng(4);
  const auto big = random_matrix(rng, 32, 32, 8);
  const auto bv = random_vector(rng, 32, 8);
  EXPECT_EQ(ideal_mvm(big, bv), schoolbook(big, bv));
}

TEST(CrossbarMvm, ExactWithoutNoiseOnRandomEightBit) {
  std::mt19937_64 rng(100);
  const ProjectionEngineSpec pe;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto m = random_matrix(rng, 16, 16, 8);
    const auto v = random_vector(rng, 16, 8);
    const auto r = crossbar_mvm(m, v, 8, pe, NoiseModel{});
    ASSERT_EQ(r.output, schoolbook(m, v)) << "trial " << trial;
    ASSERT_EQ(r.stats.rmse, 0.0);
  }
}

TEST(CrossbarMvm, ExhaustiveTwoBitTwoByTwo) {
  ProjectionEngineSpec pe;
  pe.cell_bits = 1;  // two slices per 2-bit weight
  for (std::uint32_t cell : {1u, 2u}) {
    pe.cell_bits = cell;
    for (int code = 0; code < (1 << 12); ++code) {
      QuantMatrix m;
      m.rows = m.cols = 2;
      m.bits = 2;
      std::vector<std::int32_t> v(2);
      for (int i = 0; i < 4; ++i) m.values.push_back(((code >> (2 * i)) & 3) - 2);
      for (int i = 0; i < 2; ++i) v[i] = ((code >> (8 + 2 * i)) & 3) - 2;
      ASSERT_EQ(crossbar_mvm(m, v, 2, pe, NoiseModel{}).output, schoolbook(m, v)) << code;
    }
  }
}

TEST(CrossbarMvm, ExhaustiveTwoBitFourByFour) {
  // Every 2-bit weight matrix row against every 2-bit 4-vector; rows are
  // independent so covering all rows covers all 4x4 matrices.
  const ProjectionEngineSpec pe;
  for (int row = 0; row < 256; ++row) {
    for (int vec = 0; vec < 256; ++vec) {
      QuantMatrix m;
      m.rows = 4;
      m.cols = 4;
      m.bits = 2;
      std::vector<std::int32_t> v(4);
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) m.values.push_back((((row + 37 * r) >> (2 * c)) & 3) - 2);
      for (int c = 0; c < 4; ++c) v[c] = ((vec >> (2 * c)) & 3) - 2;
      ASSERT_EQ(crossbar_mvm(m, v, 2, pe, NoiseModel{}).output, schoolbook(m, v));
    }
  }
}

TEST(CrossbarMvm, ZeroInputGivesZeroUnderNoise) {
  std::mt19937_64 rng(8);
  const auto m = random_matrix(rng, 16, 16, 8);
  const std::vector<std::int32_t> zero(16, 0);
  NoiseModel noise;
  noise.sigma = 0.2;
  noise.seed = 99;
  for (auto y : crossbar_mvm(m, zero, 8, ProjectionEngineSpec{}, noise).output) EXPECT_EQ(y, 0);
}

TEST(CrossbarMvm, LinearInInputWithoutNoise) {
  std::mt19937_64 rng(12);
  ProjectionEngineSpec pe;
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = random_matrix(rng, 8, 8, 8);
    const auto a = random_vector(rng, 8, 6), b = random_vector(rng, 8, 6);
    const int alpha = static_cast<int>(rng() % 3) - 1, beta = static_cast<int>(rng() % 3) - 1;
    std::vector<std::int32_t> mix(8);
    for (int i = 0; i < 8; ++i) mix[i] = alpha * a[i] + beta * b[i];
    const auto fa = crossbar_mvm(m, a, 8, pe, NoiseModel{}).output;
    const auto fb = crossbar_mvm(m, b, 8, pe, NoiseModel{}).output;
    const auto fm = crossbar_mvm(m, mix, 8, pe, NoiseModel{}).output;
    for (int r = 0; r < 8; ++r) ASSERT_EQ(fm[r], alpha * fa[r] + beta * fb[r]);
  }
}

TEST(CrossbarMvm, SliceRecombinationIdentity) {
  for (std::uint32_t bits : {2u, 4u, 8u}) {
    for (std::uint32_t width : {1u, 2u}) {
      if (bits % width) continue;
      for (std::int32_t w = -(1 << (bits - 1)); w < (1 << (bits - 1)); ++w) {
        std::int64_t sum = 0;
        for (std::uint32_t s = 0; s < bits / width; ++s) sum += std::int64_t{signed_digit(w, bits, width, s)} << (s * width);
        ASSERT_EQ(sum, w) << "bits=" << bits << " width=" << width;
      }
    }
  }
}

TEST(CrossbarMvm, DivisibilityErrors) {
  std::mt19937_64 rng(1);
  auto m = random_matrix(rng, 2, 2, 8);
  const auto v = random_vector(rng, 2, 8);
  ProjectionEngineSpec pe;
  pe.cell_bits = 3;
  EXPECT_THROW(crossbar_mvm(m, v, 8, pe, NoiseModel{}), ValidationError);
  pe.cell_bits = 2;
  pe.dac_bits = 3;
  EXPECT_THROW(crossbar_mvm(m, v, 8, pe, NoiseModel{}), ValidationError);
}

TEST(CrossbarMvm, ClippingIntroducesError) {
  std::mt19937_64 rng(3);
  const auto m = random_matrix(rng, 16, 128, 8);
  const auto v = random_vector(rng, 128, 8);
  NoiseModel narrow;
  narrow.adc_bits = 4;
  EXPECT_GT(crossbar_mvm(m, v, 8, ProjectionEngineSpec{}, narrow).stats.rmse, 0.0);
}

TEST(ErrorStats, Examples) {
  const std::vector<double> a = {0, 3}, b = {0, 4};
  const auto s = error_stats(a, b);
  EXPECT_DOUBLE_EQ(s.max_abs, 1.0);
  EXPECT_DOUBLE_EQ(s.rmse, 1.0 / std::sqrt(2.0));
  const auto same = error_stats(a, a);
  EXPECT_EQ(same.rmse, 0.0);
  EXPECT_EQ(same.max_abs, 0.0);
  EXPECT_EQ(same.rel_l2, 0.0);
  const std::vector<double> c = {1};
  EXPECT_THROW(error_stats(a, c), ValidationError);
}

TEST(Variation, ReproducibleAndMonotone) {
  VariationSweepSpec spec;
  spec.sigmas = {0.0, 0.05, 0.1, 0.2};
  spec.trials = 1000;
  const ProjectionEngineSpec pe;
  const auto rows = variation_sweep(spec, pe);
  const auto again = variation_sweep(spec, pe);
  ASSERT_EQ(rows.size(), again.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].rmse, again[i].rmse);
    ASSERT_EQ(rows[i].max_abs, again[i].max_abs);
  }
  std::vector<double> mean(spec.sigmas.size(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) mean[i % spec.sigmas.size()] += rows[i].rmse / spec.trials;
  EXPECT_EQ(mean[0], 0.0);
  for (std::size_t k = 1; k < mean.size(); ++k) EXPECT_GT(mean[k], mean[k - 1]) << "sigma " << spec.sigmas[k];

  std::ostringstream os;
  write_variation_csv(os, rows);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "sigma,trial,rmse,max_abs");
}

TEST(Variation, TrialSeedsAreSplitmix) {
  EXPECT_EQ(trial_seed(5, 3), splitmix64(8));
  EXPECT_NE(trial_seed(5, 3), trial_seed(5, 4));
}

}  // namespace
}  // namespace imtsim
