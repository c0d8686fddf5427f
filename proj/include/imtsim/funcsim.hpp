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
 * @file funcsim.hpp
 * @brief Value-level model of a bit-sliced, bit-streamed crossbar MVM.
 *
 * Weights are split into cell_bits slices and activations into dac_bits
 * streams, both in two's complement: every slice/stream is an unsigned digit
 * except the most significant one, which carries the sign
 * (digit - 2^width when the sign bit is set). For each (slice, stream) pair
 * the column sums pass through the ADC and are recombined by shift-and-add.
 *
 * Non-idealities: every cell of every slice gets a multiplicative N(1, sigma)
 * conductance factor, drawn once per programmed matrix, and an optional
 * per-level write offset; the ADC rounds to its LSB and clips.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "imtsim/common.hpp"
#include "imtsim/hardware.hpp"

namespace imtsim {

struct QuantMatrix {
  std::vector<std::int32_t> values;  // row-major
  std::size_t rows = 0, cols = 0;
  std::uint32_t bits = 8;
  double scale = 1.0;

  std::int32_t at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double dequantized(std::size_t r, std::size_t c) const { return at(r, c) * scale; }
};

/// Symmetric quantization: scale = max|x| / (2^(bits-1) - 1), round half to
/// even. An all-zero input gets scale 1.
inline QuantMatrix quantize(std::span<const double> x, std::size_t rows, std::size_t cols, std::uint32_t bits) {
  if (bits != 2 && bits != 4 && bits != 8) throw ValidationError("quantize: bits must be 2, 4 or 8");
  if (x.size() != rows * cols) throw ValidationError("quantize: value count does not match rows x cols");
  double max_abs = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw ValidationError("quantize: non-finite input");
    max_abs = std::max(max_abs, std::fabs(v));
  }
  QuantMatrix q;
  q.rows = rows;
  q.cols = cols;
  q.bits = bits;
  const double qmax = static_cast<double>((1 << (bits - 1)) - 1);
  q.scale = max_abs > 0.0 ? max_abs / qmax : 1.0;
  q.values.reserve(x.size());
  for (double v : x) {
    // nearbyint follows the current rounding mode, which defaults to half-to-even
    const double r = std::nearbyint(v / q.scale);
    q.values.push_back(static_cast<std::int32_t>(std::clamp(r, -qmax, qmax)));
  }
  return q;
}

/// Exact y[r] = sum_c m[r][c] * v[c].
inline std::vector<std::int64_t> ideal_mvm(const QuantMatrix& m, std::span<const std::int32_t> v) {
  if (v.size() != m.cols) {
    throw ValidationError("ideal_mvm: vector length " + std::to_string(v.size()) + " != cols " +
                          std::to_string(m.cols));
  }
  std::vector<std::int64_t> y(m.rows, 0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    std::int64_t acc = 0;
    for (std::size_t c = 0; c < m.cols; ++c) acc += std::int64_t{m.at(r, c)} * v[c];
    y[r] = acc;
  }
  return y;
}

/// Digit `index` of `value` (a `bits`-wide two's-complement integer) in
/// base 2^width; the top digit is signed.
inline std::int32_t signed_digit(std::int32_t value, std::uint32_t bits, std::uint32_t width, std::uint32_t index) {
  const std::uint32_t mask = (1u << width) - 1u;
  const std::uint32_t u = static_cast<std::uint32_t>(value) & ((bits >= 32) ? ~0u : ((1u << bits) - 1u));
  const auto d = static_cast<std::int32_t>((u >> (index * width)) & mask);
  const std::uint32_t digits = bits / width;
  if (index + 1 == digits && (d >> (width - 1)) & 1) return d - static_cast<std::int32_t>(1u << width);
  return d;
}

/// Unsigned level stored in the cell for the same digit.
inline std::uint32_t cell_level(std::int32_t value, std::uint32_t bits, std::uint32_t width, std::uint32_t index) {
  const std::uint32_t u = static_cast<std::uint32_t>(value) & ((1u << bits) - 1u);
  return (u >> (index * width)) & ((1u << width) - 1u);
}

struct NoiseModel {
  double sigma = 0.0;                  // relative std-dev of cell conductance
  std::vector<double> level_offsets;   // optional write nonlinearity, indexed by cell level
  std::uint32_t adc_bits = 8;
  double adc_clip = 0.0;               // 0: full-scale column sum
  std::uint64_t seed = 0;
};

struct ErrorStats {
  double rmse = 0.0;
  double max_abs = 0.0;
  double rel_l2 = 0.0;
};

inline ErrorStats error_stats(std::span<const double> ideal, std::span<const double> noisy) {
  if (ideal.size() != noisy.size()) throw ValidationError("error_stats: length mismatch");
  ErrorStats s;
  if (ideal.empty()) return s;
  double sq = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < ideal.size(); ++i) {
    const double d = noisy[i] - ideal[i];
    sq += d * d;
    ref += ideal[i] * ideal[i];
    s.max_abs = std::max(s.max_abs, std::fabs(d));
  }
  s.rmse = std::sqrt(sq / static_cast<double>(ideal.size()));
  if (sq == 0.0) s.rel_l2 = 0.0;
  else s.rel_l2 = ref > 0.0 ? std::sqrt(sq / ref) : std::numeric_limits<double>::infinity();
  return s;
}

inline ErrorStats error_stats(std::span<const std::int64_t> ideal, std::span<const std::int64_t> noisy) {
  std::vector<double> a(ideal.begin(), ideal.end()), b(noisy.begin(), noisy.end());
  return error_stats(std::span<const double>(a), std::span<const double>(b));
}

struct CrossbarResult {
  std::vector<std::int64_t> output;
  ErrorStats stats;  // against ideal_mvm
};

/// Multiplicative conductance factors for every (slice, row, col) cell of one
/// programmed matrix.
class ProgrammedMatrix {
 public:
  ProgrammedMatrix(const QuantMatrix& m, std::uint32_t cell_bits, const NoiseModel& noise)
      : m_(m), cell_bits_(cell_bits), slices_(cell_bits ? m.bits / cell_bits : 0), noise_(noise) {
    if (cell_bits < 1 || m.bits % cell_bits != 0) {
      throw ValidationError("crossbar_mvm: weight_bits (" + std::to_string(m.bits) +
                            ") not divisible by cell_bits (" + std::to_string(cell_bits) + ")");
    }
    if (!(noise.sigma >= 0.0)) throw ValidationError("crossbar_mvm: sigma must be >= 0");
    if (!noise.level_offsets.empty() && noise.level_offsets.size() != (1u << cell_bits)) {
      throw ValidationError("crossbar_mvm: level_offsets needs 2^cell_bits entries");
    }
    gain_.assign(slices_ * m.rows * m.cols, 1.0);
    if (noise.sigma > 0.0) {
      std::mt19937_64 rng(noise.seed);
      std::normal_distribution<double> z(0.0, 1.0);
      for (double& g : gain_) g = 1.0 + noise.sigma * z(rng);
    }
    // Effective conductance of each cell, in digit units.
    cell_.resize(gain_.size());
    for (std::uint32_t s = 0; s < slices_; ++s) {
      for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) {
          const std::int32_t w = m.at(r, c);
          double d = signed_digit(w, m.bits, cell_bits, s);
          if (!noise.level_offsets.empty()) d += noise.level_offsets[cell_level(w, m.bits, cell_bits, s)];
          const std::size_t i = index(s, r, c);
          cell_[i] = d * gain_[i];
        }
      }
    }
  }

  std::uint32_t slices() const { return slices_; }
  double cell(std::uint32_t s, std::size_t r, std::size_t c) const { return cell_[index(s, r, c)]; }
  const QuantMatrix& matrix() const { return m_; }
  std::uint32_t cell_bits() const { return cell_bits_; }

 private:
  std::size_t index(std::uint32_t s, std::size_t r, std::size_t c) const { return (s * m_.rows + r) * m_.cols + c; }
  QuantMatrix m_;
  std::uint32_t cell_bits_, slices_;
  NoiseModel noise_;
  std::vector<double> gain_, cell_;
};

/// Runs one input vector through a programmed matrix.
inline std::vector<std::int64_t> crossbar_mvm(const ProgrammedMatrix& pm, std::span<const std::int32_t> v,
                                              std::uint32_t act_bits, std::uint32_t dac_bits,
                                              const NoiseModel& noise) {
  const QuantMatrix& m = pm.matrix();
  if (v.size() != m.cols) throw ValidationError("crossbar_mvm: vector length does not match cols");
  if (dac_bits < 1 || act_bits % dac_bits != 0) {
    throw ValidationError("crossbar_mvm: act_bits (" + std::to_string(act_bits) + ") not divisible by dac_bits (" +
                          std::to_string(dac_bits) + ")");
  }
  if (noise.adc_bits < 2 || noise.adc_bits > 30) throw ValidationError("crossbar_mvm: adc_bits must be in [2, 30]");
  const std::int32_t lim = (act_bits >= 32) ? 0 : (1 << (act_bits - 1));
  for (std::int32_t x : v) {
    if (x < -lim || x >= lim) throw ValidationError("crossbar_mvm: input exceeds act_bits range");
  }

  const std::uint32_t cb = pm.cell_bits(), streams = act_bits / dac_bits;
  const double code_max = static_cast<double>((1 << (noise.adc_bits - 1)) - 1);
  const double clip = noise.adc_clip > 0.0 ? noise.adc_clip
                                           : static_cast<double>(m.cols) * static_cast<double>((1u << cb) - 1) *
                                                 static_cast<double>((1u << dac_bits) - 1);
  const double lsb = std::max(1.0, clip / code_max);

  std::vector<double> y(m.rows, 0.0);
  std::vector<std::int32_t> digit(m.cols);
  for (std::uint32_t t = 0; t < streams; ++t) {
    for (std::size_t c = 0; c < m.cols; ++c) digit[c] = signed_digit(v[c], act_bits, dac_bits, t);
    for (std::uint32_t s = 0; s < pm.slices(); ++s) {
      const double weight = std::ldexp(1.0, static_cast<int>(s * cb + t * dac_bits));
      for (std::size_t r = 0; r < m.rows; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) sum += pm.cell(s, r, c) * digit[c];
        const double code = std::clamp(std::nearbyint(sum / lsb), -code_max, code_max);
        y[r] += code * lsb * weight;
      }
    }
  }
  std::vector<std::int64_t> out(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) out[r] = static_cast<std::int64_t>(std::llround(y[r]));
  return out;
}

inline CrossbarResult crossbar_mvm(const QuantMatrix& m, std::span<const std::int32_t> v, std::uint32_t act_bits,
                                   const ProjectionEngineSpec& pe, const NoiseModel& noise) {
  const ProgrammedMatrix pm(m, pe.cell_bits, noise);
  CrossbarResult r;
  r.output = crossbar_mvm(pm, v, act_bits, pe.dac_bits, noise);
  const auto ideal = ideal_mvm(m, v);
  r.stats = error_stats(std::span<const std::int64_t>(ideal), std::span<const std::int64_t>(r.output));
  return r;
}

/// splitmix64 finalizer; per-trial seeds are splitmix64(base + trial).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial) { return splitmix64(base + trial); }

struct VariationTrial {
  double sigma = 0.0;
  std::uint64_t trial = 0;
  double rmse = 0.0;
  double max_abs = 0.0;
};

struct VariationSweepSpec {
  std::vector<double> sigmas{0.05, 0.1, 0.2};
  std::uint64_t trials = 1000;
  std::size_t rows = 16, cols = 16;
  std::uint32_t weight_bits = 8, act_bits = 8;
  std::uint32_t adc_bits = 8;
  std::uint64_t seed = 1;
};

/// Monte-Carlo error of random 8-bit instances. Each trial draws one matrix,
/// one input and one set of standard-normal cell deviates and reuses them for
/// every sigma, so sigma is the only thing that changes within a trial.
inline std::vector<VariationTrial> variation_sweep(const VariationSweepSpec& spec, const ProjectionEngineSpec& pe) {
  std::vector<VariationTrial> out;
  out.reserve(spec.sigmas.size() * spec.trials);
  const std::int32_t wmax = (1 << (spec.weight_bits - 1)) - 1;
  const std::int32_t amax = (1 << (spec.act_bits - 1)) - 1;
  for (std::uint64_t t = 0; t < spec.trials; ++t) {
    const std::uint64_t seed = trial_seed(spec.seed, t);
    std::mt19937_64 rng(seed);
    QuantMatrix m;
    m.rows = spec.rows;
    m.cols = spec.cols;
    m.bits = spec.weight_bits;
    std::uniform_int_distribution<std::int32_t> wd(-wmax - 1, wmax), ad(-amax - 1, amax);
    for (std::size_t i = 0; i < spec.rows * spec.cols; ++i) m.values.push_back(wd(rng));
    std::vector<std::int32_t> v(spec.cols);
    for (auto& x : v) x = ad(rng);
    const auto ideal = ideal_mvm(m, v);
    for (double sigma : spec.sigmas) {
      NoiseModel noise;
      noise.sigma = sigma;
      noise.adc_bits = spec.adc_bits;
      noise.seed = splitmix64(seed);
      const ProgrammedMatrix pm(m, pe.cell_bits, noise);
      const auto y = crossbar_mvm(pm, v, spec.act_bits, pe.dac_bits, noise);
      const auto s = error_stats(std::span<const std::int64_t>(ideal), std::span<const std::int64_t>(y));
      out.push_back({sigma, t, s.rmse, s.max_abs});
    }
  }
  return out;
}

inline void write_variation_csv(std::ostream& os, const std::vector<VariationTrial>& rows) {
  os << "sigma,trial,rmse,max_abs\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.6g,%llu,%.9g,%.9g\n", r.sigma, static_cast<unsigned long long>(r.trial),
                  r.rmse, r.max_abs);
    os << buf;
  }
}

}  // namespace imtsim
