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

// Shared helpers for the test suite: randomized instances and independent
// oracles that do not reuse library code paths.

#pragma once

#include <cstdint>
#include <random>

#include "imtsim/imtsim.hpp"

namespace imtsim::testing {

inline std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL)); }

/// Deterministic pseudo-random costs in [lo, hi] per task, plus a random
/// spill decision per block-pair shape.
struct RandomCosts {
  std::uint64_t seed = 1;
  Cycles lo = 1, hi = 9;

  Cost cost(const Task& t) const {
    std::uint64_t h = mix(seed, static_cast<std::uint64_t>(t.kind));
    for (std::uint64_t v : {std::uint64_t{t.batch}, static_cast<std::uint64_t>(t.layer + 1), std::uint64_t{t.qblock},
                            std::uint64_t{t.kblock}, std::uint64_t{t.qlen}, std::uint64_t{t.klen}}) {
      h = mix(h, v);
    }
    Cost c;
    c.cycles = lo + h % (hi - lo + 1);
    return c;
  }
  bool spills(std::uint32_t q, std::uint32_t k) const { return (mix(mix(seed ^ 0x5151, q), k) & 3) == 0; }
};

/// Only QKV generation and score tasks cost anything.
struct TwoStageCosts {
  Cycles t_p = 0, t_a = 0;
  Cost cost(const Task& t) const {
    Cost c;
    if (t.kind == TaskKind::QkvGen) c.cycles = t_p;
    if (t.kind == TaskKind::Score) c.cycles = t_a;
    return c;
  }
  bool spills(std::uint32_t, std::uint32_t) const { return false; }
};

/// Small random model: <= 4 layers, <= 4 heads, SL <= 32.
inline ModelSpec random_small_model(std::mt19937_64& rng) {
  auto pick = [&rng](std::uint32_t lo, std::uint32_t hi) {
    return std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng);
  };
  ModelSpec m;
  m.name = "random";
  m.num_layers = pick(1, 4);
  m.num_heads = pick(1, 4);
  m.head_size = 1u << pick(0, 3);
  m.hidden_size = m.num_heads * m.head_size;
  m.seq_len = pick(1, 32);
  m.batch = pick(1, 2);
  m.ffn_mult = pick(1, 4);
  m.vocab_size = 64;
  return m;
}

/// MAC counts from explicit loops over every output element and every
/// reduction index of the encoder's matrix products.
struct LoopMacs {
  std::uint64_t static_macs = 0;
  std::uint64_t dynamic_macs = 0;
};

inline std::uint64_t loop_matmul(std::uint64_t m, std::uint64_t k, std::uint64_t n) {
  std::uint64_t macs = 0;
  for (std::uint64_t i = 0; i < m; ++i)
    for (std::uint64_t j = 0; j < n; ++j)
      for (std::uint64_t r = 0; r < k; ++r) ++macs;
  return macs;
}

inline LoopMacs loop_count_macs(const ModelSpec& m) {
  LoopMacs out;
  const std::uint64_t sl = m.seq_len, hs = m.hidden_size, hss = m.head_size, ffn = m.ffn_size();
  for (std::uint32_t b = 0; b < m.batch; ++b) {
    for (std::uint32_t l = 0; l < m.num_layers; ++l) {
      for (int w = 0; w < 4; ++w) out.static_macs += loop_matmul(sl, hs, hs);  // Q, K, V, out
      out.static_macs += loop_matmul(sl, hs, ffn) + loop_matmul(sl, ffn, hs);
      for (std::uint32_t h = 0; h < m.num_heads; ++h) {
        out.dynamic_macs += loop_matmul(sl, hss, sl);  // Q K^T
        out.dynamic_macs += loop_matmul(sl, sl, hss);  // softmax(.) V
      }
    }
    if (m.num_layers > 0) out.static_macs += loop_matmul(1, hs, m.num_labels);
  }
  return out;
}

/// Scheduling inputs for one hardware configuration.
struct Prepared {
  OpGraph graph;
  Mapping mapping;
  HardwareSpec hw;
};

inline Prepared prepare(const ModelSpec& model, const HardwareSpec& hw = table1_hardware(),
                        MappingPolicy policy = MappingPolicy::Hybrid,
                        ResidencyRequest residency = ResidencyRequest::Auto) {
  Prepared p;
  p.graph = build_op_graph(model);
  p.mapping = map_model(hw, model, policy, residency, &p.hw);
  return p;
}

}  // namespace imtsim::testing
