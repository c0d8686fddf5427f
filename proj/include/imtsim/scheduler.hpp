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
 * @file scheduler.hpp
 * @brief Analytic timelines for the traditional and sequence-blocked dataflows.
 *
 * Work is cut into block-level tasks, each bound to one of four resources.
 * Every resource runs its tasks in issue order; a task starts once its
 * resource is free and its inputs are ready.
 *
 * Sequence-blocked flow, per layer and query block b:
 *
 *   QKV(b) -> bus transfer -> Q/V bank writes
 *   then each newly available block pair, in the order
 *   (b,0) (0,b) (b,1) (1,b) ... (b,b):
 *     score -> [spill] -> softmax + rescale -> [spill] -> Att x V
 *   after the last pair of query block i:
 *     finalize -> bus transfer -> out-proj/FFN (POST) of block i
 *
 * POST(l, i) feeds QKV(l+1, i), so consecutive layers overlap too. Score and
 * probability blocks that do not fit the block sequence accumulator are
 * spilled to and reloaded from off-chip memory. The traditional flow is the
 * single-block case and reduces to a strict chain.
 */

#pragma once

#include <algorithm>
#include <array>
#include <concepts>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "imtsim/common.hpp"
#include "imtsim/costmodel.hpp"
#include "imtsim/dataflow.hpp"
#include "imtsim/hwmap.hpp"
#include "imtsim/workload.hpp"

namespace imtsim {

enum class Resource : std::uint8_t { ProjectionEngine, AttentionEngine, Bus, Sfu };
inline constexpr std::size_t kResources = 4;

inline const char* to_string(Resource r) {
  switch (r) {
    case Resource::ProjectionEngine: return "projection";
    case Resource::AttentionEngine: return "attention";
    case Resource::Bus: return "bus";
    case Resource::Sfu: return "sfu";
  }
  return "?";
}

enum class TaskKind : std::uint8_t {
  EmbeddingRead,
  WeightReload,  // per-layer replay: reprogram one layer of static weights
  QkvGen,
  QkvTransfer,
  QvWrite,
  Score,
  ScoreSpill,
  Softmax,  // blockwise softmax plus running-output rescale
  ProbSpill,
  AttV,
  Finalize,
  OutTransfer,
  PostAttention,  // out-proj, residuals, layer norms, FFN
  NvmReprogram,   // NvmAll: write K^T and V into crossbars
  DynScore,       // NvmAll / SimdDynamic
  DynSoftmax,
  DynAttV,
  Classifier,
};

inline const char* to_string(TaskKind k) {
  switch (k) {
    case TaskKind::EmbeddingRead: return "embedding_read";
    case TaskKind::WeightReload: return "weight_reload";
    case TaskKind::QkvGen: return "qkv_gen";
    case TaskKind::QkvTransfer: return "qkv_transfer";
    case TaskKind::QvWrite: return "qv_write";
    case TaskKind::Score: return "score";
    case TaskKind::ScoreSpill: return "score_spill";
    case TaskKind::Softmax: return "softmax";
    case TaskKind::ProbSpill: return "prob_spill";
    case TaskKind::AttV: return "att_v";
    case TaskKind::Finalize: return "finalize";
    case TaskKind::OutTransfer: return "out_transfer";
    case TaskKind::PostAttention: return "post_attention";
    case TaskKind::NvmReprogram: return "nvm_reprogram";
    case TaskKind::DynScore: return "dyn_score";
    case TaskKind::DynSoftmax: return "dyn_softmax";
    case TaskKind::DynAttV: return "dyn_att_v";
    case TaskKind::Classifier: return "classifier";
  }
  return "?";
}

inline Resource resource_of(TaskKind k) {
  switch (k) {
    case TaskKind::EmbeddingRead:
    case TaskKind::QkvTransfer:
    case TaskKind::ScoreSpill:
    case TaskKind::ProbSpill:
    case TaskKind::OutTransfer: return Resource::Bus;
    case TaskKind::QvWrite:
    case TaskKind::Score:
    case TaskKind::AttV: return Resource::AttentionEngine;
    case TaskKind::Softmax:
    case TaskKind::Finalize: return Resource::Sfu;
    default: return Resource::ProjectionEngine;
  }
}

struct Task {
  TaskKind kind = TaskKind::QkvGen;
  std::uint32_t batch = 0;
  std::int32_t layer = kNoLayer;
  std::uint32_t qblock = 0, kblock = 0;
  std::uint32_t qlen = 0, klen = 0;  // tokens in the query and key blocks
  NodeId op = 0;                     // representative graph node

  Resource resource() const { return resource_of(kind); }
  bool operator==(const Task&) const = default;
};

/// What the schedulers need from a cost model.
template <class C>
concept TaskCostModel = requires(const C& c, const Task& t, std::uint32_t q, std::uint32_t k) {
  { c.cost(t) } -> std::convertible_to<Cost>;
  { c.spills(q, k) } -> std::convertible_to<bool>;
};

struct Interval {
  Cycles start = 0, end = 0;
  NodeId op = 0;
  TaskKind kind = TaskKind::QkvGen;
  std::uint32_t batch = 0;
  std::int32_t layer = kNoLayer;
  std::uint32_t qblock = 0, kblock = 0;
  EnergyBreakdown energy{};

  Cycles duration() const { return end - start; }
  bool operator==(const Interval&) const = default;
};

struct Timeline {
  std::array<std::vector<Interval>, kResources> lanes;
  Cycles total_cycles = 0;
  std::array<Cycles, kResources> busy_cycles{};

  const std::vector<Interval>& lane(Resource r) const { return lanes[static_cast<std::size_t>(r)]; }
  Cycles busy(Resource r) const { return busy_cycles[static_cast<std::size_t>(r)]; }
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& l : lanes) n += l.size();
    return n;
  }
  bool empty() const { return size() == 0; }

  void record(const Task& t, Cycles start, Cycles end, const Cost& c) {
    Interval iv{start, end, t.op, t.kind, t.batch, t.layer, t.qblock, t.kblock, c.breakdown};
    const auto r = static_cast<std::size_t>(t.resource());
    lanes[r].push_back(iv);
    busy_cycles[r] += end - start;
    total_cycles = std::max(total_cycles, end);
  }

  bool operator==(const Timeline&) const = default;
};

/// Busy fraction per resource; zero for an empty timeline.
inline std::array<double, kResources> utilization(const Timeline& tl) {
  std::array<double, kResources> u{};
  if (tl.total_cycles == 0) return u;
  for (std::size_t r = 0; r < kResources; ++r) {
    u[r] = static_cast<double>(tl.busy_cycles[r]) / static_cast<double>(tl.total_cycles);
  }
  return u;
}

/// Block pairs that become computable once block b exists.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> new_block_pairs(std::uint32_t b) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(2 * std::size_t{b} + 1);
  for (std::uint32_t j = 0; j < b; ++j) {
    out.emplace_back(b, j);
    out.emplace_back(j, b);
  }
  out.emplace_back(b, b);
  return out;
}

/// Representative node ids per (batch, layer).
struct GraphIndex {
  struct LayerOps {
    NodeId qgen = 0, kgen = 0, score = 0, softmax = 0, attv = 0, outproj = 0;
  };
  std::uint32_t layers = 0;
  std::vector<NodeId> embedding, classifier;  // per batch
  std::vector<LayerOps> ops;                  // batch-major

  explicit GraphIndex(const OpGraph& g) : layers(g.model.num_layers) {
    if (g.nodes.empty()) return;
    const std::uint32_t batch = g.model.batch;
    embedding.assign(batch, 0);
    classifier.assign(batch, 0);
    ops.assign(std::size_t{batch} * layers, {});
    for (const auto& n : g.nodes) {
      if (n.role == OpRole::Embedding) embedding.at(n.batch) = n.id;
      if (n.role == OpRole::Classifier) classifier.at(n.batch) = n.id;
      if (n.layer < 0) continue;
      if (n.head && *n.head != 0) continue;
      auto& l = ops.at(std::size_t{n.batch} * layers + static_cast<std::size_t>(n.layer));
      switch (n.role) {
        case OpRole::QGen: l.qgen = n.id; break;
        case OpRole::KGen: l.kgen = n.id; break;
        case OpRole::Score: l.score = n.id; break;
        case OpRole::Softmax: l.softmax = n.id; break;
        case OpRole::AttV: l.attv = n.id; break;
        case OpRole::OutProj: l.outproj = n.id; break;
        default: break;
      }
    }
  }
  const LayerOps& at(std::uint32_t batch, std::uint32_t layer) const {
    return ops.at(std::size_t{batch} * layers + layer);
  }
};

/// Throws when the mapping does not place every node of the graph.
inline void check_mapping_covers(const OpGraph& g, const Mapping& m) {
  const auto& model = g.model;
  if (model.num_layers == 0) return;
  const std::size_t static_needed = encoder_weight_matrices(model).size() * model.num_layers;
  if (m.static_allocations.size() != static_needed) {
    throw Error("scheduler: mapping places " + std::to_string(m.static_allocations.size()) + " of " +
                std::to_string(static_needed) + " static matrices");
  }
  if (m.policy == MappingPolicy::Hybrid && m.heads.size() != model.num_heads) {
    throw Error("scheduler: mapping assigns " + std::to_string(m.heads.size()) + " of " +
                std::to_string(model.num_heads) + " heads to AHCTs");
  }
  if (m.policy == MappingPolicy::NvmAll &&
      m.dynamic_allocations.size() != dynamic_operand_matrices(model).size() * model.num_heads) {
    throw Error("scheduler: mapping lacks dynamic crossbar regions for nvm_all");
  }
}

/// Task sequence of the traditional flow. Every task consumes the output of
/// the one before it, so the list is also the dependency chain.
inline std::vector<Task> traditional_task_chain(const OpGraph& g, const Mapping& mapping, bool spills) {
  check_mapping_covers(g, mapping);
  std::vector<Task> out;
  const auto& model = g.model;
  if (model.num_layers == 0) return out;
  const GraphIndex idx(g);
  const std::uint32_t sl = model.seq_len;
  const bool reload = mapping.residency == Residency::PerLayerReplay && model.num_layers > 1;

  for (std::uint32_t c = 0; c < model.batch; ++c) {
    out.push_back({TaskKind::EmbeddingRead, c, kNoLayer, 0, 0, sl, sl, idx.embedding[c]});
    for (std::uint32_t l = 0; l < model.num_layers; ++l) {
      const auto& ops = idx.at(c, l);
      const auto li = static_cast<std::int32_t>(l);
      auto push = [&](TaskKind k, NodeId op) { out.push_back({k, c, li, 0, 0, sl, sl, op}); };
      if (reload) push(TaskKind::WeightReload, ops.qgen);
      push(TaskKind::QkvGen, ops.qgen);
      if (mapping.policy == MappingPolicy::Hybrid) {
        push(TaskKind::QkvTransfer, ops.qgen);
        push(TaskKind::QvWrite, ops.qgen);
        push(TaskKind::Score, ops.score);
        if (spills) push(TaskKind::ScoreSpill, ops.score);
        push(TaskKind::Softmax, ops.softmax);
        if (spills) push(TaskKind::ProbSpill, ops.softmax);
        push(TaskKind::AttV, ops.attv);
        push(TaskKind::Finalize, ops.attv);
        push(TaskKind::OutTransfer, ops.outproj);
      } else {
        if (mapping.policy == MappingPolicy::NvmAll) push(TaskKind::NvmReprogram, ops.kgen);
        push(TaskKind::DynScore, ops.score);
        push(TaskKind::DynSoftmax, ops.softmax);
        push(TaskKind::DynAttV, ops.attv);
      }
      push(TaskKind::PostAttention, ops.outproj);
    }
    out.push_back({TaskKind::Classifier, c, kNoLayer, 0, 0, sl, sl, idx.classifier[c]});
  }
  return out;
}

/// Traditional flow: engines strictly alternate, so each task starts when
/// its predecessor in the chain ends.
template <TaskCostModel C>
Timeline schedule_traditional(const OpGraph& g, const Mapping& mapping, const C& costs) {
  Timeline tl;
  const bool spills = g.model.num_layers > 0 && costs.spills(g.model.seq_len, g.model.seq_len);
  Cycles t = 0;
  for (const Task& task : traditional_task_chain(g, mapping, spills)) {
    const Cost c = costs.cost(task);
    const Cycles end = checked_add(t, c.cycles, "timeline cycles");
    tl.record(task, t, end, c);
    t = end;
  }
  return tl;
}

namespace detail {

template <class C>
struct Issuer {
  const C& costs;
  Timeline& tl;
  std::array<Cycles, kResources> free{};

  Cycles operator()(const Task& t, Cycles ready) {
    const Cost c = costs.cost(t);
    auto& f = free[static_cast<std::size_t>(t.resource())];
    const Cycles start = std::max(f, ready);
    const Cycles end = checked_add(start, c.cycles, "timeline cycles");
    f = end;
    tl.record(t, start, end, c);
    return end;
  }
};

}  // namespace detail

/// Pipelined sequence-blocked flow (see file comment). Policies other than
/// Hybrid have no attention engine to pipeline against and accept only the
/// degenerate SB = SL.
template <TaskCostModel C>
Timeline schedule_sequence_blocked(const OpGraph& g, const Mapping& mapping, const C& costs, std::uint32_t sb) {
  const auto& model = g.model;
  const DataflowConfig df = DataflowConfig::sequence_blocking(sb);
  df.validate(model.seq_len);
  check_mapping_covers(g, mapping);
  Timeline tl;
  if (model.num_layers == 0) return tl;

  const std::uint32_t sl = model.seq_len;
  const std::uint32_t nb = df.num_blocks(sl);
  if (mapping.policy != MappingPolicy::Hybrid) {
    if (nb != 1) {
      throw ValidationError(std::string("scheduler: sequence blocking with SB < SL needs the hybrid policy, got ") +
                            to_string(mapping.policy));
    }
    return schedule_traditional(g, mapping, costs);
  }

  const GraphIndex idx(g);
  const bool reload = mapping.residency == Residency::PerLayerReplay && model.num_layers > 1;
  detail::Issuer<C> issue{costs, tl};
  std::vector<std::uint32_t> len(nb);
  for (std::uint32_t b = 0; b < nb; ++b) len[b] = df.block_len(b, sl);

  Cycles seq_ready = 0;
  std::vector<Cycles> input_ready(nb), written(nb), post_end(nb);
  for (std::uint32_t c = 0; c < model.batch; ++c) {
    const Cycles emb = issue({TaskKind::EmbeddingRead, c, kNoLayer, 0, 0, sl, sl, idx.embedding[c]}, seq_ready);
    std::fill(input_ready.begin(), input_ready.end(), emb);

    for (std::uint32_t l = 0; l < model.num_layers; ++l) {
      const auto& ops = idx.at(c, l);
      const auto li = static_cast<std::int32_t>(l);
      Cycles weights_ready = 0;
      if (reload) weights_ready = issue({TaskKind::WeightReload, c, li, 0, 0, sl, sl, ops.qgen}, emb);

      for (std::uint32_t b = 0; b < nb; ++b) {
        const Task qkv{TaskKind::QkvGen, c, li, b, b, len[b], len[b], ops.qgen};
        Cycles t = issue(qkv, std::max(input_ready[b], weights_ready));
        t = issue({TaskKind::QkvTransfer, c, li, b, b, len[b], len[b], ops.qgen}, t);
        written[b] = issue({TaskKind::QvWrite, c, li, b, b, len[b], len[b], ops.qgen}, t);

        for (const auto& [i, j] : new_block_pairs(b)) {
          const bool spill = costs.spills(len[i], len[j]);
          auto pair_task = [&](TaskKind k, NodeId op) { return Task{k, c, li, i, j, len[i], len[j], op}; };
          Cycles r = issue(pair_task(TaskKind::Score, ops.score), std::max(written[i], written[j]));
          if (spill) r = issue(pair_task(TaskKind::ScoreSpill, ops.score), r);
          r = issue(pair_task(TaskKind::Softmax, ops.softmax), r);
          if (spill) r = issue(pair_task(TaskKind::ProbSpill, ops.softmax), r);
          r = issue(pair_task(TaskKind::AttV, ops.attv), r);
          if (j == nb - 1) {  // query block i has seen every key block
            r = issue({TaskKind::Finalize, c, li, i, i, len[i], len[i], ops.attv}, r);
            r = issue({TaskKind::OutTransfer, c, li, i, i, len[i], len[i], ops.outproj}, r);
            post_end[i] = issue({TaskKind::PostAttention, c, li, i, i, len[i], len[i], ops.outproj}, r);
          }
        }
      }
      input_ready = post_end;
    }
    seq_ready = issue({TaskKind::Classifier, c, kNoLayer, 0, 0, sl, sl, idx.classifier[c]}, post_end[0]);
  }
  return tl;
}

/// Dispatches on the dataflow mode.
template <TaskCostModel C>
Timeline schedule(const OpGraph& g, const Mapping& mapping, const C& costs, const DataflowConfig& df) {
  df.validate(g.model.seq_len);
  if (df.mode == DataflowMode::Traditional) return schedule_traditional(g, mapping, costs);
  return schedule_sequence_blocked(g, mapping, costs, df.block);
}

/// All intervals ordered by (start, resource, issue order).
inline std::vector<std::pair<Resource, Interval>> merged_intervals(const Timeline& tl) {
  std::vector<std::pair<Resource, Interval>> all;
  all.reserve(tl.size());
  for (std::size_t r = 0; r < kResources; ++r) {
    for (const auto& iv : tl.lanes[r]) all.emplace_back(static_cast<Resource>(r), iv);
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.second.start != b.second.start) return a.second.start < b.second.start;
    return a.first < b.first;
  });
  return all;
}

/// JSON-lines trace: one object per interval.
inline void write_trace(std::ostream& os, const Timeline& tl) {
  for (const auto& [r, iv] : merged_intervals(tl)) {
    os << "{\"resource\":\"" << to_string(r) << "\",\"start\":" << iv.start << ",\"end\":" << iv.end
       << ",\"op\":" << iv.op << ",\"kind\":\"" << to_string(iv.kind) << "\",\"batch\":" << iv.batch
       << ",\"layer\":" << iv.layer << ",\"qblock\":" << iv.qblock << ",\"kblock\":" << iv.kblock << "}\n";
  }
}

}  // namespace imtsim
