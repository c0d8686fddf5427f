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
 * @file oracle.hpp
 * @brief Discrete-event reference for the analytic schedulers.
 *
 * Builds the explicit task DAG (nodes, dependency edges, per-resource
 * queues) and advances simulated time event by event. Slow but direct; used
 * to check the analytic recurrences.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "imtsim/scheduler.hpp"

namespace imtsim {

struct DagTask {
  Task task;
  Cost cost;
  std::vector<std::size_t> deps;
};

struct TaskDag {
  std::vector<DagTask> tasks;
  std::array<std::vector<std::size_t>, kResources> queues;  // issue order per resource
};

namespace detail {

using TaskKey = std::tuple<TaskKind, std::uint32_t, std::int32_t, std::uint32_t, std::uint32_t>;

class DagBuilder {
 public:
  template <class C>
  std::size_t add(const C& costs, const Task& t, std::initializer_list<TaskKey> deps) {
    const std::size_t id = dag_.tasks.size();
    DagTask d{t, costs.cost(t), {}};
    for (const auto& k : deps) d.deps.push_back(lookup(k));
    dag_.tasks.push_back(std::move(d));
    dag_.queues[static_cast<std::size_t>(t.resource())].push_back(id);
    index_[key(t)] = id;
    return id;
  }
  bool has(const TaskKey& k) const { return index_.count(k) != 0; }
  TaskDag take() { return std::move(dag_); }

  static TaskKey key(const Task& t) { return {t.kind, t.batch, t.layer, t.qblock, t.kblock}; }

 private:
  std::size_t lookup(const TaskKey& k) const {
    auto it = index_.find(k);
    if (it == index_.end()) {
      throw Error(std::string("oracle: missing dependency ") + to_string(std::get<0>(k)));
    }
    return it->second;
  }
  TaskDag dag_;
  std::map<TaskKey, std::size_t> index_;
};

}  // namespace detail

/// Task DAG for either dataflow. The dependency edges follow the data:
/// QKV needs the previous layer's POST of the same block, a score block
/// needs both Q and K blocks written, POST needs the finished outputs of its
/// query block, the next sequence starts after the classifier.
template <TaskCostModel C>
TaskDag build_task_dag(const OpGraph& g, const Mapping& mapping, const C& costs, const DataflowConfig& df) {
  const auto& model = g.model;
  df.validate(model.seq_len);
  check_mapping_covers(g, mapping);
  detail::DagBuilder B;
  if (model.num_layers == 0) return B.take();

  const std::uint32_t sl = model.seq_len;
  const std::uint32_t nb = df.num_blocks(sl);
  const bool hybrid = mapping.policy == MappingPolicy::Hybrid;
  if (!hybrid && nb != 1) throw ValidationError("oracle: sequence blocking with SB < SL needs the hybrid policy");
  const bool reload = mapping.residency == Residency::PerLayerReplay && model.num_layers > 1;
  const GraphIndex idx(g);
  const std::int32_t L = static_cast<std::int32_t>(model.num_layers);
  auto blen = [&](std::uint32_t b) { return df.block_len(b, sl); };
  using K = TaskKind;

  for (std::uint32_t c = 0; c < model.batch; ++c) {
    const Task emb{K::EmbeddingRead, c, kNoLayer, 0, 0, sl, sl, idx.embedding[c]};
    if (c == 0) {
      B.add(costs, emb, {});
    } else {
      B.add(costs, emb, {{K::Classifier, c - 1, kNoLayer, 0, 0}});
    }
    const detail::TaskKey emb_key{K::EmbeddingRead, c, kNoLayer, 0, 0};

    for (std::int32_t l = 0; l < L; ++l) {
      const auto& ops = idx.at(c, static_cast<std::uint32_t>(l));
      const detail::TaskKey reload_key{K::WeightReload, c, l, 0, 0};
      if (reload) B.add(costs, {K::WeightReload, c, l, 0, 0, sl, sl, ops.qgen}, {emb_key});

      if (!hybrid) {
        const Task qkv{K::QkvGen, c, l, 0, 0, sl, sl, ops.qgen};
        const detail::TaskKey input = l == 0 ? emb_key : detail::TaskKey{K::PostAttention, c, l - 1, 0, 0};
        if (reload) B.add(costs, qkv, {input, reload_key});
        else B.add(costs, qkv, {input});
        detail::TaskKey prev{K::QkvGen, c, l, 0, 0};
        auto step = [&](K k, NodeId op) {
          B.add(costs, {k, c, l, 0, 0, sl, sl, op}, {prev});
          prev = {k, c, l, 0, 0};
        };
        if (mapping.policy == MappingPolicy::NvmAll) step(K::NvmReprogram, ops.kgen);
        step(K::DynScore, ops.score);
        step(K::DynSoftmax, ops.softmax);
        step(K::DynAttV, ops.attv);
        step(K::PostAttention, ops.outproj);
        continue;
      }

      for (std::uint32_t b = 0; b < nb; ++b) {
        const std::uint32_t s = blen(b);
        const detail::TaskKey input = l == 0 ? emb_key : detail::TaskKey{K::PostAttention, c, l - 1, b, b};
        const Task qkv{K::QkvGen, c, l, b, b, s, s, ops.qgen};
        if (reload) B.add(costs, qkv, {input, reload_key});
        else B.add(costs, qkv, {input});
        B.add(costs, {K::QkvTransfer, c, l, b, b, s, s, ops.qgen}, {{K::QkvGen, c, l, b, b}});
        B.add(costs, {K::QvWrite, c, l, b, b, s, s, ops.qgen}, {{K::QkvTransfer, c, l, b, b}});

        for (const auto& [i, j] : new_block_pairs(b)) {
          const std::uint32_t si = blen(i), sj = blen(j);
          const bool spill = costs.spills(si, sj);
          B.add(costs, {K::Score, c, l, i, j, si, sj, ops.score}, {{K::QvWrite, c, l, i, i}, {K::QvWrite, c, l, j, j}});
          detail::TaskKey last{K::Score, c, l, i, j};
          if (spill) {
            B.add(costs, {K::ScoreSpill, c, l, i, j, si, sj, ops.score}, {last});
            last = {K::ScoreSpill, c, l, i, j};
          }
          B.add(costs, {K::Softmax, c, l, i, j, si, sj, ops.softmax}, {last});
          last = {K::Softmax, c, l, i, j};
          if (spill) {
            B.add(costs, {K::ProbSpill, c, l, i, j, si, sj, ops.softmax}, {last});
            last = {K::ProbSpill, c, l, i, j};
          }
          B.add(costs, {K::AttV, c, l, i, j, si, sj, ops.attv}, {last});
          if (j + 1 == nb) {
            B.add(costs, {K::Finalize, c, l, i, i, si, si, ops.attv}, {{K::AttV, c, l, i, j}});
            B.add(costs, {K::OutTransfer, c, l, i, i, si, si, ops.outproj}, {{K::Finalize, c, l, i, i}});
            B.add(costs, {K::PostAttention, c, l, i, i, si, si, ops.outproj}, {{K::OutTransfer, c, l, i, i}});
          }
        }
      }
    }
    B.add(costs, {K::Classifier, c, kNoLayer, 0, 0, sl, sl, idx.classifier[c]}, {{K::PostAttention, c, L - 1, 0, 0}});
  }
  return B.take();
}

/// Event-driven execution of a task DAG: in-order queues per resource, a
/// task starts at the first event time when its resource is idle and all of
/// its dependencies have finished.
inline Timeline simulate_dag(const TaskDag& dag) {
  const std::size_t n = dag.tasks.size();
  std::vector<bool> done(n, false);
  std::vector<Cycles> start_at(n, 0), end_at(n, 0);
  std::array<std::size_t, kResources> head{};
  std::array<bool, kResources> busy{};
  using Event = std::pair<Cycles, std::size_t>;  // (finish time, task)
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  std::size_t finished = 0;
  Cycles now = 0;

  auto try_start = [&] {
    for (std::size_t r = 0; r < kResources; ++r) {
      if (busy[r] || head[r] == dag.queues[r].size()) continue;
      const std::size_t id = dag.queues[r][head[r]];
      bool ready = true;
      for (std::size_t d : dag.tasks[id].deps) ready = ready && done[d];
      if (!ready) continue;
      busy[r] = true;
      ++head[r];
      start_at[id] = now;
      end_at[id] = checked_add(now, dag.tasks[id].cost.cycles, "oracle time");
      events.emplace(end_at[id], id);
    }
  };

  try_start();
  while (!events.empty()) {
    now = events.top().first;
    while (!events.empty() && events.top().first == now) {
      const std::size_t id = events.top().second;
      events.pop();
      done[id] = true;
      busy[static_cast<std::size_t>(dag.tasks[id].task.resource())] = false;
      ++finished;
    }
    try_start();
  }
  if (finished != n) throw Error("oracle: deadlock, " + std::to_string(n - finished) + " tasks never ran");

  Timeline tl;
  for (std::size_t r = 0; r < kResources; ++r) {
    for (std::size_t id : dag.queues[r]) tl.record(dag.tasks[id].task, start_at[id], end_at[id], dag.tasks[id].cost);
  }
  return tl;
}

template <TaskCostModel C>
Timeline oracle_schedule(const OpGraph& g, const Mapping& mapping, const C& costs, const DataflowConfig& df) {
  return simulate_dag(build_task_dag(g, mapping, costs, df));
}

/// Empty when `tl` honours every edge of `dag` and never overlaps two
/// intervals on one resource; otherwise the first violation found.
inline std::string check_timeline(const TaskDag& dag, const Timeline& tl) {
  std::map<detail::TaskKey, const Interval*> at;
  for (const auto& lane : tl.lanes) {
    for (std::size_t k = 0; k < lane.size(); ++k) {
      if (k > 0 && lane[k].start < lane[k - 1].end) return "overlapping intervals on one resource";
      const auto& iv = lane[k];
      at[{iv.kind, iv.batch, iv.layer, iv.qblock, iv.kblock}] = &iv;
    }
  }
  Cycles max_end = 0;
  for (const auto& t : dag.tasks) {
    auto self = at.find(detail::DagBuilder::key(t.task));
    if (self == at.end()) return std::string("task missing from timeline: ") + to_string(t.task.kind);
    max_end = std::max(max_end, self->second->end);
    for (std::size_t d : t.deps) {
      auto dep = at.find(detail::DagBuilder::key(dag.tasks[d].task));
      if (dep == at.end()) return "dependency missing from timeline";
      if (dep->second->end > self->second->start) {
        return std::string(to_string(t.task.kind)) + " starts before " + to_string(dag.tasks[d].task.kind) + " ends";
      }
    }
  }
  if (tl.size() != dag.tasks.size()) return "timeline has extra intervals";
  if (tl.total_cycles != max_end) return "total_cycles differs from the last interval end";
  return {};
}

}  // namespace imtsim
