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
#include <sstream>

#include "support.hpp"

namespace imtsim {
namespace {

using testing::prepare;
using testing::RandomCosts;
using testing::TwoStageCosts;

DataflowConfig random_dataflow(std::mt19937_64& rng, std::uint32_t sl) {
  if (rng() % 3 == 0) return DataflowConfig::traditional();
  return DataflowConfig::sequence_blocking(1 + static_cast<std::uint32_t>(rng() % sl));
}

TEST(Oracle, AnalyticScheduleMatchesEventSimulation) {
  std::mt19937_64 rng(2026);
  for (int trial = 0; trial < 500; ++trial) {
    const ModelSpec m = testing::random_small_model(rng);
    const auto res = rng() % 4 == 0 ? ResidencyRequest::PerLayerReplay : ResidencyRequest::Auto;
    const auto p = prepare(m, table1_hardware(), MappingPolicy::Hybrid, res);
    const RandomCosts costs{rng(), 1 + rng() % 3, 4 + rng() % 8};
    const DataflowConfig df = random_dataflow(rng, m.seq_len);
    const Timeline analytic = schedule(p.graph, p.mapping, costs, df);
    const TaskDag dag = build_task_dag(p.graph, p.mapping, costs, df);
    const Timeline oracle = simulate_dag(dag);
    ASSERT_EQ(analytic, oracle) << "trial " << trial << " SL=" << m.seq_len << " " << df.label();
    ASSERT_EQ(check_timeline(dag, analytic), "") << "trial " << trial;
  }
}

TEST(Oracle, NonHybridPoliciesMatch) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const ModelSpec m = testing::random_small_model(rng);
    for (auto policy : {MappingPolicy::NvmAll, MappingPolicy::SimdDynamic}) {
      const auto p = prepare(m, table1_hardware(), policy);
      const RandomCosts costs{rng()};
      const Timeline a = schedule(p.graph, p.mapping, costs, DataflowConfig::traditional());
      EXPECT_EQ(a, oracle_schedule(p.graph, p.mapping, costs, DataflowConfig::traditional()));
    }
  }
}

TEST(Oracle, DetectsBrokenTimelines) {
  const auto p = prepare(bert_base(8));
  const RandomCosts costs{4};
  const auto df = DataflowConfig::sequence_blocking(4);
  const TaskDag dag = build_task_dag(p.graph, p.mapping, costs, df);
  Timeline tl = schedule(p.graph, p.mapping, costs, df);
  ASSERT_EQ(check_timeline(dag, tl), "");
  auto& attn = tl.lanes[static_cast<std::size_t>(Resource::AttentionEngine)];
  attn[1].start = attn[0].start;  // overlap with the first interval
  EXPECT_NE(check_timeline(dag, tl), "");
}

TEST(Traditional, HandEnumeratedSingleLayer) {
  ModelSpec m;
  m.num_layers = 1;
  m.num_heads = 1;
  m.hidden_size = 4;
  m.head_size = 4;
  m.seq_len = 4;
  m.vocab_size = 8;
  const auto p = prepare(m);
  struct Unit {
    Cost cost(const Task&) const {
      Cost c;
      c.cycles = 1;
      return c;
    }
    bool spills(std::uint32_t, std::uint32_t) const { return false; }
  };
  const Timeline tl = schedule_traditional(p.graph, p.mapping, Unit{});
  const std::vector<std::pair<TaskKind, Resource>> expect = {
      {TaskKind::EmbeddingRead, Resource::Bus},        {TaskKind::QkvGen, Resource::ProjectionEngine},
      {TaskKind::QkvTransfer, Resource::Bus},          {TaskKind::QvWrite, Resource::AttentionEngine},
      {TaskKind::Score, Resource::AttentionEngine},    {TaskKind::Softmax, Resource::Sfu},
      {TaskKind::AttV, Resource::AttentionEngine},     {TaskKind::Finalize, Resource::Sfu},
      {TaskKind::OutTransfer, Resource::Bus},          {TaskKind::PostAttention, Resource::ProjectionEngine},
      {TaskKind::Classifier, Resource::ProjectionEngine}};
  const auto all = merged_intervals(tl);
  ASSERT_EQ(all.size(), expect.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(all[i].second.kind, expect[i].first) << i;
    EXPECT_EQ(all[i].first, expect[i].second) << i;
    EXPECT_EQ(all[i].second.start, i);
    EXPECT_EQ(all[i].second.end, i + 1);
  }
  EXPECT_EQ(tl.total_cycles, expect.size());
}

TEST(Traditional, EnginesNeverOverlap) {
  const auto p = prepare(bert_base(64));
  const HardwareTaskCosts costs(p.hw, p.graph.model, CostTable{}, p.mapping);
  const Timeline tl = schedule_traditional(p.graph, p.mapping, costs);
  const auto& proj = tl.lane(Resource::ProjectionEngine);
  for (const auto& a : tl.lane(Resource::AttentionEngine)) {
    for (const auto& q : proj) EXPECT_TRUE(a.end <= q.start || q.end <= a.start);
  }
  const auto u = utilization(tl);
  EXPECT_LT(u[1], 1.0);
  EXPECT_LE(u[0] + u[1], 1.0 + 1e-12);
}

TEST(SequenceBlocked, TwoBlockFormula) {
  ModelSpec m;
  m.num_layers = 1;
  m.num_heads = 2;
  m.hidden_size = 8;
  m.head_size = 4;
  m.seq_len = 8;
  m.vocab_size = 8;
  const auto p = prepare(m);
  for (Cycles tp : {1u, 3u, 10u, 25u}) {
    for (Cycles ta : {1u, 4u, 10u, 40u}) {
      const TwoStageCosts costs{tp, ta};
      const Timeline tl = schedule_sequence_blocked(p.graph, p.mapping, costs, 4);
      EXPECT_EQ(tl.total_cycles, tp + std::max(tp, ta) + 3 * ta) << "tp=" << tp << " ta=" << ta;
      EXPECT_EQ(tl, oracle_schedule(p.graph, p.mapping, costs, DataflowConfig::sequence_blocking(4)));
    }
  }
}

TEST(SequenceBlocked, SingleBlockEqualsTraditional) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const ModelSpec m = testing::random_small_model(rng);
    const auto p = prepare(m);
    const RandomCosts costs{rng()};
    EXPECT_EQ(schedule_sequence_blocked(p.graph, p.mapping, costs, m.seq_len),
              schedule_traditional(p.graph, p.mapping, costs));
  }
}

TEST(SequenceBlocked, BottleneckUtilizationApproachesOne) {
  ModelSpec m;
  m.num_layers = 1;
  m.num_heads = 1;
  m.hidden_size = 4;
  m.head_size = 4;
  m.seq_len = 256;
  m.vocab_size = 8;
  const auto p = prepare(m);
  struct Balanced {
    Cost cost(const Task& t) const {
      Cost c;
      if (t.kind == TaskKind::QkvGen) c.cycles = 10;
      if (t.kind == TaskKind::Score) c.cycles = t.qblock == t.kblock ? 10 : 5;
      return c;
    }
    bool spills(std::uint32_t, std::uint32_t) const { return false; }
  };
  double prev = 0;
  for (std::uint32_t sb : {128u, 32u, 8u, 2u}) {
    const Timeline tl = schedule_sequence_blocked(p.graph, p.mapping, Balanced{}, sb);
    const double u = utilization(tl)[static_cast<std::size_t>(Resource::AttentionEngine)];
    EXPECT_GT(u, prev) << "SB=" << sb;
    prev = u;
  }
  EXPECT_GT(prev, 0.95);
}

TEST(SequenceBlocked, RejectsBadBlockAndPolicy) {
  const auto p = prepare(bert_base(16));
  const RandomCosts costs{1};
  EXPECT_THROW(schedule_sequence_blocked(p.graph, p.mapping, costs, 0), ValidationError);
  EXPECT_THROW(schedule_sequence_blocked(p.graph, p.mapping, costs, 17), ValidationError);
  HardwareSpec scaled_hw;
  scaled_hw.auto_scale_tiles = true;
  const auto nvm = prepare(bert_base(16), scaled_hw, MappingPolicy::NvmAll);
  EXPECT_THROW(schedule_sequence_blocked(nvm.graph, nvm.mapping, costs, 8), ValidationError);
  EXPECT_NO_THROW(schedule_sequence_blocked(nvm.graph, nvm.mapping, costs, 16));
}

TEST(SequenceBlocked, BeatsTraditionalOnBertBase) {
  HardwareSpec hw;
  hw.auto_scale_tiles = true;
  const auto p = prepare(bert_base(512), hw);
  const HardwareTaskCosts costs(p.hw, p.graph.model, CostTable{}, p.mapping);
  const Timeline trad = schedule_traditional(p.graph, p.mapping, costs);
  const Timeline sb = schedule_sequence_blocked(p.graph, p.mapping, costs, 64);
  EXPECT_LT(sb.total_cycles, trad.total_cycles);
  const auto ut = utilization(trad), us = utilization(sb);
  EXPECT_GT(us[0], ut[0]);
  EXPECT_GT(us[1], ut[1]);
}

TEST(Utilization, EmptyTimeline) {
  const Timeline tl;
  for (double u : utilization(tl)) EXPECT_EQ(u, 0.0);
}

TEST(Trace, OneJsonObjectPerInterval) {
  const auto p = prepare(bert_base(8));
  const Timeline tl = schedule(p.graph, p.mapping, RandomCosts{3}, DataflowConfig::sequence_blocking(4));
  std::ostringstream os;
  write_trace(os, tl);
  std::istringstream in(os.str());
  std::size_t lines = 0;
  Cycles last = 0;
  for (std::string line; std::getline(in, line); ++lines) {
    const Json j = Json::parse(line);
    EXPECT_GE(j.at("start").get<Cycles>(), last);
    last = j.at("start").get<Cycles>();
    EXPECT_LE(j.at("start").get<Cycles>(), j.at("end").get<Cycles>());
  }
  EXPECT_EQ(lines, tl.size());
}

}  // namespace
}  // namespace imtsim
