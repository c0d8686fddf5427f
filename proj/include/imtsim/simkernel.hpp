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
 * @file simkernel.hpp
 * @brief workload -> mapping -> schedule -> Report, plus parameter sweeps.
 */

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "imtsim/common.hpp"
#include "imtsim/costmodel.hpp"
#include "imtsim/dataflow.hpp"
#include "imtsim/hardware.hpp"
#include "imtsim/hwmap.hpp"
#include "imtsim/scheduler.hpp"
#include "imtsim/serialize.hpp"
#include "imtsim/workload.hpp"

namespace imtsim {

/// Prices scheduler tasks with the costmodel primitives.
///
/// Per token, QKV generation is three parallel crossbar MVMs; the
/// post-attention stage runs out-proj, FFN1 and FFN2 back to back, then the
/// residual, GELU and layer-norm vector ops on the projection-side lanes.
/// Attention tasks run all heads in parallel on their AHCTs (cycles scale by
/// the time-multiplex slot count, energy by the head count).
class HardwareTaskCosts {
 public:
  HardwareTaskCosts(const HardwareSpec& hw, const ModelSpec& model, const CostTable& table, const Mapping& mapping)
      : hw_(hw), m_(model), t_(table), policy_(mapping.policy), slots_(mapping.time_multiplex_slots) {
    hw_.validate();
    m_.validate();
    t_.validate();
    act_bits_ = m_.q_bits;
    act_bytes_ = ceil_div(act_bits_, 8);
    w_bytes_ = ceil_div(m_.weight_bits, 8);
    prob_bits_ = 8 * m_.score_bytes();
    if (m_.num_layers == 0) return;

    const std::uint64_t hs = m_.hidden_size, ffn = m_.ffn_size();
    const std::uint32_t vfu = hw_.projection.vfu_lanes;
    auto mvm = [&](std::uint64_t r, std::uint64_t c) {
      return static_matrix_vector_cost(r, c, act_bits_, m_.weight_bits, hw_, t_);
    };
    auto mem = [&](std::uint64_t bytes, MemPath p) { return transfer_cost(bytes, p, hw_, t_); };

    const Cost q = mvm(hs, hs);
    qkv_token_.cycles = q.cycles;
    qkv_token_.add_energy(q, 3.0);
    qkv_token_.add_energy(mem(hs * act_bytes_, MemPath::SharedMem));
    qkv_token_.add_energy(mem(4 * hs * act_bytes_, MemPath::Scratchpad));

    post_token_.then(mvm(hs, hs)).then(mvm(hs, ffn)).then(mvm(ffn, hs));
    post_token_.then(sfu_cost(SfuKind::Add, hs, vfu, t_))
        .then(sfu_cost(SfuKind::LayerNorm, hs, vfu, t_))
        .then(sfu_cost(SfuKind::Exp, ffn, vfu, t_))  // GELU, one op per element
        .then(sfu_cost(SfuKind::Add, hs, vfu, t_))
        .then(sfu_cost(SfuKind::LayerNorm, hs, vfu, t_));
    post_token_.add_energy(mem((4 * hs + 2 * ffn) * act_bytes_, MemPath::Scratchpad));
    post_token_.add_energy(mem(hs * act_bytes_, MemPath::SharedMem));
  }

  bool spills(std::uint32_t qlen, std::uint32_t klen) const {
    return policy_ == MappingPolicy::Hybrid &&
           std::uint64_t{qlen} * klen * m_.score_bytes() > hw_.attention.block_seq_accum_bytes;
  }

  Cost cost(const Task& task) const {
    const std::uint64_t hs = m_.hidden_size, hss = m_.head_size, sl = m_.seq_len, heads = m_.num_heads;
    const std::uint64_t q = task.qlen, k = task.klen;
    const std::uint32_t vfu = hw_.projection.vfu_lanes;
    auto mem = [&](std::uint64_t bytes, MemPath p) { return transfer_cost(bytes, p, hw_, t_); };

    switch (task.kind) {
      case TaskKind::EmbeddingRead: {
        const std::uint64_t bytes = q * hs * w_bytes_;
        return mem(bytes, MemPath::ReadonlyTile).then(mem(bytes, MemPath::Bus));
      }
      case TaskKind::WeightReload: {
        std::uint64_t weights = 0;
        for (const auto& w : encoder_weight_matrices(m_)) weights += w.rows * w.cols;
        Cost c = mem(weights * w_bytes_, MemPath::Offchip);
        Cost wr;
        wr.cycles = std::min<std::uint64_t>(hs, hw_.projection.xbar_rows) * t_.t_nvm_write_row_cycles;
        wr[EnergyComponent::Write] = static_cast<double>(weights * m_.weight_bits) * t_.e_nvm_write_bit_pj;
        return c.then(wr);
      }
      case TaskKind::QkvGen: return qkv_token_.repeated(q);
      case TaskKind::QkvTransfer: return mem(3 * q * hs * act_bytes_, MemPath::Bus);
      case TaskKind::QvWrite: {
        Cost one = sram_write_cost(q, hss, m_.q_bits, t_);
        one.then(sram_write_cost(q, hss, m_.v_bits, t_));
        return per_head(one);
      }
      case TaskKind::Score: {
        Cost c;
        c.cycles = q * k * attention_cycles_per_element(m_.k_bits, m_.q_bits, hw_) * slots_;
        c.add_energy(sram_matrix_vector_cost(hss, q, m_.k_bits, m_.q_bits, hw_, t_), static_cast<double>(heads * k));
        return c;
      }
      // Scores are written once and read back twice (row max, then exp/sum).
      case TaskKind::ScoreSpill: return mem(3 * heads * q * k * m_.score_bytes(), MemPath::Offchip);
      case TaskKind::ProbSpill: return mem(2 * heads * q * k * m_.score_bytes(), MemPath::Offchip);
      case TaskKind::Softmax: {
        Cost one = sfu_cost(SfuKind::Softmax, q * k, hw_, t_);
        if (k < sl) {  // blockwise: rescale and accumulate the running outputs
          one.then(sfu_cost(SfuKind::Mul, q * hss, hw_, t_)).then(sfu_cost(SfuKind::Add, q * hss, hw_, t_));
        }
        return per_head(one);
      }
      case TaskKind::AttV: {
        Cost c;
        c.cycles = q * k * attention_cycles_per_element(prob_bits_, m_.v_bits, hw_) * slots_;
        c.add_energy(sram_matrix_vector_cost(k, hss, prob_bits_, m_.v_bits, hw_, t_), static_cast<double>(heads * q));
        return c;
      }
      case TaskKind::Finalize: return per_head(sfu_cost(SfuKind::Div, q * hss, hw_, t_));
      case TaskKind::OutTransfer: return mem(q * hs * act_bytes_, MemPath::Bus);
      case TaskKind::PostAttention: return post_token_.repeated(q);
      case TaskKind::NvmReprogram: {
        const std::uint64_t rows = hw_.projection.xbar_rows;
        Cost c;
        c.cycles = heads * (std::min(hss, rows) + std::min(sl, rows)) * t_.t_nvm_write_row_cycles;
        c[EnergyComponent::Write] =
            static_cast<double>(heads * hss * sl * (m_.k_bits + m_.v_bits)) * t_.e_nvm_write_bit_pj;
        return c;
      }
      case TaskKind::DynScore: {
        if (policy_ == MappingPolicy::SimdDynamic) return simd_mvm_cost(sl, hss, t_).repeated(heads * sl);
        const Cost one = static_matrix_vector_cost(hss, sl, m_.q_bits, nvm_bits(m_.k_bits), hw_, t_);
        Cost c = one.repeated(sl);
        c.add_energy(one, static_cast<double>((heads - 1) * sl));
        return c;
      }
      case TaskKind::DynSoftmax: return sfu_cost(SfuKind::Softmax, sl, vfu, t_).repeated(heads * sl);
      case TaskKind::DynAttV: {
        if (policy_ == MappingPolicy::SimdDynamic) return simd_mvm_cost(hss, sl, t_).repeated(heads * sl);
        const Cost one = static_matrix_vector_cost(sl, hss, prob_bits_, nvm_bits(m_.v_bits), hw_, t_);
        Cost c = one.repeated(sl);
        c.add_energy(one, static_cast<double>((heads - 1) * sl));
        return c;
      }
      case TaskKind::Classifier: {
        const std::uint64_t n = hs * m_.num_labels;
        Cost c = mem(n * w_bytes_, MemPath::ReadonlyTile);
        Cost v;
        v.cycles = ceil_div(n, vfu);
        v[EnergyComponent::Sfu] = static_cast<double>(n) * t_.e_sfu_op_pj;
        return c.then(v);
      }
    }
    throw Error("cost: unhandled task kind");
  }

 private:
  // All heads run at once, each on its own AHCT.
  Cost per_head(const Cost& one) const {
    Cost c;
    c.cycles = one.cycles * slots_;
    c.add_energy(one, static_cast<double>(m_.num_heads));
    return c;
  }
  std::uint32_t nvm_bits(std::uint32_t bits) const { return std::max(bits, hw_.projection.cell_bits); }

  HardwareSpec hw_;
  ModelSpec m_;
  CostTable t_;
  MappingPolicy policy_;
  std::uint64_t slots_;
  std::uint32_t act_bits_ = 8, prob_bits_ = 8;
  std::uint64_t act_bytes_ = 1, w_bytes_ = 1;
  Cost qkv_token_, post_token_;
};

enum class EnergyCategory : std::uint8_t { Projection, AttentionMvm, AttentionWrite, SfuAccum, Memory, Interconnect };
inline constexpr std::size_t kEnergyCategories = 6;

inline const char* to_string(EnergyCategory c) {
  switch (c) {
    case EnergyCategory::Projection: return "projection";
    case EnergyCategory::AttentionMvm: return "attention_mvm";
    case EnergyCategory::AttentionWrite: return "attention_write";
    case EnergyCategory::SfuAccum: return "sfu_accum";
    case EnergyCategory::Memory: return "memory";
    case EnergyCategory::Interconnect: return "interconnect";
  }
  return "?";
}

inline EnergyCategory category_of(TaskKind kind, EnergyComponent comp) {
  if (comp == EnergyComponent::Memory) return EnergyCategory::Memory;
  if (comp == EnergyComponent::Interconnect) return EnergyCategory::Interconnect;
  switch (resource_of(kind)) {
    case Resource::AttentionEngine:
      return comp == EnergyComponent::Write ? EnergyCategory::AttentionWrite : EnergyCategory::AttentionMvm;
    case Resource::Sfu: return EnergyCategory::SfuAccum;
    case Resource::Bus: return EnergyCategory::Interconnect;
    default: return EnergyCategory::Projection;
  }
}

/// Energy in pJ, split by category and, within a category, by component.
struct EnergyAccount {
  std::array<EnergyBreakdown, kEnergyCategories> pj{};

  void add(TaskKind kind, const EnergyBreakdown& e, double scale = 1.0) {
    for (std::size_t i = 0; i < kEnergyComponents; ++i) {
      const auto comp = static_cast<EnergyComponent>(i);
      pj[static_cast<std::size_t>(category_of(kind, comp))][i] += e[i] * scale;
    }
  }
  double category(EnergyCategory c) const {
    double s = 0.0;
    for (double v : pj[static_cast<std::size_t>(c)]) s += v;
    return s;
  }
  double component(EnergyCategory c, EnergyComponent comp) const {
    return pj[static_cast<std::size_t>(c)][static_cast<std::size_t>(comp)];
  }
  double total() const {
    double s = 0.0;
    for (std::size_t c = 0; c < kEnergyCategories; ++c) s += category(static_cast<EnergyCategory>(c));
    return s;
  }
  /// Attention engine including its SFU and accumulator.
  double attention() const {
    return category(EnergyCategory::AttentionMvm) + category(EnergyCategory::AttentionWrite) +
           category(EnergyCategory::SfuAccum);
  }
  /// ADC share of MVM energy (adc / (adc + dac + array + sna)) within one category.
  double adc_share(EnergyCategory c) const {
    const double adc = component(c, EnergyComponent::Adc);
    const double mvm = adc + component(c, EnergyComponent::Dac) + component(c, EnergyComponent::Array) +
                       component(c, EnergyComponent::Sna);
    return mvm > 0.0 ? adc / mvm : 0.0;
  }
};

inline constexpr int kReportSchemaVersion = 1;

struct Report {
  int schema_version = kReportSchemaVersion;
  std::string model_name, hardware_name, policy, dataflow, residency;
  std::uint32_t seq_len = 0;
  std::uint32_t num_tiles = 0;
  std::uint64_t frequency_hz = 1;

  Cycles total_cycles = 0;
  double latency_s = 0.0;
  EnergyAccount energy;          // whole inference
  EnergyAccount encoder_energy;  // mean per encoder layer
  std::array<Cycles, kResources> busy_cycles{};
  std::array<double, kResources> utilization{};
  Cycles mvm_dynamic_cycles = 0;
  double mvm_dynamic_runtime_share = 0.0;

  std::uint64_t peak_score_buffer_bytes = 0;  // per head
  std::uint64_t accumulator_bytes = 0;        // per head
  std::uint64_t peak_buffer_bytes = 0;        // per head, score + accumulator
  std::uint64_t nvm_write_events = 0;
  std::uint64_t weight_reload_events = 0;
  LifetimeEstimate lifetime;
  FlopsBreakdown flops;
  std::optional<double> tops_per_watt;

  std::string model_hash, hardware_hash, cost_table_hash, dataflow_hash, policy_hash;
  std::vector<std::string> warnings;

  double total_energy_j() const { return energy.total() * 1e-12; }
};

/// total FLOPs / (1e12 x energy in J). Throws on zero energy.
inline double tops_per_watt(std::uint64_t total_flops, double energy_j) {
  if (!(energy_j > 0.0)) throw ValidationError("tops_per_watt: total energy must be > 0");
  return static_cast<double>(total_flops) / (1e12 * energy_j);
}

inline double tops_per_watt(const Report& r) { return tops_per_watt(r.flops.total(), r.total_energy_j()); }

/// Everything one simulation needs.
struct RunSpec {
  HardwareSpec hardware = table1_hardware();
  ModelSpec model = bert_base();
  DataflowConfig dataflow = DataflowConfig::traditional();
  MappingPolicy policy = MappingPolicy::Hybrid;
  ResidencyRequest residency = ResidencyRequest::Auto;
  CostTable cost_table;
};

struct RunResult {
  Report report;
  Timeline timeline;
  Mapping mapping;
  HardwareSpec effective_hardware;
};

inline bool is_dynamic_mvm(TaskKind k) {
  return k == TaskKind::Score || k == TaskKind::AttV || k == TaskKind::DynScore || k == TaskKind::DynAttV;
}

inline RunResult run_detailed(const RunSpec& spec) {
  spec.hardware.validate();
  spec.model.validate();
  spec.cost_table.validate();
  spec.dataflow.validate(spec.model.seq_len);

  RunResult out;
  out.mapping = map_model(spec.hardware, spec.model, spec.policy, spec.residency, &out.effective_hardware);
  const OpGraph graph = build_op_graph(spec.model);
  const HardwareTaskCosts costs(out.effective_hardware, spec.model, spec.cost_table, out.mapping);
  out.timeline = schedule(graph, out.mapping, costs, spec.dataflow);

  Report& r = out.report;
  const auto& m = spec.model;
  r.model_name = m.name;
  r.hardware_name = spec.hardware.name;
  r.policy = to_string(spec.policy);
  r.dataflow = spec.dataflow.label();
  r.residency = to_string(out.mapping.residency);
  r.seq_len = m.seq_len;
  r.num_tiles = out.mapping.num_tiles;
  r.frequency_hz = spec.hardware.frequency_hz;
  r.total_cycles = out.timeline.total_cycles;
  r.latency_s = static_cast<double>(r.total_cycles) / static_cast<double>(r.frequency_hz);
  r.busy_cycles = out.timeline.busy_cycles;
  r.utilization = utilization(out.timeline);

  const double encoders = static_cast<double>(std::uint64_t{m.num_layers} * m.batch);
  for (const auto& lane : out.timeline.lanes) {
    for (const auto& iv : lane) {
      r.energy.add(iv.kind, iv.energy);
      if (iv.layer >= 0) r.encoder_energy.add(iv.kind, iv.energy, 1.0 / encoders);
      if (is_dynamic_mvm(iv.kind)) r.mvm_dynamic_cycles += iv.duration();
    }
  }
  if (r.total_cycles > 0) {
    r.mvm_dynamic_runtime_share = static_cast<double>(r.mvm_dynamic_cycles) / static_cast<double>(r.total_cycles);
  }

  const BufferFootprint buf = intermediate_buffer(m, spec.dataflow);
  r.peak_score_buffer_bytes = buf.score_bytes;
  r.accumulator_bytes = buf.accumulator_bytes;
  r.peak_buffer_bytes = buf.total();
  r.nvm_write_events = out.mapping.write_events.size();
  r.weight_reload_events = out.mapping.reload_events;
  r.lifetime = lifetime_estimate(out.mapping, spec.hardware.nvm.endurance_writes);
  r.flops = count_flops(graph);
  if (r.energy.total() > 0.0) r.tops_per_watt = tops_per_watt(r);

  r.model_hash = config_hash(to_json(m));
  r.hardware_hash = config_hash(to_json(spec.hardware));
  r.cost_table_hash = config_hash(to_json(spec.cost_table));
  r.dataflow_hash = hex64(fnv1a64(r.dataflow));
  r.policy_hash = hex64(fnv1a64(r.policy));
  r.warnings = out.mapping.warnings;
  return out;
}

inline Report run(const RunSpec& spec) { return run_detailed(spec).report; }

inline Report run(const HardwareSpec& hw, const ModelSpec& model, const DataflowConfig& dataflow,
                  MappingPolicy policy, const CostTable& table = CostTable{},
                  ResidencyRequest residency = ResidencyRequest::Auto) {
  return run(RunSpec{hw, model, dataflow, policy, residency, table});
}

inline Json to_json(const EnergyAccount& e, double scale) {
  Json cats = Json::object();
  for (std::size_t c = 0; c < kEnergyCategories; ++c) {
    const auto cat = static_cast<EnergyCategory>(c);
    Json detail = Json::object();
    for (std::size_t i = 0; i < kEnergyComponents; ++i) {
      if (e.pj[c][i] != 0.0) detail[to_string(static_cast<EnergyComponent>(i))] = e.pj[c][i] * scale;
    }
    cats[to_string(cat)] = {{"total", e.category(cat) * scale}, {"components", detail}};
  }
  return cats;
}

inline Json to_json(const Report& r) {
  Json util = Json::object(), busy = Json::object();
  for (std::size_t i = 0; i < kResources; ++i) {
    util[to_string(static_cast<Resource>(i))] = r.utilization[i];
    busy[to_string(static_cast<Resource>(i))] = r.busy_cycles[i];
  }
  Json lifetime{{"unbounded", r.lifetime.unbounded},
                {"max_writes_per_device_per_inference", r.lifetime.max_writes_per_device_per_inference}};
  lifetime["inferences"] = r.lifetime.unbounded ? Json(nullptr) : Json(r.lifetime.inferences);
  return Json{
      {"schema_version", r.schema_version},
      {"model", r.model_name},
      {"hardware", r.hardware_name},
      {"policy", r.policy},
      {"dataflow", r.dataflow},
      {"residency", r.residency},
      {"seq_len", r.seq_len},
      {"num_tiles", r.num_tiles},
      {"total_cycles", r.total_cycles},
      {"latency_s", r.latency_s},
      {"total_energy_j", r.total_energy_j()},
      {"energy_breakdown_j", to_json(r.energy, 1e-12)},
      {"encoder_energy_j", r.encoder_energy.total() * 1e-12},
      {"encoder_energy_breakdown_j", to_json(r.encoder_energy, 1e-12)},
      {"utilization", util},
      {"busy_cycles", busy},
      {"mvm_dynamic_runtime_share", r.mvm_dynamic_runtime_share},
      {"peak_score_buffer_bytes", r.peak_score_buffer_bytes},
      {"accumulator_bytes", r.accumulator_bytes},
      {"peak_buffer_bytes", r.peak_buffer_bytes},
      {"nvm_write_events", r.nvm_write_events},
      {"weight_reload_events", r.weight_reload_events},
      {"lifetime", lifetime},
      {"flops",
       {{"static", r.flops.static_flops},
        {"dynamic", r.flops.dynamic_flops},
        {"nonmvm", r.flops.nonmvm_flops},
        {"total", r.flops.total()}}},
      {"tops_per_watt", r.tops_per_watt ? Json(*r.tops_per_watt) : Json(nullptr)},
      {"config_hashes",
       {{"model", r.model_hash},
        {"hardware", r.hardware_hash},
        {"cost_table", r.cost_table_hash},
        {"dataflow", r.dataflow_hash},
        {"policy", r.policy_hash}}},
      {"warnings", r.warnings},
  };
}

// ---------------------------------------------------------------------------
// CSV, one row per run. Column order is part of schema version 1.

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "schema_version", "point",           "model",          "hardware",        "policy",
      "dataflow",       "residency",       "seq_len",        "num_tiles",       "total_cycles",
      "latency_s",      "energy_j",        "projection_j",   "attention_mvm_j", "attention_write_j",
      "sfu_accum_j",    "memory_j",        "interconnect_j", "util_projection", "util_attention",
      "util_bus",       "util_sfu",        "peak_score_buffer_bytes",           "peak_buffer_bytes",
      "nvm_write_events", "lifetime_inferences", "tops_per_watt", "error"};
  return cols;
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) {
    if (c == '"') o += '"';
    o += c;
  }
  return o + "\"";
}

}  // namespace detail

inline void write_csv_header(std::ostream& os) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
}

inline void write_csv_row(std::ostream& os, const std::string& point, const Report& r) {
  using detail::fmt_double;
  const std::vector<std::string> cells = {
      std::to_string(r.schema_version),
      detail::csv_escape(point),
      detail::csv_escape(r.model_name),
      detail::csv_escape(r.hardware_name),
      r.policy,
      r.dataflow,
      r.residency,
      std::to_string(r.seq_len),
      std::to_string(r.num_tiles),
      std::to_string(r.total_cycles),
      fmt_double(r.latency_s),
      fmt_double(r.total_energy_j()),
      fmt_double(r.energy.category(EnergyCategory::Projection) * 1e-12),
      fmt_double(r.energy.category(EnergyCategory::AttentionMvm) * 1e-12),
      fmt_double(r.energy.category(EnergyCategory::AttentionWrite) * 1e-12),
      fmt_double(r.energy.category(EnergyCategory::SfuAccum) * 1e-12),
      fmt_double(r.energy.category(EnergyCategory::Memory) * 1e-12),
      fmt_double(r.energy.category(EnergyCategory::Interconnect) * 1e-12),
      fmt_double(r.utilization[0]),
      fmt_double(r.utilization[1]),
      fmt_double(r.utilization[2]),
      fmt_double(r.utilization[3]),
      std::to_string(r.peak_score_buffer_bytes),
      std::to_string(r.peak_buffer_bytes),
      std::to_string(r.nvm_write_events),
      r.lifetime.unbounded ? std::string("inf") : fmt_double(r.lifetime.inferences),
      r.tops_per_watt ? fmt_double(*r.tops_per_watt) : std::string(),
      std::string(),
  };
  for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
  os << "\n";
}

inline void write_csv_error_row(std::ostream& os, const std::string& point, const std::string& error) {
  const std::size_t n = csv_columns().size();
  os << kReportSchemaVersion << "," << detail::csv_escape(point);
  for (std::size_t i = 2; i + 1 < n; ++i) os << ",";
  os << "," << detail::csv_escape(error) << "\n";
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { SeqLen, BlockSize, Policy, Dataflow };

inline SweepAxis parse_sweep_axis(const std::string& s) {
  if (s == "SL" || s == "seq_len") return SweepAxis::SeqLen;
  if (s == "SB" || s == "block") return SweepAxis::BlockSize;
  if (s == "policy") return SweepAxis::Policy;
  if (s == "dataflow") return SweepAxis::Dataflow;
  throw ConfigError("sweep axis: expected SL | SB | policy | dataflow, got '" + s + "'");
}

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::SeqLen: return "SL";
    case SweepAxis::BlockSize: return "SB";
    case SweepAxis::Policy: return "policy";
    case SweepAxis::Dataflow: return "dataflow";
  }
  return "?";
}

inline std::uint32_t parse_count(const std::string& s, const char* what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || s[0] == '-' || v > 0xffffffffULL) {
    throw ConfigError(std::string(what) + ": expected a non-negative integer, got '" + s + "'");
  }
  return static_cast<std::uint32_t>(v);
}

inline RunSpec apply_axis(RunSpec spec, SweepAxis axis, const std::string& value) {
  switch (axis) {
    case SweepAxis::SeqLen: spec.model.seq_len = parse_count(value, "SL"); break;
    case SweepAxis::BlockSize: spec.dataflow = DataflowConfig::sequence_blocking(parse_count(value, "SB")); break;
    case SweepAxis::Policy: spec.policy = parse_policy(value); break;
    case SweepAxis::Dataflow: spec.dataflow = DataflowConfig::parse(value); break;
  }
  return spec;
}

struct SweepPoint {
  std::string value;
  std::optional<Report> report;
  std::string error;  // set when the point failed
};

/// One point per value, in input order. Points run concurrently; a failing
/// point records its error and does not stop the others.
inline std::vector<SweepPoint> sweep(const RunSpec& base, SweepAxis axis, const std::vector<std::string>& values,
                                     unsigned threads = 0) {
  std::vector<SweepPoint> out(values.size());
  if (values.empty()) return out;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(values.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      out[i].value = values[i];
      try {
        out[i].report = run(apply_axis(base, axis, values[i]));
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& points) {
  write_csv_header(os);
  for (const auto& p : points) {
    if (p.report) write_csv_row(os, p.value, *p.report);
    else write_csv_error_row(os, p.value, p.error);
  }
}

}  // namespace imtsim
