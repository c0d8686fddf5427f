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
 * @file workload.hpp
 * @brief Transformer encoder operation graph and FLOP/byte accounting.
 *
 * Every operation is classified as MVMStatic (one operand is a trained
 * weight matrix), MVMDynamic (both operands are produced per input: QK^T and
 * Att x V) or NonMVM (softmax, layer norm, residual adds, activations and
 * the embedding lookup). Dimensions follow the (M, K, N) convention: an
 * M x K activation matrix multiplied by a K x N operand, i.e. M*K*N MACs.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imtsim/common.hpp"
#include "imtsim/dataflow.hpp"

namespace imtsim {

struct ModelSpec {
  std::string name = "bert-base";
  std::uint32_t num_layers = 12;
  std::uint32_t num_heads = 12;
  std::uint32_t hidden_size = 768;  // HS
  std::uint32_t head_size = 64;     // HSS
  std::uint32_t seq_len = 512;      // SL
  std::uint32_t batch = 1;
  std::uint32_t ffn_mult = 4;
  std::uint32_t weight_bits = 8;
  std::uint32_t q_bits = 8;
  std::uint32_t k_bits = 8;
  std::uint32_t v_bits = 8;
  std::uint32_t vocab_size = 30522;
  std::uint32_t num_labels = 2;

  std::uint32_t ffn_size() const { return ffn_mult * hidden_size; }
  std::uint32_t score_bytes() const { return static_cast<std::uint32_t>(ceil_div(q_bits > k_bits ? q_bits : k_bits, 8)); }

  // num_layers == 0 is accepted and denotes an empty workload.
  void validate() const {
    auto positive = [](std::uint32_t v, const char* field) {
      if (v < 1) throw ValidationError(std::string("model: ") + field + " must be >= 1");
    };
    positive(num_heads, "num_heads");
    positive(hidden_size, "hidden_size");
    positive(head_size, "head_size");
    positive(seq_len, "seq_len");
    positive(batch, "batch");
    positive(ffn_mult, "ffn_mult");
    positive(vocab_size, "vocab_size");
    positive(num_labels, "num_labels");
    if (static_cast<std::uint64_t>(num_heads) * head_size != hidden_size) {
      throw ValidationError("model: hidden_size (" + std::to_string(hidden_size) +
                            ") must equal num_heads x head_size (" + std::to_string(num_heads) + " x " +
                            std::to_string(head_size) + ")");
    }
    for (auto [bits, field] : {std::pair{weight_bits, "weight_bits"}, std::pair{q_bits, "q_bits"},
                               std::pair{k_bits, "k_bits"}, std::pair{v_bits, "v_bits"}}) {
      if (!is_supported_bit_width(bits)) {
        throw ValidationError(std::string("model: ") + field + " must be one of {1,2,4,8,16}, got " +
                              std::to_string(bits));
      }
    }
  }

  bool operator==(const ModelSpec&) const = default;
};

inline ModelSpec bert_base(std::uint32_t seq_len = 512) {
  ModelSpec m;
  m.name = "bert-base";
  m.seq_len = seq_len;
  return m;
}

inline ModelSpec bert_large(std::uint32_t seq_len = 512) {
  ModelSpec m;
  m.name = "bert-large";
  m.num_layers = 24;
  m.num_heads = 16;
  m.hidden_size = 1024;
  m.head_size = 64;
  m.seq_len = seq_len;
  return m;
}

enum class OpKind { MVMStatic, MVMDynamic, NonMVM };

enum class NonMvmKind { None, Softmax, LayerNorm, ResidualAdd, Activation, EmbeddingLookup };

/// What a node computes inside the encoder; finer grained than OpKind.
enum class OpRole {
  Embedding,
  QGen,
  KGen,
  VGen,
  Score,  // QK^T
  Softmax,
  AttV,
  OutProj,
  Residual1,
  LayerNorm1,
  Ffn1,
  Gelu,
  Ffn2,
  Residual2,
  LayerNorm2,
  Classifier,
};

inline const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::MVMStatic: return "MVMStatic";
    case OpKind::MVMDynamic: return "MVMDynamic";
    case OpKind::NonMVM: return "NonMVM";
  }
  return "?";
}

inline const char* to_string(OpRole r) {
  switch (r) {
    case OpRole::Embedding: return "embedding";
    case OpRole::QGen: return "q_gen";
    case OpRole::KGen: return "k_gen";
    case OpRole::VGen: return "v_gen";
    case OpRole::Score: return "qk_t";
    case OpRole::Softmax: return "softmax";
    case OpRole::AttV: return "att_v";
    case OpRole::OutProj: return "out_proj";
    case OpRole::Residual1: return "residual1";
    case OpRole::LayerNorm1: return "layernorm1";
    case OpRole::Ffn1: return "ffn1";
    case OpRole::Gelu: return "gelu";
    case OpRole::Ffn2: return "ffn2";
    case OpRole::Residual2: return "residual2";
    case OpRole::LayerNorm2: return "layernorm2";
    case OpRole::Classifier: return "classifier";
  }
  return "?";
}

struct OpDims {
  std::uint64_t m = 0, k = 0, n = 0;
  bool operator==(const OpDims&) const = default;
};

using NodeId = std::uint32_t;
inline constexpr std::int32_t kNoLayer = -1;

struct OpNode {
  NodeId id = 0;
  OpKind kind = OpKind::NonMVM;
  NonMvmKind nonmvm = NonMvmKind::None;
  OpRole role = OpRole::Embedding;
  std::uint32_t batch = 0;
  std::int32_t layer = kNoLayer;  // kNoLayer for embedding and classifier
  std::optional<std::uint32_t> head;
  OpDims dims;  // for NonMVM nodes the tensor is m x n and k == 1
  std::vector<NodeId> preds;

  std::uint64_t macs() const { return kind == OpKind::NonMVM ? 0 : dims.m * dims.k * dims.n; }
};

struct OpGraph {
  ModelSpec model;
  std::vector<OpNode> nodes;

  const OpNode& node(NodeId id) const { return nodes.at(id); }

  /// Id of the node with the given role in (batch, layer[, head]).
  NodeId find(OpRole role, std::uint32_t batch, std::int32_t layer,
              std::optional<std::uint32_t> head = std::nullopt) const {
    for (const auto& n : nodes) {
      if (n.role == role && n.batch == batch && n.layer == layer && n.head == head) return n.id;
    }
    throw Error(std::string("op graph: no node ") + to_string(role) + " in layer " + std::to_string(layer));
  }
};

namespace detail {

inline NodeId add_node(OpGraph& g, OpKind kind, NonMvmKind nk, OpRole role, std::uint32_t batch,
                       std::int32_t layer, std::optional<std::uint32_t> head, OpDims dims,
                       std::vector<NodeId> preds) {
  OpNode n;
  n.id = static_cast<NodeId>(g.nodes.size());
  n.kind = kind;
  n.nonmvm = nk;
  n.role = role;
  n.batch = batch;
  n.layer = layer;
  n.head = head;
  n.dims = dims;
  n.preds = std::move(preds);
  g.nodes.push_back(std::move(n));
  return g.nodes.back().id;
}

}  // namespace detail

/// Builds the dependency DAG for `model`. Each batch entry is an independent
/// copy of the sequence graph. Node ids are assigned in topological order.
inline OpGraph build_op_graph(const ModelSpec& model) {
  model.validate();
  OpGraph g;
  g.model = model;
  if (model.num_layers == 0) return g;

  const std::uint64_t sl = model.seq_len, hs = model.hidden_size, hss = model.head_size;
  const std::uint64_t ffn = model.ffn_size();
  using K = OpKind;
  using N = NonMvmKind;
  using R = OpRole;

  for (std::uint32_t b = 0; b < model.batch; ++b) {
    NodeId prev = detail::add_node(g, K::NonMVM, N::EmbeddingLookup, R::Embedding, b, kNoLayer, std::nullopt,
                                   {sl, 1, hs}, {});
    for (std::uint32_t l = 0; l < model.num_layers; ++l) {
      const auto layer = static_cast<std::int32_t>(l);
      const NodeId q = detail::add_node(g, K::MVMStatic, N::None, R::QGen, b, layer, std::nullopt, {sl, hs, hs}, {prev});
      const NodeId k = detail::add_node(g, K::MVMStatic, N::None, R::KGen, b, layer, std::nullopt, {sl, hs, hs}, {prev});
      const NodeId v = detail::add_node(g, K::MVMStatic, N::None, R::VGen, b, layer, std::nullopt, {sl, hs, hs}, {prev});
      std::vector<NodeId> head_outputs;
      for (std::uint32_t h = 0; h < model.num_heads; ++h) {
        const NodeId s = detail::add_node(g, K::MVMDynamic, N::None, R::Score, b, layer, h, {sl, hss, sl}, {q, k});
        const NodeId sm = detail::add_node(g, K::NonMVM, N::Softmax, R::Softmax, b, layer, h, {sl, 1, sl}, {s});
        head_outputs.push_back(detail::add_node(g, K::MVMDynamic, N::None, R::AttV, b, layer, h, {sl, sl, hss}, {sm, v}));
      }
      const NodeId o = detail::add_node(g, K::MVMStatic, N::None, R::OutProj, b, layer, std::nullopt, {sl, hs, hs},
                                        head_outputs);
      const NodeId r1 = detail::add_node(g, K::NonMVM, N::ResidualAdd, R::Residual1, b, layer, std::nullopt,
                                         {sl, 1, hs}, {o, prev});
      const NodeId ln1 = detail::add_node(g, K::NonMVM, N::LayerNorm, R::LayerNorm1, b, layer, std::nullopt,
                                          {sl, 1, hs}, {r1});
      const NodeId f1 = detail::add_node(g, K::MVMStatic, N::None, R::Ffn1, b, layer, std::nullopt, {sl, hs, ffn}, {ln1});
      const NodeId act = detail::add_node(g, K::NonMVM, N::Activation, R::Gelu, b, layer, std::nullopt, {sl, 1, ffn}, {f1});
      const NodeId f2 = detail::add_node(g, K::MVMStatic, N::None, R::Ffn2, b, layer, std::nullopt, {sl, ffn, hs}, {act});
      const NodeId r2 = detail::add_node(g, K::NonMVM, N::ResidualAdd, R::Residual2, b, layer, std::nullopt,
                                         {sl, 1, hs}, {f2, ln1});
      prev = detail::add_node(g, K::NonMVM, N::LayerNorm, R::LayerNorm2, b, layer, std::nullopt, {sl, 1, hs}, {r2});
    }
    // Classification reads the pooled first token.
    detail::add_node(g, K::MVMStatic, N::None, R::Classifier, b, kNoLayer, std::nullopt,
                     {1, hs, model.num_labels}, {prev});
  }
  return g;
}

struct FlopsBreakdown {
  std::uint64_t static_flops = 0;
  std::uint64_t dynamic_flops = 0;
  std::uint64_t nonmvm_flops = 0;

  std::uint64_t total() const {
    return checked_add(checked_add(static_flops, dynamic_flops, "flops"), nonmvm_flops, "flops");
  }
  bool operator==(const FlopsBreakdown&) const = default;
};

/// Element operations charged per softmax score: max-subtract, exp, sum,
/// divide, accumulate.
inline constexpr std::uint64_t kSoftmaxOpsPerScore = 5;

/// FLOPs of a single node. One MAC counts as two FLOPs; NonMVM nodes count
/// one op per tensor element except softmax; embedding lookups are free.
inline std::uint64_t node_flops(const OpNode& n) {
  if (n.kind != OpKind::NonMVM) {
    return checked_mul(2, checked_mul(checked_mul(n.dims.m, n.dims.k, "flops"), n.dims.n, "flops"), "flops");
  }
  const std::uint64_t elems = checked_mul(n.dims.m, n.dims.n, "flops");
  switch (n.nonmvm) {
    case NonMvmKind::EmbeddingLookup: return 0;
    case NonMvmKind::Softmax: return checked_mul(kSoftmaxOpsPerScore, elems, "flops");
    default: return elems;
  }
}

namespace detail {
template <class Pred>
FlopsBreakdown count_flops_if(const OpGraph& g, Pred keep) {
  FlopsBreakdown f;
  for (const auto& n : g.nodes) {
    if (!keep(n)) continue;
    const std::uint64_t v = node_flops(n);
    switch (n.kind) {
      case OpKind::MVMStatic: f.static_flops = checked_add(f.static_flops, v, "flops"); break;
      case OpKind::MVMDynamic: f.dynamic_flops = checked_add(f.dynamic_flops, v, "flops"); break;
      case OpKind::NonMVM: f.nonmvm_flops = checked_add(f.nonmvm_flops, v, "flops"); break;
    }
  }
  return f;
}
}  // namespace detail

inline FlopsBreakdown count_flops(const OpGraph& g) {
  return detail::count_flops_if(g, [](const OpNode&) { return true; });
}

/// FLOPs of one encoder layer of batch entry 0.
inline FlopsBreakdown count_layer_flops(const OpGraph& g, std::uint32_t layer) {
  const auto l = static_cast<std::int32_t>(layer);
  return detail::count_flops_if(g, [l](const OpNode& n) { return n.batch == 0 && n.layer == l; });
}

enum class FractionScope { AttentionBlock, FullEncoder };

/// Share of MVM FLOPs that are dynamic within one encoder layer.
/// AttentionBlock counts the Q/K/V/output projections plus the two dynamic
/// MVMs; FullEncoder adds the FFN. NonMVM work is excluded from both.
inline double dynamic_fraction(const ModelSpec& model, FractionScope scope) {
  ModelSpec one = model;
  one.num_layers = 1;
  one.batch = 1;
  const OpGraph g = build_op_graph(one);
  const auto f = detail::count_flops_if(g, [scope](const OpNode& n) {
    if (n.layer != 0 || n.kind == OpKind::NonMVM) return false;
    if (scope == FractionScope::AttentionBlock) return n.role != OpRole::Ffn1 && n.role != OpRole::Ffn2;
    return true;
  });
  const double dyn = static_cast<double>(f.dynamic_flops);
  const double all = dyn + static_cast<double>(f.static_flops);
  return all == 0.0 ? 0.0 : dyn / all;
}

/// Per-head (per-AHCT) intermediate storage of the attention computation.
struct BufferFootprint {
  std::uint64_t score_bytes = 0;        // score block held between QK^T and Att x V
  std::uint64_t accumulator_bytes = 0;  // running outputs + normalizers across blocks
  std::uint64_t total() const { return score_bytes + accumulator_bytes; }
};

/// Traditional: the full SL x SL score matrix. Sequence blocking: one SB x SB
/// score block plus the cross-block accumulator (HSS x SB outputs and SB
/// running sums). A single block needs no accumulator.
inline BufferFootprint intermediate_buffer(const ModelSpec& model, const DataflowConfig& dataflow) {
  dataflow.validate(model.seq_len);
  const std::uint64_t sb = dataflow.block_size(model.seq_len);
  const std::uint64_t score_w = model.score_bytes();
  BufferFootprint fp;
  fp.score_bytes = sb * sb * score_w;
  if (dataflow.num_blocks(model.seq_len) > 1) {
    const std::uint64_t out_w = ceil_div(model.v_bits, 8);
    fp.accumulator_bytes = model.head_size * sb * out_w + sb * score_w;
  }
  return fp;
}

inline std::uint64_t intermediate_buffer_bytes(const ModelSpec& model, const DataflowConfig& dataflow) {
  return intermediate_buffer(model, dataflow).total();
}

}  // namespace imtsim
