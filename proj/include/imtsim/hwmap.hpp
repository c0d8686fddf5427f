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
 * @file hwmap.hpp
 * @brief Capacity checks and placement of a model onto the accelerator.
 *
 * Static weights go to projection-engine crossbars. In spatial residency
 * every layer owns its crossbars; in per-layer replay one layer's worth of
 * crossbars is reprogrammed before each layer. Attention heads go to AHCTs
 * round-robin. The embedding table and the small classifier matrix live in
 * the read-only tiles.
 */

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "imtsim/common.hpp"
#include "imtsim/hardware.hpp"
#include "imtsim/tiling.hpp"
#include "imtsim/workload.hpp"

namespace imtsim {

enum class MappingPolicy {
  Hybrid,       // MVMStatic on NVM crossbars, MVMDynamic on SRAM AHCTs
  NvmAll,       // both on NVM crossbars; dynamic operands reprogrammed per inference
  SimdDynamic,  // MVMDynamic on the temporal 1-D SIMD lanes
};

enum class Residency { Spatial, PerLayerReplay };

/// Residency requested by the user; Auto tries spatial first.
enum class ResidencyRequest { Auto, Spatial, PerLayerReplay };

inline const char* to_string(MappingPolicy p) {
  switch (p) {
    case MappingPolicy::Hybrid: return "hybrid";
    case MappingPolicy::NvmAll: return "nvm_all";
    case MappingPolicy::SimdDynamic: return "simd_dynamic";
  }
  return "?";
}

inline MappingPolicy parse_policy(const std::string& s) {
  if (s == "hybrid") return MappingPolicy::Hybrid;
  if (s == "nvm_all") return MappingPolicy::NvmAll;
  if (s == "simd_dynamic") return MappingPolicy::SimdDynamic;
  throw ConfigError("policy: expected hybrid | nvm_all | simd_dynamic, got '" + s + "'");
}

inline const char* to_string(Residency r) {
  return r == Residency::Spatial ? "spatial" : "per_layer_replay";
}

inline const char* to_string(ResidencyRequest r) {
  switch (r) {
    case ResidencyRequest::Auto: return "auto";
    case ResidencyRequest::Spatial: return "spatial";
    case ResidencyRequest::PerLayerReplay: return "per_layer_replay";
  }
  return "?";
}

inline ResidencyRequest parse_residency(const std::string& s) {
  if (s == "auto") return ResidencyRequest::Auto;
  if (s == "spatial") return ResidencyRequest::Spatial;
  if (s == "per_layer_replay") return ResidencyRequest::PerLayerReplay;
  throw ConfigError("residency: expected auto | spatial | per_layer_replay, got '" + s + "'");
}

/// A static weight matrix as seen by the projection engine.
struct WeightMatrix {
  OpRole role;
  std::uint64_t rows;  // input dimension
  std::uint64_t cols;  // output dimension
};

inline std::vector<WeightMatrix> encoder_weight_matrices(const ModelSpec& m) {
  const std::uint64_t hs = m.hidden_size, ffn = m.ffn_size();
  return {{OpRole::QGen, hs, hs},    {OpRole::KGen, hs, hs},   {OpRole::VGen, hs, hs},
          {OpRole::OutProj, hs, hs}, {OpRole::Ffn1, hs, ffn}, {OpRole::Ffn2, ffn, hs}};
}

/// Dynamic operands reprogrammed into crossbars under NvmAll: K^T (HSS x SL)
/// and V (SL x HSS) per head.
inline std::vector<WeightMatrix> dynamic_operand_matrices(const ModelSpec& m) {
  return {{OpRole::KGen, m.head_size, m.seq_len}, {OpRole::VGen, m.seq_len, m.head_size}};
}

inline std::uint64_t static_crossbars_per_layer(const HardwareSpec& hw, const ModelSpec& m) {
  const auto& p = hw.projection;
  std::uint64_t n = 0;
  for (const auto& w : encoder_weight_matrices(m)) {
    n += tile_matrix(w.rows, w.cols, m.weight_bits, p.cell_bits, p.xbar_rows, p.xbar_cols).total_crossbars;
  }
  return n;
}

inline std::uint64_t dynamic_crossbars_per_layer(const HardwareSpec& hw, const ModelSpec& m) {
  const auto& p = hw.projection;
  const std::uint32_t bits[2] = {m.k_bits, m.v_bits};
  std::uint64_t n = 0;
  const auto mats = dynamic_operand_matrices(m);
  for (std::size_t i = 0; i < mats.size(); ++i) {
    const std::uint32_t b = bits[i] < p.cell_bits ? p.cell_bits : bits[i];
    n += tile_matrix(mats[i].rows, mats[i].cols, b, p.cell_bits, p.xbar_rows, p.xbar_cols).total_crossbars;
  }
  return n * m.num_heads;
}

/// Bytes held by the read-only tiles: embedding table plus classifier weights.
inline std::uint64_t readonly_bytes_required(const ModelSpec& m) {
  const std::uint64_t wbytes = ceil_div(m.weight_bits, 8);
  return std::uint64_t{m.vocab_size} * m.hidden_size * wbytes + std::uint64_t{m.hidden_size} * m.num_labels * wbytes;
}

struct CapacityReport {
  Residency residency = Residency::Spatial;
  std::uint64_t projection_crossbars_required = 0;
  std::uint64_t projection_crossbars_available = 0;
  std::uint64_t projection_cells_required = 0;
  std::uint64_t projection_cells_available = 0;
  bool projection_ok = false;
  std::uint64_t min_tiles = 0;  // smallest num_tiles for which the projection check passes

  bool attention_checked = false;  // only policies that use the AHCTs
  std::uint64_t attention_bits_required_per_ahct = 0;  // Q and V of one head resident
  std::uint64_t attention_bits_available_per_ahct = 0;
  bool attention_ok = true;

  std::uint64_t readonly_bytes_required = 0;
  std::uint64_t readonly_bytes_available = 0;
  bool readonly_ok = false;

  bool pass() const { return projection_ok && attention_ok && readonly_ok; }
  double projection_occupancy() const {
    return projection_cells_available == 0
               ? 0.0
               : static_cast<double>(projection_cells_required) / static_cast<double>(projection_cells_available);
  }

  std::string summary() const {
    std::string s = std::string("residency ") + to_string(residency) + ": ";
    if (pass()) return s + "pass";
    s += "FAIL";
    if (!projection_ok) {
      s += "; projection needs " + std::to_string(projection_crossbars_required) + " crossbars, has " +
           std::to_string(projection_crossbars_available) + " (min " + std::to_string(min_tiles) + " tiles)";
    }
    if (!attention_ok) {
      s += "; AHCT needs " + std::to_string(attention_bits_required_per_ahct) + " bits, has " +
           std::to_string(attention_bits_available_per_ahct);
    }
    if (!readonly_ok) {
      s += "; read-only tiles need " + std::to_string(readonly_bytes_required) + " bytes, have " +
           std::to_string(readonly_bytes_available);
    }
    return s;
  }
};

/// Failures are reported, never thrown; the caller decides.
inline CapacityReport validate_capacity(const HardwareSpec& hw, const ModelSpec& model, Residency residency,
                                        MappingPolicy policy = MappingPolicy::Hybrid) {
  const auto& p = hw.projection;
  CapacityReport r;
  r.residency = residency;

  std::uint64_t xbars = 0;
  if (model.num_layers > 0) {
    const std::uint64_t per_layer = static_crossbars_per_layer(hw, model);
    xbars = residency == Residency::Spatial ? per_layer * model.num_layers : per_layer;
    if (policy == MappingPolicy::NvmAll) xbars += dynamic_crossbars_per_layer(hw, model);
  }
  r.projection_crossbars_required = xbars;
  r.projection_crossbars_available = p.total_crossbars();
  r.projection_cells_required = xbars * p.cells_per_crossbar();
  r.projection_cells_available = p.total_crossbars() * p.cells_per_crossbar();
  r.projection_ok = r.projection_crossbars_required <= r.projection_crossbars_available;
  r.min_tiles = ceil_div(xbars, p.crossbars_per_tile());

  if (policy == MappingPolicy::Hybrid && model.num_layers > 0) {
    r.attention_checked = true;
    r.attention_bits_required_per_ahct =
        std::uint64_t{model.head_size} * model.seq_len * (std::uint64_t{model.q_bits} + model.v_bits);
    r.attention_bits_available_per_ahct = hw.attention.bits_per_ahct();
    r.attention_ok = r.attention_bits_required_per_ahct <= r.attention_bits_available_per_ahct;
  }

  r.readonly_bytes_required = model.num_layers > 0 ? readonly_bytes_required(model) : 0;
  r.readonly_bytes_available = p.readonly_tile_bytes;
  r.readonly_ok = r.readonly_bytes_required <= r.readonly_bytes_available;
  return r;
}

struct CrossbarLocation {
  std::uint32_t tile = 0, core = 0, crossbar = 0;
  bool operator==(const CrossbarLocation&) const = default;
};

struct MatrixAllocation {
  std::int32_t layer = 0;
  OpRole role = OpRole::QGen;
  std::optional<std::uint32_t> head;  // dynamic operands only
  std::uint64_t rows = 0, cols = 0;
  MatrixTiling tiling;
  std::uint64_t first_crossbar = 0;  // global row-major crossbar index

  std::uint64_t end_crossbar() const { return first_crossbar + tiling.total_crossbars; }
};

struct HeadAssignment {
  std::uint32_t head = 0;
  std::uint32_t ahct = 0;
  std::uint32_t slot = 0;  // time-multiplex slot on that AHCT
};

/// One reprogramming of a dynamic operand (K^T or V of one head).
struct WriteEvent {
  std::uint32_t batch = 0;
  std::uint32_t layer = 0;
  std::uint32_t head = 0;
  OpRole matrix = OpRole::KGen;
};

struct Mapping {
  MappingPolicy policy = MappingPolicy::Hybrid;
  Residency residency = Residency::Spatial;
  std::uint32_t num_tiles = 0;  // after auto-scaling
  std::vector<std::string> warnings;
  CapacityReport capacity;

  std::vector<MatrixAllocation> static_allocations;   // one entry per (layer, matrix)
  std::vector<MatrixAllocation> dynamic_allocations;  // NvmAll: shared by all layers
  std::vector<HeadAssignment> heads;                  // Hybrid only
  std::uint32_t time_multiplex_slots = 1;

  std::vector<WriteEvent> write_events;  // NVM reprogram events per inference
  std::uint64_t reload_events = 0;       // per-layer weight reloads per inference
  std::uint64_t max_writes_per_device = 0;

  std::uint64_t crossbars_used() const {
    std::uint64_t hi = 0;
    for (const auto& a : static_allocations) hi = std::max(hi, a.end_crossbar());
    for (const auto& a : dynamic_allocations) hi = std::max(hi, a.end_crossbar());
    return hi;
  }
};

inline CrossbarLocation locate_crossbar(const HardwareSpec& hw, std::uint64_t global_index) {
  const auto& p = hw.projection;
  CrossbarLocation loc;
  loc.tile = static_cast<std::uint32_t>(global_index / p.crossbars_per_tile());
  loc.core = static_cast<std::uint32_t>((global_index / p.crossbars_per_core) % p.cores_per_tile);
  loc.crossbar = static_cast<std::uint32_t>(global_index % p.crossbars_per_core);
  return loc;
}

/// Chooses a residency, grows the tile count if permitted, and places every
/// matrix and head. Throws CapacityError when nothing fits.
/// `effective_hw` (optional) receives the hardware after auto-scaling.
inline Mapping map_model(const HardwareSpec& hw, const ModelSpec& model, MappingPolicy policy,
                         ResidencyRequest request = ResidencyRequest::Auto, HardwareSpec* effective_hw = nullptr) {
  hw.validate();
  model.validate();
  HardwareSpec eff = hw;
  Mapping m;
  m.policy = policy;

  const CapacityReport spatial = validate_capacity(eff, model, Residency::Spatial, policy);
  const CapacityReport replay = validate_capacity(eff, model, Residency::PerLayerReplay, policy);

  auto attention_and_rom_ok = [](const CapacityReport& r) { return r.attention_ok && r.readonly_ok; };
  if (!attention_and_rom_ok(spatial)) {
    throw CapacityError("capacity: " + spatial.summary());
  }

  if (request == ResidencyRequest::PerLayerReplay) {
    if (!replay.pass()) throw CapacityError("capacity: " + replay.summary());
    m.residency = Residency::PerLayerReplay;
  } else if (spatial.pass()) {
    m.residency = Residency::Spatial;
  } else if (eff.auto_scale_tiles) {
    eff.projection.num_tiles = static_cast<std::uint32_t>(spatial.min_tiles);
    m.residency = Residency::Spatial;
    m.warnings.push_back("projection engine scaled from " + std::to_string(hw.projection.num_tiles) + " to " +
                         std::to_string(eff.projection.num_tiles) + " tiles to hold all layers");
  } else if (request == ResidencyRequest::Auto && replay.pass()) {
    m.residency = Residency::PerLayerReplay;
    m.warnings.push_back("weights of all layers do not fit (min " + std::to_string(spatial.min_tiles) +
                         " tiles); falling back to per-layer replay");
  } else {
    if (request == ResidencyRequest::Spatial) throw CapacityError("capacity: " + spatial.summary());
    throw CapacityError("capacity: " + spatial.summary() + "; " + replay.summary());
  }
  m.num_tiles = eff.projection.num_tiles;
  m.capacity = validate_capacity(eff, model, m.residency, policy);

  const auto& p = eff.projection;
  std::uint64_t next = 0;
  if (model.num_layers > 0) {
    const auto mats = encoder_weight_matrices(model);
    for (std::uint32_t l = 0; l < model.num_layers; ++l) {
      if (m.residency == Residency::PerLayerReplay) next = 0;  // every layer reuses the same region
      for (const auto& w : mats) {
        MatrixAllocation a;
        a.layer = static_cast<std::int32_t>(l);
        a.role = w.role;
        a.rows = w.rows;
        a.cols = w.cols;
        a.tiling = tile_matrix(w.rows, w.cols, model.weight_bits, p.cell_bits, p.xbar_rows, p.xbar_cols);
        a.first_crossbar = next;
        next += a.tiling.total_crossbars;
        m.static_allocations.push_back(a);
      }
    }
    if (m.residency == Residency::PerLayerReplay && model.num_layers > 1) {
      m.reload_events = std::uint64_t{model.num_layers} * model.batch;
    }

    if (policy == MappingPolicy::NvmAll) {
      const auto dyn = dynamic_operand_matrices(model);
      const std::uint32_t bits[2] = {model.k_bits, model.v_bits};
      for (std::uint32_t h = 0; h < model.num_heads; ++h) {
        for (std::size_t i = 0; i < dyn.size(); ++i) {
          MatrixAllocation a;
          a.layer = kNoLayer;
          a.role = dyn[i].role;
          a.head = h;
          a.rows = dyn[i].rows;
          a.cols = dyn[i].cols;
          const std::uint32_t b = bits[i] < p.cell_bits ? p.cell_bits : bits[i];
          a.tiling = tile_matrix(a.rows, a.cols, b, p.cell_bits, p.xbar_rows, p.xbar_cols);
          a.first_crossbar = next;
          next += a.tiling.total_crossbars;
          m.dynamic_allocations.push_back(a);
        }
      }
      for (std::uint32_t b = 0; b < model.batch; ++b) {
        for (std::uint32_t l = 0; l < model.num_layers; ++l) {
          for (std::uint32_t h = 0; h < model.num_heads; ++h) {
            m.write_events.push_back({b, l, h, OpRole::KGen});
            m.write_events.push_back({b, l, h, OpRole::VGen});
          }
        }
      }
    }

    if (policy == MappingPolicy::Hybrid) {
      const std::uint32_t ahcts = eff.attention.num_ahct();
      for (std::uint32_t h = 0; h < model.num_heads; ++h) m.heads.push_back({h, h % ahcts, h / ahcts});
      m.time_multiplex_slots = static_cast<std::uint32_t>(ceil_div(model.num_heads, ahcts));
      if (m.time_multiplex_slots > 1) {
        m.warnings.push_back(std::to_string(model.num_heads) + " heads on " + std::to_string(ahcts) +
                             " AHCTs: time-multiplexed over " + std::to_string(m.time_multiplex_slots) + " slots");
      }
    }

    // Every dynamic-region device is rewritten once per layer; in replay every
    // static device is rewritten once per layer.
    const std::uint64_t per_inference = std::uint64_t{model.num_layers} * model.batch;
    if (policy == MappingPolicy::NvmAll) m.max_writes_per_device = per_inference;
    if (m.reload_events > 0) m.max_writes_per_device = std::max(m.max_writes_per_device, per_inference);
  }

  if (effective_hw) *effective_hw = eff;
  return m;
}

struct LifetimeEstimate {
  bool unbounded = false;
  double inferences = std::numeric_limits<double>::infinity();
  std::uint64_t max_writes_per_device_per_inference = 0;
};

inline LifetimeEstimate lifetime_estimate(std::uint64_t max_writes_per_device, std::uint64_t endurance_writes) {
  if (endurance_writes < 1) throw ValidationError("lifetime: endurance_writes must be >= 1");
  LifetimeEstimate l;
  l.max_writes_per_device_per_inference = max_writes_per_device;
  if (max_writes_per_device == 0) {
    l.unbounded = true;
    return l;
  }
  l.inferences = static_cast<double>(endurance_writes) / static_cast<double>(max_writes_per_device);
  return l;
}

inline LifetimeEstimate lifetime_estimate(const Mapping& mapping, std::uint64_t endurance_writes) {
  return lifetime_estimate(mapping.max_writes_per_device, endurance_writes);
}

}  // namespace imtsim
