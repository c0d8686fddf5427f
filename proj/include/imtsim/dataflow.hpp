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

#pragma once

#include <cstdint>
#include <string>

#include "imtsim/common.hpp"

namespace imtsim {

enum class DataflowMode { Traditional, SequenceBlocking };

/// How the sequence is fed through the two engines. The traditional dataflow
/// is the single-block case: the whole sequence is one block.
struct DataflowConfig {
  DataflowMode mode = DataflowMode::Traditional;
  std::uint32_t block = 0;  // SB; only meaningful for SequenceBlocking

  static DataflowConfig traditional() { return {}; }
  static DataflowConfig sequence_blocking(std::uint32_t sb) {
    return {DataflowMode::SequenceBlocking, sb};
  }

  void validate(std::uint32_t seq_len) const {
    if (mode == DataflowMode::SequenceBlocking) {
      if (block < 1) throw ValidationError("dataflow: sequence block SB must be >= 1");
      if (block > seq_len) {
        throw ValidationError("dataflow: sequence block SB=" + std::to_string(block) +
                              " exceeds sequence length SL=" + std::to_string(seq_len));
      }
    }
  }

  std::uint32_t block_size(std::uint32_t seq_len) const {
    return mode == DataflowMode::Traditional ? seq_len : block;
  }

  std::uint32_t num_blocks(std::uint32_t seq_len) const {
    if (seq_len == 0) return 0;
    return static_cast<std::uint32_t>(ceil_div(seq_len, block_size(seq_len)));
  }

  // The last block is ragged when SB does not divide SL.
  std::uint32_t block_len(std::uint32_t b, std::uint32_t seq_len) const {
    const std::uint32_t sb = block_size(seq_len);
    const std::uint32_t start = b * sb;
    return seq_len - start < sb ? seq_len - start : sb;
  }

  std::string label() const {
    return mode == DataflowMode::Traditional ? "traditional" : "seqblock:" + std::to_string(block);
  }

  /// Accepts "traditional" or "seqblock:<SB>".
  static DataflowConfig parse(const std::string& text) {
    if (text == "traditional") return traditional();
    const std::string prefix = "seqblock:";
    if (text.rfind(prefix, 0) == 0) {
      const std::string num = text.substr(prefix.size());
      if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError("dataflow: bad block size in '" + text + "'");
      }
      return sequence_blocking(static_cast<std::uint32_t>(std::stoul(num)));
    }
    throw ConfigError("dataflow: expected 'traditional' or 'seqblock:<SB>', got '" + text + "'");
  }

  bool operator==(const DataflowConfig&) const = default;
};

}  // namespace imtsim
