// Copyright 2026 The STSA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "stsa/attention.hpp"
#include "stsa/subspace.hpp"

namespace stsa {

enum class AttentionMode {
  kSubspace,
  kTemporal,
  kCrossFrameFirst,
  kCrossFrameMiddle,
  kCrossFramePrevious,
  kCrossFrameAll,
  kFull,
};

std::string to_string(AttentionMode mode);
// "subspace", "temporal", "crossframe-first|middle|previous|all", "full"
AttentionMode parse_attention_mode(const std::string& text);

struct AttentionDims {
  std::size_t frames = 16;
  std::size_t rows = 16;
  std::size_t cols = 16;
  std::size_t channels = 8;
  std::size_t width = 8;  // d

  std::size_t tokens() const { return frames * rows * cols; }
};

// Closed-form multiply-accumulate counts for one attention layer.
//   projection = 4 * T * C * d        (Q, K, V and output projections)
//   score      = sum over calls of queries * keys * d
//   value      = same as score        (P V)
// peak_score_buffer is the largest queries x keys matrix of a single call.
struct CostReport {
  AttentionMode mode = AttentionMode::kSubspace;
  AttentionDims dims;
  std::optional<SubspaceSpec> subspace;
  std::uint64_t projection = 0;
  std::uint64_t score = 0;
  std::uint64_t value = 0;
  std::uint64_t peak_score_buffer = 0;

  std::uint64_t total() const { return projection + score + value; }
  std::uint64_t score_and_value() const { return score + value; }

  // Stable key order: mode, dims, subspace, projection, score, value, total,
  // peak_score_buffer.
  std::string to_json() const;
};

// Subspace mode requires spec and divisible dims.
CostReport cost_model(AttentionMode mode, const AttentionDims& dims,
                      const std::optional<SubspaceSpec>& spec = std::nullopt);

// Runs the attention variant on random inputs and returns its tallies.
MacCounter measure_macs(AttentionMode mode, const AttentionDims& dims,
                        const std::optional<SubspaceSpec>& spec, std::uint64_t seed);

}  // namespace stsa
