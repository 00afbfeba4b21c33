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
#include <functional>
#include <string>
#include <vector>

#include "stsa/subspace.hpp"
#include "stsa/tensor.hpp"

namespace stsa {

// Projections: tokens [n, C] -> Q, K, V [n, d] -> heads -> [n, d] -> W_o -> [n, C].
template <typename T>
struct AttentionParams {
  Matrix<T> query;   // [C, d]
  Matrix<T> key;     // [C, d]
  Matrix<T> value;   // [C, d]
  Matrix<T> output;  // [d, C]
  std::size_t heads = 1;

  std::size_t channels() const { return query.rows(); }
  std::size_t width() const { return query.cols(); }
  std::size_t head_width() const { return width() / heads; }

  void validate() const;

  // Entries drawn N(0, scale^2) from a seeded stream, in the order
  // query, key, value, output.
  static AttentionParams random(std::size_t channels, std::size_t width, std::size_t heads,
                                std::uint64_t seed, double scale);
  // W_q = W_k = 0, W_v = W_o = I: uniform weights, output = window mean.
  static AttentionParams averaging(std::size_t channels);
};

// Multiply-accumulate tallies, split the same way as CostReport.
struct MacCounter {
  std::uint64_t projection = 0;
  std::uint64_t score = 0;
  std::uint64_t value = 0;

  std::uint64_t total() const { return projection + score + value; }
};

// Softmax(Q K^T / sqrt(d_head)) V per head, heads concatenated, times W_o.
template <typename T>
Matrix<T> subspace_attention(const Matrix<T>& tokens, const AttentionParams<T>& params,
                             MacCounter* counter = nullptr);

// Row-stochastic attention weights [n, n], one matrix per head.
template <typename T>
std::vector<Matrix<T>> attention_probabilities(const Matrix<T>& tokens,
                                               const AttentionParams<T>& params);

// split -> subspace_attention per window -> merge. No residual.
template <typename T>
LatentVideo<T> windowed_attention(const LatentVideo<T>& x, const SubspaceSpec& spec,
                                  const AttentionParams<T>& params, MacCounter* counter = nullptr);

// allow(q, k) over linear cell indices (f * H + h) * W + w. Empty = all pairs.
using AttentionMask = std::function<bool(std::size_t query, std::size_t key)>;

inline constexpr std::size_t kDefaultTokenCap = 4096;

// Dense attention over all F*H*W tokens, optionally masked. Refuses inputs
// above token_cap.
template <typename T>
LatentVideo<T> full_attention(const LatentVideo<T>& x, const AttentionParams<T>& params,
                              const AttentionMask& allow = {},
                              std::size_t token_cap = kDefaultTokenCap,
                              MacCounter* counter = nullptr);

enum class CrossFrameMode { kFirst, kMiddle, kPrevious, kAll };

// Key/value frames used by the queries of frame k.
std::vector<std::size_t> crossframe_sources(CrossFrameMode mode, std::size_t frame,
                                            std::size_t frames);

// Tokens of each frame attend to the tokens of the designated frame(s):
// first = 0, middle = F/2, previous = max(k-1, 0), all = every frame.
template <typename T>
LatentVideo<T> crossframe_attention(const LatentVideo<T>& x, CrossFrameMode mode,
                                    const AttentionParams<T>& params,
                                    MacCounter* counter = nullptr);

// Attention across frames at each fixed (h, w).
template <typename T>
LatentVideo<T> temporal_attention(const LatentVideo<T>& x, const AttentionParams<T>& params,
                                  MacCounter* counter = nullptr);

template <typename T>
struct AttentionGrads {
  Matrix<T> tokens;
  AttentionParams<T> params;  // holds dL/dW_q, dL/dW_k, dL/dW_v, dL/dW_o
};

// Gradients of sum(upstream * subspace_attention(tokens, params)).
// Double precision only; float instantiations throw PrecisionError.
template <typename T>
AttentionGrads<T> attention_backward(const Matrix<T>& tokens, const AttentionParams<T>& params,
                                     const Matrix<T>& upstream);

// Elementwise accumulate: into += g (weights and heads must match).
template <typename T>
void accumulate(AttentionParams<T>& into, const AttentionParams<T>& g);

}  // namespace stsa
