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

#include "stsa/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stsa/rng.hpp"

namespace stsa {

template <typename T>
void AttentionParams<T>::validate() const {
  const std::size_t c = query.rows();
  const std::size_t d = query.cols();
  if (c == 0 || d == 0) throw DimensionError("attention projections must be non-empty");
  if (key.rows() != c || key.cols() != d || value.rows() != c || value.cols() != d) {
    throw DimensionError("W_q, W_k, W_v must all be [C, d]");
  }
  if (output.rows() != d || output.cols() != c) {
    throw DimensionError("W_o must be [d, C] = [" + std::to_string(d) + ", " + std::to_string(c) +
                         "]");
  }
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("projection width " + std::to_string(d) + " not divisible by " +
                      std::to_string(heads) + " heads");
  }
  if (!query.all_finite() || !key.all_finite() || !value.all_finite() || !output.all_finite()) {
    throw NumericError("attention parameters contain NaN or Inf");
  }
}

template <typename T>
AttentionParams<T> AttentionParams<T>::random(std::size_t channels, std::size_t width,
                                              std::size_t heads, std::uint64_t seed,
                                              double scale) {
  Rng rng(seed);
  auto fill = [&](std::size_t r, std::size_t c) {
    Matrix<T> m(r, c);
    for (T& v : m.values()) v = static_cast<T>(scale * rng.normal());
    return m;
  };
  AttentionParams p;
  p.query = fill(channels, width);
  p.key = fill(channels, width);
  p.value = fill(channels, width);
  p.output = fill(width, channels);
  p.heads = heads;
  p.validate();
  return p;
}

template <typename T>
AttentionParams<T> AttentionParams<T>::averaging(std::size_t channels) {
  AttentionParams p;
  p.query = Matrix<T>(channels, channels);
  p.key = Matrix<T>(channels, channels);
  p.value = Matrix<T>::identity(channels);
  p.output = Matrix<T>::identity(channels);
  p.heads = 1;
  return p;
}

namespace {

template <typename T>
void require_finite(const Matrix<T>& m, const char* what) {
  if (!m.all_finite()) throw NumericError(std::string(what) + " contains NaN or Inf");
}

// a [n, k] * b [k, m]
template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto o = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      auto br = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aik * br[j];
    }
  }
  return out;
}

// a^T [k, n]^T * b [n, m] -> [k, m]
template <typename T>
Matrix<T> matmul_tn(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ar = a.row(i);
    auto br = b.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      auto o = out.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += ar[k] * br[j];
    }
  }
  return out;
}

// a [n, k] * b^T, b is [m, k] -> [n, m]
template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ar = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto br = b.row(j);
      T acc = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += ar[k] * br[k];
      out(i, j) = acc;
    }
  }
  return out;
}

template <typename T>
Matrix<T> project(const Matrix<T>& x, const Matrix<T>& w, MacCounter* counter) {
  if (counter) counter->projection += x.rows() * x.cols() * w.cols();
  return matmul(x, w);
}

// Context rows for queries q against keys/values k, v (all [*, d]).
// keys(i) lists the key rows visible to query row i.
template <typename T, typename KeySet>
Matrix<T> attend(const Matrix<T>& q, const Matrix<T>& k, const Matrix<T>& v, std::size_t heads,
                 KeySet&& keys, MacCounter* counter) {
  const std::size_t d = q.cols();
  const std::size_t dh = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  Matrix<T> ctx(q.rows(), d);
  std::vector<T> scores;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    const std::vector<std::size_t>& visible = keys(i);
    if (visible.empty()) throw ConfigError("attention query has no visible keys");
    scores.resize(visible.size());
    if (counter) {
      counter->score += visible.size() * d;
      counter->value += visible.size() * d;
    }
    auto qi = q.row(i);
    auto out = ctx.row(i);
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = h * dh;
      T peak = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < visible.size(); ++j) {
        auto kj = k.row(visible[j]);
        T acc = 0;
        for (std::size_t c = 0; c < dh; ++c) acc += qi[off + c] * kj[off + c];
        scores[j] = acc * scale;
        peak = std::max(peak, scores[j]);
      }
      T denom = 0;
      for (T& s : scores) {
        s = std::exp(s - peak);
        denom += s;
      }
      for (std::size_t j = 0; j < visible.size(); ++j) {
        const T p = scores[j] / denom;
        auto vj = v.row(visible[j]);
        for (std::size_t c = 0; c < dh; ++c) out[off + c] += p * vj[off + c];
      }
    }
  }
  return ctx;
}

template <typename T>
Matrix<T> video_tokens(const LatentVideo<T>& x) {
  return Matrix<T>(x.shape().cells(), x.channels(),
                   std::vector<T>(x.values().begin(), x.values().end()));
}

template <typename T>
LatentVideo<T> tokens_to_video(const Matrix<T>& m, const VideoShape& shape) {
  return LatentVideo<T>(shape, std::vector<T>(m.values().begin(), m.values().end()));
}

template <typename T>
void check_params_for(const AttentionParams<T>& params, std::size_t channels) {
  params.validate();
  if (params.channels() != channels) {
    throw DimensionError("attention expects " + std::to_string(params.channels()) +
                         " channels, tokens have " + std::to_string(channels));
  }
}

// Projects every token once, runs attend with the given key sets, projects out.
template <typename T, typename KeySet>
Matrix<T> run_attention(const Matrix<T>& tokens, const AttentionParams<T>& params, KeySet&& keys,
                        MacCounter* counter) {
  check_params_for(params, tokens.cols());
  require_finite(tokens, "attention input");
  const Matrix<T> q = project(tokens, params.query, counter);
  const Matrix<T> k = project(tokens, params.key, counter);
  const Matrix<T> v = project(tokens, params.value, counter);
  const Matrix<T> ctx = attend(q, k, v, params.heads, keys, counter);
  return project(ctx, params.output, counter);
}

}  // namespace

template <typename T>
Matrix<T> subspace_attention(const Matrix<T>& tokens, const AttentionParams<T>& params,
                             MacCounter* counter) {
  if (tokens.rows() == 0) throw DimensionError("subspace attention needs at least one token");
  std::vector<std::size_t> all(tokens.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return run_attention(tokens, params, [&](std::size_t) -> const std::vector<std::size_t>& { return all; },
                       counter);
}

template <typename T>
std::vector<Matrix<T>> attention_probabilities(const Matrix<T>& tokens,
                                               const AttentionParams<T>& params) {
  check_params_for(params, tokens.cols());
  const Matrix<T> q = matmul(tokens, params.query);
  const Matrix<T> k = matmul(tokens, params.key);
  const std::size_t n = tokens.rows();
  const std::size_t dh = params.head_width();
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  std::vector<Matrix<T>> out;
  for (std::size_t h = 0; h < params.heads; ++h) {
    Matrix<T> p(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      T peak = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        T acc = 0;
        for (std::size_t c = 0; c < dh; ++c) acc += q(i, h * dh + c) * k(j, h * dh + c);
        p(i, j) = acc * scale;
        peak = std::max(peak, p(i, j));
      }
      T denom = 0;
      for (std::size_t j = 0; j < n; ++j) {
        p(i, j) = std::exp(p(i, j) - peak);
        denom += p(i, j);
      }
      for (std::size_t j = 0; j < n; ++j) p(i, j) /= denom;
    }
    out.push_back(std::move(p));
  }
  return out;
}

template <typename T>
LatentVideo<T> windowed_attention(const LatentVideo<T>& x, const SubspaceSpec& spec,
                                  const AttentionParams<T>& params, MacCounter* counter) {
  SplitResult<T> parts = split(x, spec);
  for (auto& block : parts.blocks) block.tokens = subspace_attention(block.tokens, params, counter);
  return merge(parts.blocks, parts.partition);
}

template <typename T>
LatentVideo<T> full_attention(const LatentVideo<T>& x, const AttentionParams<T>& params,
                              const AttentionMask& allow, std::size_t token_cap,
                              MacCounter* counter) {
  const std::size_t n = x.shape().cells();
  if (n > token_cap) {
    throw CapacityError("dense attention over " + std::to_string(n) +
                        " tokens exceeds the cap of " + std::to_string(token_cap));
  }
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::vector<std::size_t> row;
  auto keys = [&](std::size_t q) -> const std::vector<std::size_t>& {
    if (!allow) return all;
    row.clear();
    for (std::size_t k = 0; k < n; ++k) {
      if (allow(q, k)) row.push_back(k);
    }
    return row;
  };
  return tokens_to_video(run_attention(video_tokens(x), params, keys, counter), x.shape());
}

std::vector<std::size_t> crossframe_sources(CrossFrameMode mode, std::size_t frame,
                                            std::size_t frames) {
  switch (mode) {
    case CrossFrameMode::kFirst:
      return {0};
    case CrossFrameMode::kMiddle:
      return {frames / 2};
    case CrossFrameMode::kPrevious:
      return {frame == 0 ? 0 : frame - 1};
    case CrossFrameMode::kAll: {
      std::vector<std::size_t> all(frames);
      for (std::size_t f = 0; f < frames; ++f) all[f] = f;
      return all;
    }
  }
  throw ConfigError("unknown cross-frame mode");
}

template <typename T>
LatentVideo<T> crossframe_attention(const LatentVideo<T>& x, CrossFrameMode mode,
                                    const AttentionParams<T>& params, MacCounter* counter) {
  const std::size_t frames = x.frames();
  const std::size_t per_frame = x.shape().frame_cells();
  std::vector<std::vector<std::size_t>> frame_keys(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t src : crossframe_sources(mode, f, frames)) {
      for (std::size_t c = 0; c < per_frame; ++c) frame_keys[f].push_back(src * per_frame + c);
    }
  }
  auto keys = [&](std::size_t q) -> const std::vector<std::size_t>& {
    return frame_keys[q / per_frame];
  };
  return tokens_to_video(run_attention(video_tokens(x), params, keys, counter), x.shape());
}

template <typename T>
LatentVideo<T> temporal_attention(const LatentVideo<T>& x, const AttentionParams<T>& params,
                                  MacCounter* counter) {
  const std::size_t frames = x.frames();
  const std::size_t per_frame = x.shape().frame_cells();
  std::vector<std::vector<std::size_t>> column_keys(per_frame);
  for (std::size_t c = 0; c < per_frame; ++c) {
    for (std::size_t f = 0; f < frames; ++f) column_keys[c].push_back(f * per_frame + c);
  }
  auto keys = [&](std::size_t q) -> const std::vector<std::size_t>& {
    return column_keys[q % per_frame];
  };
  return tokens_to_video(run_attention(video_tokens(x), params, keys, counter), x.shape());
}

template <typename T>
AttentionGrads<T> attention_backward(const Matrix<T>& tokens, const AttentionParams<T>& params,
                                     const Matrix<T>& upstream) {
  if constexpr (!std::is_same_v<T, double>) {
    throw PrecisionError("attention_backward requires double precision");
  } else {
    check_params_for(params, tokens.cols());
    require_finite(tokens, "attention input");
    if (upstream.rows() != tokens.rows() || upstream.cols() != tokens.cols()) {
      throw DimensionError("upstream gradient shape must match the tokens");
    }
    const std::size_t n = tokens.rows();
    const std::size_t d = params.width();
    const std::size_t dh = params.head_width();
    const T scale = T(1) / std::sqrt(static_cast<T>(dh));

    const Matrix<T> q = matmul(tokens, params.query);
    const Matrix<T> k = matmul(tokens, params.key);
    const Matrix<T> v = matmul(tokens, params.value);
    const std::vector<Matrix<T>> probs = attention_probabilities(tokens, params);

    Matrix<T> ctx(n, d);
    for (std::size_t h = 0; h < params.heads; ++h) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const T p = probs[h](i, j);
          for (std::size_t c = 0; c < dh; ++c) ctx(i, h * dh + c) += p * v(j, h * dh + c);
        }
      }
    }

    AttentionGrads<T> g;
    g.params.heads = params.heads;
    g.params.output = matmul_tn(ctx, upstream);             // [d, C]
    const Matrix<T> d_ctx = matmul_nt(upstream, params.output);  // [n, d]

    Matrix<T> dq(n, d);
    Matrix<T> dk(n, d);
    Matrix<T> dv(n, d);
    std::vector<T> dp(n);
    for (std::size_t h = 0; h < params.heads; ++h) {
      const Matrix<T>& p = probs[h];
      const std::size_t off = h * dh;
      for (std::size_t i = 0; i < n; ++i) {
        // dP_ij = dctx_i . v_j ; dS_ij = P_ij (dP_ij - sum_l P_il dP_il)
        T row_dot = 0;
        for (std::size_t j = 0; j < n; ++j) {
          T acc = 0;
          for (std::size_t c = 0; c < dh; ++c) acc += d_ctx(i, off + c) * v(j, off + c);
          dp[j] = acc;
          row_dot += p(i, j) * acc;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const T ds = p(i, j) * (dp[j] - row_dot) * scale;
          for (std::size_t c = 0; c < dh; ++c) {
            dq(i, off + c) += ds * k(j, off + c);
            dk(j, off + c) += ds * q(i, off + c);
            dv(j, off + c) += p(i, j) * d_ctx(i, off + c);
          }
        }
      }
    }
    g.params.query = matmul_tn(tokens, dq);
    g.params.key = matmul_tn(tokens, dk);
    g.params.value = matmul_tn(tokens, dv);

    g.tokens = matmul_nt(dq, params.query);
    const Matrix<T> from_k = matmul_nt(dk, params.key);
    const Matrix<T> from_v = matmul_nt(dv, params.value);
    auto out = g.tokens.values();
    auto a = from_k.values();
    auto b = from_v.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a[i] + b[i];
    return g;
  }
}

template <typename T>
void accumulate(AttentionParams<T>& into, const AttentionParams<T>& g) {
  auto add = [](Matrix<T>& a, const Matrix<T>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      throw DimensionError("cannot accumulate gradients of different shapes");
    }
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) av[i] += bv[i];
  };
  add(into.query, g.query);
  add(into.key, g.key);
  add(into.value, g.value);
  add(into.output, g.output);
}

#define STSA_INSTANTIATE(T)                                                                     \
  template struct AttentionParams<T>;                                                           \
  template Matrix<T> subspace_attention(const Matrix<T>&, const AttentionParams<T>&,            \
                                        MacCounter*);                                           \
  template std::vector<Matrix<T>> attention_probabilities(const Matrix<T>&,                     \
                                                          const AttentionParams<T>&);           \
  template LatentVideo<T> windowed_attention(const LatentVideo<T>&, const SubspaceSpec&,        \
                                             const AttentionParams<T>&, MacCounter*);           \
  template LatentVideo<T> full_attention(const LatentVideo<T>&, const AttentionParams<T>&,      \
                                         const AttentionMask&, std::size_t, MacCounter*);       \
  template LatentVideo<T> crossframe_attention(const LatentVideo<T>&, CrossFrameMode,           \
                                               const AttentionParams<T>&, MacCounter*);         \
  template LatentVideo<T> temporal_attention(const LatentVideo<T>&, const AttentionParams<T>&,  \
                                             MacCounter*);                                      \
  template AttentionGrads<T> attention_backward(const Matrix<T>&, const AttentionParams<T>&,    \
                                                const Matrix<T>&);                              \
  template void accumulate(AttentionParams<T>&, const AttentionParams<T>&);

STSA_INSTANTIATE(float)
STSA_INSTANTIATE(double)
#undef STSA_INSTANTIATE

}  // namespace stsa
