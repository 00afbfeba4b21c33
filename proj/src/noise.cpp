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

#include "stsa/noise.hpp"

#include <cmath>
#include <string>

namespace stsa {

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  for (std::size_t t = 0; t < betas_.size(); ++t) {
    const double b = betas_[t];
    if (!(b > 0.0 && b < 1.0)) {
      throw ConfigError("beta_" + std::to_string(t) + " = " + std::to_string(b) +
                        " outside (0, 1)");
    }
  }
}

NoiseSchedule NoiseSchedule::constant(double beta, std::size_t steps) {
  return NoiseSchedule(std::vector<double>(steps, beta));
}

NoiseSchedule NoiseSchedule::linear(double beta_start, double beta_end, std::size_t steps) {
  std::vector<double> betas(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const double frac = steps > 1 ? static_cast<double>(t) / static_cast<double>(steps - 1) : 0.0;
    betas[t] = beta_start + (beta_end - beta_start) * frac;
  }
  return NoiseSchedule(std::move(betas));
}

double NoiseSchedule::alpha_bar(std::size_t t) const {
  double prod = 1.0;
  for (std::size_t s = 0; s <= t && s < betas_.size(); ++s) prod *= 1.0 - betas_[s];
  return prod;
}

template <typename T>
LatentVideo<T> forward_noise_step(const LatentVideo<T>& z_prev, double beta,
                                  const LatentVideo<T>& noise) {
  require_same_shape(z_prev, noise, "forward_noise_step");
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw ConfigError("beta must lie in [0, 1], got " + std::to_string(beta));
  }
  LatentVideo<T> out(z_prev.shape());
  auto dst = out.values();
  auto src = z_prev.values();
  auto eps = noise.values();
  // Exact endpoints: beta = 0 returns z_prev, beta = 1 returns noise.
  if (beta == 0.0) {
    std::copy(src.begin(), src.end(), dst.begin());
    return out;
  }
  if (beta == 1.0) {
    std::copy(eps.begin(), eps.end(), dst.begin());
    return out;
  }
  const T keep = static_cast<T>(std::sqrt(1.0 - beta));
  const T mix = static_cast<T>(std::sqrt(beta));
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = keep * src[i] + mix * eps[i];
  return out;
}

template <typename T>
LatentVideo<T> gaussian_video(const VideoShape& shape, std::uint64_t seed) {
  LatentVideo<T> out(shape);
  Rng rng(seed);
  for (T& v : out.values()) v = static_cast<T>(rng.normal());
  return out;
}

template <typename T>
LatentVideo<T> forward_noise(const LatentVideo<T>& z0, const NoiseSchedule& schedule, Rng& rng) {
  LatentVideo<T> z = z0;
  for (double beta : schedule.betas()) {
    LatentVideo<T> eps(z0.shape());
    for (T& v : eps.values()) v = static_cast<T>(rng.normal());
    z = forward_noise_step(z, beta, eps);
  }
  return z;
}

template <typename T>
LatentVideo<T> shared_noise_init(std::size_t frames, std::size_t rows, std::size_t cols,
                                 std::size_t channels, std::uint64_t seed) {
  LatentVideo<T> out(VideoShape{frames, rows, cols, channels});
  const std::size_t per_frame = rows * cols * channels;
  Rng rng(seed);
  auto v = out.values();
  for (std::size_t i = 0; i < per_frame; ++i) v[i] = static_cast<T>(rng.normal());
  for (std::size_t f = 1; f < frames; ++f) {
    std::copy(v.begin(), v.begin() + per_frame, v.begin() + f * per_frame);
  }
  return out;
}

template <typename T>
Matrix<T> frame_positional_embedding(std::size_t frames, std::size_t channels) {
  if (channels == 0 || channels % 2 != 0) {
    throw ConfigError("frame embedding width must be a positive even number, got " +
                      std::to_string(channels));
  }
  if (frames == 0) throw DimensionError("frame embedding needs at least one frame");
  Matrix<T> emb(frames, channels);
  const double c = static_cast<double>(channels);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = 0; i < channels / 2; ++i) {
      const double angle =
          static_cast<double>(f) / std::pow(10000.0, static_cast<double>(2 * i) / c);
      emb(f, 2 * i) = static_cast<T>(std::sin(angle));
      emb(f, 2 * i + 1) = static_cast<T>(std::cos(angle));
    }
  }
  return emb;
}

template <typename T>
LatentVideo<T> add_frame_embedding(const LatentVideo<T>& x, const Matrix<T>& embedding) {
  if (embedding.rows() != x.frames() || embedding.cols() != x.channels()) {
    throw DimensionError("embedding is " + std::to_string(embedding.rows()) + "x" +
                         std::to_string(embedding.cols()) + ", video is " + x.shape().to_string());
  }
  LatentVideo<T> out = x;
  for (std::size_t f = 0; f < x.frames(); ++f) {
    auto e = embedding.row(f);
    for (std::size_t h = 0; h < x.rows(); ++h) {
      for (std::size_t w = 0; w < x.cols(); ++w) {
        auto cell = out.cell(f, h, w);
        for (std::size_t c = 0; c < cell.size(); ++c) cell[c] += e[c];
      }
    }
  }
  return out;
}

#define STSA_INSTANTIATE(T)                                                                    \
  template LatentVideo<T> forward_noise_step(const LatentVideo<T>&, double,                   \
                                             const LatentVideo<T>&);                          \
  template LatentVideo<T> forward_noise(const LatentVideo<T>&, const NoiseSchedule&, Rng&);   \
  template LatentVideo<T> gaussian_video<T>(const VideoShape&, std::uint64_t);                \
  template LatentVideo<T> shared_noise_init<T>(std::size_t, std::size_t, std::size_t,         \
                                               std::size_t, std::uint64_t);                   \
  template Matrix<T> frame_positional_embedding<T>(std::size_t, std::size_t);                 \
  template LatentVideo<T> add_frame_embedding(const LatentVideo<T>&, const Matrix<T>&);

STSA_INSTANTIATE(float)
STSA_INSTANTIATE(double)
#undef STSA_INSTANTIATE

}  // namespace stsa
