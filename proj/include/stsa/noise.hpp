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
#include <vector>

#include "stsa/rng.hpp"
#include "stsa/tensor.hpp"

namespace stsa {

// Variance schedule beta_1..beta_T of the forward diffusion process.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(std::vector<double> betas);

  static NoiseSchedule constant(double beta, std::size_t steps);
  static NoiseSchedule linear(double beta_start, double beta_end, std::size_t steps);

  std::size_t steps() const { return betas_.size(); }
  double beta(std::size_t t) const { return betas_.at(t); }
  const std::vector<double>& betas() const { return betas_; }

  // prod_{s <= t} (1 - beta_s); variance kept from the clean signal after step t.
  double alpha_bar(std::size_t t) const;

 private:
  std::vector<double> betas_;
};

// sqrt(1 - beta) * z_prev + sqrt(beta) * noise, elementwise.
template <typename T>
LatentVideo<T> forward_noise_step(const LatentVideo<T>& z_prev, double beta,
                                  const LatentVideo<T>& noise);

// Applies forward_noise_step for every step of the schedule, drawing fresh
// standard-normal noise from rng each step.
template <typename T>
LatentVideo<T> forward_noise(const LatentVideo<T>& z0, const NoiseSchedule& schedule, Rng& rng);

// i.i.d. standard-normal tensor.
template <typename T>
LatentVideo<T> gaussian_video(const VideoShape& shape, std::uint64_t seed);

// One [H, W, C] standard-normal slice repeated across all frames, so every
// frame starts denoising from the same noise.
template <typename T>
LatentVideo<T> shared_noise_init(std::size_t frames, std::size_t rows, std::size_t cols,
                                 std::size_t channels, std::uint64_t seed);

// Sinusoidal frame embedding [F, C]:
//   (f, 2i)   = sin(f / 10000^(2i/C))
//   (f, 2i+1) = cos(f / 10000^(2i/C))
// C must be even.
template <typename T>
Matrix<T> frame_positional_embedding(std::size_t frames, std::size_t channels);

// x[f, h, w, :] + embedding[f, :] for all (h, w).
template <typename T>
LatentVideo<T> add_frame_embedding(const LatentVideo<T>& x, const Matrix<T>& embedding);

}  // namespace stsa
