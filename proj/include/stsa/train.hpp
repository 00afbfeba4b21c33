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

#include "stsa/attention.hpp"
#include "stsa/block.hpp"
#include "stsa/scene.hpp"

namespace stsa {

struct BlockConfig {
  SubspaceSpec spec{4, 4, 4};
  std::size_t width = 8;
  std::size_t heads = 1;
  bool use_flows = true;  // false: zero flows, i.e. plain windowed attention
  bool shifted = false;
  // Off by default: a residual pins weight 1 on the noisy token itself,
  // which caps what window averaging can denoise.
  bool residual = false;
  bool frame_embedding = false;  // add sinusoidal frame embeddings at block input
};

enum class ParamInit {
  kRandom,    // every entry N(0, init_scale^2)
  kIdentity,  // rectangular identity plus N(0, init_scale^2) perturbation
};

struct TrainConfig {
  std::size_t steps = 200;
  double lr = 0.3;
  double beta = 0.5;       // single forward-noising step applied to the clean scene
  double init_scale = 0.1; // std-dev of the initial projection entries
  ParamInit init = ParamInit::kIdentity;
  std::uint64_t seed = 0;
};

struct TrainResult {
  // losses[i] is the loss before update i; the last entry follows the final update.
  std::vector<double> losses;
  AttentionParams<double> params;

  double initial_loss() const { return losses.front(); }
  double final_loss() const { return losses.back(); }
};

AttentionParams<double> initial_params(std::size_t channels, std::size_t width, std::size_t heads,
                                       const TrainConfig& train);

// Plain gradient descent on mean((block(noised) - clean)^2) through one STSA
// block. The noised input is drawn once from the seed.
TrainResult toy_train(const Scene& scene, const BlockConfig& block, const TrainConfig& train);

}  // namespace stsa
