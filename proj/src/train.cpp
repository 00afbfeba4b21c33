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

#include "stsa/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stsa/noise.hpp"

namespace stsa {

namespace {

void descend(Matrix<double>& w, const Matrix<double>& g, double lr) {
  auto wv = w.values();
  auto gv = g.values();
  for (std::size_t i = 0; i < wv.size(); ++i) wv[i] -= lr * gv[i];
}

}  // namespace

AttentionParams<double> initial_params(std::size_t channels, std::size_t width, std::size_t heads,
                                       const TrainConfig& train) {
  AttentionParams<double> p = AttentionParams<double>::random(
      channels, width, heads, train.seed ^ 0x9e3779b97f4a7c15ull, train.init_scale);
  if (train.init == ParamInit::kIdentity) {
    for (std::size_t i = 0; i < std::min(channels, width); ++i) {
      p.query(i, i) += 1.0;
      p.key(i, i) += 1.0;
      p.value(i, i) += 1.0;
      p.output(i, i) += 1.0;
    }
  }
  return p;
}

TrainResult toy_train(const Scene& scene, const BlockConfig& block, const TrainConfig& train) {
  if (!(train.lr >= 0.0) || !std::isfinite(train.lr)) throw ConfigError("learning rate must be >= 0");
  const LatentVideo<double>& clean = scene.video;
  const VideoShape& shape = clean.shape();

  const LatentVideo<double> noise = gaussian_video<double>(shape, train.seed);
  LatentVideo<double> input = forward_noise_step(clean, train.beta, noise);
  if (block.frame_embedding) {
    input = add_frame_embedding(input, frame_positional_embedding<double>(shape.frames, shape.channels));
  }

  const FlowSet flows =
      block.use_flows ? scene.flows : FlowSet::zeros(shape.frames, shape.rows, shape.cols);
  const BlockPlan plan =
      plan_block(flows, shape, block.spec, BlockOptions{block.shifted, block.residual});

  TrainResult result;
  result.params = initial_params(shape.channels, block.width, block.heads, train);
  const double n = static_cast<double>(clean.size());
  LatentVideo<double> upstream(shape);

  for (std::size_t step = 0;; ++step) {
    const LatentVideo<double> out = apply_block(input, plan, result.params);
    double loss = 0.0;
    auto o = out.values();
    auto t = clean.values();
    auto g = upstream.values();
    for (std::size_t i = 0; i < o.size(); ++i) {
      const double diff = o[i] - t[i];
      loss += diff * diff;
      g[i] = 2.0 * diff / n;
    }
    loss /= n;
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "toy_train diverged at step " << step << " (lr=" << train.lr
          << ", last finite loss=" << (result.losses.empty() ? 0.0 : result.losses.back()) << ")";
      throw DivergenceError(msg.str());
    }
    result.losses.push_back(loss);
    if (step == train.steps) break;

    const BlockGrads grads = block_backward(input, plan, result.params, upstream);
    descend(result.params.query, grads.params.query, train.lr);
    descend(result.params.key, grads.params.key, train.lr);
    descend(result.params.value, grads.params.value, train.lr);
    descend(result.params.output, grads.params.output, train.lr);
  }
  return result;
}

}  // namespace stsa
