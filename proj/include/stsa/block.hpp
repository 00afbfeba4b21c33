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

#include <vector>

#include "stsa/align.hpp"
#include "stsa/attention.hpp"
#include "stsa/flow.hpp"
#include "stsa/subspace.hpp"

namespace stsa {

struct BlockOptions {
  bool shifted = false;
  bool residual = true;  // add the window tokens back onto the attention output
};

// Everything about a block that depends on flows and geometry but not on the
// features, so it can be reused across forward/backward passes.
struct BlockPlan {
  SubspaceSpec spec;
  BlockOptions options;
  AlignmentPlan alignment;
};

BlockPlan plan_block(const FlowSet& flows, const VideoShape& shape, const SubspaceSpec& spec,
                     const BlockOptions& options);

// [shift x and flows] -> align -> split -> attention (+ residual) per window
// -> merge -> restore -> [unshift]
template <typename T>
LatentVideo<T> stsa_block(const LatentVideo<T>& x, const FlowSet& flows, const SubspaceSpec& spec,
                          const AttentionParams<T>& params, const BlockOptions& options = {},
                          MacCounter* counter = nullptr);

template <typename T>
LatentVideo<T> apply_block(const LatentVideo<T>& x, const BlockPlan& plan,
                           const AttentionParams<T>& params, MacCounter* counter = nullptr);

// Blocks at even depth unshifted, odd depth shifted.
template <typename T>
LatentVideo<T> stsa_stack(const LatentVideo<T>& x, const FlowSet& flows, const SubspaceSpec& spec,
                          const std::vector<AttentionParams<T>>& layers, bool residual = true);

struct BlockGrads {
  LatentVideo<double> input;
  AttentionParams<double> params;
};

// Gradients of sum(upstream * apply_block(x, plan, params)). Window
// contributions to the parameter gradient are summed in window index order.
BlockGrads block_backward(const LatentVideo<double>& x, const BlockPlan& plan,
                          const AttentionParams<double>& params,
                          const LatentVideo<double>& upstream);

}  // namespace stsa
