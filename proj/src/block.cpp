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

#include "stsa/block.hpp"

namespace stsa {

BlockPlan plan_block(const FlowSet& flows, const VideoShape& shape, const SubspaceSpec& spec,
                     const BlockOptions& options) {
  validate_shape(shape);
  spec.validate();
  // Reject non-divisible grids before any work.
  SubspacePartition partition(shape, spec, EdgeMode::kStrict);
  const FlowSet& source = flows;
  AlignmentPlan alignment =
      options.shifted
          ? compute_alignment(shift_flows(source, spec), shape.frames, shape.rows, shape.cols,
                              spec.frames)
          : compute_alignment(source, shape.frames, shape.rows, shape.cols, spec.frames);
  return BlockPlan{spec, options, std::move(alignment)};
}

template <typename T>
LatentVideo<T> apply_block(const LatentVideo<T>& x, const BlockPlan& plan,
                           const AttentionParams<T>& params, MacCounter* counter) {
  const LatentVideo<T> input = plan.options.shifted ? shift(x, plan.spec) : x;
  AlignedVideo<T> aligned = align(input, plan.alignment);
  SplitResult<T> parts = split(aligned.video, plan.spec);
  for (auto& block : parts.blocks) {
    Matrix<T> out = subspace_attention(block.tokens, params, counter);
    if (plan.options.residual) {
      auto o = out.values();
      auto in = block.tokens.values();
      for (std::size_t i = 0; i < o.size(); ++i) o[i] += in[i];
    }
    block.tokens = std::move(out);
  }
  AlignedVideo<T> attended{merge(parts.blocks, parts.partition), aligned.plan_checksum};
  LatentVideo<T> restored = restore(attended, plan.alignment);
  return plan.options.shifted ? unshift(restored, plan.spec) : restored;
}

template <typename T>
LatentVideo<T> stsa_block(const LatentVideo<T>& x, const FlowSet& flows, const SubspaceSpec& spec,
                          const AttentionParams<T>& params, const BlockOptions& options,
                          MacCounter* counter) {
  return apply_block(x, plan_block(flows, x.shape(), spec, options), params, counter);
}

template <typename T>
LatentVideo<T> stsa_stack(const LatentVideo<T>& x, const FlowSet& flows, const SubspaceSpec& spec,
                          const std::vector<AttentionParams<T>>& layers, bool residual) {
  LatentVideo<T> h = x;
  for (std::size_t depth = 0; depth < layers.size(); ++depth) {
    h = stsa_block(h, flows, spec, layers[depth], BlockOptions{depth % 2 == 1, residual});
  }
  return h;
}

BlockGrads block_backward(const LatentVideo<double>& x, const BlockPlan& plan,
                          const AttentionParams<double>& params,
                          const LatentVideo<double>& upstream) {
  require_same_shape(x, upstream, "block_backward");
  // Shift, align and split are permutations of cells, so each adjoint is the
  // matching inverse applied in reverse order.
  const LatentVideo<double> input = plan.options.shifted ? shift(x, plan.spec) : x;
  const AlignedVideo<double> aligned = align(input, plan.alignment);
  const SplitResult<double> parts = split(aligned.video, plan.spec);

  const LatentVideo<double> g_out = plan.options.shifted ? shift(upstream, plan.spec) : upstream;
  const AlignedVideo<double> g_aligned = align(g_out, plan.alignment);
  SplitResult<double> g_parts = split(g_aligned.video, plan.spec);

  BlockGrads grads;
  grads.params.query = Matrix<double>(params.query.rows(), params.query.cols());
  grads.params.key = Matrix<double>(params.key.rows(), params.key.cols());
  grads.params.value = Matrix<double>(params.value.rows(), params.value.cols());
  grads.params.output = Matrix<double>(params.output.rows(), params.output.cols());
  grads.params.heads = params.heads;

  for (std::size_t i = 0; i < parts.blocks.size(); ++i) {
    auto g = attention_backward(parts.blocks[i].tokens, params, g_parts.blocks[i].tokens);
    accumulate(grads.params, g.params);
    if (plan.options.residual) {
      auto gt = g.tokens.values();
      auto up = g_parts.blocks[i].tokens.values();
      for (std::size_t j = 0; j < gt.size(); ++j) gt[j] += up[j];
    }
    g_parts.blocks[i].tokens = std::move(g.tokens);
  }
  AlignedVideo<double> g_in{merge(g_parts.blocks, g_parts.partition), aligned.plan_checksum};
  LatentVideo<double> g_x = restore(g_in, plan.alignment);
  grads.input = plan.options.shifted ? unshift(g_x, plan.spec) : std::move(g_x);
  return grads;
}

#define STSA_INSTANTIATE(T)                                                                     \
  template LatentVideo<T> stsa_block(const LatentVideo<T>&, const FlowSet&, const SubspaceSpec&, \
                                     const AttentionParams<T>&, const BlockOptions&,            \
                                     MacCounter*);                                              \
  template LatentVideo<T> apply_block(const LatentVideo<T>&, const BlockPlan&,                  \
                                      const AttentionParams<T>&, MacCounter*);                  \
  template LatentVideo<T> stsa_stack(const LatentVideo<T>&, const FlowSet&,                     \
                                     const SubspaceSpec&, const std::vector<AttentionParams<T>>&, \
                                     bool);

STSA_INSTANTIATE(float)
STSA_INSTANTIATE(double)
#undef STSA_INSTANTIATE

}  // namespace stsa
