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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stsa/block.hpp"

namespace stsa {
namespace {

using testing::random_video;
using testing::relative_error;

FlowSet random_flows(std::size_t frames, std::size_t rows, std::size_t cols, std::uint64_t seed,
                     double scale) {
  Rng rng(seed);
  std::vector<FlowField> fw, bw;
  auto field = [&](std::size_t s, std::size_t d) {
    std::vector<float> v(rows * cols * 2);
    for (float& e : v) e = static_cast<float>(scale * rng.normal());
    return FlowField(s, d, rows, cols, v);
  };
  for (std::size_t k = 0; k + 1 < frames; ++k) {
    fw.push_back(field(k, k + 1));
    bw.push_back(field(k + 1, k));
  }
  return FlowSet(frames, rows, cols, fw, bw);
}

TEST(StsaBlock, AveragingParamsAddWindowMean) {
  const VideoShape shape{4, 4, 4, 3};
  const auto x = random_video<double>(shape, 1);
  const SubspaceSpec spec{2, 2, 2};
  const auto y = stsa_block(x, FlowSet::zeros(4, 4, 4), spec, AttentionParams<double>::averaging(3));
  for (std::size_t f = 0; f < 4; ++f)
    for (std::size_t h = 0; h < 4; ++h)
      for (std::size_t w = 0; w < 4; ++w)
        for (std::size_t c = 0; c < 3; ++c) {
          double mean = 0.0;
          for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 2; ++b)
              for (std::size_t d = 0; d < 2; ++d) mean += x(f / 2 * 2 + a, h / 2 * 2 + b, w / 2 * 2 + d, c);
          EXPECT_NEAR(y(f, h, w, c), x(f, h, w, c) + mean / 8.0, 1e-14);
        }
}

TEST(StsaBlock, ZeroFlowsEqualWindowedAttentionPlusResidual) {
  const VideoShape shape{4, 4, 6, 4};
  const auto x = random_video<double>(shape, 2);
  const auto p = AttentionParams<double>::random(4, 4, 2, 3, 0.5);
  const SubspaceSpec spec{2, 2, 3};
  const auto y = stsa_block(x, FlowSet::zeros(4, 4, 6), spec, p);
  const auto w = windowed_attention(x, spec, p);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_EQ(y.values()[i], w.values()[i] + x.values()[i]);
  const auto nores = stsa_block(x, FlowSet::zeros(4, 4, 6), spec, p, {false, false});
  EXPECT_TRUE(bitwise_equal(nores, w));
}

TEST(StsaBlock, EqualsStageByStageComposition) {
  const VideoShape shape{8, 4, 4, 3};
  const SubspaceSpec spec{4, 2, 2};
  for (bool shifted : {false, true}) {
    const auto x = random_video<double>(shape, 4);
    const FlowSet flows = random_flows(8, 4, 4, 5, 1.2);
    const auto p = AttentionParams<double>::random(3, 4, 1, 6, 0.5);

    const LatentVideo<double> in = shifted ? shift(x, spec) : x;
    const FlowSet fl = shifted ? shift_flows(flows, spec) : flows;
    const AlignmentPlan plan = compute_alignment(fl, 8, 4, 4, spec.frames);
    ASSERT_FALSE(plan.is_identity());
    const auto aligned = align(in, plan);
    auto parts = split(aligned.video, spec);
    for (auto& b : parts.blocks) {
      Matrix<double> o = subspace_attention(b.tokens, p);
      for (std::size_t i = 0; i < o.size(); ++i) o.values()[i] += b.tokens.values()[i];
      b.tokens = o;
    }
    const auto restored = restore(AlignedVideo<double>{merge(parts.blocks, parts.partition), aligned.plan_checksum}, plan);
    const auto expected = shifted ? unshift(restored, spec) : restored;

    EXPECT_TRUE(bitwise_equal(stsa_block(x, flows, spec, p, {shifted, true}), expected));
  }
}

TEST(StsaBlock, AlignmentChangesResultUnderMotion) {
  const VideoShape shape{4, 4, 4, 3};
  const auto x = random_video<double>(shape, 7);
  const auto p = AttentionParams<double>::random(3, 4, 1, 8, 0.5);
  const auto a = stsa_block(x, random_flows(4, 4, 4, 9, 1.5), {4, 2, 2}, p);
  const auto b = stsa_block(x, FlowSet::zeros(4, 4, 4), {4, 2, 2}, p);
  EXPECT_FALSE(bitwise_equal(a, b));
}

TEST(StsaBlock, PreservesShapeInBothPrecisions) {
  const auto xf = random_video<float>({4, 4, 4, 2}, 10);
  const auto pf = AttentionParams<float>::random(2, 2, 1, 11, 0.5);
  const auto yf = stsa_block(xf, random_flows(4, 4, 4, 12, 1.0), {2, 2, 2}, pf, {true, true});
  EXPECT_EQ(yf.shape(), xf.shape());
  EXPECT_TRUE(yf.all_finite());
}

TEST(StsaBlock, Errors) {
  const auto x = random_video<double>({6, 4, 4, 2}, 13);
  const auto p = AttentionParams<double>::random(2, 2, 1, 14, 0.5);
  EXPECT_THROW(stsa_block(x, FlowSet::zeros(6, 4, 4), {4, 2, 2}, p), DimensionError);
  EXPECT_THROW(stsa_block(x, FlowSet::zeros(5, 4, 4), {2, 2, 2}, p), FlowChainError);
  EXPECT_THROW(stsa_block(x, FlowSet::zeros(6, 4, 4), {2, 2, 2}, AttentionParams<double>::random(3, 2, 1, 1, 0.5)),
               DimensionError);
}

TEST(StsaStack, AlternatesShiftedBlocks) {
  const VideoShape shape{4, 4, 4, 2};
  const auto x = random_video<double>(shape, 15);
  const FlowSet flows = random_flows(4, 4, 4, 16, 1.0);
  const SubspaceSpec spec{2, 2, 2};
  std::vector<AttentionParams<double>> layers{AttentionParams<double>::random(2, 2, 1, 17, 0.5),
                                              AttentionParams<double>::random(2, 2, 1, 18, 0.5),
                                              AttentionParams<double>::random(2, 2, 1, 19, 0.5)};
  auto h = stsa_block(x, flows, spec, layers[0], {false, true});
  h = stsa_block(h, flows, spec, layers[1], {true, true});
  h = stsa_block(h, flows, spec, layers[2], {false, true});
  EXPECT_TRUE(bitwise_equal(stsa_stack(x, flows, spec, layers), h));
}

double block_loss(const LatentVideo<double>& x, const BlockPlan& plan,
                  const AttentionParams<double>& p, const LatentVideo<double>& up) {
  const auto y = apply_block(x, plan, p);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y.values()[i] * up.values()[i];
  return s;
}

TEST(BlockBackward, MatchesFiniteDifferences) {
  const VideoShape shape{4, 4, 4, 3};
  for (bool shifted : {false, true}) {
    for (bool residual : {false, true}) {
      auto x = random_video<double>(shape, 20);
      auto p = AttentionParams<double>::random(3, 4, 2, 21, 0.5);
      const auto up = random_video<double>(shape, 22);
      const BlockPlan plan = plan_block(random_flows(4, 4, 4, 23, 1.5), shape, {2, 2, 2}, {shifted, residual});
      const BlockGrads g = block_backward(x, plan, p, up);
      auto loss = [&] { return block_loss(x, plan, p, up); };
      Matrix<double> xm(shape.cells(), 3, std::vector<double>(x.values().begin(), x.values().end()));
      Matrix<double> gx(shape.cells(), 3, std::vector<double>(g.input.values().begin(), g.input.values().end()));
      auto loss_x = [&] {
        LatentVideo<double> xx(shape, std::vector<double>(xm.values().begin(), xm.values().end()));
        return block_loss(xx, plan, p, up);
      };
      EXPECT_LE(testing::fd_check(xm, gx, loss_x), 1e-4);
      EXPECT_LE(testing::fd_check(p.query, g.params.query, loss), 1e-4);
      EXPECT_LE(testing::fd_check(p.key, g.params.key, loss), 1e-4);
      EXPECT_LE(testing::fd_check(p.value, g.params.value, loss), 1e-4);
      EXPECT_LE(testing::fd_check(p.output, g.params.output, loss), 1e-4);
    }
  }
}

}  // namespace
}  // namespace stsa
