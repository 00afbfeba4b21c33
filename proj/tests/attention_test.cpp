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

#include <numeric>

#include "oracles.hpp"
#include "stsa/attention.hpp"
#include "stsa/cost.hpp"

namespace stsa {
namespace {

using testing::dense_attention;
using testing::random_matrix;
using testing::random_video;
using testing::relative_error;
using testing::video_as_tokens;

AttentionParams<double> params(std::size_t c, std::size_t d, std::size_t heads, std::uint64_t seed,
                               double scale = 0.5) {
  return AttentionParams<double>::random(c, d, heads, seed, scale);
}

std::size_t frame_of(std::size_t token, const VideoShape& s) { return token / s.frame_cells(); }

TEST(AttentionParams, Validation) {
  auto p = params(4, 6, 2, 1);
  EXPECT_NO_THROW(p.validate());
  p.heads = 4;
  EXPECT_THROW(p.validate(), ConfigError);
  p.heads = 1;
  p.output = Matrix<double>(6, 5);
  EXPECT_THROW(p.validate(), DimensionError);
  auto q = params(4, 4, 1, 2);
  q.key(0, 0) = NAN;
  EXPECT_THROW(q.validate(), NumericError);
}

TEST(SubspaceAttention, SingleTokenIgnoresQueryAndKey) {
  const Matrix<double> x = random_matrix(1, 5, 3);
  auto p = params(5, 4, 1, 4);
  const Matrix<double> a = subspace_attention(x, p);
  p.query = random_matrix(5, 4, 99, 10.0);
  p.key = random_matrix(5, 4, 98, 10.0);
  const Matrix<double> b = subspace_attention(x, p);
  EXPECT_EQ(a, b);
  // (x W_v) W_o
  for (std::size_t c = 0; c < 5; ++c) {
    double expected = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      double xv = 0.0;
      for (std::size_t i = 0; i < 5; ++i) xv += x(0, i) * p.value(i, j);
      expected += xv * p.output(j, c);
    }
    EXPECT_NEAR(a(0, c), expected, 1e-14);
  }
}

TEST(SubspaceAttention, IdenticalTokensGiveSingleTokenResult) {
  const Matrix<double> one = random_matrix(1, 6, 5);
  Matrix<double> many(9, 6);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t c = 0; c < 6; ++c) many(i, c) = one(0, c);
  const auto p = params(6, 6, 2, 6);
  const Matrix<double> ref = subspace_attention(one, p);
  const Matrix<double> out = subspace_attention(many, p);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t c = 0; c < 6; ++c) EXPECT_NEAR(out(i, c), ref(0, c), 1e-14);
}

TEST(SubspaceAttention, MatchesDenseOracle) {
  const Matrix<double> x = random_matrix(7, 8, 7);
  const auto p = params(8, 8, 1, 8);
  EXPECT_LE(relative_error(subspace_attention(x, p), dense_attention(x, p)), 1e-12);
}

TEST(SubspaceAttention, MultiHeadMatchesDenseOracle) {
  for (std::size_t heads : {1u, 2u, 4u}) {
    const Matrix<double> x = random_matrix(11, 6, 10 + heads);
    const auto p = params(6, 8, heads, 20 + heads, 0.8);
    EXPECT_LE(relative_error(subspace_attention(x, p), dense_attention(x, p)), 1e-12);
  }
}

TEST(SubspaceAttention, LargeLogitsStayFinite) {
  const Matrix<double> x = random_matrix(5, 4, 1, 50.0);
  const auto p = params(4, 4, 1, 2, 5.0);
  const Matrix<double> out = subspace_attention(x, p);
  EXPECT_TRUE(out.all_finite());
}

TEST(SubspaceAttention, Errors) {
  const auto p = params(4, 4, 1, 1);
  EXPECT_THROW(subspace_attention(random_matrix(3, 5, 1), p), DimensionError);
  EXPECT_THROW(subspace_attention(Matrix<double>(0, 4), p), DimensionError);
  Matrix<double> bad = random_matrix(3, 4, 2);
  bad(1, 1) = INFINITY;
  EXPECT_THROW(subspace_attention(bad, p), NumericError);
}

TEST(AttentionProbabilities, RowsSumToOne) {
  const Matrix<double> x = random_matrix(13, 6, 3, 2.0);
  for (const auto& p : attention_probabilities(x, params(6, 6, 3, 4, 1.0))) {
    for (std::size_t i = 0; i < p.rows(); ++i) {
      double s = 0.0;
      for (double v : p.row(i)) {
        EXPECT_GE(v, 0.0);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(FullAttention, SingleTokenMatchesSubspaceCase) {
  const auto x = random_video<double>({1, 1, 1, 4}, 1);
  const auto p = params(4, 4, 1, 2);
  const auto out = full_attention(x, p);
  const auto ref = subspace_attention(video_as_tokens(x), p);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(out.values()[c], ref.values()[c]);
}

TEST(FullAttention, PermutationEquivariant) {
  const VideoShape shape{2, 3, 2, 4};
  const auto x = random_video<double>(shape, 3);
  const auto p = params(4, 4, 2, 4);
  std::vector<std::size_t> perm(shape.cells());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(5);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  LatentVideo<double> xp(shape);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    auto src = x.cell(perm[i]);
    std::copy(src.begin(), src.end(), xp.cell(i).begin());
  }
  const auto y = full_attention(x, p);
  const auto yp = full_attention(xp, p);
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(yp.cell(i)[c], y.cell(perm[i])[c], 1e-13);
}

TEST(FullAttention, TokenCap) {
  const auto x = random_video<double>({2, 4, 4, 2}, 1);
  EXPECT_THROW(full_attention(x, params(2, 2, 1, 1), {}, 31), CapacityError);
  EXPECT_NO_THROW(full_attention(x, params(2, 2, 1, 1), {}, 32));
}

TEST(WindowedAttention, EqualsBlockDiagonalMaskedOracle) {
  const VideoShape shape{4, 4, 6, 3};
  const auto x = random_video<double>(shape, 8);
  const auto p = params(3, 4, 2, 9);
  for (SubspaceSpec s : {SubspaceSpec{2, 2, 3}, SubspaceSpec{4, 1, 2}, SubspaceSpec{1, 4, 6}}) {
    const auto masked = dense_attention(video_as_tokens(x), p, [&](std::size_t q, std::size_t k) {
      const std::size_t wq = shape.cols, hq = shape.rows;
      auto win = [&](std::size_t t) {
        return subspace_of(t / (hq * wq), (t / wq) % hq, t % wq, shape, s, false);
      };
      return win(q) == win(k);
    });
    EXPECT_LE(relative_error(windowed_attention(x, s, p), masked), 1e-10) << s.to_string();
  }
}

TEST(TemporalAttention, EqualsSubspaceWithFrameColumns) {
  const VideoShape shape{5, 3, 4, 4};
  const auto x = random_video<double>(shape, 11);
  const auto p = params(4, 4, 1, 12);
  const auto t = temporal_attention(x, p);
  const auto w = windowed_attention(x, {5, 1, 1}, p);
  EXPECT_LE(relative_error(t, w), 1e-14);
  const auto oracle = dense_attention(video_as_tokens(x), p, [&](std::size_t q, std::size_t k) {
    return q % shape.frame_cells() == k % shape.frame_cells();
  });
  EXPECT_LE(relative_error(t, oracle), 1e-10);
}

TEST(TemporalAttention, SingleFrameIsPerToken) {
  const auto x = random_video<double>({1, 2, 3, 4}, 13);
  const auto p = params(4, 4, 1, 14);
  const auto t = temporal_attention(x, p);
  for (std::size_t i = 0; i < 6; ++i) {
    Matrix<double> one(1, 4, std::vector<double>(x.cell(i).begin(), x.cell(i).end()));
    const auto ref = subspace_attention(one, p);
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(t.cell(i)[c], ref(0, c), 1e-14);
  }
}

TEST(CrossFrame, Sources) {
  EXPECT_EQ(crossframe_sources(CrossFrameMode::kFirst, 3, 5), std::vector<std::size_t>{0});
  EXPECT_EQ(crossframe_sources(CrossFrameMode::kMiddle, 0, 5), std::vector<std::size_t>{2});
  EXPECT_EQ(crossframe_sources(CrossFrameMode::kPrevious, 0, 5), std::vector<std::size_t>{0});
  EXPECT_EQ(crossframe_sources(CrossFrameMode::kPrevious, 4, 5), std::vector<std::size_t>{3});
  EXPECT_EQ(crossframe_sources(CrossFrameMode::kAll, 1, 3), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(CrossFrame, SingleFrameModesCoincideWithSpatialAttention) {
  const auto x = random_video<double>({1, 3, 3, 4}, 15);
  const auto p = params(4, 4, 2, 16);
  const auto ref = full_attention(x, p);
  for (auto mode : {CrossFrameMode::kFirst, CrossFrameMode::kMiddle, CrossFrameMode::kPrevious,
                    CrossFrameMode::kAll}) {
    EXPECT_LE(relative_error(crossframe_attention(x, mode, p), ref), 1e-14);
  }
}

TEST(CrossFrame, MatchesMaskedDenseOracle) {
  const VideoShape shape{4, 2, 3, 4};
  const auto x = random_video<double>(shape, 17);
  const auto p = params(4, 6, 2, 18);
  for (auto mode : {CrossFrameMode::kFirst, CrossFrameMode::kMiddle, CrossFrameMode::kPrevious,
                    CrossFrameMode::kAll}) {
    const auto oracle = dense_attention(video_as_tokens(x), p, [&](std::size_t q, std::size_t k) {
      const auto src = crossframe_sources(mode, frame_of(q, shape), shape.frames);
      return std::find(src.begin(), src.end(), frame_of(k, shape)) != src.end();
    });
    EXPECT_LE(relative_error(crossframe_attention(x, mode, p), oracle), 1e-10);
  }
}

TEST(CrossFrame, PreviousModeFrameZeroAttendsItself) {
  const VideoShape shape{3, 2, 2, 4};
  const auto x = random_video<double>(shape, 19);
  const auto p = params(4, 4, 1, 20);
  const auto y = crossframe_attention(x, CrossFrameMode::kPrevious, p);
  LatentVideo<double> first({1, 2, 2, 4}, std::vector<double>(x.frame(0).begin(), x.frame(0).end()));
  const auto ref = full_attention(first, p);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y.values()[i], ref.values()[i], 1e-14);
}

TEST(AttentionBackward, ZeroUpstreamGivesZeroGradients) {
  const Matrix<double> x = random_matrix(5, 4, 1);
  const auto g = attention_backward(x, params(4, 4, 2, 2), Matrix<double>(5, 4));
  for (const Matrix<double>* m : {&g.tokens, &g.params.query, &g.params.key, &g.params.value, &g.params.output})
    for (double v : m->values()) EXPECT_EQ(v, 0.0);
}

TEST(AttentionBackward, SingleTokenHasNoQueryKeyGradient) {
  const Matrix<double> x = random_matrix(1, 4, 3);
  const auto g = attention_backward(x, params(4, 4, 1, 4), random_matrix(1, 4, 5));
  for (double v : g.params.query.values()) EXPECT_EQ(v, 0.0);
  for (double v : g.params.key.values()) EXPECT_EQ(v, 0.0);
}

TEST(AttentionBackward, MatchesFiniteDifferences) {
  Matrix<double> x = random_matrix(5, 6, 6);
  auto p = params(6, 4, 2, 7, 0.6);
  const Matrix<double> up = random_matrix(5, 6, 8);
  const auto g = attention_backward(x, p, up);
  auto loss = [&] {
    const Matrix<double> y = subspace_attention(x, p);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y.values()[i] * up.values()[i];
    return s;
  };
  EXPECT_LE(testing::fd_check(x, g.tokens, loss), 1e-4);
  EXPECT_LE(testing::fd_check(p.query, g.params.query, loss), 1e-4);
  EXPECT_LE(testing::fd_check(p.key, g.params.key, loss), 1e-4);
  EXPECT_LE(testing::fd_check(p.value, g.params.value, loss), 1e-4);
  EXPECT_LE(testing::fd_check(p.output, g.params.output, loss), 1e-4);
}

TEST(AttentionBackward, SinglePrecisionRefused) {
  const auto p = AttentionParams<float>::random(4, 4, 1, 1, 0.5);
  EXPECT_THROW(attention_backward(Matrix<float>(2, 4), p, Matrix<float>(2, 4)), PrecisionError);
}

TEST(AttentionBackward, UpstreamShapeChecked) {
  EXPECT_THROW(attention_backward(random_matrix(3, 4, 1), params(4, 4, 1, 1), Matrix<double>(2, 4)),
               DimensionError);
}

TEST(Accumulate, AddsElementwise) {
  auto a = params(3, 2, 1, 1);
  const auto b = params(3, 2, 1, 2);
  const auto before = a;
  accumulate(a, b);
  for (std::size_t i = 0; i < a.query.size(); ++i)
    EXPECT_EQ(a.query.values()[i], before.query.values()[i] + b.query.values()[i]);
  EXPECT_THROW(accumulate(a, params(3, 4, 1, 3)), DimensionError);
}

// --- cost model ---

TEST(CostModel, ModeNamesRoundTrip) {
  for (auto m : {AttentionMode::kSubspace, AttentionMode::kTemporal, AttentionMode::kCrossFrameFirst,
                 AttentionMode::kCrossFrameMiddle, AttentionMode::kCrossFramePrevious,
                 AttentionMode::kCrossFrameAll, AttentionMode::kFull}) {
    EXPECT_EQ(parse_attention_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_attention_mode("spatial"), ConfigError);
}

TEST(CostModel, SubspaceToFullRatioIsOneSixtyFourth) {
  const AttentionDims dims{16, 16, 16, 64, 64};
  const CostReport sub = cost_model(AttentionMode::kSubspace, dims, SubspaceSpec{4, 4, 4});
  const CostReport full = cost_model(AttentionMode::kFull, dims);
  EXPECT_EQ(sub.score * 64, full.score);
  EXPECT_EQ(sub.score_and_value() * 64, full.score_and_value());
  // N * n^2 * d with N = 64 windows of n = 64 tokens.
  EXPECT_EQ(sub.score, 64ull * 64 * 64 * 64);
  EXPECT_EQ(full.score, 4096ull * 4096 * 64);
}

TEST(CostModel, SingleWindowEqualsFull) {
  const AttentionDims dims{4, 6, 8, 3, 5};
  const CostReport sub = cost_model(AttentionMode::kSubspace, dims, SubspaceSpec{4, 6, 8});
  const CostReport full = cost_model(AttentionMode::kFull, dims);
  EXPECT_EQ(sub.total(), full.total());
  EXPECT_EQ(sub.peak_score_buffer, full.peak_score_buffer);
}

TEST(CostModel, TemporalScoreTerm) {
  const AttentionDims dims{5, 3, 2, 4, 6};
  EXPECT_EQ(cost_model(AttentionMode::kTemporal, dims).score, 6ull * 25 * 6);
}

TEST(CostModel, InstrumentedCountsMatchEveryMode) {
  const AttentionDims dims{4, 2, 4, 3, 4};
  for (auto m : {AttentionMode::kSubspace, AttentionMode::kTemporal, AttentionMode::kCrossFrameFirst,
                 AttentionMode::kCrossFrameMiddle, AttentionMode::kCrossFramePrevious,
                 AttentionMode::kCrossFrameAll, AttentionMode::kFull}) {
    const std::optional<SubspaceSpec> spec =
        m == AttentionMode::kSubspace ? std::optional(SubspaceSpec{2, 2, 2}) : std::nullopt;
    const CostReport r = cost_model(m, dims, spec);
    const MacCounter c = measure_macs(m, dims, spec, 3);
    EXPECT_EQ(c.projection, r.projection) << to_string(m);
    EXPECT_EQ(c.score, r.score) << to_string(m);
    EXPECT_EQ(c.value, r.value) << to_string(m);
  }
}

TEST(CostModel, SubspaceCostGrowsWithWindowVolume) {
  const AttentionDims dims{16, 16, 16, 8, 8};
  std::uint64_t prev = 0;
  for (SubspaceSpec s : {SubspaceSpec{4, 2, 2}, SubspaceSpec{4, 4, 4}, SubspaceSpec{8, 4, 4}}) {
    const std::uint64_t t = cost_model(AttentionMode::kSubspace, dims, s).total();
    EXPECT_GT(t, prev);
    prev = t;
  }
}

TEST(CostModel, Errors) {
  EXPECT_THROW(cost_model(AttentionMode::kSubspace, {16, 16, 16, 8, 8}), ConfigError);
  EXPECT_THROW(cost_model(AttentionMode::kSubspace, {6, 16, 16, 8, 8}, SubspaceSpec{4, 4, 4}),
               DimensionError);
  EXPECT_THROW(cost_model(AttentionMode::kFull, {0, 16, 16, 8, 8}), DimensionError);
}

TEST(CostModel, JsonKeyOrderIsStable) {
  const std::string j = cost_model(AttentionMode::kTemporal, {2, 2, 2, 2, 2}).to_json();
  const std::vector<std::string> keys{"\"mode\"", "\"dims\"", "\"subspace\"", "\"projection\"",
                                      "\"score\"", "\"value\"", "\"total\"", "\"peak_score_buffer\""};
  std::size_t at = 0;
  for (const auto& k : keys) {
    const std::size_t pos = j.find(k, at);
    ASSERT_NE(pos, std::string::npos) << k;
    at = pos;
  }
}

}  // namespace
}  // namespace stsa
