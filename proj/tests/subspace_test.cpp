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

#include <algorithm>
#include <map>

#include "oracles.hpp"
#include "stsa/subspace.hpp"

namespace stsa {
namespace {

using testing::random_video;

TEST(SubspaceSpec, ParseAndValidate) {
  EXPECT_EQ(SubspaceSpec::parse("4,2,2"), (SubspaceSpec{4, 2, 2}));
  EXPECT_THROW(SubspaceSpec::parse("4,2"), ConfigError);
  EXPECT_THROW(SubspaceSpec::parse("4,0,2"), ConfigError);
  EXPECT_THROW(SubspaceSpec::parse("a,b,c"), ConfigError);
  EXPECT_THROW((SubspaceSpec{0, 1, 1}.validate()), ConfigError);
  EXPECT_EQ((SubspaceSpec{5, 3, 1}.shift_frames()), 2u);
}

TEST(Split, WholeSpaceWindowIsOneBlock) {
  const auto x = random_video<double>({4, 4, 4, 3}, 1);
  const auto s = split(x, {4, 4, 4});
  ASSERT_EQ(s.blocks.size(), 1u);
  EXPECT_EQ(s.blocks[0].tokens.rows(), 64u);
  EXPECT_TRUE(bitwise_equal(merge(s.blocks, s.partition), x));
}

TEST(Split, BlockCountForcedByDefinition) {
  const auto x = random_video<double>({16, 8, 8, 2}, 2);
  const auto s = split(x, {4, 4, 4});
  EXPECT_EQ(s.blocks.size(), 16u);
  EXPECT_EQ(s.partition.count(), 16u);
}

TEST(Split, TokensOrderedRowMajorWithinWindow) {
  const auto x = random_video<double>({4, 4, 6, 2}, 3);
  const SubspaceSpec spec{2, 2, 3};
  const auto s = split(x, spec);
  // Window 0 covers f<2, h<2, w<3; its token t is (f, h, w) row-major.
  std::size_t t = 0;
  for (std::size_t f = 0; f < 2; ++f)
    for (std::size_t h = 0; h < 2; ++h)
      for (std::size_t w = 0; w < 3; ++w, ++t)
        for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(s.blocks[0].tokens(t, c), x(f, h, w, c));
  // Windows enumerate (f, h, w) blocks row-major: window 1 starts at w = 3.
  EXPECT_EQ(s.blocks[1].tokens(0, 0), x(0, 0, 3, 0));
}

TEST(Split, MultisetOfEntriesPreserved) {
  const auto x = random_video<double>({8, 4, 6, 3}, 4);
  const auto s = split(x, {2, 2, 3});
  std::vector<double> a(x.values().begin(), x.values().end());
  std::vector<double> b;
  for (const auto& blk : s.blocks) b.insert(b.end(), blk.tokens.values().begin(), blk.tokens.values().end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(Split, PartitionCoversEveryPositionOnce) {
  const VideoShape grid{8, 4, 6, 1};
  const SubspacePartition p(grid, {4, 2, 3}, EdgeMode::kStrict);
  std::vector<int> hits(grid.cells(), 0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < p.count(); ++i) {
    for (std::size_t pos : p.positions(i)) ++hits[pos];
    total += p.positions(i).size();
  }
  EXPECT_EQ(total, grid.cells());
  EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}

TEST(Split, NonDivisibleStrictIsDimensionError) {
  const auto x = random_video<double>({5, 4, 4, 1}, 5);
  EXPECT_THROW(split(x, {4, 4, 4}), DimensionError);
}

TEST(Split, ReplicatePadCropsBackExactly) {
  const auto x = random_video<double>({5, 3, 7, 2}, 6);
  const auto s = split(x, {4, 2, 4}, EdgeMode::kReplicatePad);
  EXPECT_EQ(s.partition.padded_grid(), (VideoShape{8, 4, 8, 2}));
  EXPECT_EQ(s.blocks.size(), 2u * 2u * 2u);
  EXPECT_TRUE(bitwise_equal(merge(s.blocks, s.partition), x));
  // Padded cells replicate the last real row/col/frame.
  const auto& last = s.blocks.back().tokens;
  EXPECT_EQ(last(last.rows() - 1, 0), x(4, 2, 6, 0));
}

TEST(Merge, RoundTripRandom) {
  const auto x = random_video<double>({8, 8, 8, 4}, 7);
  const auto s = split(x, {4, 4, 4});
  EXPECT_TRUE(bitwise_equal(merge(s.blocks, s.partition), x));
}

TEST(Merge, RejectsPermutedBlocks) {
  const auto x = random_video<double>({8, 8, 8, 2}, 8);
  auto s = split(x, {4, 4, 4});
  std::swap(s.blocks[0], s.blocks[3]);
  EXPECT_THROW(merge(s.blocks, s.partition), MapMismatchError);
}

TEST(Merge, RejectsBlocksFromAnotherPartition) {
  const auto x = random_video<double>({8, 8, 8, 2}, 9);
  const auto a = split(x, {4, 4, 4});
  const auto b = split(x, {8, 4, 2});
  ASSERT_EQ(a.blocks.size(), b.blocks.size());
  EXPECT_THROW(merge(b.blocks, a.partition), MapMismatchError);
}

TEST(Merge, RejectsCountAndShapeMismatch) {
  const auto x = random_video<double>({4, 4, 4, 2}, 10);
  auto s = split(x, {2, 2, 2});
  auto fewer = s.blocks;
  fewer.pop_back();
  EXPECT_THROW(merge(fewer, s.partition), MapMismatchError);
  s.blocks[1].tokens = Matrix<double>(8, 3);
  EXPECT_THROW(merge(s.blocks, s.partition), DimensionError);
}

TEST(Shift, RoundTripRandom) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = random_video<float>({6, 5, 7, 2}, seed);
    const SubspaceSpec spec{3, 4, 5};
    EXPECT_TRUE(bitwise_equal(unshift(shift(x, spec), spec), x));
  }
}

TEST(Shift, FullPeriodRollIsIdentity) {
  const auto x = random_video<double>({3, 4, 5, 2}, 11);
  EXPECT_TRUE(bitwise_equal(shift(x, {6, 8, 10}), x));
}

TEST(Shift, OriginMovesByHalfWindow) {
  LatentVideo<double> x({8, 8, 8, 1});
  x(0, 0, 0, 0) = 1.0;
  const auto y = shift(x, {4, 4, 4});
  EXPECT_EQ(y(2, 2, 2, 0), 1.0);
  double sum = 0.0;
  for (double v : y.values()) sum += v;
  EXPECT_EQ(sum, 1.0);
}

TEST(Shift, MatchesIndexOracle) {
  const VideoShape shape{5, 6, 7, 1};
  const auto x = random_video<double>(shape, 12);
  const SubspaceSpec spec{3, 5, 4};  // odd sizes roll by floor(s/2)
  const auto y = shift(x, spec);
  for (std::size_t f = 0; f < 5; ++f)
    for (std::size_t h = 0; h < 6; ++h)
      for (std::size_t w = 0; w < 7; ++w)
        EXPECT_EQ(y((f + 1) % 5, (h + 2) % 6, (w + 2) % 7, 0), x(f, h, w, 0));
}

TEST(SubspaceOf, Examples) {
  const VideoShape grid{8, 8, 8, 1};
  const SubspaceSpec spec{4, 4, 4};
  EXPECT_EQ(subspace_of(0, 0, 0, grid, spec, false), 0u);
  EXPECT_EQ(subspace_of(3, 3, 3, grid, spec, false), subspace_of(0, 0, 0, grid, spec, false));
  EXPECT_NE(subspace_of(3, 3, 3, grid, spec, false), subspace_of(4, 4, 4, grid, spec, false));
  EXPECT_EQ(subspace_of(3, 3, 3, grid, spec, true), subspace_of(4, 4, 4, grid, spec, true));
  EXPECT_THROW(subspace_of(8, 0, 0, grid, spec, false), BoundsError);
}

TEST(SubspaceOf, AgreesWithSplitOfShiftedTensor) {
  // Tag every cell with its linear index, shift, split, and read back which
  // window each original position landed in.
  const VideoShape grid{4, 6, 8, 1};
  const SubspaceSpec spec{2, 3, 4};
  LatentVideo<double> x(grid);
  for (std::size_t i = 0; i < grid.cells(); ++i) x.values()[i] = static_cast<double>(i);
  for (bool shifted : {false, true}) {
    const auto s = split(shifted ? shift(x, spec) : x, spec);
    for (const auto& blk : s.blocks) {
      for (std::size_t t = 0; t < blk.tokens.rows(); ++t) {
        const auto pos = static_cast<std::size_t>(blk.tokens(t, 0));
        const std::size_t f = pos / (grid.rows * grid.cols);
        const std::size_t h = (pos / grid.cols) % grid.rows;
        const std::size_t w = pos % grid.cols;
        EXPECT_EQ(subspace_of(f, h, w, grid, spec, shifted), blk.index);
      }
    }
  }
}

TEST(Connectivity, UnionOfPartitionsIsConnected) {
  EXPECT_EQ(union_partition_components({16, 16, 16, 1}, {4, 4, 4}), 1u);
  EXPECT_EQ(union_partition_components({8, 4, 6, 1}, {2, 2, 2}), 1u);
  EXPECT_EQ(union_partition_components({4, 4, 4, 1}, {4, 4, 4}), 1u);
}

TEST(Connectivity, UnshiftedAloneIsDisconnected) {
  // Size-1 windows never shift, so each position is its own component.
  EXPECT_EQ(union_partition_components({2, 2, 2, 1}, {1, 1, 1}), 8u);
}

}  // namespace
}  // namespace stsa
