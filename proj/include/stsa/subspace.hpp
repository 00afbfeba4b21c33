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
#include <string>
#include <vector>

#include "stsa/tensor.hpp"

namespace stsa {

// Window extent [s_f, s_h, s_w] in frames, rows and cols.
struct SubspaceSpec {
  std::size_t frames = 4;
  std::size_t rows = 4;
  std::size_t cols = 4;

  std::size_t volume() const { return frames * rows * cols; }
  bool operator==(const SubspaceSpec&) const = default;

  // Half-window offsets used by the cyclic shift; floor for odd sizes.
  std::size_t shift_frames() const { return frames / 2; }
  std::size_t shift_rows() const { return rows / 2; }
  std::size_t shift_cols() const { return cols / 2; }

  void validate() const;
  std::string to_string() const;

  // Parses "f,h,w".
  static SubspaceSpec parse(const std::string& text);
};

enum class EdgeMode {
  kStrict,          // non-divisible extents are an error
  kReplicatePad,    // pad with edge replicas to the next multiple, crop on merge
};

// Layout of the N windows over a (possibly padded) F x H x W grid.
class SubspacePartition {
 public:
  SubspacePartition(VideoShape grid, SubspaceSpec spec, EdgeMode mode);

  const VideoShape& grid() const { return grid_; }
  const VideoShape& padded_grid() const { return padded_; }
  const SubspaceSpec& spec() const { return spec_; }
  EdgeMode mode() const { return mode_; }

  std::size_t count() const { return windows_f_ * windows_h_ * windows_w_; }
  std::size_t block_size() const { return spec_.volume(); }

  // Padded-grid cell indices of window i in (f, h, w) row-major order.
  std::vector<std::size_t> positions(std::size_t i) const;

  std::uint64_t checksum() const { return checksum_; }
  // Provenance tag a block must carry to be accepted by merge at slot i.
  std::uint64_t block_tag(std::size_t i) const;

 private:
  VideoShape grid_;
  VideoShape padded_;
  SubspaceSpec spec_;
  EdgeMode mode_;
  std::size_t windows_f_ = 0;
  std::size_t windows_h_ = 0;
  std::size_t windows_w_ = 0;
  std::uint64_t checksum_ = 0;
};

template <typename T>
struct SubspaceBlock {
  std::size_t index = 0;
  std::uint64_t tag = 0;
  Matrix<T> tokens;  // [s_f * s_h * s_w, C]
};

template <typename T>
struct SplitResult {
  std::vector<SubspaceBlock<T>> blocks;
  SubspacePartition partition;
};

template <typename T>
SplitResult<T> split(const LatentVideo<T>& x, const SubspaceSpec& spec,
                     EdgeMode mode = EdgeMode::kStrict);

// Inverse of split. Rejects blocks whose count, shape or provenance tag does
// not match the partition.
template <typename T>
LatentVideo<T> merge(const std::vector<SubspaceBlock<T>>& blocks,
                     const SubspacePartition& partition);

// Cyclic roll by (floor(s_f/2), floor(s_h/2), floor(s_w/2)) along (f, h, w):
// the value at (f, h, w) moves to (f + s_f/2, h + s_h/2, w + s_w/2) mod extent.
template <typename T>
LatentVideo<T> shift(const LatentVideo<T>& x, const SubspaceSpec& spec);

template <typename T>
LatentVideo<T> unshift(const LatentVideo<T>& x, const SubspaceSpec& spec);

// Index of the window holding original-grid position (f, h, w). With
// shifted set, windows are those of the rolled tensor, so the position is
// first moved by the shift offsets. Extents must divide by the spec.
std::size_t subspace_of(std::size_t f, std::size_t h, std::size_t w, const VideoShape& grid,
                        const SubspaceSpec& spec, bool shifted);

// Connected components of the graph joining positions that share a window in
// the unshifted or the shifted partition.
std::size_t union_partition_components(const VideoShape& grid, const SubspaceSpec& spec);

}  // namespace stsa
