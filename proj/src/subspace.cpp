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

#include "stsa/subspace.hpp"

#include <numeric>
#include <sstream>

#include "stsa/detail/hash.hpp"

namespace stsa {

void SubspaceSpec::validate() const {
  if (frames == 0 || rows == 0 || cols == 0) {
    throw ConfigError("subspace sizes must be >= 1, got " + to_string());
  }
}

std::string SubspaceSpec::to_string() const {
  return std::to_string(frames) + "," + std::to_string(rows) + "," + std::to_string(cols);
}

SubspaceSpec SubspaceSpec::parse(const std::string& text) {
  std::vector<std::size_t> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v <= 0) throw ConfigError("");
      parts.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ConfigError("bad subspace size '" + text + "', expected f,h,w");
    }
  }
  if (parts.size() != 3) throw ConfigError("bad subspace size '" + text + "', expected f,h,w");
  return SubspaceSpec{parts[0], parts[1], parts[2]};
}

namespace {

std::size_t round_up(std::size_t v, std::size_t m) { return (v + m - 1) / m * m; }

}  // namespace

SubspacePartition::SubspacePartition(VideoShape grid, SubspaceSpec spec, EdgeMode mode)
    : grid_(grid), padded_(grid), spec_(spec), mode_(mode) {
  validate_shape(grid_);
  spec_.validate();
  const bool divisible = grid_.frames % spec_.frames == 0 && grid_.rows % spec_.rows == 0 &&
                         grid_.cols % spec_.cols == 0;
  if (!divisible) {
    if (mode_ == EdgeMode::kStrict) {
      throw DimensionError("grid " + grid_.to_string() + " is not divisible by subspace " +
                           spec_.to_string());
    }
    padded_.frames = round_up(grid_.frames, spec_.frames);
    padded_.rows = round_up(grid_.rows, spec_.rows);
    padded_.cols = round_up(grid_.cols, spec_.cols);
  }
  windows_f_ = padded_.frames / spec_.frames;
  windows_h_ = padded_.rows / spec_.rows;
  windows_w_ = padded_.cols / spec_.cols;
  checksum_ = detail::Fnv1a()
                  .mix(grid_.frames).mix(grid_.rows).mix(grid_.cols).mix(grid_.channels)
                  .mix(spec_.frames).mix(spec_.rows).mix(spec_.cols)
                  .mix(static_cast<int>(mode_))
                  .digest();
}

std::vector<std::size_t> SubspacePartition::positions(std::size_t i) const {
  if (i >= count()) throw BoundsError("window index " + std::to_string(i) + " out of range");
  const std::size_t wf = i / (windows_h_ * windows_w_);
  const std::size_t wh = (i / windows_w_) % windows_h_;
  const std::size_t ww = i % windows_w_;
  std::vector<std::size_t> out;
  out.reserve(block_size());
  for (std::size_t f = wf * spec_.frames; f < (wf + 1) * spec_.frames; ++f) {
    for (std::size_t h = wh * spec_.rows; h < (wh + 1) * spec_.rows; ++h) {
      for (std::size_t w = ww * spec_.cols; w < (ww + 1) * spec_.cols; ++w) {
        out.push_back((f * padded_.rows + h) * padded_.cols + w);
      }
    }
  }
  return out;
}

std::uint64_t SubspacePartition::block_tag(std::size_t i) const {
  return detail::Fnv1a().mix(checksum_).mix(i).digest();
}

template <typename T>
SplitResult<T> split(const LatentVideo<T>& x, const SubspaceSpec& spec, EdgeMode mode) {
  SubspacePartition partition(x.shape(), spec, mode);
  const VideoShape& grid = x.shape();
  const VideoShape& padded = partition.padded_grid();
  const std::size_t channels = grid.channels;

  std::vector<SubspaceBlock<T>> blocks;
  blocks.reserve(partition.count());
  for (std::size_t i = 0; i < partition.count(); ++i) {
    SubspaceBlock<T> block{i, partition.block_tag(i), Matrix<T>(partition.block_size(), channels)};
    const auto pos = partition.positions(i);
    for (std::size_t t = 0; t < pos.size(); ++t) {
      const std::size_t p = pos[t];
      // Replicate padding: clamp padded coordinates back into the grid.
      const std::size_t w = std::min(p % padded.cols, grid.cols - 1);
      const std::size_t h = std::min((p / padded.cols) % padded.rows, grid.rows - 1);
      const std::size_t f = std::min(p / (padded.cols * padded.rows), grid.frames - 1);
      auto src = x.cell(f, h, w);
      std::copy(src.begin(), src.end(), block.tokens.row(t).begin());
    }
    blocks.push_back(std::move(block));
  }
  return {std::move(blocks), std::move(partition)};
}

template <typename T>
LatentVideo<T> merge(const std::vector<SubspaceBlock<T>>& blocks,
                     const SubspacePartition& partition) {
  if (blocks.size() != partition.count()) {
    throw MapMismatchError("merge: got " + std::to_string(blocks.size()) + " blocks, partition has " +
                           std::to_string(partition.count()));
  }
  const VideoShape& grid = partition.grid();
  const VideoShape& padded = partition.padded_grid();
  LatentVideo<T> out(grid);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& block = blocks[i];
    if (block.index != i || block.tag != partition.block_tag(i)) {
      throw MapMismatchError("merge: block at slot " + std::to_string(i) +
                             " does not belong to this partition slot");
    }
    if (block.tokens.rows() != partition.block_size() || block.tokens.cols() != grid.channels) {
      throw DimensionError("merge: block " + std::to_string(i) + " has shape " +
                           std::to_string(block.tokens.rows()) + "x" +
                           std::to_string(block.tokens.cols()));
    }
    const auto pos = partition.positions(i);
    for (std::size_t t = 0; t < pos.size(); ++t) {
      const std::size_t p = pos[t];
      const std::size_t w = p % padded.cols;
      const std::size_t h = (p / padded.cols) % padded.rows;
      const std::size_t f = p / (padded.cols * padded.rows);
      if (f >= grid.frames || h >= grid.rows || w >= grid.cols) continue;  // padding, cropped
      auto src = block.tokens.row(t);
      std::copy(src.begin(), src.end(), out.cell(f, h, w).begin());
    }
  }
  return out;
}

namespace {

template <typename T>
LatentVideo<T> roll(const LatentVideo<T>& x, std::size_t df, std::size_t dh, std::size_t dw) {
  const VideoShape& s = x.shape();
  df %= s.frames;
  dh %= s.rows;
  dw %= s.cols;
  LatentVideo<T> out(s);
  for (std::size_t f = 0; f < s.frames; ++f) {
    const std::size_t tf = (f + df) % s.frames;
    for (std::size_t h = 0; h < s.rows; ++h) {
      const std::size_t th = (h + dh) % s.rows;
      for (std::size_t w = 0; w < s.cols; ++w) {
        const std::size_t tw = (w + dw) % s.cols;
        auto src = x.cell(f, h, w);
        std::copy(src.begin(), src.end(), out.cell(tf, th, tw).begin());
      }
    }
  }
  return out;
}

}  // namespace

template <typename T>
LatentVideo<T> shift(const LatentVideo<T>& x, const SubspaceSpec& spec) {
  spec.validate();
  return roll(x, spec.shift_frames(), spec.shift_rows(), spec.shift_cols());
}

template <typename T>
LatentVideo<T> unshift(const LatentVideo<T>& x, const SubspaceSpec& spec) {
  spec.validate();
  const VideoShape& s = x.shape();
  return roll(x, s.frames - spec.shift_frames() % s.frames, s.rows - spec.shift_rows() % s.rows,
              s.cols - spec.shift_cols() % s.cols);
}

std::size_t subspace_of(std::size_t f, std::size_t h, std::size_t w, const VideoShape& grid,
                        const SubspaceSpec& spec, bool shifted) {
  SubspacePartition partition(grid, spec, EdgeMode::kStrict);
  if (f >= grid.frames || h >= grid.rows || w >= grid.cols) {
    throw BoundsError("position (" + std::to_string(f) + "," + std::to_string(h) + "," +
                      std::to_string(w) + ") outside grid " + grid.to_string());
  }
  if (shifted) {
    f = (f + spec.shift_frames()) % grid.frames;
    h = (h + spec.shift_rows()) % grid.rows;
    w = (w + spec.shift_cols()) % grid.cols;
  }
  const std::size_t nh = grid.rows / spec.rows;
  const std::size_t nw = grid.cols / spec.cols;
  return ((f / spec.frames) * nh + h / spec.rows) * nw + w / spec.cols;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::size_t union_partition_components(const VideoShape& grid, const SubspaceSpec& spec) {
  SubspacePartition partition(grid, spec, EdgeMode::kStrict);
  const std::size_t cells = grid.cells();
  // Node per position, plus one node per window of each partition.
  const std::size_t windows = partition.count();
  DisjointSets sets(cells + 2 * windows);
  for (std::size_t f = 0; f < grid.frames; ++f) {
    for (std::size_t h = 0; h < grid.rows; ++h) {
      for (std::size_t w = 0; w < grid.cols; ++w) {
        const std::size_t p = (f * grid.rows + h) * grid.cols + w;
        sets.unite(p, cells + subspace_of(f, h, w, grid, spec, false));
        sets.unite(p, cells + windows + subspace_of(f, h, w, grid, spec, true));
      }
    }
  }
  std::size_t components = 0;
  for (std::size_t p = 0; p < cells; ++p) {
    if (sets.find(p) == p) ++components;
  }
  return components;
}

#define STSA_INSTANTIATE(T)                                                                  \
  template SplitResult<T> split(const LatentVideo<T>&, const SubspaceSpec&, EdgeMode);      \
  template LatentVideo<T> merge(const std::vector<SubspaceBlock<T>>&,                       \
                                const SubspacePartition&);                                  \
  template LatentVideo<T> shift(const LatentVideo<T>&, const SubspaceSpec&);                \
  template LatentVideo<T> unshift(const LatentVideo<T>&, const SubspaceSpec&);

STSA_INSTANTIATE(float)
STSA_INSTANTIATE(double)
#undef STSA_INSTANTIATE

}  // namespace stsa
