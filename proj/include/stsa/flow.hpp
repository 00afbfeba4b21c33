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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stsa/pose.hpp"

namespace stsa {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Dense displacement field F^{src->dst} on an H x W grid, in grid cells.
// Storage is [H, W, 2] single precision with (dx, dy) innermost.
class FlowField {
 public:
  FlowField() = default;
  FlowField(std::size_t src, std::size_t dst, std::size_t rows, std::size_t cols);
  FlowField(std::size_t src, std::size_t dst, std::size_t rows, std::size_t cols,
            std::vector<float> disp);

  static FlowField constant(std::size_t src, std::size_t dst, std::size_t rows, std::size_t cols,
                            float dx, float dy);

  std::size_t src() const { return src_; }
  std::size_t dst() const { return dst_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  float dx(std::size_t x, std::size_t y) const { return disp_[(y * cols_ + x) * 2]; }
  float dy(std::size_t x, std::size_t y) const { return disp_[(y * cols_ + x) * 2 + 1]; }
  void set(std::size_t x, std::size_t y, float dx, float dy) {
    disp_[(y * cols_ + x) * 2] = dx;
    disp_[(y * cols_ + x) * 2 + 1] = dy;
  }

  std::span<const float> values() const { return disp_; }

  // Same pair, grid and bit pattern.
  bool bitwise_equal(const FlowField& other) const;

 private:
  std::size_t src_ = 0;
  std::size_t dst_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> disp_;
};

// (x + F_x(x, y), y + F_y(x, y)).
Point2 flow_lookup(const FlowField& field, long x, long y);

// Round to nearest, ties away from zero.
long nearest(double v);

// Nearest cell of a real position, clamped into the grid.
std::pair<std::size_t, std::size_t> nearest_cell(Point2 p, std::size_t rows, std::size_t cols);

// F^{i->k}(c) = F^{i->j}(c) + F^{j->k}(nearest_cell(c + F^{i->j}(c))).
FlowField compose(const FlowField& f_ij, const FlowField& f_jk);

// Block mean over k x k cells, divided by k so displacements are measured in
// coarse cells.
FlowField downsample(const FlowField& field, std::size_t k);

// Flows between the frames of a clip.
//
// Links are stored between neighbours: forward(k) = F^{k->k+1} and
// backward(k) = F^{k+1->k}. An open chain holds F-1 links. A closed ring
// holds F, the last joining frame F-1 to frame 0; rings only arise from
// shifting flows along with a rolled feature map. Flows for other pairs are
// composed from links unless supplied directly.
class FlowSet {
 public:
  FlowSet() = default;
  FlowSet(std::size_t frames, std::size_t rows, std::size_t cols, std::vector<FlowField> forward,
          std::vector<FlowField> backward, std::optional<std::size_t> derived_link = std::nullopt);

  static FlowSet zeros(std::size_t frames, std::size_t rows, std::size_t cols);

  std::size_t frames() const { return frames_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t links() const { return forward_.size(); }
  bool closed() const { return frames_ > 1 && forward_.size() == frames_; }
  // Index of a link that was composed rather than supplied (ring closure).
  std::optional<std::size_t> derived_link() const { return derived_link_; }

  const FlowField& forward(std::size_t k) const { return forward_.at(k); }
  const FlowField& backward(std::size_t k) const { return backward_.at(k); }

  // Registers a direct F^{i->j}, preferred over composition by between().
  void add_direct(FlowField field);
  bool has_direct(std::size_t i, std::size_t j) const { return direct_.count({i, j}) != 0; }
  const std::map<std::pair<std::size_t, std::size_t>, FlowField>& direct() const { return direct_; }

  // F^{i->j}: zero for i == j, otherwise direct or composed along the chain.
  FlowField between(std::size_t i, std::size_t j) const;

  bool bitwise_equal(const FlowSet& other) const;

 private:
  std::size_t frames_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<FlowField> forward_;
  std::vector<FlowField> backward_;
  std::optional<std::size_t> derived_link_;
  std::map<std::pair<std::size_t, std::size_t>, FlowField> direct_;
};

FlowSet downsample(const FlowSet& flows, std::size_t k);

// Keypoint-driven flow: every cell takes the Gaussian-weighted (bandwidth
// sigma, in cells) mean of the frame-to-frame displacements of keypoints
// visible in both frames. Keypoint coordinates are read in grid cells.
FlowSet synth_flow_from_poses(const PoseSequence& poses, std::size_t rows, std::size_t cols,
                              double sigma);

// MFL1 binary flow set:
//   "MFL1" | u32 version | u32 frames | u32 H | u32 W |
//   per adjacent pair k: forward [H,W,2] f32, backward [H,W,2] f32
constexpr std::uint32_t kMflVersion = 1;

std::string encode_mfl(const FlowSet& flows);
FlowSet decode_mfl(const std::string& bytes);
void save_flow(const std::filesystem::path& path, const FlowSet& flows);
FlowSet load_flow(const std::filesystem::path& path);

}  // namespace stsa
