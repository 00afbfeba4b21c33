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

#include "stsa/flow.hpp"
#include "stsa/subspace.hpp"
#include "stsa/tensor.hpp"

namespace stsa {

// Central frame floor((b + e) / 2) of the temporal window [b, e].
std::size_t reference_frame(std::size_t begin, std::size_t end);

// Cell indices are h * W + w within a frame.
struct CellMove {
  std::size_t src = 0;
  std::size_t tgt = 0;
  bool operator==(const CellMove&) const = default;
};

struct RequestedTarget {
  long x = 0;  // before clamping
  long y = 0;
};

// Realized relocation of one frame: a partial permutation. Sources are
// distinct, targets are distinct, and no target is an untouched cell.
struct FrameAlignment {
  std::size_t frame = 0;
  std::vector<CellMove> moves;
  std::vector<std::size_t> untouched;
  std::vector<RequestedTarget> requested;  // per cell, rounded, unclamped
};

// Alignment of one temporal window [begin, end] toward its reference frame.
class AlignmentMap {
 public:
  AlignmentMap(std::size_t begin, std::size_t end, std::size_t rows, std::size_t cols,
               std::vector<FrameAlignment> frames);

  std::size_t begin() const { return begin_; }
  std::size_t end() const { return end_; }
  std::size_t reference() const { return reference_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<FrameAlignment>& frames() const { return frames_; }
  const FrameAlignment& frame(std::size_t k) const { return frames_.at(k - begin_); }

  std::uint64_t checksum() const { return checksum_; }
  bool is_identity() const;

 private:
  std::size_t begin_;
  std::size_t end_;
  std::size_t reference_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<FrameAlignment> frames_;
  std::uint64_t checksum_ = 0;
};

// Alignment maps for every temporal window of an F x H x W grid.
class AlignmentPlan {
 public:
  AlignmentPlan(std::size_t frames, std::size_t rows, std::size_t cols, std::size_t window,
                std::vector<AlignmentMap> windows);

  static AlignmentPlan identity(std::size_t frames, std::size_t rows, std::size_t cols,
                                std::size_t window);

  std::size_t frames() const { return frames_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t window() const { return window_; }
  const std::vector<AlignmentMap>& windows() const { return windows_; }
  std::uint64_t checksum() const { return checksum_; }
  bool is_identity() const;

 private:
  std::size_t frames_;
  std::size_t rows_;
  std::size_t cols_;
  std::size_t window_;
  std::vector<AlignmentMap> windows_;
  std::uint64_t checksum_ = 0;
};

// For every window [b, b + window - 1] and frame k in it, cell (x, y) asks for
// (nearest(x + F_x^{k->r}), nearest(y + F_y^{k->r})), clamped to the grid.
// Requests are granted in order of ascending flow magnitude, ties by
// row-major source index. A source whose target is taken stays in place; if
// its own cell had already been granted to a mover, that mover stays in place
// too, and so on down the chain.
AlignmentPlan compute_alignment(const FlowSet& flows, std::size_t frames, std::size_t rows,
                                std::size_t cols, std::size_t window);

template <typename T>
struct AlignedVideo {
  LatentVideo<T> video;
  std::uint64_t plan_checksum = 0;
};

// output[k, tgt] = input[k, src] for every move; other cells unchanged.
template <typename T>
AlignedVideo<T> align(const LatentVideo<T>& x, const AlignmentPlan& plan);

// Exact inverse of align under the same plan.
template <typename T>
LatentVideo<T> restore(const AlignedVideo<T>& aligned, const AlignmentPlan& plan);

// Rolls every field's grid by (s_h/2, s_w/2) and relabels frames under the
// temporal roll by s_f/2, keeping flow coordinates coherent with shift().
// An open chain is first closed with the composed F^{F-1->0} link.
FlowSet shift_flows(const FlowSet& flows, const SubspaceSpec& spec);
FlowSet unshift_flows(const FlowSet& flows, const SubspaceSpec& spec);

// {"frames":F,"rows":H,"cols":W,"window":s_f,"windows":[{"begin","end",
//  "reference","moves":[{"frame","src":[row,col],"tgt":[row,col]}]}]}
std::string alignment_to_json(const AlignmentPlan& plan);

}  // namespace stsa
