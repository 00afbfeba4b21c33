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
#include <vector>

#include "stsa/flow.hpp"
#include "stsa/pose.hpp"
#include "stsa/tensor.hpp"

namespace stsa {

enum class ObjectShape { kSquare, kBlob };

// Rigid textured object. (x, y) is the top-left corner of its size x size
// bounding box at frame 0; it moves by (vx, vy) cells per frame.
struct MovingObject {
  ObjectShape shape = ObjectShape::kSquare;
  std::size_t size = 4;
  long x = 0;
  long y = 0;
  long vx = 0;
  long vy = 0;
};

struct SceneSpec {
  std::size_t frames = 16;
  std::size_t rows = 16;
  std::size_t cols = 16;
  std::size_t channels = 8;
  std::vector<MovingObject> objects;
  std::uint64_t background_seed = 0;
  bool wrap = false;  // objects re-enter on the opposite edge
  double background_scale = 1.0;
  double object_scale = 1.0;

  VideoShape shape() const { return {frames, rows, cols, channels}; }
};

struct Scene {
  LatentVideo<double> video;
  PoseSequence poses;  // one keypoint per object, at its centre
  FlowSet flows;       // exact integer flows, a per-frame permutation of cells
  std::vector<char> object_mask;  // [F, H, W], 1 on object cells

  bool is_object(std::size_t frame, std::size_t cell) const {
    return object_mask[frame * video.shape().frame_cells() + cell] != 0;
  }
};

// Static random background plus rigidly translating textured objects.
// Object cells move by their velocity. The background cells an object is
// about to cover are routed to the cells it vacates, so every flow field is
// a permutation of the grid and composes exactly.
Scene gen_scene(const SceneSpec& spec, std::uint64_t seed);

// A single square of the given size moving at (vx, vy) with wrapping, centred
// at frame 0.
SceneSpec single_object_scene(std::size_t frames, std::size_t rows, std::size_t cols,
                              std::size_t channels, std::size_t size, long vx, long vy,
                              std::uint64_t background_seed);

// Two squares of the given size with the same velocity, one with its corner
// at the origin and one at (cols / 2, rows / 2), with wrapping.
SceneSpec two_object_scene(std::size_t frames, std::size_t rows, std::size_t cols,
                           std::size_t channels, std::size_t size, long vx, long vy,
                           std::uint64_t background_seed);

}  // namespace stsa
