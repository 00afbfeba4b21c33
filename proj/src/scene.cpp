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

#include "stsa/scene.hpp"

#include "stsa/rng.hpp"

namespace stsa {

namespace {

long wrap_index(long v, long n) { return ((v % n) + n) % n; }

bool in_shape(const MovingObject& o, long i, long j) {
  if (o.shape == ObjectShape::kSquare) return true;
  // Disk inscribed in the bounding box, measured from its centre.
  const double c = (static_cast<double>(o.size) - 1.0) / 2.0;
  const double r = static_cast<double>(o.size) / 2.0;
  const double di = static_cast<double>(i) - c;
  const double dj = static_cast<double>(j) - c;
  return di * di + dj * dj <= r * r;
}

// Per-cell ownership of one object at one frame: texture offset or -1.
struct Footprint {
  std::vector<long> offset;  // (i * size + j) into the object texture, -1 if empty
};

Footprint footprint(const SceneSpec& spec, const MovingObject& o, std::size_t frame,
                    std::size_t object_index) {
  const long rows = static_cast<long>(spec.rows);
  const long cols = static_cast<long>(spec.cols);
  const long ox = o.x + static_cast<long>(frame) * o.vx;
  const long oy = o.y + static_cast<long>(frame) * o.vy;
  const long s = static_cast<long>(o.size);
  if (!spec.wrap && (ox < 0 || oy < 0 || ox + s > cols || oy + s > rows)) {
    throw BoundsError("object " + std::to_string(object_index) + " leaves the grid at frame " +
                      std::to_string(frame) + " and wrapping is off");
  }
  if (s > rows || s > cols) throw ConfigError("object larger than the grid");
  Footprint fp{std::vector<long>(spec.rows * spec.cols, -1)};
  for (long i = 0; i < s; ++i) {
    for (long j = 0; j < s; ++j) {
      if (!in_shape(o, i, j)) continue;
      const long y = wrap_index(oy + i, rows);
      const long x = wrap_index(ox + j, cols);
      fp.offset[static_cast<std::size_t>(y * cols + x)] = i * s + j;
    }
  }
  return fp;
}

}  // namespace

Scene gen_scene(const SceneSpec& spec, std::uint64_t seed) {
  const VideoShape shape = spec.shape();
  validate_shape(shape);
  const std::size_t cells = shape.frame_cells();
  const long rows = static_cast<long>(spec.rows);
  const long cols = static_cast<long>(spec.cols);
  for (const MovingObject& o : spec.objects) {
    if (o.size == 0) throw ConfigError("object size must be positive");
  }

  // Textures.
  std::vector<double> background(cells * spec.channels);
  {
    Rng rng(spec.background_seed);
    for (double& v : background) v = spec.background_scale * rng.normal();
  }
  std::vector<std::vector<double>> textures;
  {
    Rng rng(seed);
    for (const MovingObject& o : spec.objects) {
      std::vector<double> tex(o.size * o.size * spec.channels);
      for (double& v : tex) v = spec.object_scale * rng.normal();
      textures.push_back(std::move(tex));
    }
  }

  // Footprints per frame and object.
  std::vector<std::vector<Footprint>> prints(spec.frames);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    for (std::size_t o = 0; o < spec.objects.size(); ++o) {
      prints[f].push_back(footprint(spec, spec.objects[o], f, o));
    }
  }

  Scene scene;
  scene.video = LatentVideo<double>(shape);
  scene.object_mask.assign(shape.cells(), 0);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    for (std::size_t c = 0; c < cells; ++c) {
      auto dst = scene.video.cell(f * cells + c);
      const double* src = &background[c * spec.channels];
      std::copy(src, src + spec.channels, dst.begin());
      for (std::size_t o = 0; o < spec.objects.size(); ++o) {
        const long off = prints[f][o].offset[c];
        if (off < 0) continue;
        if (scene.object_mask[f * cells + c]) {
          throw ConfigError("objects overlap at frame " + std::to_string(f));
        }
        scene.object_mask[f * cells + c] = 1;
        const double* t = &textures[o][static_cast<std::size_t>(off) * spec.channels];
        std::copy(t, t + spec.channels, dst.begin());
      }
    }
  }

  // Keypoints at object centres.
  std::vector<std::vector<Keypoint>> kps(spec.frames);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    for (const MovingObject& o : spec.objects) {
      const double half = (static_cast<double>(o.size) - 1.0) / 2.0;
      const long ox = o.x + static_cast<long>(f) * o.vx;
      const long oy = o.y + static_cast<long>(f) * o.vy;
      double cx = static_cast<double>(ox) + half;
      double cy = static_cast<double>(oy) + half;
      if (spec.wrap) {
        cx = std::fmod(std::fmod(cx, static_cast<double>(cols)) + cols, static_cast<double>(cols));
        cy = std::fmod(std::fmod(cy, static_cast<double>(rows)) + rows, static_cast<double>(rows));
      }
      kps[f].push_back({cx, cy, true});
    }
  }
  scene.poses = PoseSequence(spec.cols, spec.rows, std::move(kps));

  // Permutation flows between neighbouring frames.
  std::vector<FlowField> fw;
  std::vector<FlowField> bw;
  for (std::size_t k = 0; k + 1 < spec.frames; ++k) {
    std::vector<long> target(cells);
    for (std::size_t c = 0; c < cells; ++c) target[c] = static_cast<long>(c);
    std::vector<long> owner(cells, -1);
    for (std::size_t o = 0; o < spec.objects.size(); ++o) {
      const MovingObject& obj = spec.objects[o];
      const auto& now = prints[k][o].offset;
      const auto& next = prints[k + 1][o].offset;
      for (std::size_t c = 0; c < cells; ++c) {
        if (now[c] < 0 && next[c] < 0) continue;
        if (owner[c] >= 0 && owner[c] != static_cast<long>(o)) {
          throw ConfigError("objects " + std::to_string(owner[c]) + " and " + std::to_string(o) +
                            " sweep through the same cells between frames " + std::to_string(k) +
                            " and " + std::to_string(k + 1));
        }
        owner[c] = static_cast<long>(o);
      }
      auto step = [&](long cell, long sign) {
        long y = cell / cols + sign * obj.vy;
        long x = cell % cols + sign * obj.vx;
        if (spec.wrap) {
          y = wrap_index(y, rows);
          x = wrap_index(x, cols);
        } else if (x < 0 || y < 0 || x >= cols || y >= rows) {
          return -1L;
        }
        return y * cols + x;
      };
      for (std::size_t c = 0; c < cells; ++c) {
        if (now[c] >= 0) {
          target[c] = step(static_cast<long>(c), +1);
        } else if (next[c] >= 0) {
          // Covered background: walk back through the object to the cell it vacates.
          long d = step(static_cast<long>(c), -1);
          long last = d;
          while (d >= 0 && now[static_cast<std::size_t>(d)] >= 0) {
            last = d;
            d = step(d, -1);
          }
          target[c] = last;
        }
      }
    }
    FlowField forward(k, k + 1, spec.rows, spec.cols);
    FlowField backward(k + 1, k, spec.rows, spec.cols);
    for (std::size_t c = 0; c < cells; ++c) {
      const long sx = static_cast<long>(c) % cols;
      const long sy = static_cast<long>(c) / cols;
      const long tx = target[c] % cols;
      const long ty = target[c] / cols;
      forward.set(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy),
                  static_cast<float>(tx - sx), static_cast<float>(ty - sy));
      backward.set(static_cast<std::size_t>(tx), static_cast<std::size_t>(ty),
                   static_cast<float>(sx - tx), static_cast<float>(sy - ty));
    }
    fw.push_back(std::move(forward));
    bw.push_back(std::move(backward));
  }
  scene.flows = FlowSet(spec.frames, spec.rows, spec.cols, std::move(fw), std::move(bw));
  return scene;
}

SceneSpec single_object_scene(std::size_t frames, std::size_t rows, std::size_t cols,
                              std::size_t channels, std::size_t size, long vx, long vy,
                              std::uint64_t background_seed) {
  SceneSpec spec;
  spec.frames = frames;
  spec.rows = rows;
  spec.cols = cols;
  spec.channels = channels;
  spec.wrap = true;
  spec.background_seed = background_seed;
  spec.objects.push_back({ObjectShape::kSquare, size,
                          static_cast<long>(cols / 2) - static_cast<long>(size / 2),
                          static_cast<long>(rows / 2) - static_cast<long>(size / 2), vx, vy});
  return spec;
}

SceneSpec two_object_scene(std::size_t frames, std::size_t rows, std::size_t cols,
                           std::size_t channels, std::size_t size, long vx, long vy,
                           std::uint64_t background_seed) {
  SceneSpec spec;
  spec.frames = frames;
  spec.rows = rows;
  spec.cols = cols;
  spec.channels = channels;
  spec.wrap = true;
  spec.background_seed = background_seed;
  spec.objects.push_back({ObjectShape::kSquare, size, 0, 0, vx, vy});
  spec.objects.push_back({ObjectShape::kSquare, size, static_cast<long>(cols / 2),
                          static_cast<long>(rows / 2), vx, vy});
  return spec;
}

}  // namespace stsa
