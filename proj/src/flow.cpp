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

#include "stsa/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "stsa/detail/bytes.hpp"
#include "stsa/error.hpp"
#include "stsa/tensor_io.hpp"

namespace stsa {

FlowField::FlowField(std::size_t src, std::size_t dst, std::size_t rows, std::size_t cols)
    : src_(src), dst_(dst), rows_(rows), cols_(cols), disp_(rows * cols * 2, 0.0f) {
  if (rows == 0 || cols == 0) throw DimensionError("flow grid must be at least 1x1");
}

FlowField::FlowField(std::size_t src, std::size_t dst, std::size_t rows, std::size_t cols,
                     std::vector<float> disp)
    : src_(src), dst_(dst), rows_(rows), cols_(cols), disp_(std::move(disp)) {
  if (rows == 0 || cols == 0) throw DimensionError("flow grid must be at least 1x1");
  if (disp_.size() != rows * cols * 2) {
    throw DimensionError("flow payload holds " + std::to_string(disp_.size()) + " values, " +
                         std::to_string(rows) + "x" + std::to_string(cols) + "x2 expected");
  }
  for (float v : disp_) {
    if (!std::isfinite(v)) throw NumericError("flow field contains NaN or Inf");
  }
}

FlowField FlowField::constant(std::size_t src, std::size_t dst, std::size_t rows,
                              std::size_t cols, float dx, float dy) {
  FlowField f(src, dst, rows, cols);
  for (std::size_t y = 0; y < rows; ++y) {
    for (std::size_t x = 0; x < cols; ++x) f.set(x, y, dx, dy);
  }
  return f;
}

bool FlowField::bitwise_equal(const FlowField& other) const {
  return src_ == other.src_ && dst_ == other.dst_ && rows_ == other.rows_ &&
         cols_ == other.cols_ &&
         std::memcmp(disp_.data(), other.disp_.data(), disp_.size() * sizeof(float)) == 0;
}

Point2 flow_lookup(const FlowField& field, long x, long y) {
  if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= field.cols() ||
      static_cast<std::size_t>(y) >= field.rows()) {
    throw BoundsError("flow lookup at (" + std::to_string(x) + ", " + std::to_string(y) +
                      ") outside " + std::to_string(field.cols()) + "x" +
                      std::to_string(field.rows()));
  }
  const auto ux = static_cast<std::size_t>(x);
  const auto uy = static_cast<std::size_t>(y);
  return {static_cast<double>(x) + static_cast<double>(field.dx(ux, uy)),
          static_cast<double>(y) + static_cast<double>(field.dy(ux, uy))};
}

long nearest(double v) {
  if (!std::isfinite(v)) throw NumericError("nearest() of a non-finite value");
  constexpr double kLimit = 4611686018427387904.0;  // 2^62
  if (std::abs(v) >= kLimit) throw NumericError("nearest() argument out of integer range");
  return static_cast<long>(std::round(v));  // std::round ties away from zero
}

std::pair<std::size_t, std::size_t> nearest_cell(Point2 p, std::size_t rows, std::size_t cols) {
  const long x = std::clamp(nearest(p.x), 0L, static_cast<long>(cols) - 1);
  const long y = std::clamp(nearest(p.y), 0L, static_cast<long>(rows) - 1);
  return {static_cast<std::size_t>(x), static_cast<std::size_t>(y)};
}

FlowField compose(const FlowField& f_ij, const FlowField& f_jk) {
  if (f_ij.dst() != f_jk.src()) {
    throw FlowChainError("compose: F^{" + std::to_string(f_ij.src()) + "->" +
                         std::to_string(f_ij.dst()) + "} cannot chain into F^{" +
                         std::to_string(f_jk.src()) + "->" + std::to_string(f_jk.dst()) + "}");
  }
  if (f_ij.rows() != f_jk.rows() || f_ij.cols() != f_jk.cols()) {
    throw DimensionError("compose: flow resolutions differ");
  }
  FlowField out(f_ij.src(), f_jk.dst(), f_ij.rows(), f_ij.cols());
  for (std::size_t y = 0; y < out.rows(); ++y) {
    for (std::size_t x = 0; x < out.cols(); ++x) {
      const Point2 mid = flow_lookup(f_ij, static_cast<long>(x), static_cast<long>(y));
      const auto [mx, my] = nearest_cell(mid, out.rows(), out.cols());
      out.set(x, y, f_ij.dx(x, y) + f_jk.dx(mx, my), f_ij.dy(x, y) + f_jk.dy(mx, my));
    }
  }
  return out;
}

FlowField downsample(const FlowField& field, std::size_t k) {
  if (k == 0 || field.rows() % k != 0 || field.cols() % k != 0) {
    throw DimensionError("downsample factor " + std::to_string(k) + " does not divide " +
                         std::to_string(field.rows()) + "x" + std::to_string(field.cols()));
  }
  const std::size_t rows = field.rows() / k;
  const std::size_t cols = field.cols() / k;
  FlowField out(field.src(), field.dst(), rows, cols);
  const double norm = static_cast<double>(k) * static_cast<double>(k) * static_cast<double>(k);
  for (std::size_t y = 0; y < rows; ++y) {
    for (std::size_t x = 0; x < cols; ++x) {
      double sx = 0.0;
      double sy = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < k; ++i) {
          sx += field.dx(x * k + i, y * k + j);
          sy += field.dy(x * k + i, y * k + j);
        }
      }
      out.set(x, y, static_cast<float>(sx / norm), static_cast<float>(sy / norm));
    }
  }
  return out;
}

FlowSet::FlowSet(std::size_t frames, std::size_t rows, std::size_t cols,
                 std::vector<FlowField> forward, std::vector<FlowField> backward,
                 std::optional<std::size_t> derived_link)
    : frames_(frames),
      rows_(rows),
      cols_(cols),
      forward_(std::move(forward)),
      backward_(std::move(backward)),
      derived_link_(derived_link) {
  if (frames_ == 0 || rows_ == 0 || cols_ == 0) throw DimensionError("flow set dims must be >= 1");
  const std::size_t open = frames_ - 1;
  if (forward_.size() != backward_.size() ||
      (forward_.size() != open && !(frames_ > 1 && forward_.size() == frames_))) {
    throw FlowChainError("flow set for " + std::to_string(frames_) + " frames needs " +
                         std::to_string(open) + " forward and backward links, got " +
                         std::to_string(forward_.size()) + "/" + std::to_string(backward_.size()));
  }
  for (std::size_t k = 0; k < forward_.size(); ++k) {
    const std::size_t next = (k + 1) % frames_;
    const FlowField& fw = forward_[k];
    const FlowField& bw = backward_[k];
    if (fw.src() != k || fw.dst() != next || bw.src() != next || bw.dst() != k) {
      throw FlowChainError("flow link " + std::to_string(k) + " has mismatched frame pair");
    }
    if (fw.rows() != rows_ || fw.cols() != cols_ || bw.rows() != rows_ || bw.cols() != cols_) {
      throw DimensionError("flow link " + std::to_string(k) + " resolution mismatch");
    }
  }
  if (derived_link_ && *derived_link_ >= forward_.size()) {
    throw FlowChainError("derived link index out of range");
  }
}

FlowSet FlowSet::zeros(std::size_t frames, std::size_t rows, std::size_t cols) {
  std::vector<FlowField> fw;
  std::vector<FlowField> bw;
  for (std::size_t k = 0; k + 1 < frames; ++k) {
    fw.emplace_back(k, k + 1, rows, cols);
    bw.emplace_back(k + 1, k, rows, cols);
  }
  return FlowSet(frames, rows, cols, std::move(fw), std::move(bw));
}

void FlowSet::add_direct(FlowField field) {
  if (field.src() >= frames_ || field.dst() >= frames_) {
    throw FlowChainError("direct flow pair outside the clip");
  }
  if (field.rows() != rows_ || field.cols() != cols_) {
    throw DimensionError("direct flow resolution mismatch");
  }
  const auto key = std::make_pair(field.src(), field.dst());
  direct_.insert_or_assign(key, std::move(field));
}

FlowField FlowSet::between(std::size_t i, std::size_t j) const {
  if (i >= frames_ || j >= frames_) {
    throw FlowChainError("no flow F^{" + std::to_string(i) + "->" + std::to_string(j) +
                         "}: clip has " + std::to_string(frames_) + " frames");
  }
  if (i == j) return FlowField(i, j, rows_, cols_);
  if (auto it = direct_.find({i, j}); it != direct_.end()) return it->second;
  if (i < j) {
    FlowField acc = forward_.at(i);
    for (std::size_t k = i + 1; k < j; ++k) acc = compose(acc, forward_.at(k));
    return acc;
  }
  FlowField acc = backward_.at(i - 1);
  for (std::size_t k = i - 1; k-- > j;) acc = compose(acc, backward_.at(k));
  return acc;
}

bool FlowSet::bitwise_equal(const FlowSet& other) const {
  if (frames_ != other.frames_ || rows_ != other.rows_ || cols_ != other.cols_ ||
      forward_.size() != other.forward_.size() || derived_link_ != other.derived_link_ ||
      direct_.size() != other.direct_.size()) {
    return false;
  }
  for (std::size_t k = 0; k < forward_.size(); ++k) {
    if (!forward_[k].bitwise_equal(other.forward_[k]) ||
        !backward_[k].bitwise_equal(other.backward_[k])) {
      return false;
    }
  }
  for (const auto& [key, field] : direct_) {
    auto it = other.direct_.find(key);
    if (it == other.direct_.end() || !field.bitwise_equal(it->second)) return false;
  }
  return true;
}

FlowSet downsample(const FlowSet& flows, std::size_t k) {
  std::vector<FlowField> fw;
  std::vector<FlowField> bw;
  for (std::size_t i = 0; i < flows.links(); ++i) {
    fw.push_back(downsample(flows.forward(i), k));
    bw.push_back(downsample(flows.backward(i), k));
  }
  return FlowSet(flows.frames(), flows.rows() / k, flows.cols() / k, std::move(fw),
                 std::move(bw), flows.derived_link());
}

namespace {

struct Anchor {
  double x;
  double y;
  double dx;
  double dy;
};

FlowField splat_anchors(std::size_t src, std::size_t dst, std::size_t rows, std::size_t cols,
                        const std::vector<Anchor>& anchors, double sigma) {
  FlowField out(src, dst, rows, cols);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> logw(anchors.size());
  for (std::size_t y = 0; y < rows; ++y) {
    for (std::size_t x = 0; x < cols; ++x) {
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < anchors.size(); ++a) {
        const double ex = static_cast<double>(x) - anchors[a].x;
        const double ey = static_cast<double>(y) - anchors[a].y;
        logw[a] = -(ex * ex + ey * ey) * inv;
        peak = std::max(peak, logw[a]);
      }
      // Weights relative to the nearest anchor so far cells do not underflow.
      double wsum = 0.0;
      double sx = 0.0;
      double sy = 0.0;
      for (std::size_t a = 0; a < anchors.size(); ++a) {
        const double w = std::exp(logw[a] - peak);
        wsum += w;
        sx += w * anchors[a].dx;
        sy += w * anchors[a].dy;
      }
      out.set(x, y, static_cast<float>(sx / wsum), static_cast<float>(sy / wsum));
    }
  }
  return out;
}

}  // namespace

FlowSet synth_flow_from_poses(const PoseSequence& poses, std::size_t rows, std::size_t cols,
                              double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("flow bandwidth sigma must be positive");
  }
  if (poses.frames() == 0) throw DimensionError("pose sequence has no frames");
  std::vector<FlowField> fw;
  std::vector<FlowField> bw;
  for (std::size_t k = 0; k + 1 < poses.frames(); ++k) {
    const auto& a = poses.frame(k);
    const auto& b = poses.frame(k + 1);
    std::vector<Anchor> forward_anchors;
    std::vector<Anchor> backward_anchors;
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (!a[j].visible || !b[j].visible) continue;
      forward_anchors.push_back({a[j].x, a[j].y, b[j].x - a[j].x, b[j].y - a[j].y});
      backward_anchors.push_back({b[j].x, b[j].y, a[j].x - b[j].x, a[j].y - b[j].y});
    }
    if (forward_anchors.empty()) {
      throw FlowChainError("frames " + std::to_string(k) + " and " + std::to_string(k + 1) +
                           " share no visible keypoint");
    }
    fw.push_back(splat_anchors(k, k + 1, rows, cols, forward_anchors, sigma));
    bw.push_back(splat_anchors(k + 1, k, rows, cols, backward_anchors, sigma));
  }
  return FlowSet(poses.frames(), rows, cols, std::move(fw), std::move(bw));
}

std::string encode_mfl(const FlowSet& flows) {
  if (flows.closed()) {
    throw ConfigError("MFL1 stores open flow chains only; unshift the flow set first");
  }
  std::string out = "MFL1";
  detail::put_u32(out, kMflVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(flows.frames()));
  detail::put_u32(out, static_cast<std::uint32_t>(flows.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(flows.cols()));
  for (std::size_t k = 0; k < flows.links(); ++k) {
    for (float v : flows.forward(k).values()) detail::put_f32(out, v);
    for (float v : flows.backward(k).values()) detail::put_f32(out, v);
  }
  return out;
}

FlowSet decode_mfl(const std::string& bytes) {
  detail::ByteReader in(bytes, "mfl");
  if (in.take(4) != "MFL1") throw ParseError("mfl: bad magic");
  const std::uint32_t version = in.u32();
  if (version != kMflVersion) {
    throw UnsupportedVersionError("mfl: unsupported version " + std::to_string(version));
  }
  const std::uint32_t frames = in.u32();
  const std::uint32_t rows = in.u32();
  const std::uint32_t cols = in.u32();
  if (frames == 0 || rows == 0 || cols == 0) throw ParseError("mfl: zero dimension in header");
  const std::size_t per_field = static_cast<std::size_t>(rows) * cols * 2;
  const std::size_t fields = 2 * (static_cast<std::size_t>(frames) - 1);
  const std::size_t expected = fields * per_field * 4;
  if (in.remaining() < expected) {
    throw ParseError("mfl: truncated payload, " + std::to_string(in.remaining()) + " of " +
                     std::to_string(expected) + " bytes");
  }
  if (in.remaining() > expected) throw ParseError("mfl: trailing bytes after payload");
  std::vector<FlowField> fw;
  std::vector<FlowField> bw;
  auto read_field = [&](std::size_t src, std::size_t dst) {
    std::vector<float> disp(per_field);
    for (float& v : disp) v = in.f32();
    return FlowField(src, dst, rows, cols, std::move(disp));
  };
  for (std::size_t k = 0; k + 1 < frames; ++k) {
    fw.push_back(read_field(k, k + 1));
    bw.push_back(read_field(k + 1, k));
  }
  return FlowSet(frames, rows, cols, std::move(fw), std::move(bw));
}

void save_flow(const std::filesystem::path& path, const FlowSet& flows) {
  write_file_bytes(path, encode_mfl(flows));
}

FlowSet load_flow(const std::filesystem::path& path) { return decode_mfl(read_file_bytes(path)); }

}  // namespace stsa
