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

#include "stsa/align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "stsa/detail/hash.hpp"
#include "stsa/error.hpp"

namespace stsa {

std::size_t reference_frame(std::size_t begin, std::size_t end) {
  if (begin > end) {
    throw ConfigError("temporal window begins at " + std::to_string(begin) + " after its end " +
                      std::to_string(end));
  }
  return (begin + end) / 2;
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

void check_frame(const FrameAlignment& fa, std::size_t cells) {
  std::vector<char> is_source(cells, 0);
  std::vector<char> is_target(cells, 0);
  for (const CellMove& m : fa.moves) {
    if (m.src >= cells || m.tgt >= cells || m.src == m.tgt) {
      throw MapMismatchError("alignment move out of range in frame " + std::to_string(fa.frame));
    }
    if (is_source[m.src]++ || is_target[m.tgt]++) {
      throw MapMismatchError("alignment frame " + std::to_string(fa.frame) +
                             " is not a partial permutation");
    }
  }
  for (std::size_t u : fa.untouched) {
    if (u >= cells || is_source[u] || is_target[u]) {
      throw MapMismatchError("untouched cell collides with a move in frame " +
                             std::to_string(fa.frame));
    }
  }
  if (fa.moves.size() + fa.untouched.size() != cells) {
    throw MapMismatchError("alignment frame " + std::to_string(fa.frame) +
                           " does not account for every cell");
  }
}

}  // namespace

AlignmentMap::AlignmentMap(std::size_t begin, std::size_t end, std::size_t rows, std::size_t cols,
                           std::vector<FrameAlignment> frames)
    : begin_(begin),
      end_(end),
      reference_(reference_frame(begin, end)),
      rows_(rows),
      cols_(cols),
      frames_(std::move(frames)) {
  if (frames_.size() != end_ - begin_ + 1) {
    throw MapMismatchError("alignment map for [" + std::to_string(begin_) + ", " +
                           std::to_string(end_) + "] has " + std::to_string(frames_.size()) +
                           " frames");
  }
  detail::Fnv1a hash;
  hash.mix(begin_).mix(end_).mix(rows_).mix(cols_);
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const FrameAlignment& fa = frames_[i];
    if (fa.frame != begin_ + i) throw MapMismatchError("alignment frames out of order");
    check_frame(fa, rows_ * cols_);
    if (fa.frame == reference_ && !fa.moves.empty()) {
      throw MapMismatchError("reference frame " + std::to_string(reference_) + " must not move");
    }
    hash.mix(fa.frame).mix(fa.moves.size());
    for (const CellMove& m : fa.moves) hash.mix(m.src).mix(m.tgt);
  }
  checksum_ = hash.digest();
}

bool AlignmentMap::is_identity() const {
  return std::all_of(frames_.begin(), frames_.end(),
                     [](const FrameAlignment& fa) { return fa.moves.empty(); });
}

AlignmentPlan::AlignmentPlan(std::size_t frames, std::size_t rows, std::size_t cols,
                             std::size_t window, std::vector<AlignmentMap> windows)
    : frames_(frames), rows_(rows), cols_(cols), window_(window), windows_(std::move(windows)) {
  if (window_ == 0 || frames_ % window_ != 0) {
    throw DimensionError("temporal window " + std::to_string(window_) + " does not divide " +
                         std::to_string(frames_) + " frames");
  }
  if (windows_.size() != frames_ / window_) {
    throw MapMismatchError("alignment plan needs " + std::to_string(frames_ / window_) +
                           " windows, got " + std::to_string(windows_.size()));
  }
  detail::Fnv1a hash;
  hash.mix(frames_).mix(rows_).mix(cols_).mix(window_);
  for (std::size_t i = 0; i < windows_.size(); ++i) {
    const AlignmentMap& m = windows_[i];
    if (m.begin() != i * window_ || m.end() != (i + 1) * window_ - 1 || m.rows() != rows_ ||
        m.cols() != cols_) {
      throw MapMismatchError("alignment map in slot " + std::to_string(i) +
                             " belongs to window [" + std::to_string(m.begin()) + ", " +
                             std::to_string(m.end()) + "]");
    }
    hash.mix(m.checksum());
  }
  checksum_ = hash.digest();
}

AlignmentPlan AlignmentPlan::identity(std::size_t frames, std::size_t rows, std::size_t cols,
                                      std::size_t window) {
  if (window == 0 || frames % window != 0) {
    throw DimensionError("temporal window does not divide the frame count");
  }
  std::vector<AlignmentMap> windows;
  std::vector<std::size_t> all(rows * cols);
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t b = 0; b < frames; b += window) {
    std::vector<FrameAlignment> fr;
    for (std::size_t k = b; k < b + window; ++k) {
      std::vector<RequestedTarget> req(rows * cols);
      for (std::size_t c = 0; c < rows * cols; ++c) {
        req[c] = {static_cast<long>(c % cols), static_cast<long>(c / cols)};
      }
      fr.push_back({k, {}, all, std::move(req)});
    }
    windows.emplace_back(b, b + window - 1, rows, cols, std::move(fr));
  }
  return AlignmentPlan(frames, rows, cols, window, std::move(windows));
}

bool AlignmentPlan::is_identity() const {
  return std::all_of(windows_.begin(), windows_.end(),
                     [](const AlignmentMap& m) { return m.is_identity(); });
}

namespace {

FrameAlignment resolve_frame(std::size_t frame, const FlowField& to_ref) {
  const std::size_t rows = to_ref.rows();
  const std::size_t cols = to_ref.cols();
  const std::size_t cells = rows * cols;

  FrameAlignment fa;
  fa.frame = frame;
  fa.requested.resize(cells);
  std::vector<std::size_t> desired(cells);
  std::vector<double> magnitude(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t x = c % cols;
    const std::size_t y = c / cols;
    const Point2 p = flow_lookup(to_ref, static_cast<long>(x), static_cast<long>(y));
    fa.requested[c] = {nearest(p.x), nearest(p.y)};
    const auto [tx, ty] = nearest_cell(p, rows, cols);
    desired[c] = ty * cols + tx;
    magnitude[c] = std::hypot(static_cast<double>(to_ref.dx(x, y)),
                              static_cast<double>(to_ref.dy(x, y)));
  }

  std::vector<std::size_t> order(cells);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return magnitude[a] < magnitude[b];
  });

  std::vector<std::size_t> claimant(cells, kNone);
  std::vector<std::size_t> assigned(cells, kNone);
  // Pins c to its own cell; a mover already granted that cell is pinned in turn.
  auto pin = [&](std::size_t c) {
    while (true) {
      assigned[c] = c;
      const std::size_t holder = claimant[c];
      claimant[c] = c;
      if (holder == kNone || holder == c) break;
      c = holder;
    }
  };
  for (std::size_t c : order) {
    const std::size_t t = desired[c];
    if (t == c) {
      pin(c);
    } else if (claimant[t] == kNone) {
      claimant[t] = c;
      assigned[c] = t;
    } else {
      pin(c);
    }
  }

  for (std::size_t c = 0; c < cells; ++c) {
    if (assigned[c] == c) {
      fa.untouched.push_back(c);
    } else {
      fa.moves.push_back({c, assigned[c]});
    }
  }
  return fa;
}

}  // namespace

AlignmentPlan compute_alignment(const FlowSet& flows, std::size_t frames, std::size_t rows,
                                std::size_t cols, std::size_t window) {
  if (flows.frames() != frames) {
    throw FlowChainError("flow set covers " + std::to_string(flows.frames()) +
                         " frames, grid has " + std::to_string(frames));
  }
  if (flows.rows() != rows || flows.cols() != cols) {
    throw DimensionError("flow resolution " + std::to_string(flows.rows()) + "x" +
                         std::to_string(flows.cols()) + " does not match grid " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (window == 0 || frames % window != 0) {
    throw DimensionError("temporal window " + std::to_string(window) + " does not divide " +
                         std::to_string(frames) + " frames");
  }
  std::vector<AlignmentMap> windows;
  for (std::size_t b = 0; b < frames; b += window) {
    const std::size_t e = b + window - 1;
    const std::size_t r = reference_frame(b, e);
    std::vector<FrameAlignment> fr;
    for (std::size_t k = b; k <= e; ++k) fr.push_back(resolve_frame(k, flows.between(k, r)));
    windows.emplace_back(b, e, rows, cols, std::move(fr));
  }
  return AlignmentPlan(frames, rows, cols, window, std::move(windows));
}

namespace {

void check_grid(const VideoShape& s, const AlignmentPlan& plan) {
  if (s.frames != plan.frames() || s.rows != plan.rows() || s.cols != plan.cols()) {
    throw DimensionError("alignment plan grid " + std::to_string(plan.frames()) + "x" +
                         std::to_string(plan.rows()) + "x" + std::to_string(plan.cols()) +
                         " does not match tensor " + s.to_string());
  }
}

}  // namespace

template <typename T>
AlignedVideo<T> align(const LatentVideo<T>& x, const AlignmentPlan& plan) {
  check_grid(x.shape(), plan);
  LatentVideo<T> out = x;
  const std::size_t cells = plan.rows() * plan.cols();
  for (const AlignmentMap& m : plan.windows()) {
    for (const FrameAlignment& fa : m.frames()) {
      for (const CellMove& mv : fa.moves) {
        auto src = x.cell(fa.frame * cells + mv.src);
        std::copy(src.begin(), src.end(), out.cell(fa.frame * cells + mv.tgt).begin());
      }
    }
  }
  return {std::move(out), plan.checksum()};
}

template <typename T>
LatentVideo<T> restore(const AlignedVideo<T>& aligned, const AlignmentPlan& plan) {
  if (aligned.plan_checksum != plan.checksum()) {
    throw MapMismatchError("restore: tensor was aligned under a different alignment plan");
  }
  const LatentVideo<T>& y = aligned.video;
  check_grid(y.shape(), plan);
  LatentVideo<T> out = y;
  const std::size_t cells = plan.rows() * plan.cols();
  for (const AlignmentMap& m : plan.windows()) {
    for (const FrameAlignment& fa : m.frames()) {
      for (const CellMove& mv : fa.moves) {
        auto src = y.cell(fa.frame * cells + mv.tgt);
        std::copy(src.begin(), src.end(), out.cell(fa.frame * cells + mv.src).begin());
      }
    }
  }
  return out;
}

namespace {

FlowField roll_field(const FlowField& f, std::size_t src, std::size_t dst, std::size_t dh,
                     std::size_t dw) {
  FlowField out(src, dst, f.rows(), f.cols());
  for (std::size_t y = 0; y < f.rows(); ++y) {
    for (std::size_t x = 0; x < f.cols(); ++x) {
      out.set((x + dw) % f.cols(), (y + dh) % f.rows(), f.dx(x, y), f.dy(x, y));
    }
  }
  return out;
}

// Rolls frames by df and cells by (dh, dw). Input must be a ring, or df == 0.
FlowSet roll_flows(const FlowSet& flows, std::size_t df, std::size_t dh, std::size_t dw,
                   std::optional<std::size_t> derived) {
  const std::size_t n = flows.frames();
  const std::size_t links = flows.links();
  std::vector<FlowField> fw(links);
  std::vector<FlowField> bw(links);
  for (std::size_t k = 0; k < links; ++k) {
    const std::size_t to = (k + df) % n;
    const std::size_t next = (to + 1) % n;
    fw[to] = roll_field(flows.forward(k), to, next, dh, dw);
    bw[to] = roll_field(flows.backward(k), next, to, dh, dw);
  }
  if (derived) derived = (*derived + df) % n;
  FlowSet out(n, flows.rows(), flows.cols(), std::move(fw), std::move(bw), derived);
  for (const auto& [key, field] : flows.direct()) {
    out.add_direct(roll_field(field, (key.first + df) % n, (key.second + df) % n, dh, dw));
  }
  return out;
}

}  // namespace

FlowSet shift_flows(const FlowSet& flows, const SubspaceSpec& spec) {
  spec.validate();
  const std::size_t n = flows.frames();
  const std::size_t df = spec.shift_frames() % n;
  const std::size_t dh = spec.shift_rows() % flows.rows();
  const std::size_t dw = spec.shift_cols() % flows.cols();
  if (df == 0 || flows.closed()) return roll_flows(flows, df, dh, dw, flows.derived_link());

  // Close the chain so the link crossing the temporal seam exists after the roll.
  std::vector<FlowField> fw;
  std::vector<FlowField> bw;
  for (std::size_t k = 0; k < flows.links(); ++k) {
    fw.push_back(flows.forward(k));
    bw.push_back(flows.backward(k));
  }
  fw.push_back(flows.between(n - 1, 0));
  bw.push_back(flows.between(0, n - 1));
  FlowSet ring(n, flows.rows(), flows.cols(), std::move(fw), std::move(bw), n - 1);
  for (const auto& [key, field] : flows.direct()) ring.add_direct(field);
  return roll_flows(ring, df, dh, dw, ring.derived_link());
}

FlowSet unshift_flows(const FlowSet& flows, const SubspaceSpec& spec) {
  spec.validate();
  const std::size_t n = flows.frames();
  const std::size_t df = (n - spec.shift_frames() % n) % n;
  const std::size_t dh = (flows.rows() - spec.shift_rows() % flows.rows()) % flows.rows();
  const std::size_t dw = (flows.cols() - spec.shift_cols() % flows.cols()) % flows.cols();
  FlowSet rolled = roll_flows(flows, df, dh, dw, flows.derived_link());
  if (!rolled.closed() || rolled.derived_link() != n - 1) return rolled;

  // Drop the composed closing link so the original open chain comes back.
  std::vector<FlowField> fw;
  std::vector<FlowField> bw;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    fw.push_back(rolled.forward(k));
    bw.push_back(rolled.backward(k));
  }
  FlowSet out(n, rolled.rows(), rolled.cols(), std::move(fw), std::move(bw));
  for (const auto& [key, field] : rolled.direct()) out.add_direct(field);
  return out;
}

std::string alignment_to_json(const AlignmentPlan& plan) {
  nlohmann::ordered_json doc;
  doc["frames"] = plan.frames();
  doc["rows"] = plan.rows();
  doc["cols"] = plan.cols();
  doc["window"] = plan.window();
  doc["windows"] = nlohmann::ordered_json::array();
  const std::size_t cols = plan.cols();
  for (const AlignmentMap& m : plan.windows()) {
    nlohmann::ordered_json w;
    w["begin"] = m.begin();
    w["end"] = m.end();
    w["reference"] = m.reference();
    w["moves"] = nlohmann::ordered_json::array();
    for (const FrameAlignment& fa : m.frames()) {
      for (const CellMove& mv : fa.moves) {
        nlohmann::ordered_json j;
        j["frame"] = fa.frame;
        j["src"] = {mv.src / cols, mv.src % cols};
        j["tgt"] = {mv.tgt / cols, mv.tgt % cols};
        w["moves"].push_back(std::move(j));
      }
    }
    doc["windows"].push_back(std::move(w));
  }
  return doc.dump(1);
}

template AlignedVideo<float> align(const LatentVideo<float>&, const AlignmentPlan&);
template AlignedVideo<double> align(const LatentVideo<double>&, const AlignmentPlan&);
template LatentVideo<float> restore(const AlignedVideo<float>&, const AlignmentPlan&);
template LatentVideo<double> restore(const AlignedVideo<double>&, const AlignmentPlan&);

}  // namespace stsa
