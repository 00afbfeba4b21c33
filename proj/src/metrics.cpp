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

#include "stsa/metrics.hpp"

namespace stsa {

namespace {

template <typename T, typename Correspond>
double mean_step_change(const LatentVideo<T>& x, const CellMask& mask, Correspond&& next_cell) {
  const std::size_t cells = x.shape().frame_cells();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k + 1 < x.frames(); ++k) {
    for (std::size_t c = 0; c < cells; ++c) {
      if (mask && !mask(k, c)) continue;
      auto a = x.cell(k * cells + c);
      auto b = x.cell((k + 1) * cells + next_cell(k, c));
      double sq = 0.0;
      for (std::size_t ch = 0; ch < a.size(); ++ch) {
        const double diff = static_cast<double>(b[ch]) - static_cast<double>(a[ch]);
        sq += diff * diff;
      }
      sum += sq;
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace

template <typename T>
double along_flow_variation(const LatentVideo<T>& x, const FlowSet& flows, const CellMask& mask) {
  if (flows.frames() != x.frames()) {
    throw FlowChainError("flow set covers " + std::to_string(flows.frames()) +
                         " frames, video has " + std::to_string(x.frames()));
  }
  if (flows.rows() != x.rows() || flows.cols() != x.cols()) {
    throw DimensionError("flow resolution does not match the video grid");
  }
  const std::size_t cols = x.cols();
  return mean_step_change(x, mask, [&](std::size_t k, std::size_t c) {
    const Point2 p = flow_lookup(flows.forward(k), static_cast<long>(c % cols),
                                 static_cast<long>(c / cols));
    const auto [tx, ty] = nearest_cell(p, x.rows(), cols);
    return ty * cols + tx;
  });
}

template <typename T>
double naive_temporal_variation(const LatentVideo<T>& x, const CellMask& mask) {
  return mean_step_change(x, mask, [](std::size_t, std::size_t c) { return c; });
}

template double along_flow_variation(const LatentVideo<float>&, const FlowSet&, const CellMask&);
template double along_flow_variation(const LatentVideo<double>&, const FlowSet&, const CellMask&);
template double naive_temporal_variation(const LatentVideo<float>&, const CellMask&);
template double naive_temporal_variation(const LatentVideo<double>&, const CellMask&);

}  // namespace stsa
