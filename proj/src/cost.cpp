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

#include "stsa/cost.hpp"

#include <nlohmann/json.hpp>

#include "stsa/noise.hpp"

namespace stsa {

std::string to_string(AttentionMode mode) {
  switch (mode) {
    case AttentionMode::kSubspace: return "subspace";
    case AttentionMode::kTemporal: return "temporal";
    case AttentionMode::kCrossFrameFirst: return "crossframe-first";
    case AttentionMode::kCrossFrameMiddle: return "crossframe-middle";
    case AttentionMode::kCrossFramePrevious: return "crossframe-previous";
    case AttentionMode::kCrossFrameAll: return "crossframe-all";
    case AttentionMode::kFull: return "full";
  }
  return "unknown";
}

AttentionMode parse_attention_mode(const std::string& text) {
  for (AttentionMode m :
       {AttentionMode::kSubspace, AttentionMode::kTemporal, AttentionMode::kCrossFrameFirst,
        AttentionMode::kCrossFrameMiddle, AttentionMode::kCrossFramePrevious,
        AttentionMode::kCrossFrameAll, AttentionMode::kFull}) {
    if (to_string(m) == text) return m;
  }
  throw ConfigError("unknown attention mode '" + text + "'");
}

std::string CostReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["mode"] = to_string(mode);
  doc["dims"] = {{"frames", dims.frames}, {"rows", dims.rows},   {"cols", dims.cols},
                 {"channels", dims.channels}, {"width", dims.width}};
  if (subspace) {
    doc["subspace"] = {subspace->frames, subspace->rows, subspace->cols};
  } else {
    doc["subspace"] = nullptr;
  }
  doc["projection"] = projection;
  doc["score"] = score;
  doc["value"] = value;
  doc["total"] = total();
  doc["peak_score_buffer"] = peak_score_buffer;
  return doc.dump(1);
}

CostReport cost_model(AttentionMode mode, const AttentionDims& dims,
                      const std::optional<SubspaceSpec>& spec) {
  validate_shape(VideoShape{dims.frames, dims.rows, dims.cols, dims.channels});
  if (dims.width == 0) throw ConfigError("projection width must be positive");
  using u64 = std::uint64_t;
  const u64 t = dims.tokens();
  const u64 hw = static_cast<u64>(dims.rows) * dims.cols;
  const u64 f = dims.frames;
  const u64 d = dims.width;

  CostReport r;
  r.mode = mode;
  r.dims = dims;
  r.projection = 4 * t * dims.channels * d;
  u64 pairs = 0;  // total query-key pairs
  switch (mode) {
    case AttentionMode::kSubspace: {
      if (!spec) throw ConfigError("subspace cost needs a subspace size");
      SubspacePartition partition(VideoShape{dims.frames, dims.rows, dims.cols, dims.channels},
                                  *spec, EdgeMode::kStrict);
      const u64 n = spec->volume();
      pairs = partition.count() * n * n;
      r.peak_score_buffer = n * n;
      r.subspace = spec;
      break;
    }
    case AttentionMode::kTemporal:
      pairs = hw * f * f;
      r.peak_score_buffer = f * f;
      break;
    case AttentionMode::kCrossFrameFirst:
    case AttentionMode::kCrossFrameMiddle:
    case AttentionMode::kCrossFramePrevious:
      pairs = f * hw * hw;
      r.peak_score_buffer = hw * hw;
      break;
    case AttentionMode::kCrossFrameAll:
      pairs = f * hw * t;
      r.peak_score_buffer = hw * t;
      break;
    case AttentionMode::kFull:
      pairs = t * t;
      r.peak_score_buffer = t * t;
      break;
  }
  r.score = pairs * d;
  r.value = pairs * d;
  return r;
}

MacCounter measure_macs(AttentionMode mode, const AttentionDims& dims,
                        const std::optional<SubspaceSpec>& spec, std::uint64_t seed) {
  const VideoShape shape{dims.frames, dims.rows, dims.cols, dims.channels};
  const auto x = gaussian_video<double>(shape, seed);
  const auto params = AttentionParams<double>::random(dims.channels, dims.width, 1, seed + 1, 0.3);
  MacCounter counter;
  switch (mode) {
    case AttentionMode::kSubspace:
      if (!spec) throw ConfigError("subspace measurement needs a subspace size");
      windowed_attention(x, *spec, params, &counter);
      break;
    case AttentionMode::kTemporal:
      temporal_attention(x, params, &counter);
      break;
    case AttentionMode::kCrossFrameFirst:
      crossframe_attention(x, CrossFrameMode::kFirst, params, &counter);
      break;
    case AttentionMode::kCrossFrameMiddle:
      crossframe_attention(x, CrossFrameMode::kMiddle, params, &counter);
      break;
    case AttentionMode::kCrossFramePrevious:
      crossframe_attention(x, CrossFrameMode::kPrevious, params, &counter);
      break;
    case AttentionMode::kCrossFrameAll:
      crossframe_attention(x, CrossFrameMode::kAll, params, &counter);
      break;
    case AttentionMode::kFull:
      full_attention(x, params, {}, dims.tokens(), &counter);
      break;
  }
  return counter;
}

}  // namespace stsa
