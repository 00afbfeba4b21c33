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

#include <filesystem>
#include <string>
#include <vector>

namespace stsa {

struct Keypoint {
  double x = 0.0;  // column, pixel units
  double y = 0.0;  // row, pixel units
  bool visible = false;
};

// Per-frame keypoints [F, K]. Visible keypoints lie inside [0, width) x [0, height).
class PoseSequence {
 public:
  PoseSequence() = default;
  PoseSequence(std::size_t width, std::size_t height, std::vector<std::vector<Keypoint>> frames);

  std::size_t frames() const { return frames_.size(); }
  std::size_t keypoints() const { return frames_.empty() ? 0 : frames_.front().size(); }
  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  const std::vector<Keypoint>& frame(std::size_t f) const { return frames_.at(f); }

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::vector<Keypoint>> frames_;
};

// {"width":W,"height":H,"frames":[{"keypoints":[[x,y],...],"visible":[true,...]}]}
// width/height are optional on input; when absent the bounds are taken as
// the supplied defaults.
PoseSequence parse_pose_json(const std::string& text, std::size_t default_width,
                             std::size_t default_height);
std::string pose_to_json(const PoseSequence& poses);

PoseSequence load_pose_json(const std::filesystem::path& path, std::size_t default_width,
                            std::size_t default_height);
void save_pose_json(const std::filesystem::path& path, const PoseSequence& poses);

}  // namespace stsa
