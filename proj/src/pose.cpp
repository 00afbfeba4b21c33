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

#include "stsa/pose.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stsa/error.hpp"

namespace stsa {

PoseSequence::PoseSequence(std::size_t width, std::size_t height,
                           std::vector<std::vector<Keypoint>> frames)
    : width_(width), height_(height), frames_(std::move(frames)) {
  if (width_ == 0 || height_ == 0) throw ConfigError("pose frame bounds must be positive");
  for (std::size_t f = 0; f < frames_.size(); ++f) {
    if (frames_[f].size() != frames_.front().size()) {
      throw DimensionError("pose frame " + std::to_string(f) + " has " +
                           std::to_string(frames_[f].size()) + " keypoints, expected " +
                           std::to_string(frames_.front().size()));
    }
    for (const Keypoint& kp : frames_[f]) {
      if (!kp.visible) continue;
      if (!std::isfinite(kp.x) || !std::isfinite(kp.y) || kp.x < 0.0 || kp.y < 0.0 ||
          kp.x >= static_cast<double>(width_) || kp.y >= static_cast<double>(height_)) {
        throw BoundsError("visible keypoint (" + std::to_string(kp.x) + ", " +
                          std::to_string(kp.y) + ") in frame " + std::to_string(f) +
                          " outside bounds");
      }
    }
  }
}

PoseSequence parse_pose_json(const std::string& text, std::size_t default_width,
                             std::size_t default_height) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("pose json: ") + e.what());
  }
  try {
    const std::size_t width = doc.value("width", default_width);
    const std::size_t height = doc.value("height", default_height);
    std::vector<std::vector<Keypoint>> frames;
    for (const auto& fr : doc.at("frames")) {
      const auto& kps = fr.at("keypoints");
      const auto& vis = fr.at("visible");
      if (kps.size() != vis.size()) {
        throw ParseError("pose json: keypoints and visible lengths differ");
      }
      std::vector<Keypoint> out;
      out.reserve(kps.size());
      for (std::size_t k = 0; k < kps.size(); ++k) {
        if (kps[k].size() != 2) throw ParseError("pose json: keypoint must be [x, y]");
        out.push_back({kps[k][0].get<double>(), kps[k][1].get<double>(), vis[k].get<bool>()});
      }
      frames.push_back(std::move(out));
    }
    return PoseSequence(width, height, std::move(frames));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("pose json: ") + e.what());
  }
}

std::string pose_to_json(const PoseSequence& poses) {
  nlohmann::ordered_json doc;
  doc["width"] = poses.width();
  doc["height"] = poses.height();
  doc["frames"] = nlohmann::ordered_json::array();
  for (std::size_t f = 0; f < poses.frames(); ++f) {
    nlohmann::ordered_json fr;
    fr["keypoints"] = nlohmann::ordered_json::array();
    fr["visible"] = nlohmann::ordered_json::array();
    for (const Keypoint& kp : poses.frame(f)) {
      fr["keypoints"].push_back({kp.x, kp.y});
      fr["visible"].push_back(kp.visible);
    }
    doc["frames"].push_back(std::move(fr));
  }
  return doc.dump(1);
}

PoseSequence load_pose_json(const std::filesystem::path& path, std::size_t default_width,
                            std::size_t default_height) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_pose_json(ss.str(), default_width, default_height);
}

void save_pose_json(const std::filesystem::path& path, const PoseSequence& poses) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << pose_to_json(poses) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace stsa
