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

#include <cmath>
#include <cstddef>
#include <cstring>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stsa/error.hpp"

namespace stsa {

enum class Precision { kSingle, kDouble };

template <typename T>
constexpr Precision precision_of() {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
  return std::is_same_v<T, float> ? Precision::kSingle : Precision::kDouble;
}

// Extent of a latent video: frames x rows x cols x channels.
struct VideoShape {
  std::size_t frames = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t channels = 0;

  std::size_t cells() const { return frames * rows * cols; }
  std::size_t size() const { return cells() * channels; }
  std::size_t frame_cells() const { return rows * cols; }

  bool operator==(const VideoShape&) const = default;

  std::string to_string() const {
    return "[" + std::to_string(frames) + "," + std::to_string(rows) + "," +
           std::to_string(cols) + "," + std::to_string(channels) + "]";
  }
};

inline void validate_shape(const VideoShape& s) {
  if (s.frames == 0 || s.rows == 0 || s.cols == 0 || s.channels == 0) {
    throw DimensionError("latent video dims must be >= 1, got " + s.to_string());
  }
}

// Dense [F, H, W, C] tensor, row-major, channels innermost.
template <typename T>
class LatentVideo {
 public:
  using value_type = T;

  LatentVideo() = default;

  explicit LatentVideo(VideoShape shape) : shape_(shape) {
    validate_shape(shape_);
    data_.assign(shape_.size(), T(0));
  }

  LatentVideo(VideoShape shape, std::vector<T> data)
      : shape_(shape), data_(std::move(data)) {
    validate_shape(shape_);
    if (data_.size() != shape_.size()) {
      throw DimensionError("payload holds " + std::to_string(data_.size()) +
                           " values, shape " + shape_.to_string() + " needs " +
                           std::to_string(shape_.size()));
    }
    if (!all_finite()) throw NumericError("latent video contains NaN or Inf");
  }

  const VideoShape& shape() const { return shape_; }
  std::size_t frames() const { return shape_.frames; }
  std::size_t rows() const { return shape_.rows; }
  std::size_t cols() const { return shape_.cols; }
  std::size_t channels() const { return shape_.channels; }
  std::size_t size() const { return data_.size(); }

  // Linear index of cell (f, h, w) in [0, F*H*W).
  std::size_t cell_index(std::size_t f, std::size_t h, std::size_t w) const {
    return (f * shape_.rows + h) * shape_.cols + w;
  }

  T operator()(std::size_t f, std::size_t h, std::size_t w, std::size_t c) const {
    return data_[cell_index(f, h, w) * shape_.channels + c];
  }
  T& operator()(std::size_t f, std::size_t h, std::size_t w, std::size_t c) {
    return data_[cell_index(f, h, w) * shape_.channels + c];
  }

  std::span<const T> cell(std::size_t linear) const {
    return {data_.data() + linear * shape_.channels, shape_.channels};
  }
  std::span<T> cell(std::size_t linear) {
    return {data_.data() + linear * shape_.channels, shape_.channels};
  }
  std::span<const T> cell(std::size_t f, std::size_t h, std::size_t w) const {
    return cell(cell_index(f, h, w));
  }
  std::span<T> cell(std::size_t f, std::size_t h, std::size_t w) {
    return cell(cell_index(f, h, w));
  }

  std::span<const T> frame(std::size_t f) const {
    const std::size_t n = shape_.frame_cells() * shape_.channels;
    return {data_.data() + f * n, n};
  }

  std::span<const T> values() const { return data_; }
  std::span<T> values() { return data_; }

  bool all_finite() const {
    for (T v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

 private:
  VideoShape shape_;
  std::vector<T> data_;
};

// Bit-level equality (distinguishes -0 from +0).
template <typename T>
bool bitwise_equal(const LatentVideo<T>& a, const LatentVideo<T>& b) {
  if (a.shape() != b.shape()) return false;
  return std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(T)) == 0;
}

template <typename T>
void require_same_shape(const LatentVideo<T>& a, const LatentVideo<T>& b,
                        const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shape " + a.shape().to_string() +
                         " vs " + b.shape().to_string());
  }
}

// Row-major dense matrix; token blocks and projection weights use it.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("matrix payload size does not match " + std::to_string(rows_) + "x" +
                           std::to_string(cols_));
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  std::span<const T> values() const { return data_; }
  std::span<T> values() { return data_; }

  bool all_finite() const {
    for (T v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace stsa
