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
#include <filesystem>
#include <string>
#include <vector>

#include "stsa/tensor.hpp"

namespace stsa {

// LVT1 binary tensor:
//   "LVT1" | u32 rank | u32 dims[rank] | u8 dtype (1 = f32, 2 = f64) | payload
// All integers and scalars little-endian, payload row-major.
struct LvtTensor {
  std::vector<std::uint32_t> dims;
  Precision dtype = Precision::kDouble;
  // Widened to double; f32 payloads round-trip exactly through this.
  std::vector<double> values;

  std::size_t element_count() const;
};

template <typename T>
std::string encode_lvt(const std::vector<std::uint32_t>& dims, std::span<const T> values);
LvtTensor decode_lvt(const std::string& bytes);

template <typename T>
void write_lvt(const std::filesystem::path& path, const std::vector<std::uint32_t>& dims,
               std::span<const T> values);
LvtTensor read_lvt(const std::filesystem::path& path);

template <typename T>
void save_video(const std::filesystem::path& path, const LatentVideo<T>& video);

// Loads a rank-4 LVT1 file, converting the payload to T.
template <typename T>
LatentVideo<T> load_video(const std::filesystem::path& path);

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::string& bytes);

}  // namespace stsa
