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

#include "stsa/tensor_io.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "stsa/detail/bytes.hpp"

namespace stsa {

namespace {

constexpr char kLvtMagic[4] = {'L', 'V', 'T', '1'};
constexpr std::uint8_t kTagSingle = 1;
constexpr std::uint8_t kTagDouble = 2;

}  // namespace

std::size_t LvtTensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

template <typename T>
std::string encode_lvt(const std::vector<std::uint32_t>& dims, std::span<const T> values) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  if (n != values.size()) {
    throw DimensionError("lvt: dims describe " + std::to_string(n) + " values, got " +
                         std::to_string(values.size()));
  }
  std::string out(kLvtMagic, 4);
  detail::put_u32(out, static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) detail::put_u32(out, d);
  out.push_back(static_cast<char>(std::is_same_v<T, float> ? kTagSingle : kTagDouble));
  out.reserve(out.size() + values.size() * sizeof(T));
  for (T v : values) {
    if constexpr (std::is_same_v<T, float>) {
      detail::put_f32(out, v);
    } else {
      detail::put_f64(out, v);
    }
  }
  return out;
}

LvtTensor decode_lvt(const std::string& bytes) {
  detail::ByteReader in(bytes, "lvt");
  if (in.take(4) != std::string(kLvtMagic, 4)) throw ParseError("lvt: bad magic");
  LvtTensor t;
  const std::uint32_t rank = in.u32();
  if (rank == 0 || rank > 8) throw ParseError("lvt: unsupported rank " + std::to_string(rank));
  std::size_t n = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    const std::uint32_t d = in.u32();
    if (d == 0) throw ParseError("lvt: zero-length dimension");
    t.dims.push_back(d);
    if (n > std::numeric_limits<std::size_t>::max() / d) throw ParseError("lvt: size overflow");
    n *= d;
  }
  const std::uint8_t tag = in.u8();
  std::size_t width = 0;
  if (tag == kTagSingle) {
    t.dtype = Precision::kSingle;
    width = 4;
  } else if (tag == kTagDouble) {
    t.dtype = Precision::kDouble;
    width = 8;
  } else {
    throw ParseError("lvt: unknown dtype tag " + std::to_string(tag));
  }
  if (in.remaining() / width < n) throw ParseError("lvt: truncated payload");
  if (in.remaining() != n * width) throw ParseError("lvt: trailing bytes after payload");
  t.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.values[i] = width == 4 ? static_cast<double>(in.f32()) : in.f64();
  }
  return t;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

template <typename T>
void write_lvt(const std::filesystem::path& path, const std::vector<std::uint32_t>& dims,
               std::span<const T> values) {
  write_file_bytes(path, encode_lvt<T>(dims, values));
}

LvtTensor read_lvt(const std::filesystem::path& path) { return decode_lvt(read_file_bytes(path)); }

template <typename T>
void save_video(const std::filesystem::path& path, const LatentVideo<T>& video) {
  const auto& s = video.shape();
  write_lvt<T>(path,
               {static_cast<std::uint32_t>(s.frames), static_cast<std::uint32_t>(s.rows),
                static_cast<std::uint32_t>(s.cols), static_cast<std::uint32_t>(s.channels)},
               video.values());
}

template <typename T>
LatentVideo<T> load_video(const std::filesystem::path& path) {
  LvtTensor t = read_lvt(path);
  if (t.dims.size() != 4) {
    throw DimensionError("expected a rank-4 [F,H,W,C] tensor in " + path.string());
  }
  std::vector<T> data(t.values.begin(), t.values.end());
  return LatentVideo<T>(VideoShape{t.dims[0], t.dims[1], t.dims[2], t.dims[3]}, std::move(data));
}

template std::string encode_lvt<float>(const std::vector<std::uint32_t>&, std::span<const float>);
template std::string encode_lvt<double>(const std::vector<std::uint32_t>&, std::span<const double>);
template void write_lvt<float>(const std::filesystem::path&, const std::vector<std::uint32_t>&,
                               std::span<const float>);
template void write_lvt<double>(const std::filesystem::path&, const std::vector<std::uint32_t>&,
                                std::span<const double>);
template void save_video(const std::filesystem::path&, const LatentVideo<float>&);
template void save_video(const std::filesystem::path&, const LatentVideo<double>&);
template LatentVideo<float> load_video<float>(const std::filesystem::path&);
template LatentVideo<double> load_video<double>(const std::filesystem::path&);

}  // namespace stsa
