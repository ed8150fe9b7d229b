// Copyright 2026  NoiseVC contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "noisevc/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "noisevc/error.hpp"

namespace noisevc {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "tensor files are little-endian; big-endian hosts need byte swaps");

namespace {

constexpr char kMagic[4] = {'N', 'V', 'C', 'M'};

void put_u32(std::string &out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

std::uint32_t get_u32(std::istream &in, const fs::path &path) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char *>(&v), 4))
    throw DataError("truncated tensor header in " + path.string());
  return v;
}

std::size_t dtype_size(DType t) { return t == DType::kFloat64 ? 8 : 4; }

}  // namespace

void write_file_atomic(const fs::path &path, const std::string &contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_text_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_tensor(const fs::path &path, const Matrix &m, DType dtype) {
  std::string out;
  const std::size_t n = static_cast<std::size_t>(m.size());
  out.reserve(20 + n * dtype_size(dtype));
  out.append(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(dtype));
  put_u32(out, 2);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  if (dtype == DType::kFloat64) {
    out.append(reinterpret_cast<const char *>(m.data()), n * 8);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      float f = static_cast<float>(m.data()[i]);
      char buf[4];
      std::memcpy(buf, &f, 4);
      out.append(buf, 4);
    }
  }
  write_file_atomic(path, out);
}

namespace {

TensorHeader parse_header(std::istream &in, const fs::path &path) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not an NVCM tensor file: " + path.string());
  TensorHeader h;
  const std::uint32_t tag = get_u32(in, path);
  if (tag != static_cast<std::uint32_t>(DType::kFloat32) &&
      tag != static_cast<std::uint32_t>(DType::kFloat64))
    throw DataError("unknown dtype tag " + std::to_string(tag) + " in " +
                    path.string());
  h.dtype = static_cast<DType>(tag);
  const std::uint32_t rank = get_u32(in, path);
  if (rank == 0 || rank > 8)
    throw DataError("bad tensor rank " + std::to_string(rank) + " in " +
                    path.string());
  for (std::uint32_t i = 0; i < rank; ++i) h.dims.push_back(get_u32(in, path));
  return h;
}

}  // namespace

TensorHeader read_tensor_header(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open tensor file: " + path.string());
  return parse_header(in, path);
}

Matrix read_tensor(const fs::path &path, TensorHeader *header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open tensor file: " + path.string());
  TensorHeader h = parse_header(in, path);
  std::uint64_t rows = h.dims[0];
  std::uint64_t cols = 1;
  for (std::size_t i = 1; i < h.dims.size(); ++i) cols *= h.dims[i];
  if (h.dims.size() == 1) {
    cols = rows;
    rows = 1;
  }
  const std::uint64_t n = rows * cols;
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  if (h.dtype == DType::kFloat64) {
    if (!in.read(reinterpret_cast<char *>(m.data()),
                 static_cast<std::streamsize>(n * 8)))
      throw DataError("truncated tensor payload in " + path.string());
  } else {
    std::vector<float> buf(n);
    if (!in.read(reinterpret_cast<char *>(buf.data()),
                 static_cast<std::streamsize>(n * 4)))
      throw DataError("truncated tensor payload in " + path.string());
    for (std::uint64_t i = 0; i < n; ++i) m.data()[i] = buf[i];
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw DataError("trailing bytes after tensor payload in " + path.string());
  if (header) *header = std::move(h);
  return m;
}

}  // namespace noisevc
