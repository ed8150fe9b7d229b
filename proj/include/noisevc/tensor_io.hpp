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

#ifndef NOISEVC_TENSOR_IO_HPP_
#define NOISEVC_TENSOR_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "noisevc/tensor.hpp"

namespace noisevc {

// On-disk tensor container:
//   "NVCM" | u32 dtype | u32 rank | u32 dims[rank] | row-major payload
// All integers and payload values are little-endian.
enum class DType : std::uint32_t {
  kFloat32 = 1,
  kFloat64 = 2,
};

struct TensorHeader {
  DType dtype = DType::kFloat32;
  std::vector<std::uint32_t> dims;
};

// Writes a rank-2 tensor (rows x cols). The write goes to a temporary file
// that is renamed into place.
void write_tensor(const std::filesystem::path &path, const Matrix &m,
                  DType dtype = DType::kFloat32);

// Reads a tensor of any rank >= 1; dims beyond the first are flattened into
// columns. Throws DataError naming the path on any format problem.
Matrix read_tensor(const std::filesystem::path &path,
                   TensorHeader *header = nullptr);

TensorHeader read_tensor_header(const std::filesystem::path &path);

// Writes `contents` to `path` atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path &path,
                       const std::string &contents);

std::string read_text_file(const std::filesystem::path &path);

}  // namespace noisevc

#endif  // NOISEVC_TENSOR_IO_HPP_
