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

#ifndef NOISEVC_ERROR_HPP_
#define NOISEVC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace noisevc {

// Exit / status codes shared by the C API and the CLI.
enum class ErrorKind : int {
  kUsage = 1,
  kConfig = 2,
  kData = 3,
  kNumerical = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct UsageError : Error {
  explicit UsageError(const std::string &w) : Error(ErrorKind::kUsage, w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string &w) : Error(ErrorKind::kConfig, w) {}
};

// Unreadable or corrupt input files, missing mels, manifest problems.
struct DataError : Error {
  explicit DataError(const std::string &w) : Error(ErrorKind::kData, w) {}
};

// Audio that is empty or trims down to nothing.
struct EmptyClipError : DataError {
  explicit EmptyClipError(const std::string &w) : DataError(w) {}
};

// Tensor shape disagreements. Reported to callers as a data error.
struct ShapeError : DataError {
  explicit ShapeError(const std::string &w) : DataError(w) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string &w)
      : Error(ErrorKind::kNumerical, w) {}
};

}  // namespace noisevc

#endif  // NOISEVC_ERROR_HPP_
