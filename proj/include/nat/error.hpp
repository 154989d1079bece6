// Copyright 2026 The NAT Authors
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

#ifndef NAT_ERROR_HPP_
#define NAT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace nat {

// Base class for every error raised by the library. category() is a short
// machine-parseable tag that the CLI prints as the reason prefix.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* category() const noexcept { return "error"; }
};

class ShapeError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "shape"; }
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "invalid-argument"; }
};

class NumericError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "numeric"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "config"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "io"; }
};

// Container-format errors (dataset and checkpoint files).
class FormatError : public Error {
 public:
  enum class Kind { kMagic, kVersion, kTruncated, kDimension, kCorrupt };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }
  const char* category() const noexcept override {
    switch (kind_) {
      case Kind::kMagic: return "format-magic";
      case Kind::kVersion: return "format-version";
      case Kind::kTruncated: return "format-truncated";
      case Kind::kDimension: return "format-dimension";
      case Kind::kCorrupt: return "format-corrupt";
    }
    return "format";
  }

 private:
  Kind kind_;
};

}  // namespace nat

#endif  // NAT_ERROR_HPP_
