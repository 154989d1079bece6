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

// Little-endian readers and writers shared by the dataset and checkpoint
// containers.
#ifndef NAT_SRC_BINARY_IO_HPP_
#define NAT_SRC_BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "nat/error.hpp"

namespace nat::io {

static_assert(std::endian::native == std::endian::little,
              "container formats assume a little-endian host");

// Throws a truncation error unless at least n more bytes can be read.
inline void require_available(std::istream& in, std::uint64_t n, const char* what) {
  const auto here = in.tellg();
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  in.seekg(here);
  if (here < 0 || end < here || static_cast<std::uint64_t>(end - here) < n) {
    throw FormatError(FormatError::Kind::kTruncated,
                      std::string("file truncated while reading ") + what);
  }
}

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

inline void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void read_exact(std::istream& in, void* dst, std::size_t n, const char* what) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw FormatError(FormatError::Kind::kTruncated,
                      std::string("file truncated while reading ") + what);
  }
}

template <typename T>
T get(std::istream& in, const char* what) {
  T value;
  read_exact(in, &value, sizeof(T), what);
  return value;
}

inline std::string get_string(std::istream& in, const char* what,
                              std::uint32_t max_len = 1u << 20) {
  const auto n = get<std::uint32_t>(in, what);
  if (n > max_len) {
    throw FormatError(FormatError::Kind::kCorrupt,
                      std::string("implausible string length for ") + what);
  }
  std::string s(n, '\0');
  read_exact(in, s.data(), n, what);
  return s;
}

inline void expect_magic(std::istream& in, const char (&magic)[5]) {
  char buf[4];
  in.read(buf, 4);
  if (in.gcount() != 4) {
    throw FormatError(FormatError::Kind::kTruncated, "file too short for magic bytes");
  }
  if (std::memcmp(buf, magic, 4) != 0) {
    throw FormatError(FormatError::Kind::kMagic,
                      std::string("bad magic bytes, expected ") + magic);
  }
}

}  // namespace nat::io

#endif  // NAT_SRC_BINARY_IO_HPP_
