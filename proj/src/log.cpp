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

#include "nat/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <string>

namespace nat {
namespace {

LogLevel level_from_env() {
  const char* env = std::getenv("NAT_LOG");
  if (!env) return LogLevel::kInfo;
  const std::string v(env);
  if (v == "error") return LogLevel::kError;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

std::atomic<int>& current() {
  static std::atomic<int> level{static_cast<int>(level_from_env())};
  return level;
}

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(current().load()); }

void set_log_level(LogLevel level) { current().store(static_cast<int>(level)); }

void log(LogLevel level, std::string_view message) {
  if (static_cast<int>(level) > current().load()) return;
  static constexpr const char* kNames[] = {"error", "info", "debug"};
  std::cerr << "[nat:" << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace nat
