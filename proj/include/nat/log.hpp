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

#ifndef NAT_LOG_HPP_
#define NAT_LOG_HPP_

#include <string_view>

namespace nat {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

// Level from the NAT_LOG environment variable (error, info or debug);
// defaults to info.
LogLevel log_level();
void set_log_level(LogLevel level);

// Writes "[nat:<level>] message" to stderr when enabled.
void log(LogLevel level, std::string_view message);

}  // namespace nat

#endif  // NAT_LOG_HPP_
