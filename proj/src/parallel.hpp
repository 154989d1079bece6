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

#ifndef NAT_SRC_PARALLEL_HPP_
#define NAT_SRC_PARALLEL_HPP_

#include <cstddef>
#include <exception>
#include <vector>

namespace nat::detail {

// Runs fn(i) for i in [0, n), in parallel when `parallel` is set. Exceptions
// do not cross the OpenMP region; the one from the lowest index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, bool parallel, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) if (parallel && n > 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace nat::detail

#endif  // NAT_SRC_PARALLEL_HPP_
