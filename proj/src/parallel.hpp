// Copyright 2026 The randtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace randtomo::detail {

/// Half-open draw range [begin, end) of group g when `total` draws are split
/// into `groups` contiguous groups.
inline std::pair<std::int64_t, std::int64_t> group_range(std::int64_t total, int groups, int g) {
  return {total * g / groups, total * (g + 1) / groups};
}

/// Runs body(g) for g in [0, count) on up to `workers` threads. Each index is
/// processed exactly once; callers store per-index results and combine them
/// in index order, which keeps results independent of the worker count.
template <typename Body>
void for_each_index(int count, int workers, Body&& body) {
  workers = std::clamp(workers, 1, std::max(1, count));
  if (workers == 1) {
    for (int g = 0; g < count; ++g) body(g);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int g = next++; g < count; g = next++) {
        try {
          body(g);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace randtomo::detail
