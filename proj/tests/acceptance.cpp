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

// Runs the ten acceptance configurations in docs/configs and prints one
// PASS/FAIL line per criterion. Arguments select a subset by number.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <set>
#include <string>

#include "randtomo/experiments.hpp"
#include "randtomo/keyvalue.hpp"

namespace {

struct Criterion {
  int number;
  const char* title;
  double budget_seconds;
};

constexpr Criterion kCriteria[] = {
    {1, "Haar-induced tight frames", 360},
    {2, "Clifford twirl is a 2-design", 10},
    {3, "circuit frame defect bound", 600},
    {4, "exponential convergence in depth", 1800},
    {5, "mixing inequality", 300},
    {6, "compressed-sensing recovery", 1800},
    {7, "Bose-Hubbard number sector", 1800},
    {8, "time-of-flight identities", 60},
    {9, "reduced designs across chain lengths", 1800},
    {10, "two-site density-matrix tomography", 1200},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : kCriteria) {
    if (!selected.empty() && !selected.count(c.number)) continue;
    const std::string path = std::string(RANDTOMO_CONFIG_DIR) + "/criterion-" + std::to_string(c.number) + ".conf";
    const auto start = std::chrono::steady_clock::now();
    bool passed = false;
    std::string detail;
    try {
      const auto result = randtomo::run_experiment(randtomo::KeyValues::load(path));
      passed = result.passed;
      for (const auto& [k, v] : result.metrics) detail += "    " + k + " = " + v + "\n";
      for (const auto& n : result.notes) detail += "    " + n + "\n";
    } catch (const std::exception& e) {
      detail = std::string("    error: ") + e.what() + "\n";
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= c.budget_seconds;
    const bool ok = passed && in_time;
    failures += !ok;
    std::printf("criterion %2d: %s  %s (%.1f s%s)\n", c.number, ok ? "PASS" : "FAIL", c.title, seconds,
                in_time ? "" : ", over time budget");
    std::fputs(detail.c_str(), stdout);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
