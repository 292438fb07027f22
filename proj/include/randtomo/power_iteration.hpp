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
#include <cmath>
#include <cstdint>
#include <vector>

#include "randtomo/rng.hpp"
#include "randtomo/types.hpp"

namespace randtomo {

struct PowerIterationOptions {
  int starts = 3;
  double tolerance = 1e-8;  // relative change of successive estimates
  int max_iterations = 5000;
  std::uint64_t seed = 0x9e3779b9ULL;
};

struct PowerIterationResult {
  double value = 0.0;
  int iterations = 0;  // summed over starts
  bool converged = true;
};

/// Orthonormalizes `vs` in place (modified Gram-Schmidt), dropping vectors
/// that are numerically dependent.
template <typename Scalar>
void orthonormalize(std::vector<VectorX<Scalar>>& vs) {
  std::vector<VectorX<Scalar>> out;
  for (auto& v : vs) {
    VectorX<Scalar> x = v;
    for (const auto& q : out) x -= q.dot(x) * q;
    const double n = x.norm();
    if (n > 1e-12 * std::max(1.0, static_cast<double>(v.norm()))) out.push_back(x / n);
  }
  vs.swap(out);
}

template <typename Scalar>
void project_out(VectorX<Scalar>& x, const std::vector<VectorX<Scalar>>& basis) {
  for (const auto& q : basis) x -= q.dot(x) * q;
}

/// Largest |eigenvalue| of a self-adjoint operator on the orthogonal
/// complement of span(`deflate`) (orthonormal, invariant under the operator).
///
/// Each start is projected off the deflation space, and the projection is
/// repeated after every application. The estimate is ||A x|| for unit x, which
/// is nondecreasing for self-adjoint A; iteration stops when successive
/// estimates differ by less than tolerance * estimate.
template <typename Scalar, typename Apply, typename Start>
PowerIterationResult power_iteration(Apply&& apply, Start&& random_start,
                                     const std::vector<VectorX<Scalar>>& deflate,
                                     const PowerIterationOptions& opt = {}) {
  PowerIterationResult result;
  result.converged = true;
  Rng rng = make_rng(opt.seed);
  for (int s = 0; s < opt.starts; ++s) {
    VectorX<Scalar> x = random_start(rng);
    project_out(x, deflate);
    double n = x.norm();
    if (n == 0.0) continue;
    x /= n;
    double prev = -1.0;
    double value = 0.0;
    bool converged = false;
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
      VectorX<Scalar> y = apply(x);
      project_out(y, deflate);
      value = y.norm();
      if (value < 1e-300) {
        converged = true;
        value = 0.0;
        break;
      }
      if (prev >= 0.0 && std::abs(value - prev) <= opt.tolerance * std::max(value, 1e-12)) {
        converged = true;
        ++it;
        break;
      }
      prev = value;
      x = y / value;
    }
    result.iterations += it;
    result.converged = result.converged && converged;
    result.value = std::max(result.value, value);
  }
  return result;
}

}  // namespace randtomo
