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

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "randtomo/hilbert.hpp"

namespace randtomo::detail {

/// Splits full basis indices into a selected-sites part and a rest part:
/// full = selected[a] + rest[t], where a enumerates the selected sites in the
/// given order (first listed site most significant) and t the remaining sites
/// in increasing order.
struct SiteIndex {
  std::vector<Eigen::Index> selected;
  std::vector<Eigen::Index> rest;

  SiteIndex(const SystemShape& shape, std::span<const int> sites, bool require_sorted) {
    const int k = shape.sites();
    const Eigen::Index dl = shape.local_dim();
    std::vector<bool> used(k + 1, false);
    for (std::size_t j = 0; j < sites.size(); ++j) {
      const int s = sites[j];
      if (s < 1 || s > k) {
        throw std::out_of_range("site index " + std::to_string(s) + " outside 1.." +
                                std::to_string(k));
      }
      if (used[s]) throw std::invalid_argument("duplicate site index " + std::to_string(s));
      if (require_sorted && j > 0 && sites[j - 1] > s) {
        throw std::invalid_argument("site list must be increasing");
      }
      used[s] = true;
    }
    std::vector<Eigen::Index> stride(k + 1);
    Eigen::Index st = 1;
    for (int s = k; s >= 1; --s) {
      stride[s] = st;
      st *= dl;
    }
    auto offsets = [&](const std::vector<int>& list) {
      std::vector<Eigen::Index> out{0};
      for (int s : list) {
        std::vector<Eigen::Index> next;
        next.reserve(out.size() * dl);
        for (Eigen::Index o : out)
          for (Eigen::Index x = 0; x < dl; ++x) next.push_back(o + x * stride[s]);
        out.swap(next);
      }
      return out;
    };
    std::vector<int> rest_sites;
    for (int s = 1; s <= k; ++s)
      if (!used[s]) rest_sites.push_back(s);
    selected = offsets(std::vector<int>(sites.begin(), sites.end()));
    rest = offsets(rest_sites);
  }
};

}  // namespace randtomo::detail
