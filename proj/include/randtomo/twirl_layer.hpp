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

// Matrix-free second-moment twirls of brickwork layers.
//
// A moment vector is the vectorization of an operator X on H (x) H in
// site-grouped order: every site contributes q = d_l^4 components indexed by
// (a, b, c, e) -> ((a d_l + b) d_l + c) d_l + e, where a, b are the row
// digits of the two copies and c, e the column digits; site 1 is the most
// significant group. A layer twirl acts on the pair of groups of each bond.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "randtomo/types.hpp"

namespace randtomo {

/// Two-site moment operator: either the exact Haar projector onto
/// span{1 (x) 1, SWAP} on the pair, or a dense q^2 x q^2 matrix in pair order
/// (first site of the bond most significant).
template <typename Scalar>
struct PairTwirl {
  using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  static PairTwirl haar() { return PairTwirl{}; }
  static PairTwirl from_dense(DenseMatrix m) {
    PairTwirl p;
    p.is_haar = false;
    p.dense = std::move(m);
    return p;
  }

  bool is_haar = true;
  DenseMatrix dense;
};

template <typename Scalar>
class TwirlLayer {
 public:
  using Vec = VectorX<Scalar>;

  /// `bonds` hold ordered 1-based site pairs; bonds within a layer must be
  /// disjoint.
  TwirlLayer(int sites, int local_dim, const std::vector<std::pair<int, int>>& bonds,
             PairTwirl<Scalar> pair)
      : sites_(sites), local_dim_(local_dim), pair_(std::move(pair)) {
    if (sites < 1 || local_dim < 1) throw std::invalid_argument("TwirlLayer: invalid shape");
    q_ = static_cast<Eigen::Index>(local_dim) * local_dim * local_dim * local_dim;
    if (!pair_.is_haar && (pair_.dense.rows() != q_ * q_ || pair_.dense.cols() != q_ * q_)) {
      throw std::invalid_argument("TwirlLayer: dense pair twirl has the wrong size");
    }
    size_ = 1;
    for (int s = 0; s < sites; ++s) size_ *= q_;
    std::vector<bool> used(sites + 1, false);
    for (const auto& [s, t] : bonds) {
      if (s < 1 || s > sites || t < 1 || t > sites || s == t || used[s] || used[t]) {
        throw std::invalid_argument("TwirlLayer: invalid or overlapping bond");
      }
      used[s] = used[t] = true;
      plans_.push_back(make_plan(s, t));
    }
    // Per-site supports of 1 (x) 1 (a = c, b = e) and SWAP (a = e, b = c).
    const int d = local_dim;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        site_identity_.push_back(component(a, b, a, b));
        site_swap_.push_back(component(a, b, b, a));
      }
    for (Eigen::Index x : site_identity_)
      for (Eigen::Index y : site_identity_) pair_identity_.push_back(x * q_ + y);
    for (Eigen::Index x : site_swap_)
      for (Eigen::Index y : site_swap_) pair_swap_.push_back(x * q_ + y);
  }

  Eigen::Index size() const { return size_; }

  void apply_in_place(Vec& v) const {
    if (v.size() != size_) throw std::invalid_argument("TwirlLayer: vector size mismatch");
    for (const auto& plan : plans_) {
      if (pair_.is_haar) {
        apply_haar(plan, v);
      } else {
        apply_dense(plan, v);
      }
    }
  }

  Vec operator()(const Vec& v) const {
    Vec out = v;
    apply_in_place(out);
    return out;
  }

 private:
  struct Plan {
    std::vector<Eigen::Index> pair_offsets;  // q^2 entries, pair order
    std::vector<Eigen::Index> rest_offsets;
  };

  Eigen::Index component(int a, int b, int c, int e) const {
    const Eigen::Index d = local_dim_;
    return ((a * d + b) * d + c) * d + e;
  }

  Plan make_plan(int s, int t) const {
    std::vector<Eigen::Index> stride(sites_ + 1);
    Eigen::Index st = 1;
    for (int site = sites_; site >= 1; --site) {
      stride[site] = st;
      st *= q_;
    }
    Plan plan;
    plan.pair_offsets.reserve(q_ * q_);
    for (Eigen::Index x = 0; x < q_; ++x)
      for (Eigen::Index y = 0; y < q_; ++y) plan.pair_offsets.push_back(x * stride[s] + y * stride[t]);
    plan.rest_offsets = {0};
    for (int site = 1; site <= sites_; ++site) {
      if (site == s || site == t) continue;
      std::vector<Eigen::Index> next;
      next.reserve(plan.rest_offsets.size() * q_);
      for (Eigen::Index o : plan.rest_offsets)
        for (Eigen::Index x = 0; x < q_; ++x) next.push_back(o + x * stride[site]);
      plan.rest_offsets.swap(next);
    }
    return plan;
  }

  void apply_haar(const Plan& plan, Vec& v) const {
    const double dd = static_cast<double>(local_dim_) * local_dim_;  // pair dimension D
    if (dd == 1.0) return;  // one-dimensional pair: the twirl is the identity
    const double d2 = dd * dd;
    const double det = d2 * d2 - d2;
    const auto& off = plan.pair_offsets;
    for (Eigen::Index r : plan.rest_offsets) {
      Scalar si(0), ss(0);
      for (Eigen::Index j : pair_identity_) si += v[r + off[j]];
      for (Eigen::Index j : pair_swap_) ss += v[r + off[j]];
      const Scalar ci = (d2 * si - dd * ss) / det;
      const Scalar cs = (d2 * ss - dd * si) / det;
      for (Eigen::Index o : off) v[r + o] = Scalar(0);
      for (Eigen::Index j : pair_identity_) v[r + off[j]] += ci;
      for (Eigen::Index j : pair_swap_) v[r + off[j]] += cs;
    }
  }

  void apply_dense(const Plan& plan, Vec& v) const {
    const auto& off = plan.pair_offsets;
    const Eigen::Index n = q_ * q_;
    Vec block(n), out(n);
    for (Eigen::Index r : plan.rest_offsets) {
      for (Eigen::Index j = 0; j < n; ++j) block[j] = v[r + off[j]];
      out.noalias() = pair_.dense * block;
      for (Eigen::Index j = 0; j < n; ++j) v[r + off[j]] = out[j];
    }
  }

  int sites_;
  int local_dim_;
  Eigen::Index q_ = 1;
  Eigen::Index size_ = 1;
  PairTwirl<Scalar> pair_;
  std::vector<Plan> plans_;
  std::vector<Eigen::Index> site_identity_, site_swap_;
  std::vector<Eigen::Index> pair_identity_, pair_swap_;
};

}  // namespace randtomo
