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

// Second-moment (t = 2) twirling channels G(X) = E[U^{(x)2} X U^{dagger(x)2}],
// their distance to the Haar twirl, and second-largest eigenvalues.
//
// Moment operators act on vectors of length d^4 in the site-grouped layout
// described in twirl_layer.hpp; for a single-site (flat) shape this is the
// Kronecker order of U (x) U (x) conj(U) (x) conj(U).

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "randtomo/frames.hpp"
#include "randtomo/hilbert.hpp"
#include "randtomo/power_iteration.hpp"

namespace randtomo {

/// Dense moment operators are used up to this many vector components.
inline constexpr Eigen::Index kDenseMomentSize = 4096;

class MomentOperator {
 public:
  using Apply = std::function<Vector(const Vector&)>;
  using RealApply = std::function<RealVector(const RealVector&)>;

  struct Info {
    bool exact = true;
    std::int64_t samples = 0;
  };

  /// Dense operator on the grouped layout of `shape`.
  MomentOperator(SystemShape shape, Matrix dense, Info info);
  /// Matrix-free operator. `real_apply` may be empty; when present the
  /// operator has real matrix elements and `apply` must agree with it.
  MomentOperator(SystemShape shape, Apply apply, Apply apply_adjoint, RealApply real_apply,
                 bool self_adjoint, Info info);

  const SystemShape& shape() const { return shape_; }
  int base_dim() const { return shape_.dim(); }
  Eigen::Index size() const { return size_; }

  bool has_dense() const { return dense_.has_value(); }
  const Matrix& dense() const;
  /// Dense copy; throws if size() > kDenseMomentSize.
  Matrix to_dense() const;

  bool is_real() const { return static_cast<bool>(real_apply_) || real_dense_; }
  bool self_adjoint() const { return self_adjoint_; }
  bool exact() const { return info_.exact; }
  std::int64_t samples() const { return info_.samples; }

  Vector apply(const Vector& v) const;
  Vector apply_adjoint(const Vector& v) const;
  RealVector apply(const RealVector& v) const;

  /// Leave-one-group-out replicas of a dense Monte-Carlo estimate (empty
  /// otherwise); used for jackknife errors.
  const std::vector<Matrix>& jackknife_replicas() const { return replicas_; }
  void set_jackknife_replicas(std::vector<Matrix> r) { replicas_ = std::move(r); }

 private:
  SystemShape shape_;
  Eigen::Index size_;
  std::optional<Matrix> dense_;
  bool real_dense_ = false;
  Apply apply_;
  Apply apply_adjoint_;
  RealApply real_apply_;
  bool self_adjoint_ = false;
  Info info_;
  std::vector<Matrix> replicas_;
};

/// Length d^4 of moment vectors for `shape`, with an overflow check.
Eigen::Index moment_size(const SystemShape& shape);

/// Grouped-layout vectors of 1 (x) 1 and SWAP on H (x) H.
RealVector identity_moment_vector(const SystemShape& shape);
RealVector swap_moment_vector(const SystemShape& shape);

/// Conversions between an operator X on H (x) H (d^2 x d^2, first copy most
/// significant) and its grouped moment vector.
Vector operator_to_moment_vector(const Matrix& x, const SystemShape& shape);
Matrix moment_vector_to_operator(const Vector& v, const SystemShape& shape);

/// Hermitian part (X + X^dagger) / 2 of a moment vector.
Vector hermitian_moment_part(const Vector& v, const SystemShape& shape);

/// Exact Haar twirl: the orthogonal projector onto span{1 (x) 1, SWAP}.
MomentOperator haar_twirl(const SystemShape& shape);
MomentOperator haar_twirl(int d);
MomentOperator identity_twirl(const SystemShape& shape);

/// Exact twirl of a finite ensemble (also accepts exact-Haar ensembles, which
/// return haar_twirl). Throws for other continuous ensembles.
MomentOperator moment_operator(const UnitaryEnsemble& ens, const SystemShape& shape);
/// Monte-Carlo twirl from mc.samples draws. Dense when size() allows, with
/// jackknife replicas; otherwise matrix-free over the stored draws.
MomentOperator moment_operator(const UnitaryEnsemble& ens, const SystemShape& shape,
                               const MonteCarlo& mc);

/// a o b, a + b, s * a and a^n without materializing.
MomentOperator compose(const MomentOperator& a, const MomentOperator& b);
MomentOperator linear_combination(double sa, const MomentOperator& a, double sb,
                                  const MomentOperator& b);
MomentOperator power(const MomentOperator& a, int n);

struct DesignReport {
  enum class Method { kExactDense, kPowerIteration, kMonteCarlo };
  double epsilon = 0.0;
  Method method = Method::kExactDense;
  std::int64_t samples = 0;
  double stderr_ = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = true;
};

std::string to_string(DesignReport::Method m);

/// ||G - reference|| in the 2->2 norm: dense SVD when size() <= 256,
/// otherwise power iteration on (G - ref)^dagger (G - ref).
DesignReport design_epsilon(const MomentOperator& g, const MomentOperator& reference,
                            const PowerIterationOptions& opt = {});

struct Lambda2Report {
  double value = 0.0;
  bool self_adjoint = true;  // false: reported as a singular value instead
  int iterations = 0;
  bool converged = true;
};

/// Largest eigenvalue modulus of G on the orthogonal complement of
/// span{1 (x) 1, SWAP}, by deflated power iteration. For non-self-adjoint G
/// the largest singular value of the deflated operator is reported.
Lambda2Report lambda2(const MomentOperator& g, const PowerIterationOptions& opt = {});

struct MixingReport {
  int s = 1;
  double lhs = 0.0;  // lambda2(((M_e^2 + M_o^2) / 2)^s)
  double rhs = 0.0;  // lambda2((M_e^{2s} + M_o^{2s}) / 2)
  bool holds = false;
};

/// Compares both sides of the mixing inequality for layer twirls M_e, M_o;
/// s must be a power of two. Holds when lhs <= rhs + tolerance.
MixingReport verify_mixing_inequality(const MomentOperator& m_e, const MomentOperator& m_o, int s,
                                      double tolerance = 1e-8,
                                      const PowerIterationOptions& opt = {});

}  // namespace randtomo
