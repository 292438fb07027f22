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

// Dense finite-dimensional Hilbert-space core.
//
// Composite systems have k sites of local dimension d_l, total dimension
// d = d_l^k. Sites are numbered 1..k and site 1 is the most significant
// tensor factor, so a basis index is the base-d_l number whose first digit is
// the occupation of site 1.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "randtomo/rng.hpp"
#include "randtomo/types.hpp"

namespace randtomo {

inline constexpr std::int64_t kDefaultMaxDimension = 1 << 12;

class SystemShape {
 public:
  SystemShape(int sites, int local_dim, std::int64_t max_dim = kDefaultMaxDimension);

  /// A single "site" of dimension d; used for operators on subspaces whose
  /// dimension is not a power of a local dimension.
  static SystemShape flat(int dim) { return SystemShape(1, dim, dim); }

  int sites() const { return sites_; }
  int local_dim() const { return local_dim_; }
  int dim() const { return dim_; }

  /// Shape of a contiguous block of `count` sites.
  SystemShape block(int count) const {
    return SystemShape(count, local_dim_, dim_);
  }

  bool operator==(const SystemShape&) const = default;

 private:
  int sites_;
  int local_dim_;
  int dim_;
};

/// Hermitian, unit-trace, positive semidefinite operator.
class DensityMatrix {
 public:
  DensityMatrix(SystemShape shape, const Matrix& matrix, const Tolerances& tol = {});

  static DensityMatrix pure(SystemShape shape, const Vector& psi);
  static DensityMatrix maximally_mixed(SystemShape shape);

  const SystemShape& shape() const { return shape_; }
  const Matrix& matrix() const { return matrix_; }
  int dim() const { return shape_.dim(); }

 private:
  SystemShape shape_;
  Matrix matrix_;
};

/// Hermitian operator; `is_normalized()` records whether ||w||_2 = 1.
class Observable {
 public:
  Observable(SystemShape shape, const Matrix& matrix, const Tolerances& tol = {});

  const SystemShape& shape() const { return shape_; }
  const Matrix& matrix() const { return matrix_; }
  int dim() const { return shape_.dim(); }
  bool is_normalized() const { return normalized_; }

  /// Copy rescaled to unit Frobenius norm. Throws on the zero operator.
  Observable normalized() const;

 private:
  SystemShape shape_;
  Matrix matrix_;
  bool normalized_;
};

/// Unitary matrix, checked on construction.
class Unitary {
 public:
  explicit Unitary(const Matrix& matrix, const Tolerances& tol = {});

  static Unitary identity(int dim) { return Unitary(Matrix::Identity(dim, dim)); }

  const Matrix& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  Unitary adjoint() const;

 private:
  struct Unchecked {};
  Unitary(Unchecked, Matrix matrix) : matrix_(std::move(matrix)) {}
  Matrix matrix_;
  friend Unitary operator*(const Unitary& a, const Unitary& b);
};

/// Product without re-validation (products of unitaries are unitary).
Unitary operator*(const Unitary& a, const Unitary& b);

enum class Schatten { kOne, kTwo, kInf };

/// Hilbert-Schmidt product Tr(A^dagger B).
Complex hs_inner(const Matrix& a, const Matrix& b);
double hs_inner(const Observable& a, const Observable& b);
/// Expectation value (w, rho); real for Hermitian w.
double expectation(const Observable& w, const DensityMatrix& rho);

double schatten_norm(const Matrix& a, Schatten p);

/// Reduced operator on the kept sites (1-based, strictly increasing).
Matrix partial_trace(const Matrix& op, const SystemShape& shape,
                     std::span<const int> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);

/// Places `op`, acting on the listed sites in the listed order, into the full
/// space with identities elsewhere. No normalization.
Matrix embed_sites(const Matrix& op, std::span<const int> sites,
                   const SystemShape& shape);

/// v (normalized, traceless, on m consecutive sites) embedded at sites
/// position..position+m-1 as v ⊗ 1 / sqrt(d_l^(k-m)); the result has unit
/// Frobenius norm.
Observable embed_local(const Observable& v, int position, const SystemShape& shape);

/// Kronecker product, first argument most significant.
Matrix kron(const Matrix& a, const Matrix& b);

/// Coordinates of a Hermitian matrix in an orthonormal real basis of the
/// Hermitian matrices: (X_ii), then sqrt(2) Re X_ij and sqrt(2) Im X_ij for
/// i < j. Euclidean products of coordinates equal Hilbert-Schmidt products.
RealVector hermitian_coordinates(const Matrix& x);
Matrix from_hermitian_coordinates(const RealVector& c, int dim);

/// Complex Gaussian Hermitian matrix (GUE-like, unnormalized).
Matrix random_hermitian(int dim, Rng& rng);
/// Haar-random pure state.
Vector random_state(int dim, Rng& rng);
/// Rank-r state with Haar-random eigenvectors and random spectrum.
DensityMatrix random_density_matrix(SystemShape shape, int rank, Rng& rng);

/// Maximum-entry distance from Hermiticity, ||A - A^dagger||_max.
double hermiticity_defect(const Matrix& a);

}  // namespace randtomo
