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

// Observable measures, the sampling operator W = d^2 E[P_w], tight-frame
// checks, unitary ensembles and the observable measures they induce.
//
// Superoperators act on the real vector space of Hermitian matrices. Dense
// superoperators are stored in the orthonormal coordinates of
// hermitian_coordinates(), so the Hilbert-Schmidt adjoint is the transpose.

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "randtomo/hilbert.hpp"

namespace randtomo {

/// Seeded Monte-Carlo settings. Draw i uses derive_seed(seed, {i}); draws are
/// split into a fixed number of contiguous groups whose partial sums are
/// combined in group order, so results do not depend on `workers`.
struct MonteCarlo {
  std::int64_t samples = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
};

inline constexpr int kJackknifeGroups = 20;

// ---------------------------------------------------------------------------
// Unitary ensembles

/// Haar-random unitary: QR of a complex Ginibre matrix with column phases
/// fixed by R_ii/|R_ii|. With `special` the determinant phase is removed,
/// giving the Haar measure on SU(d); otherwise on U(d).
Matrix haar_matrix(int d, Rng& rng, bool special = true);
Unitary haar_unitary(int d, Rng& rng);

/// Orthonormal basis of one eigenspace of a Hermitian operator.
struct NumberSector {
  double eigenvalue = 0.0;
  Matrix isometry;  // d x d_N, orthonormal columns
  int dim() const { return static_cast<int>(isometry.cols()); }
};

/// All eigenspaces of `n_hat`, eigenvalues grouped to `tol`, ascending. When
/// `n_hat` is diagonal the isometries consist of computational basis vectors.
std::vector<NumberSector> eigenspaces(const Matrix& n_hat, double tol = 1e-9);
/// The eigenspace for eigenvalue N; throws std::invalid_argument if N is not
/// in the spectrum.
NumberSector number_sector(const Matrix& n_hat, double n, double tol = 1e-9);

class UnitaryEnsemble {
 public:
  enum class Kind { kHaar, kFiniteSet, kCircuit, kNumberConservingHaar, kGeneric };
  using Sampler = std::function<Unitary(std::uint64_t)>;

  UnitaryEnsemble(Kind kind, int dim, Sampler sampler, bool inversion_closed = false);

  static UnitaryEnsemble haar(int d);
  static UnitaryEnsemble finite_set(std::vector<Unitary> atoms, std::vector<double> weights);
  static UnitaryEnsemble uniform(std::vector<Unitary> atoms);
  static UnitaryEnsemble point_mass(const Unitary& u);
  /// Independent Haar unitaries on each eigenspace of `n_hat`, with the
  /// global phase fixed so that det U = 1.
  static UnitaryEnsemble number_conserving_haar(const Matrix& n_hat);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool is_finite() const { return kind_ == Kind::kFiniteSet; }
  bool inversion_closed() const { return inversion_closed_; }
  const std::vector<Unitary>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Draw determined entirely by `draw_seed`.
  Unitary sample(std::uint64_t draw_seed) const { return sampler_(draw_seed); }

  /// Ensemble closed under inversion: U or U^dagger with probability 1/2 each
  /// (finite sets get the adjoints added at half weight).
  UnitaryEnsemble symmetrized() const;

 private:
  Kind kind_;
  int dim_;
  Sampler sampler_;
  bool inversion_closed_;
  std::vector<Unitary> atoms_;
  std::vector<double> weights_;
};

/// Restriction V^dagger U V of an ensemble commuting with the sector's
/// operator to the sector's coordinates.
UnitaryEnsemble restrict_ensemble(const UnitaryEnsemble& ens, const NumberSector& sector);

/// Normalized Pauli strings P / sqrt(d) on `qubits` qubits (an orthonormal
/// operator basis, identity first).
std::vector<Observable> pauli_basis(int qubits);
/// The 24 single-qubit Clifford rotations as elements of SU(2), one
/// representative per element of the Clifford group modulo phases.
std::vector<Unitary> single_qubit_cliffords();

// ---------------------------------------------------------------------------
// Observable measures

class ObservableMeasure {
 public:
  enum class Kind { kFiniteSet, kExactBasis, kInduced };
  using Sampler = std::function<Observable(std::uint64_t)>;

  static ObservableMeasure finite_set(std::vector<Observable> atoms, std::vector<double> weights);
  /// Uniform measure over an operator basis.
  static ObservableMeasure exact_basis(std::vector<Observable> basis);
  static ObservableMeasure point_mass(const Observable& w);

  Kind kind() const { return kind_; }
  const SystemShape& shape() const { return shape_; }
  int dim() const { return shape_.dim(); }
  const std::vector<Observable>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }

  Observable sample(std::uint64_t draw_seed) const { return sampler_(draw_seed); }

 private:
  ObservableMeasure(Kind kind, SystemShape shape, Sampler sampler)
      : kind_(kind), shape_(shape), sampler_(std::move(sampler)) {}

  Kind kind_;
  SystemShape shape_;
  Sampler sampler_;
  std::vector<Observable> atoms_;
  std::vector<double> weights_;

  friend ObservableMeasure induced_measure(const UnitaryEnsemble&, const Observable&);
};

/// Measure induced by conjugating w0: 1/sqrt(d) with probability 1/d^2,
/// otherwise U^dagger w0 U with U drawn from `ens`. Requires w0 normalized and
/// traceless. For a restricted frame pass the ensemble and w0 in sector
/// coordinates (see restrict_ensemble), where d is the sector dimension.
ObservableMeasure induced_measure(const UnitaryEnsemble& ens, const Observable& w0);

// ---------------------------------------------------------------------------
// Superoperators

class SuperOperator {
 public:
  using Apply = std::function<Matrix(const Matrix&)>;

  /// Dense superoperator from its matrix in Hermitian coordinates.
  explicit SuperOperator(RealMatrix coords);
  /// Matrix-free superoperator; `apply` must map Hermitian to Hermitian.
  SuperOperator(int dim, Apply apply, bool self_adjoint);

  static SuperOperator identity(int dim);
  static SuperOperator zero(int dim);

  int dim() const { return dim_; }
  bool is_dense() const { return coords_.has_value(); }
  const RealMatrix& coords() const;
  bool self_adjoint() const { return self_adjoint_; }

  /// Applies the map, extended complex-linearly to non-Hermitian inputs.
  Matrix apply(const Matrix& x) const;
  RealVector apply_coordinates(const RealVector& c) const;

  /// Monte-Carlo metadata: sample count (0 for exact operators) and the
  /// jackknife standard error of tight_frame_defect (NaN if not estimated).
  std::int64_t samples() const { return samples_; }
  double defect_stderr() const { return defect_stderr_; }
  void set_monte_carlo(std::int64_t samples, double defect_stderr) {
    samples_ = samples;
    defect_stderr_ = defect_stderr;
  }

  /// Dense copy (matrix-free operators are materialized column by column).
  SuperOperator densified() const;

 private:
  int dim_;
  std::optional<RealMatrix> coords_;
  Apply apply_;
  bool self_adjoint_ = true;
  std::int64_t samples_ = 0;
  double defect_stderr_ = std::numeric_limits<double>::quiet_NaN();
};

SuperOperator operator+(const SuperOperator& a, const SuperOperator& b);
SuperOperator operator-(const SuperOperator& a, const SuperOperator& b);
SuperOperator operator*(double s, const SuperOperator& a);
/// (a o b)(X) = a(b(X)).
SuperOperator compose(const SuperOperator& a, const SuperOperator& b);

/// Rank-one projector P_w(X) = (w, X) w. Requires ||w||_2 = 1.
SuperOperator projector_onto(const Observable& w);

/// W = d^2 sum_i p_i P_{w_i}; finite-set and exact-basis measures only.
SuperOperator sampling_operator(const ObservableMeasure& mu);
/// Empirical W from mc.samples draws, with jackknife error of the defect.
SuperOperator sampling_operator(const ObservableMeasure& mu, const MonteCarlo& mc);

/// Empirical frame operator dim^2 * mean(P_{w_i}) for draws w_i = draw(seed_i)
/// of (not necessarily normalized) Hermitian dim x dim matrices.
SuperOperator monte_carlo_frame(int dim, const std::function<Matrix(std::uint64_t)>& draw,
                                const MonteCarlo& mc);

/// ||W - id|| in the 2->2 norm on Hermitian matrices.
double tight_frame_defect(const SuperOperator& w);

/// 2->2 norm (largest singular value on the Hermitian-matrix space).
double superoperator_norm(const SuperOperator& a);

/// P_N(X) = Pi X Pi for the orthogonal projector Pi onto the N-eigenspace.
SuperOperator restricted_projector(const Observable& n_hat, double n);

}  // namespace randtomo
