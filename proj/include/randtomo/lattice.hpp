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

// Bosons on an open chain with at most N_S particles per site: ladder
// operators, the Bose-Hubbard Hamiltonian and its two-site gates, and
// time-of-flight (quasi-momentum) observables. Energies are in units of J.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "randtomo/circuits.hpp"
#include "randtomo/frames.hpp"
#include "randtomo/hilbert.hpp"
#include "randtomo/keyvalue.hpp"

namespace randtomo {

class FockShape {
 public:
  FockShape(int sites, int cutoff, std::optional<int> particles = std::nullopt);

  int sites() const { return sites_; }
  int cutoff() const { return cutoff_; }
  int local_dim() const { return cutoff_ + 1; }
  const std::optional<int>& particles() const { return particles_; }
  SystemShape system() const { return SystemShape(sites_, cutoff_ + 1); }

  /// Occupation tuples (site 1 first) with the fixed particle number, in
  /// increasing basis-index order; all tuples when no number is fixed.
  std::vector<std::vector<int>> occupations() const;
  /// Number of occupation tuples summing to the fixed particle number.
  int sector_dim() const;
  /// Columns are the basis states of the fixed-N sector (d x d_N).
  Matrix sector_isometry() const;

  /// Non-empty when the cutoff removes states with the fixed particle number
  /// (N > N_S).
  std::string truncation_warning() const;

 private:
  int sites_;
  int cutoff_;
  std::optional<int> particles_;
};

/// Truncated annihilation and creation operators (b, b^dagger) of a site,
/// embedded in the full space.
std::pair<Matrix, Matrix> ladder_operators(const FockShape& shape, int site);
Matrix number_operator(const FockShape& shape, int site);
Matrix total_number_operator(const FockShape& shape);

struct BoseHubbardParams {
  std::vector<double> hopping;      // J_i for bonds (i, i+1), size k - 1
  std::vector<double> interaction;  // U_i, size k
  std::vector<double> offset;       // Delta_i, size k
};

/// H = -sum J_i (b_i^dagger b_{i+1} + h.c.) + sum U_i/2 n_i(n_i - 1) + Delta_i n_i.
Observable build_hamiltonian(const FockShape& shape, const BoseHubbardParams& params);

struct TwoSiteParams {
  double hopping = 1.0;
  double interaction = 1.0;
  double offset1 = 0.0;
  double offset2 = 0.0;
};

/// exp(-i t H) for the two-site Hamiltonian, via Hermitian eigendecomposition.
Unitary bose_hubbard_gate(int cutoff, const TwoSiteParams& params, double time);

/// Speckle gate distribution: Delta_1, Delta_2 i.i.d. Gaussian, t uniform on
/// [time_min, time_max]. With `symmetric` the adjoint gate is returned with
/// probability 1/2, which closes the ensemble under inversion.
struct SpeckleParams {
  double hopping = 1.0;
  double interaction = 1.0;
  double offset_mean = 0.0;
  double offset_sigma = 1.0;
  double time_min = 0.5;
  double time_max = 1.5;
  bool symmetric = true;

  /// "bose-hubbard J=... U=... delta_mean=... delta_sigma=... t_min=...
  /// t_max=... symmetric=..." with round-trip precision.
  std::string descriptor() const;
  /// Reads the descriptor keys; missing keys keep their defaults.
  static SpeckleParams from(const KeyValues& kv);
};

GateEnsemble speckle_gate_ensemble(int cutoff, const SpeckleParams& params);

/// Normalized sum of hopping terms at separation i on the open chain,
/// sum_j (b_j^dagger b_{j+i} + b_{j+i}^dagger b_j), for 1 <= i <= k - 1.
Observable tof_observable(int separation, const FockShape& shape);

/// V^dagger X V for the sector isometry V of a fixed-N shape.
Matrix restrict_to_sector(const Matrix& x, const FockShape& shape);

/// Correlation matrix C_{sl} = <b_s^dagger b_l> (k x k, PSD).
Matrix correlation_matrix(const DensityMatrix& rho, const FockShape& shape);

struct QuasiMomentum {
  int sites = 0;
  std::vector<double> p;  // uniform grid on [-pi, pi], endpoints included
  std::vector<double> s;
};

/// S(p) = sum_{s,l} exp(i p (s - l)) <b_s^dagger b_l> on `points` grid points.
QuasiMomentum quasimomentum_distribution(const DensityMatrix& rho, const FockShape& shape,
                                         int points = 513);

/// (1/2pi) int exp(i p l) S(p) dp by the trapezoid rule. Throws when the grid
/// cannot resolve the integrand exactly.
Complex correlator_from_S(const QuasiMomentum& q, int separation);
/// sum_s <b_s^dagger b_{s+l}> computed directly.
Complex direct_correlator(const DensityMatrix& rho, const FockShape& shape, int separation);

/// Two-column CSV (p,S) with a header row.
std::string to_csv(const QuasiMomentum& q);

}  // namespace randtomo
