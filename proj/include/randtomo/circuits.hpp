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

// Parallel (brickwork) random circuits on chains of k sites: each step applies
// independent two-site gates on all even bonds (1,2),(3,4),... or on all odd
// bonds (2,3),(4,5),..., chosen by a fair coin.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "randtomo/designs.hpp"
#include "randtomo/frames.hpp"
#include "randtomo/hilbert.hpp"
#include "randtomo/twirl_layer.hpp"

namespace randtomo {

enum class Boundary { kOpen, kPeriodic };
enum class Parity { kEven, kOdd };
/// kFairCoin draws the parity of every step independently; kBlock draws one
/// parity per block of `block` consecutive steps.
enum class Scheduler { kFairCoin, kBlock };
enum class Direction { kSchrodinger, kHeisenberg };

std::string to_string(Boundary b);
std::string to_string(Scheduler s);
Boundary parse_boundary(const std::string& s);
Scheduler parse_scheduler(const std::string& s);

/// Distribution of two-site gates (dimension d_l^2).
class GateEnsemble {
 public:
  enum class Kind { kLocalHaar, kFiniteSet, kBoseHubbard, kNumberConserving, kIdentity };
  using Sampler = std::function<Unitary(std::uint64_t)>;

  GateEnsemble(Kind kind, int local_dim, Sampler sampler, std::string descriptor,
               bool inversion_closed, std::optional<Matrix> number_operator = std::nullopt);

  static GateEnsemble local_haar(int local_dim);
  static GateEnsemble identity(int local_dim);
  /// Haar on each eigenspace of n_1 + n_2 with n = diag(0, ..., d_l - 1).
  static GateEnsemble number_conserving_haar(int local_dim);
  static GateEnsemble finite_set(std::vector<Unitary> gates, std::vector<double> weights,
                                 std::string descriptor = "finite-set");

  Kind kind() const { return kind_; }
  int local_dim() const { return local_dim_; }
  int pair_dim() const { return local_dim_ * local_dim_; }
  const std::string& descriptor() const { return descriptor_; }
  bool inversion_closed() const { return inversion_closed_; }
  /// Two-site number operator the gates commute with, if any.
  const std::optional<Matrix>& number_operator() const { return number_operator_; }

  Unitary sample(std::uint64_t seed) const { return sampler_(seed); }
  UnitaryEnsemble as_unitary_ensemble() const;

 private:
  Kind kind_;
  int local_dim_;
  Sampler sampler_;
  std::string descriptor_;
  bool inversion_closed_;
  std::optional<Matrix> number_operator_;
  std::optional<UnitaryEnsemble> finite_;
};

/// Two-site number operator n_1 + n_2 for local dimension d_l.
Matrix pair_number_operator(int local_dim);

/// Rebuilds an ensemble from its descriptor: "local-haar", "identity",
/// "number-conserving-haar" or "bose-hubbard key=value ..." (see lattice.hpp).
GateEnsemble parse_gate_ensemble(const std::string& descriptor, int local_dim);

/// Bonds of one layer, as ordered 1-based site pairs.
std::vector<std::pair<int, int>> brickwork_bonds(int sites, Parity parity, Boundary boundary);

class CircuitSchedule {
 public:
  CircuitSchedule(SystemShape shape, int depth, std::uint64_t seed, GateEnsemble ensemble,
                  Boundary boundary = Boundary::kOpen, Scheduler scheduler = Scheduler::kFairCoin,
                  int block = 1);

  const SystemShape& shape() const { return shape_; }
  int depth() const { return depth_; }
  std::uint64_t seed() const { return seed_; }
  const GateEnsemble& ensemble() const { return ensemble_; }
  Boundary boundary() const { return boundary_; }
  Scheduler scheduler() const { return scheduler_; }
  int block() const { return block_; }

  CircuitSchedule with_seed(std::uint64_t seed) const;
  CircuitSchedule with_depth(int depth) const;

  Parity parity(int step) const;
  std::vector<std::pair<int, int>> bonds(int step) const;
  std::uint64_t gate_seed(int step, int first_site) const;

  /// Flat `key = value` record sufficient for bit-exact replay.
  std::string serialize() const;
  static CircuitSchedule parse(const std::string& text);

 private:
  SystemShape shape_;
  int depth_;
  std::uint64_t seed_;
  GateEnsemble ensemble_;
  Boundary boundary_;
  Scheduler scheduler_;
  int block_;
};

/// Left-multiplies x (d x d) by `gate` acting on the ordered `sites`.
Matrix apply_gate_left(const Matrix& gate, std::span<const int> sites, const Matrix& x,
                       const SystemShape& shape);

Unitary sample_layer(const CircuitSchedule& schedule, int step);
/// U = L_{n-1} ... L_1 L_0.
Unitary run_circuit(const CircuitSchedule& schedule);
/// Schrodinger: U X U^dagger; Heisenberg: U^dagger X U.
Matrix apply_circuit(const CircuitSchedule& schedule, const Matrix& op, Direction direction);
Observable apply_circuit(const CircuitSchedule& schedule, const Observable& w);
DensityMatrix apply_circuit(const CircuitSchedule& schedule, const DensityMatrix& rho);

/// Circuits of the given family (shape, depth, gates, boundary, scheduler)
/// as a unitary ensemble; a draw seed replaces the master seed.
UnitaryEnsemble circuit_ensemble(const CircuitSchedule& family);

/// Exact two-site twirl of a finite or local-Haar gate ensemble, or a
/// Monte-Carlo estimate for continuous ensembles when `mc` is given.
PairTwirl<Complex> pair_twirl(const GateEnsemble& gates, const MonteCarlo* mc = nullptr);

/// Twirl of one layer of the given parity (M_e or M_o).
MomentOperator layer_twirl(const SystemShape& shape, Parity parity, Boundary boundary,
                           const PairTwirl<Complex>& pair);
/// One step of the fair-coin circuit, (M_e + M_o) / 2.
MomentOperator circuit_step_twirl(const SystemShape& shape, Boundary boundary,
                                  const PairTwirl<Complex>& pair);
/// Depth-n circuit twirl ((M_e + M_o) / 2)^n.
MomentOperator circuit_twirl(const SystemShape& shape, Boundary boundary, int depth,
                             const PairTwirl<Complex>& pair);

/// ceil(C ln(1/eps) k ln k), at least 1.
int depth_for_epsilon(int k, double eps, double c);
/// Depth for the compressed-sensing accuracy 1/eps = d^{5/2}, d = d_l^k.
int compressed_sensing_depth(int k, int local_dim, double c);

struct UniversalityReport {
  std::vector<double> curve;  // ||P^j - G_H|| for j = 1..max_j
  int first_below = 0;        // first j with curve[j-1] < 1 - delta, 0 if none
  bool universal = false;
  double delta = 0.0;
};

/// Convolution-power probe of a gate ensemble's own twirl P: reports
/// ||P^j - G_H|| and whether it drops below 1 - delta for some j <= max_j.
/// Finite ensembles are twirled exactly, others by Monte Carlo.
UniversalityReport universality_probe(const UnitaryEnsemble& ens, int max_j, double delta,
                                      const MonteCarlo& mc);

}  // namespace randtomo
