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

#include "randtomo/circuits.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "randtomo/keyvalue.hpp"
#include "randtomo/lattice.hpp"
#include "site_index.hpp"

namespace randtomo {

namespace {

constexpr std::uint64_t kParityTag = 0x7061726974ULL;
constexpr std::uint64_t kGateTag = 0x67617465ULL;

bool same_up_to_phase(const Matrix& a, const Matrix& b) {
  const Complex overlap = (a.adjoint() * b).trace() / static_cast<double>(a.rows());
  if (std::abs(std::abs(overlap) - 1.0) > 1e-9) return false;
  return (b - a * (overlap / std::abs(overlap))).cwiseAbs().maxCoeff() <= 1e-9;
}

bool closed_under_inversion(const std::vector<Unitary>& gates, const std::vector<double>& weights) {
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const Matrix inv = gates[i].matrix().adjoint();
    double w = 0.0;
    for (std::size_t j = 0; j < gates.size(); ++j)
      if (same_up_to_phase(gates[j].matrix(), inv)) w += weights[j];
    double v = 0.0;
    for (std::size_t j = 0; j < gates.size(); ++j)
      if (same_up_to_phase(gates[j].matrix(), gates[i].matrix())) v += weights[j];
    if (std::abs(w - v) > 1e-12) return false;
  }
  return true;
}

int integer_sqrt(int n) {
  int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  return r * r == n ? r : -1;
}

void require_even_chain(int sites) {
  if (sites < 2 || sites % 2 != 0) {
    throw std::invalid_argument("brickwork circuits need an even number of sites >= 2, got " +
                                std::to_string(sites));
  }
}

MomentOperator layer_operator(const SystemShape& shape, const std::vector<std::pair<int, int>>& bonds,
                              const PairTwirl<Complex>& pair) {
  const int k = shape.sites();
  const int dl = shape.local_dim();
  const MomentOperator::Info info{true, 0};
  if (pair.is_haar) {
    auto real = std::make_shared<TwirlLayer<double>>(k, dl, bonds, PairTwirl<double>::haar());
    auto cplx = std::make_shared<TwirlLayer<Complex>>(k, dl, bonds, PairTwirl<Complex>::haar());
    auto apply = [cplx](const Vector& v) { return (*cplx)(v); };
    return MomentOperator(shape, apply, apply, [real](const RealVector& v) { return (*real)(v); }, true,
                          info);
  }
  const Matrix& m = pair.dense;
  const bool self_adjoint = (m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-12;
  const bool is_real = m.imag().cwiseAbs().maxCoeff() <= 1e-14;
  auto fwd = std::make_shared<TwirlLayer<Complex>>(k, dl, bonds, pair);
  auto bwd = std::make_shared<TwirlLayer<Complex>>(k, dl, bonds, PairTwirl<Complex>::from_dense(m.adjoint()));
  MomentOperator::RealApply real;
  if (is_real) {
    auto r = std::make_shared<TwirlLayer<double>>(k, dl, bonds,
                                                  PairTwirl<double>::from_dense(m.real()));
    real = [r](const RealVector& v) { return (*r)(v); };
  }
  return MomentOperator(
      shape, [fwd](const Vector& v) { return (*fwd)(v); }, [bwd](const Vector& v) { return (*bwd)(v); },
      real, self_adjoint, info);
}

}  // namespace

// ---------------------------------------------------------------------------
// Enums

std::string to_string(Boundary b) { return b == Boundary::kOpen ? "open" : "periodic"; }
std::string to_string(Scheduler s) { return s == Scheduler::kFairCoin ? "fair-coin" : "block"; }

Boundary parse_boundary(const std::string& s) {
  if (s == "open") return Boundary::kOpen;
  if (s == "periodic") return Boundary::kPeriodic;
  throw std::invalid_argument("unknown boundary '" + s + "' (open, periodic)");
}

Scheduler parse_scheduler(const std::string& s) {
  if (s == "fair-coin") return Scheduler::kFairCoin;
  if (s == "block") return Scheduler::kBlock;
  throw std::invalid_argument("unknown scheduler '" + s + "' (fair-coin, block)");
}

// ---------------------------------------------------------------------------
// Gate ensembles

GateEnsemble::GateEnsemble(Kind kind, int local_dim, Sampler sampler, std::string descriptor,
                           bool inversion_closed, std::optional<Matrix> number_operator)
    : kind_(kind),
      local_dim_(local_dim),
      sampler_(std::move(sampler)),
      descriptor_(std::move(descriptor)),
      inversion_closed_(inversion_closed),
      number_operator_(std::move(number_operator)) {
  if (local_dim < 1) throw std::invalid_argument("GateEnsemble: local dimension must be positive");
  if (!sampler_) throw std::invalid_argument("GateEnsemble: empty sampler");
  if (number_operator_ && number_operator_->rows() != pair_dim()) {
    throw std::invalid_argument("GateEnsemble: number operator has the wrong dimension");
  }
}

GateEnsemble GateEnsemble::local_haar(int local_dim) {
  const int d = local_dim * local_dim;
  return GateEnsemble(
      Kind::kLocalHaar, local_dim,
      [d](std::uint64_t seed) {
        Rng rng = make_rng(seed);
        return haar_unitary(d, rng);
      },
      "local-haar", true);
}

GateEnsemble GateEnsemble::identity(int local_dim) {
  const int d = local_dim * local_dim;
  GateEnsemble g(
      Kind::kIdentity, local_dim, [d](std::uint64_t) { return Unitary::identity(d); }, "identity", true);
  g.finite_ = UnitaryEnsemble::point_mass(Unitary::identity(d));
  return g;
}

GateEnsemble GateEnsemble::number_conserving_haar(int local_dim) {
  const Matrix n = pair_number_operator(local_dim);
  const auto ens = UnitaryEnsemble::number_conserving_haar(n);
  return GateEnsemble(
      Kind::kNumberConserving, local_dim, [ens](std::uint64_t seed) { return ens.sample(seed); },
      "number-conserving-haar", true, n);
}

GateEnsemble GateEnsemble::finite_set(std::vector<Unitary> gates, std::vector<double> weights,
                                      std::string descriptor) {
  if (gates.empty()) throw std::invalid_argument("GateEnsemble::finite_set: no gates");
  const int dl = integer_sqrt(gates.front().dim());
  if (dl < 1) throw std::invalid_argument("GateEnsemble::finite_set: gate dimension is not d_l^2");
  const bool closed = closed_under_inversion(gates, weights);
  auto ens = UnitaryEnsemble::finite_set(std::move(gates), std::move(weights));
  GateEnsemble g(
      Kind::kFiniteSet, dl, [ens](std::uint64_t seed) { return ens.sample(seed); }, std::move(descriptor),
      closed);
  g.finite_ = ens;
  return g;
}

UnitaryEnsemble GateEnsemble::as_unitary_ensemble() const {
  if (finite_) return *finite_;
  if (kind_ == Kind::kLocalHaar) return UnitaryEnsemble::haar(pair_dim());
  const auto kind = kind_ == Kind::kNumberConserving ? UnitaryEnsemble::Kind::kNumberConservingHaar
                                                     : UnitaryEnsemble::Kind::kGeneric;
  return UnitaryEnsemble(kind, pair_dim(), sampler_, inversion_closed_);
}

Matrix pair_number_operator(int local_dim) {
  if (local_dim < 1) throw std::invalid_argument("pair_number_operator: invalid local dimension");
  const int d = local_dim * local_dim;
  Matrix n = Matrix::Zero(d, d);
  for (int a = 0; a < local_dim; ++a)
    for (int b = 0; b < local_dim; ++b) n(a * local_dim + b, a * local_dim + b) = a + b;
  return n;
}

GateEnsemble parse_gate_ensemble(const std::string& descriptor, int local_dim) {
  const auto [name, kv] = parse_descriptor(descriptor);
  if (name == "local-haar") return GateEnsemble::local_haar(local_dim);
  if (name == "identity") return GateEnsemble::identity(local_dim);
  if (name == "number-conserving-haar") return GateEnsemble::number_conserving_haar(local_dim);
  if (name == "bose-hubbard") return speckle_gate_ensemble(local_dim - 1, SpeckleParams::from(kv));
  throw std::invalid_argument("unknown gate ensemble '" + descriptor + "'");
}

std::vector<std::pair<int, int>> brickwork_bonds(int sites, Parity parity, Boundary boundary) {
  require_even_chain(sites);
  std::vector<std::pair<int, int>> bonds;
  const int first = parity == Parity::kEven ? 1 : 2;
  for (int s = first; s + 1 <= sites; s += 2) bonds.emplace_back(s, s + 1);
  if (parity == Parity::kOdd && boundary == Boundary::kPeriodic && sites > 2) bonds.emplace_back(sites, 1);
  return bonds;
}

// ---------------------------------------------------------------------------
// Schedules

CircuitSchedule::CircuitSchedule(SystemShape shape, int depth, std::uint64_t seed, GateEnsemble ensemble,
                                 Boundary boundary, Scheduler scheduler, int block)
    : shape_(shape),
      depth_(depth),
      seed_(seed),
      ensemble_(std::move(ensemble)),
      boundary_(boundary),
      scheduler_(scheduler),
      block_(block) {
  require_even_chain(shape.sites());
  if (depth < 0) throw std::invalid_argument("CircuitSchedule: negative depth");
  if (block < 1) throw std::invalid_argument("CircuitSchedule: block length must be positive");
  if (ensemble_.local_dim() != shape.local_dim()) {
    throw std::invalid_argument("CircuitSchedule: gate ensemble does not match the local dimension");
  }
}

CircuitSchedule CircuitSchedule::with_seed(std::uint64_t seed) const {
  CircuitSchedule c = *this;
  c.seed_ = seed;
  return c;
}

CircuitSchedule CircuitSchedule::with_depth(int depth) const {
  if (depth < 0) throw std::invalid_argument("CircuitSchedule: negative depth");
  CircuitSchedule c = *this;
  c.depth_ = depth;
  return c;
}

Parity CircuitSchedule::parity(int step) const {
  if (step < 0) throw std::out_of_range("CircuitSchedule: negative step");
  const std::uint64_t slot = scheduler_ == Scheduler::kFairCoin ? step : step / block_;
  return (derive_seed(seed_, {kParityTag, slot}) & 1U) ? Parity::kOdd : Parity::kEven;
}

std::vector<std::pair<int, int>> CircuitSchedule::bonds(int step) const {
  return brickwork_bonds(shape_.sites(), parity(step), boundary_);
}

std::uint64_t CircuitSchedule::gate_seed(int step, int first_site) const {
  return derive_seed(seed_, {kGateTag, static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(first_site)});
}

std::string CircuitSchedule::serialize() const {
  KeyValues kv;
  kv.set("sites", std::to_string(shape_.sites()));
  kv.set("local_dim", std::to_string(shape_.local_dim()));
  kv.set("boundary", to_string(boundary_));
  kv.set("depth", std::to_string(depth_));
  kv.set("seed", std::to_string(seed_));
  kv.set("scheduler", to_string(scheduler_));
  kv.set("block", std::to_string(block_));
  kv.set("ensemble", ensemble_.descriptor());
  return kv.to_string();
}

CircuitSchedule CircuitSchedule::parse(const std::string& text) {
  const KeyValues kv = KeyValues::parse(text);
  const int sites = static_cast<int>(kv.get_int("sites"));
  const int dl = static_cast<int>(kv.get_int("local_dim"));
  return CircuitSchedule(SystemShape(sites, dl), static_cast<int>(kv.get_int("depth")), kv.get_uint("seed"),
                         parse_gate_ensemble(kv.get("ensemble"), dl),
                         parse_boundary(kv.get("boundary", "open")),
                         parse_scheduler(kv.get("scheduler", "fair-coin")),
                         static_cast<int>(kv.get_int("block", 1)));
}

// ---------------------------------------------------------------------------
// Application

Matrix apply_gate_left(const Matrix& gate, std::span<const int> sites, const Matrix& x,
                       const SystemShape& shape) {
  const detail::SiteIndex index(shape, sites, false);
  const Eigen::Index m = static_cast<Eigen::Index>(index.selected.size());
  if (gate.rows() != m || gate.cols() != m) throw std::invalid_argument("apply_gate_left: gate dimension mismatch");
  if (x.rows() != shape.dim()) throw std::invalid_argument("apply_gate_left: operand dimension mismatch");
  Matrix out(x.rows(), x.cols());
  Matrix block(m, x.cols());
  for (Eigen::Index r : index.rest) {
    for (Eigen::Index a = 0; a < m; ++a) block.row(a) = x.row(r + index.selected[a]);
    const Matrix y = gate * block;
    for (Eigen::Index a = 0; a < m; ++a) out.row(r + index.selected[a]) = y.row(a);
  }
  return out;
}

namespace {

struct Gate {
  std::array<int, 2> sites;
  Matrix matrix;
};

std::vector<Gate> layer_gates(const CircuitSchedule& schedule, int step) {
  if (step < 0 || step >= schedule.depth()) throw std::out_of_range("circuit step out of range");
  std::vector<Gate> gates;
  for (const auto& [s, t] : schedule.bonds(step)) {
    gates.push_back({{s, t}, schedule.ensemble().sample(schedule.gate_seed(step, s)).matrix()});
  }
  return gates;
}

// g X g^dagger on the gate's sites.
Matrix conjugate(const Gate& g, const Matrix& x, const SystemShape& shape, bool dagger_first) {
  const Matrix u = dagger_first ? Matrix(g.matrix.adjoint()) : g.matrix;
  const Matrix left = apply_gate_left(u, g.sites, x, shape);
  return apply_gate_left(u, g.sites, left.adjoint(), shape).adjoint();
}

}  // namespace

Unitary sample_layer(const CircuitSchedule& schedule, int step) {
  const SystemShape& shape = schedule.shape();
  Matrix u = Matrix::Identity(shape.dim(), shape.dim());
  for (const auto& g : layer_gates(schedule, step)) u = apply_gate_left(g.matrix, g.sites, u, shape);
  return Unitary(u);
}

Unitary run_circuit(const CircuitSchedule& schedule) {
  const SystemShape& shape = schedule.shape();
  Matrix u = Matrix::Identity(shape.dim(), shape.dim());
  for (int step = 0; step < schedule.depth(); ++step)
    for (const auto& g : layer_gates(schedule, step)) u = apply_gate_left(g.matrix, g.sites, u, shape);
  return Unitary(u);
}

Matrix apply_circuit(const CircuitSchedule& schedule, const Matrix& op, Direction direction) {
  const SystemShape& shape = schedule.shape();
  if (op.rows() != shape.dim() || op.cols() != shape.dim()) {
    throw std::invalid_argument("apply_circuit: operator dimension mismatch");
  }
  Matrix x = op;
  if (direction == Direction::kSchrodinger) {
    for (int step = 0; step < schedule.depth(); ++step)
      for (const auto& g : layer_gates(schedule, step)) x = conjugate(g, x, shape, false);
  } else {
    for (int step = schedule.depth() - 1; step >= 0; --step)
      for (const auto& g : layer_gates(schedule, step)) x = conjugate(g, x, shape, true);
  }
  return x;
}

Observable apply_circuit(const CircuitSchedule& schedule, const Observable& w) {
  if (!(w.shape() == schedule.shape())) throw std::invalid_argument("apply_circuit: shape mismatch");
  return Observable(w.shape(), apply_circuit(schedule, w.matrix(), Direction::kHeisenberg));
}

DensityMatrix apply_circuit(const CircuitSchedule& schedule, const DensityMatrix& rho) {
  if (!(rho.shape() == schedule.shape())) throw std::invalid_argument("apply_circuit: shape mismatch");
  return DensityMatrix(rho.shape(), apply_circuit(schedule, rho.matrix(), Direction::kSchrodinger));
}

UnitaryEnsemble circuit_ensemble(const CircuitSchedule& family) {
  return UnitaryEnsemble(
      UnitaryEnsemble::Kind::kCircuit, family.shape().dim(),
      [family](std::uint64_t seed) { return run_circuit(family.with_seed(seed)); }, false);
}

// ---------------------------------------------------------------------------
// Twirls

PairTwirl<Complex> pair_twirl(const GateEnsemble& gates, const MonteCarlo* mc) {
  if (gates.kind() == GateEnsemble::Kind::kLocalHaar) return PairTwirl<Complex>::haar();
  const SystemShape pair(2, gates.local_dim());
  if (moment_size(pair) > kDenseMomentSize) {
    throw std::invalid_argument("pair_twirl: dense two-site twirl too large for local dimension " +
                                std::to_string(gates.local_dim()));
  }
  const UnitaryEnsemble ens = gates.as_unitary_ensemble();
  if (ens.is_finite()) return PairTwirl<Complex>::from_dense(moment_operator(ens, pair).to_dense());
  if (mc == nullptr) {
    throw std::invalid_argument("pair_twirl: continuous gate ensemble '" + gates.descriptor() +
                                "' needs Monte-Carlo settings");
  }
  return PairTwirl<Complex>::from_dense(moment_operator(ens, pair, *mc).to_dense());
}

MomentOperator layer_twirl(const SystemShape& shape, Parity parity, Boundary boundary,
                           const PairTwirl<Complex>& pair) {
  return layer_operator(shape, brickwork_bonds(shape.sites(), parity, boundary), pair);
}

MomentOperator circuit_step_twirl(const SystemShape& shape, Boundary boundary,
                                  const PairTwirl<Complex>& pair) {
  return linear_combination(0.5, layer_twirl(shape, Parity::kEven, boundary, pair), 0.5,
                            layer_twirl(shape, Parity::kOdd, boundary, pair));
}

MomentOperator circuit_twirl(const SystemShape& shape, Boundary boundary, int depth,
                             const PairTwirl<Complex>& pair) {
  return power(circuit_step_twirl(shape, boundary, pair), depth);
}

// ---------------------------------------------------------------------------
// Depth schedules and universality

int depth_for_epsilon(int k, double eps, double c) {
  if (k < 2) throw std::invalid_argument("depth_for_epsilon: need k >= 2");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("depth_for_epsilon: need 0 < eps < 1");
  if (!(c > 0.0)) throw std::invalid_argument("depth_for_epsilon: need C > 0");
  const double n = std::ceil(c * std::log(1.0 / eps) * k * std::log(static_cast<double>(k)));
  return std::max(1, static_cast<int>(n));
}

int compressed_sensing_depth(int k, int local_dim, double c) {
  if (k < 2) throw std::invalid_argument("compressed_sensing_depth: need k >= 2");
  if (local_dim < 2) throw std::invalid_argument("compressed_sensing_depth: need d_l >= 2");
  if (!(c > 0.0)) throw std::invalid_argument("compressed_sensing_depth: need C > 0");
  // ln(1/eps) = (5/2) ln d = (5/2) k ln d_l.
  const double log_inv_eps = 2.5 * k * std::log(static_cast<double>(local_dim));
  const double n = std::ceil(c * log_inv_eps * k * std::log(static_cast<double>(k)));
  return std::max(1, static_cast<int>(n));
}

UniversalityReport universality_probe(const UnitaryEnsemble& ens, int max_j, double delta,
                                      const MonteCarlo& mc) {
  if (max_j < 1) throw std::invalid_argument("universality_probe: need max_j >= 1");
  const SystemShape shape = SystemShape::flat(ens.dim());
  const MomentOperator p = (ens.is_finite() || ens.kind() == UnitaryEnsemble::Kind::kHaar)
                               ? moment_operator(ens, shape)
                               : moment_operator(ens, shape, mc);
  const MomentOperator haar = haar_twirl(shape);
  UniversalityReport report;
  report.delta = delta;
  MomentOperator pj = p;
  for (int j = 1; j <= max_j; ++j) {
    if (j > 1) pj = compose(pj, p);
    const double eps = design_epsilon(pj, haar).epsilon;
    report.curve.push_back(eps);
    if (report.first_below == 0 && eps < 1.0 - delta) report.first_below = j;
  }
  report.universal = report.first_below != 0;
  return report;
}

}  // namespace randtomo
