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

#include <gtest/gtest.h>

#include "randtomo/circuits.hpp"
#include "randtomo/lattice.hpp"
#include "test_util.hpp"

namespace randtomo {
namespace {

using testing::max_abs;

CircuitSchedule haar_circuit(int k, int depth, std::uint64_t seed) {
  return CircuitSchedule(SystemShape(k, 2), depth, seed, GateEnsemble::local_haar(2));
}

int first_step_with(const CircuitSchedule& c, Parity p) {
  for (int s = 0; s < c.depth(); ++s)
    if (c.parity(s) == p) return s;
  return -1;
}

TEST(Brickwork, Bonds) {
  using Bonds = std::vector<std::pair<int, int>>;
  EXPECT_EQ(brickwork_bonds(4, Parity::kEven, Boundary::kOpen), (Bonds{{1, 2}, {3, 4}}));
  EXPECT_EQ(brickwork_bonds(4, Parity::kOdd, Boundary::kOpen), (Bonds{{2, 3}}));
  EXPECT_EQ(brickwork_bonds(4, Parity::kOdd, Boundary::kPeriodic), (Bonds{{2, 3}, {4, 1}}));
  EXPECT_TRUE(brickwork_bonds(2, Parity::kOdd, Boundary::kOpen).empty());
  EXPECT_THROW(brickwork_bonds(3, Parity::kEven, Boundary::kOpen), std::invalid_argument);
}

TEST(Layers, OddLayerOnTwoSitesIsIdentity) {
  const CircuitSchedule c = haar_circuit(2, 16, 5);
  const int step = first_step_with(c, Parity::kOdd);
  ASSERT_GE(step, 0);
  EXPECT_LT(max_abs(sample_layer(c, step).matrix() - Matrix::Identity(4, 4)), 1e-14);
}

TEST(Layers, EvenLayerIsProductOfGates) {
  const CircuitSchedule c = haar_circuit(4, 16, 7);
  const int step = first_step_with(c, Parity::kEven);
  ASSERT_GE(step, 0);
  const Matrix g12 = c.ensemble().sample(c.gate_seed(step, 1)).matrix();
  const Matrix g34 = c.ensemble().sample(c.gate_seed(step, 3)).matrix();
  EXPECT_LT(max_abs(sample_layer(c, step).matrix() - kron(g12, g34)), 1e-13);
}

TEST(Layers, DeterministicReplay) {
  const CircuitSchedule c = haar_circuit(4, 6, 9);
  EXPECT_EQ(sample_layer(c, 3).matrix(), sample_layer(c, 3).matrix());
  EXPECT_EQ(run_circuit(c).matrix(), run_circuit(haar_circuit(4, 6, 9)).matrix());
  EXPECT_NE(run_circuit(c).matrix(), run_circuit(haar_circuit(4, 6, 10)).matrix());
}

TEST(Layers, BlockSchedulerRepeatsParity) {
  const CircuitSchedule c(SystemShape(4, 2), 12, 3, GateEnsemble::local_haar(2), Boundary::kOpen, Scheduler::kBlock, 3);
  for (int s = 0; s < 12; ++s) EXPECT_EQ(c.parity(s), c.parity(s - s % 3));
}

TEST(Schedule, SerializeRoundTrip) {
  const CircuitSchedule c(SystemShape(4, 3), 5, 77, GateEnsemble::number_conserving_haar(3), Boundary::kPeriodic,
                          Scheduler::kBlock, 2);
  const CircuitSchedule back = CircuitSchedule::parse(c.serialize());
  EXPECT_EQ(back.serialize(), c.serialize());
  EXPECT_EQ(run_circuit(back).matrix(), run_circuit(c).matrix());

  SpeckleParams sp;
  sp.offset_sigma = 0.3;
  const CircuitSchedule bh(SystemShape(2, 3), 3, 8, speckle_gate_ensemble(2, sp));
  EXPECT_EQ(run_circuit(CircuitSchedule::parse(bh.serialize())).matrix(), run_circuit(bh).matrix());
}

TEST(ApplyCircuit, DepthZeroIsIdentity) {
  Rng rng = make_rng(3);
  const Matrix w = random_hermitian(16, rng);
  EXPECT_LT(max_abs(apply_circuit(haar_circuit(4, 0, 1), w, Direction::kHeisenberg) - w), 1e-15);
}

TEST(ApplyCircuit, HeisenbergPreservesTraceAndNorm) {
  Rng rng = make_rng(4);
  const Matrix w = random_hermitian(16, rng);
  const Matrix e = apply_circuit(haar_circuit(4, 5, 2), w, Direction::kHeisenberg);
  EXPECT_NEAR(std::abs(e.trace() - w.trace()), 0.0, 1e-12);
  EXPECT_NEAR(e.norm(), w.norm(), 1e-12);
}

TEST(ApplyCircuit, SchrodingerHeisenbergDuality) {
  Rng rng = make_rng(6);
  const SystemShape shape(4, 2);
  const Matrix w = random_hermitian(16, rng);
  const DensityMatrix rho = random_density_matrix(shape, 3, rng);
  const CircuitSchedule c = haar_circuit(4, 7, 12);
  const Complex a = hs_inner(apply_circuit(c, w, Direction::kHeisenberg), rho.matrix());
  const Complex b = hs_inner(w, apply_circuit(c, rho.matrix(), Direction::kSchrodinger));
  EXPECT_NEAR(std::abs(a - b), 0.0, 1e-12);
  const Matrix u = run_circuit(c).matrix();
  EXPECT_LT(max_abs(apply_circuit(c, rho.matrix(), Direction::kSchrodinger) - u * rho.matrix() * u.adjoint()), 1e-12);
}

TEST(CircuitTwirl, MatchesParitySequenceAverage) {
  const SystemShape shape(4, 2);
  const auto pair = PairTwirl<Complex>::haar();
  const MomentOperator m[2] = {layer_twirl(shape, Parity::kEven, Boundary::kOpen, pair),
                               layer_twirl(shape, Parity::kOdd, Boundary::kOpen, pair)};
  Rng rng = make_rng(8);
  std::normal_distribution<double> normal;
  Vector v(moment_size(shape));
  for (auto& x : v) x = Complex(normal(rng), normal(rng));
  Vector avg = Vector::Zero(v.size());
  for (int seq = 0; seq < 8; ++seq) {
    Vector x = v;
    for (int step = 0; step < 3; ++step) x = m[(seq >> step) & 1].apply(x);
    avg += x / 8.0;
  }
  const Vector direct = circuit_twirl(shape, Boundary::kOpen, 3, pair).apply(v);
  EXPECT_LT((direct - avg).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CircuitTwirl, EpsilonDecaysWithDepth) {
  const SystemShape shape(4, 2);
  const MomentOperator h = haar_twirl(shape);
  const auto pair = PairTwirl<Complex>::haar();
  double previous = 1.0 + 1e-9;
  for (int n : {1, 2, 4, 8}) {
    const double eps = design_epsilon(circuit_twirl(shape, Boundary::kOpen, n, pair), h).epsilon;
    EXPECT_LE(eps, previous);
    previous = eps;
  }
  EXPECT_LT(previous, 0.2);
}

TEST(PairTwirl, FiniteCliffordPairMatchesHaarLayer) {
  // Two-qubit gates drawn from products of single-qubit Cliffords are not a
  // 2-design on four dimensions; the exact pair twirl differs from Haar.
  std::vector<Unitary> gates;
  for (const auto& a : single_qubit_cliffords())
    for (const auto& b : single_qubit_cliffords()) gates.push_back(Unitary(kron(a.matrix(), b.matrix())));
  const GateEnsemble g = GateEnsemble::finite_set(gates, std::vector<double>(gates.size(), 1.0 / gates.size()));
  EXPECT_TRUE(g.inversion_closed());
  const SystemShape shape(2, 2);
  const MomentOperator layer = layer_twirl(shape, Parity::kEven, Boundary::kOpen, pair_twirl(g));
  EXPECT_NEAR(design_epsilon(layer, haar_twirl(shape)).epsilon, 1.0, 1e-9);
}

TEST(DepthForEpsilon, Examples) {
  EXPECT_EQ(depth_for_epsilon(4, 1.0 - 1e-12, 1.0), 1);
  const int a = depth_for_epsilon(6, 1e-3, 1.0);
  const int b = depth_for_epsilon(6, 1e-3, 2.0);
  EXPECT_NEAR(b, 2 * a, 1);
  EXPECT_GE(compressed_sensing_depth(4, 2, 1.0), depth_for_epsilon(4, 1e-3, 1.0));
}

TEST(Universality, LocalHaarAndIdentity) {
  const UniversalityReport haar = universality_probe(UnitaryEnsemble::haar(2), 4, 0.01, MonteCarlo{1000, 1, 1});
  EXPECT_NEAR(haar.curve.front(), 0.0, 1e-12);
  EXPECT_TRUE(haar.universal);
  EXPECT_EQ(haar.first_below, 1);
  const UniversalityReport id = universality_probe(UnitaryEnsemble::point_mass(Unitary::identity(2)), 4, 0.01, MonteCarlo{});
  EXPECT_FALSE(id.universal);
  for (double e : id.curve) EXPECT_NEAR(e, 1.0, 1e-12);
}

TEST(GateEnsemble, ParseDescriptors) {
  EXPECT_EQ(parse_gate_ensemble("local-haar", 2).kind(), GateEnsemble::Kind::kLocalHaar);
  EXPECT_EQ(parse_gate_ensemble("identity", 3).kind(), GateEnsemble::Kind::kIdentity);
  const GateEnsemble bh = parse_gate_ensemble(SpeckleParams{}.descriptor(), 3);
  EXPECT_EQ(bh.kind(), GateEnsemble::Kind::kBoseHubbard);
  EXPECT_EQ(bh.sample(5).matrix(), speckle_gate_ensemble(2, SpeckleParams{}).sample(5).matrix());
  EXPECT_THROW(parse_gate_ensemble("no-such-gate", 2), std::invalid_argument);
}

}  // namespace
}  // namespace randtomo
