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

#include <numbers>

#include "randtomo/circuits.hpp"
#include "randtomo/lattice.hpp"
#include "test_util.hpp"

namespace randtomo {
namespace {

using testing::basis_state;
using testing::max_abs;

double commutator(const Matrix& a, const Matrix& b) { return schatten_norm(a * b - b * a, Schatten::kInf); }

TEST(Fock, LadderOperators) {
  const auto [b1, bd1] = ladder_operators(FockShape(1, 1), 1);
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 1) = 1.0;
  EXPECT_LT(max_abs(b1 - expected), 1e-15);
  EXPECT_LT(max_abs(bd1 - expected.adjoint()), 1e-15);

  const auto [b, bd] = ladder_operators(FockShape(1, 3), 1);
  for (int n = 1; n <= 3; ++n) EXPECT_NEAR(b(n - 1, n).real(), std::sqrt(n), 1e-14);
  const Matrix n_op = bd * b;
  for (int n = 0; n <= 3; ++n) EXPECT_NEAR(n_op(n, n).real(), n, 1e-14);
  EXPECT_LT(max_abs(n_op - Matrix(n_op.diagonal().asDiagonal())), 1e-15);
}

TEST(Fock, SectorsAndTruncation) {
  EXPECT_EQ(FockShape(4, 2, 2).sector_dim(), 10);
  EXPECT_EQ(FockShape(2, 1, 1).sector_dim(), 2);
  EXPECT_TRUE(FockShape(4, 2, 2).truncation_warning().empty());
  EXPECT_FALSE(FockShape(4, 1, 2).truncation_warning().empty());
  const Matrix v = FockShape(3, 2, 2).sector_isometry();
  EXPECT_LT(max_abs(v.adjoint() * v - Matrix::Identity(v.cols(), v.cols())), 1e-14);
}

TEST(Hamiltonian, ZeroParameters) {
  const FockShape fs(3, 2);
  const Observable h = build_hamiltonian(fs, {{0, 0}, {0, 0, 0}, {0, 0, 0}});
  EXPECT_LT(max_abs(h.matrix()), 1e-15);
}

TEST(Hamiltonian, SingleParticleBlock) {
  const FockShape fs(2, 1, 1);
  const double j = 0.7, d1 = 0.3, d2 = -1.1;
  const Matrix h = build_hamiltonian(fs, {{j}, {5.0, 5.0}, {d1, d2}}).matrix();
  // |10> is basis index 2, |01> is index 1.
  const Vector s10 = basis_state(4, 2), s01 = basis_state(4, 1);
  EXPECT_NEAR((s10.adjoint() * h * s10)(0).real(), d1, 1e-14);
  EXPECT_NEAR((s01.adjoint() * h * s01)(0).real(), d2, 1e-14);
  EXPECT_NEAR((s10.adjoint() * h * s01)(0).real(), -j, 1e-14);
}

TEST(Hamiltonian, ConservesParticleNumber) {
  const FockShape fs(3, 2);
  Rng rng = make_rng(3);
  std::normal_distribution<double> normal;
  const Observable h = build_hamiltonian(fs, {{normal(rng), normal(rng)}, {normal(rng), normal(rng), normal(rng)},
                                              {normal(rng), normal(rng), normal(rng)}});
  EXPECT_LT(commutator(h.matrix(), total_number_operator(fs)), 1e-12);
}

TEST(Gate, TimeZeroIsIdentity) {
  EXPECT_LT(max_abs(bose_hubbard_gate(2, {}, 0.0).matrix() - Matrix::Identity(9, 9)), 1e-14);
  EXPECT_THROW(bose_hubbard_gate(2, {}, -1.0), std::invalid_argument);
}

TEST(Gate, SingleParticleHopping) {
  const double j = 0.8, t = 1.3;
  const Matrix u = bose_hubbard_gate(1, {j, 0.0, 0.0, 0.0}, t).matrix();
  const NumberSector sector = number_sector(pair_number_operator(2), 1);
  const Matrix block = sector.isometry.adjoint() * u * sector.isometry;
  Matrix expected(2, 2);
  expected << std::cos(j * t), Complex(0, std::sin(j * t)), Complex(0, std::sin(j * t)), std::cos(j * t);
  // The sector basis may come in either order; the closed form is symmetric.
  EXPECT_LT(max_abs(block - expected), 1e-12);
}

TEST(Gate, RandomParametersConserveNumber) {
  Rng rng = make_rng(5);
  std::normal_distribution<double> normal;
  const Matrix n2 = pair_number_operator(3);
  for (int i = 0; i < 10; ++i) {
    const TwoSiteParams p{normal(rng), normal(rng), normal(rng), normal(rng)};
    EXPECT_LT(commutator(bose_hubbard_gate(2, p, std::abs(normal(rng))).matrix(), n2), 1e-10);
  }
}

TEST(Speckle, ZeroVarianceIsDeterministic) {
  SpeckleParams sp;
  sp.offset_sigma = 0.0;
  sp.time_min = sp.time_max = 1.0;
  sp.symmetric = false;
  const GateEnsemble g = speckle_gate_ensemble(1, sp);
  EXPECT_LT(max_abs(g.sample(1).matrix() - g.sample(2).matrix()), 1e-14);
  sp.offset_sigma = -1.0;
  EXPECT_THROW(speckle_gate_ensemble(1, sp), std::invalid_argument);
}

TEST(Speckle, DescriptorRoundTrip) {
  SpeckleParams sp;
  sp.hopping = 0.1;
  sp.offset_sigma = 1.0 / 3.0;
  const auto [name, kv] = parse_descriptor(sp.descriptor());
  EXPECT_EQ(name, "bose-hubbard");
  EXPECT_EQ(SpeckleParams::from(kv).descriptor(), sp.descriptor());
}

TEST(Speckle, SingleParticleSectorMixes) {
  SpeckleParams sp;
  sp.time_min = sp.time_max = 1.0;
  const UnitaryEnsemble ens =
      restrict_ensemble(speckle_gate_ensemble(1, sp).as_unitary_ensemble(), number_sector(pair_number_operator(2), 1));
  const MomentOperator g = moment_operator(ens, SystemShape::flat(2), MonteCarlo{20000, 7, 1});
  EXPECT_LT(lambda2(g).value, 1.0);
  const UniversalityReport probe = universality_probe(ens, 16, 0.01, MonteCarlo{20000, 9, 1});
  EXPECT_TRUE(probe.universal);
}

TEST(Speckle, TwoBosonSectorProbeDecays) {
  const UnitaryEnsemble ens = restrict_ensemble(speckle_gate_ensemble(2, {}).as_unitary_ensemble(),
                                                number_sector(pair_number_operator(3), 2));
  const UniversalityReport probe = universality_probe(ens, 16, 0.01, MonteCarlo{20000, 11, 1});
  EXPECT_TRUE(probe.universal);
  EXPECT_LT(probe.curve.back(), probe.curve.front());
}

TEST(TimeOfFlight, SeedIsTracelessAndNormalized) {
  for (int k : {2, 4, 6}) {
    const FockShape fs(k, 1);
    const Observable w = tof_observable(1, fs);
    EXPECT_NEAR(std::abs(w.matrix().trace()), 0.0, 1e-12);
    EXPECT_NEAR(w.matrix().norm(), 1.0, 1e-12);
  }
  EXPECT_THROW(tof_observable(4, FockShape(4, 1)), std::out_of_range);
}

TEST(TimeOfFlight, OperatorNormGrowsSlowly) {
  // Normalized by sqrt(d), ||w||_inf^2 d must grow at most polynomially in k.
  double prev = 0.0;
  for (int k : {2, 4, 6}) {
    const FockShape fs(k, 1);
    const double inf = schatten_norm(tof_observable(1, fs).matrix(), Schatten::kInf);
    const double lambda = inf * inf * fs.system().dim();
    EXPECT_LE(lambda, 4.0 * k);
    EXPECT_GE(lambda, prev);
    prev = lambda;
  }
}

TEST(QuasiMomentum, SingleSiteIsFlat) {
  const FockShape fs(1, 2);
  const DensityMatrix rho = DensityMatrix::pure(fs.system(), basis_state(3, 2));
  const QuasiMomentum q = quasimomentum_distribution(rho, fs, 33);
  for (double s : q.s) EXPECT_NEAR(s, 2.0, 1e-13);
}

TEST(QuasiMomentum, TwoSiteSuperposition) {
  const FockShape fs(2, 1);
  const Vector psi = (basis_state(4, 1) + basis_state(4, 2)) / std::sqrt(2.0);
  const DensityMatrix rho = DensityMatrix::pure(fs.system(), psi);
  const QuasiMomentum q = quasimomentum_distribution(rho, fs, 65);
  for (std::size_t i = 0; i < q.p.size(); ++i) EXPECT_NEAR(q.s[i], 1.0 + std::cos(q.p[i]), 1e-13);
  EXPECT_NEAR(q.p.front(), -std::numbers::pi, 1e-15);
  EXPECT_NEAR(q.p.back(), std::numbers::pi, 1e-15);
  EXPECT_NEAR(std::abs(correlator_from_S(q, 1) - 0.5), 0.0, 1e-6);
  EXPECT_NEAR(std::abs(direct_correlator(rho, fs, 1) - 0.5), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(correlator_from_S(q, 0) - 1.0), 0.0, 1e-6);
}

TEST(QuasiMomentum, MottStateIsFlat) {
  const FockShape fs(2, 1);
  const DensityMatrix rho = DensityMatrix::pure(fs.system(), basis_state(4, 3));
  for (double s : quasimomentum_distribution(rho, fs).s) EXPECT_NEAR(s, 2.0, 1e-13);
}

TEST(QuasiMomentum, RandomThreeSiteRoundTrip) {
  const FockShape fs(3, 2);
  Rng rng = make_rng(13);
  const DensityMatrix rho = random_density_matrix(fs.system(), 4, rng);
  const QuasiMomentum q = quasimomentum_distribution(rho, fs, 513);
  for (int l = -2; l <= 2; ++l) EXPECT_LT(std::abs(correlator_from_S(q, l) - direct_correlator(rho, fs, l)), 1e-6);
  const std::string csv = to_csv(q);
  EXPECT_EQ(csv.substr(0, 4), "p,S\n");
}

}  // namespace
}  // namespace randtomo
