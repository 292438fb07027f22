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

#include "randtomo/frames.hpp"
#include "randtomo/lattice.hpp"
#include "test_util.hpp"

namespace randtomo {
namespace {

using testing::hadamard;
using testing::max_abs;
using testing::pauli_x;
using testing::pauli_z;
using testing::qubit_observable;

TEST(Projector, Examples) {
  const Observable x = qubit_observable(pauli_x());
  const SuperOperator p = projector_onto(x);
  EXPECT_LT(max_abs(p.apply(x.matrix()) - x.matrix()), 1e-14);
  EXPECT_LT(max_abs(p.apply(pauli_z())), 1e-14);
}

TEST(Projector, MatchesInnerProductFormula) {
  Rng rng = make_rng(17);
  const Observable w = Observable(SystemShape::flat(3), random_hermitian(3, rng)).normalized();
  const DensityMatrix rho = random_density_matrix(SystemShape::flat(3), 3, rng);
  const Matrix expected = hs_inner(w.matrix(), rho.matrix()) * w.matrix();
  EXPECT_LT(max_abs(projector_onto(w).apply(rho.matrix()) - expected), 1e-13);
}

TEST(SamplingOperator, PauliBasisIsTightFrame) {
  const SuperOperator w = sampling_operator(ObservableMeasure::exact_basis(pauli_basis(1)));
  EXPECT_LT(max_abs(Matrix(w.coords().cast<Complex>()) - Matrix::Identity(4, 4)), 1e-12);
  EXPECT_LT(tight_frame_defect(w), 1e-10);
  EXPECT_LT(tight_frame_defect(sampling_operator(ObservableMeasure::exact_basis(pauli_basis(2)))), 1e-10);
}

TEST(SamplingOperator, PointMass) {
  Rng rng = make_rng(19);
  const Observable w = Observable(SystemShape::flat(3), random_hermitian(3, rng)).normalized();
  const SuperOperator s = sampling_operator(ObservableMeasure::point_mass(w));
  const Matrix x = random_hermitian(3, rng);
  EXPECT_LT(max_abs(s.apply(x) - 9.0 * projector_onto(w).apply(x)), 1e-12);
}

TEST(TightFrameDefect, IdentityAndZero) {
  EXPECT_NEAR(tight_frame_defect(SuperOperator::identity(3)), 0.0, 1e-14);
  EXPECT_NEAR(tight_frame_defect(SuperOperator::zero(3)), 1.0, 1e-14);
}

TEST(HaarSampling, FourthMoments) {
  // E[U_ki U_mj conj(U_kj) conj(U_mi)] for i != j equals
  // (delta_km (d - 1) - (1 - delta_km)) / (d (d^2 - 1)).
  const int d = 3, n = 1000000;
  Rng rng = make_rng(53);
  Complex same = 0.0, diff = 0.0;
  double same_sq = 0.0, diff_sq = 0.0;
  for (int s = 0; s < n; ++s) {
    const Matrix u = haar_unitary(d, rng).matrix();
    const Complex a = u(0, 0) * u(0, 1) * std::conj(u(0, 1)) * std::conj(u(0, 0));
    const Complex b = u(0, 0) * u(1, 1) * std::conj(u(0, 1)) * std::conj(u(1, 0));
    same += a;
    diff += b;
    same_sq += std::norm(a);
    diff_sq += std::norm(b);
  }
  same /= n;
  diff /= n;
  const double norm = d * (d * d - 1.0);
  const double se_same = std::sqrt((same_sq / n - std::norm(same)) / n);
  const double se_diff = std::sqrt((diff_sq / n - std::norm(diff)) / n);
  EXPECT_LE(std::abs(same - (d - 1.0) / norm), 5.0 * se_same);
  EXPECT_LE(std::abs(diff + 1.0 / norm), 5.0 * se_diff);
}

TEST(InducedMeasure, HadamardConjugation) {
  const Observable z = qubit_observable(pauli_z());
  const ObservableMeasure mu = induced_measure(UnitaryEnsemble::point_mass(Unitary(hadamard())), z);
  const Matrix x = pauli_x() / std::sqrt(2.0);
  const Matrix id = Matrix::Identity(2, 2) / std::sqrt(2.0);
  int identity_atoms = 0;
  for (std::uint64_t s = 0; s < 400; ++s) {
    const Matrix m = mu.sample(s).matrix();
    if (max_abs(m - id) < 1e-12) {
      ++identity_atoms;
    } else {
      EXPECT_LT(max_abs(m - x), 1e-12);
    }
  }
  EXPECT_GT(identity_atoms, 0);
}

TEST(InducedMeasure, IdentityAtomFrequency) {
  const int d = 4;
  const ObservableMeasure mu = induced_measure(UnitaryEnsemble::haar(d), embed_local(qubit_observable(pauli_z()), 1, SystemShape(2, 2)));
  const Matrix id = Matrix::Identity(d, d) / 2.0;
  const int n = 100000;
  int hits = 0;
  for (int s = 0; s < n; ++s) hits += max_abs(mu.sample(derive_seed(23, {static_cast<std::uint64_t>(s)})).matrix() - id) < 1e-12;
  const double p = 1.0 / (d * d);
  EXPECT_NEAR(static_cast<double>(hits) / n, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(InducedMeasure, HaarFrameIsNearlyTight) {
  const Observable w0 = embed_local(qubit_observable(pauli_z()), 1, SystemShape(2, 2));
  const SuperOperator w = sampling_operator(induced_measure(UnitaryEnsemble::haar(4), w0), MonteCarlo{200000, 29, 1});
  EXPECT_LE(tight_frame_defect(w), 0.1);
  EXPECT_GT(w.defect_stderr(), 0.0);
}

TEST(InducedMeasure, DeterministicInSeed) {
  Matrix diag = Matrix::Zero(3, 3);
  diag(0, 0) = 1.0;
  diag(2, 2) = -1.0;
  const ObservableMeasure mu = induced_measure(UnitaryEnsemble::haar(3), Observable(SystemShape::flat(3), diag).normalized());
  EXPECT_EQ(mu.sample(99).matrix(), mu.sample(99).matrix());
}

TEST(NumberSector, TwoSitesOneParticle) {
  const FockShape fs(2, 1, 1);
  const Matrix n_hat = total_number_operator(fs);
  const NumberSector sector = number_sector(n_hat, 1);
  ASSERT_EQ(sector.dim(), 2);
  const Matrix p = sector.isometry * sector.isometry.adjoint();
  Matrix expected = Matrix::Zero(4, 4);
  expected(1, 1) = expected(2, 2) = 1.0;  // |01>, |10>
  EXPECT_LT(max_abs(p - expected), 1e-12);
}

TEST(NumberSector, RestrictedProjectorIsIdempotent) {
  const FockShape fs(2, 1, 1);
  const SuperOperator pn =
      restricted_projector(Observable(fs.system(), total_number_operator(fs)), 1);
  Rng rng = make_rng(31);
  const Matrix x = random_hermitian(4, rng);
  EXPECT_LT(max_abs(pn.apply(pn.apply(x)) - pn.apply(x)), 1e-12);
}

TEST(NumberSector, RestrictedHaarFrame) {
  const FockShape fs(2, 1, 1);
  const Matrix n_hat = total_number_operator(fs);
  const NumberSector sector = number_sector(n_hat, 1);
  const UnitaryEnsemble ens = restrict_ensemble(UnitaryEnsemble::number_conserving_haar(n_hat), sector);
  const Observable w0 = qubit_observable(pauli_z());
  const SuperOperator w = sampling_operator(induced_measure(ens, w0), MonteCarlo{100000, 37, 1});
  EXPECT_LE(tight_frame_defect(w), 0.1);
}

TEST(Cliffords, TwentyFourDistinctUpToPhase) {
  const auto c = single_qubit_cliffords();
  ASSERT_EQ(c.size(), 24u);
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      EXPECT_LT(std::abs((c[i].matrix().adjoint() * c[j].matrix()).trace()), 2.0 - 1e-9);
}

}  // namespace
}  // namespace randtomo
