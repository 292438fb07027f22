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

#include <numeric>

#include "randtomo/circuits.hpp"
#include "randtomo/lattice.hpp"
#include "randtomo/recon.hpp"
#include "test_util.hpp"

namespace randtomo {
namespace {

using testing::basis_state;
using testing::max_abs;
using testing::pauli_z;
using testing::qubit_observable;

std::vector<int> sites(int first, int last) {
  std::vector<int> s(last - first + 1);
  std::iota(s.begin(), s.end(), first);
  return s;
}

TEST(Measurement, ExactExpectation) {
  const DensityMatrix zero = DensityMatrix::pure(SystemShape::flat(2), basis_state(2, 0));
  const MeasurementRecord r = simulate_measurement(zero, qubit_observable(pauli_z()), 0, 1);
  EXPECT_NEAR(r.value, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(r.stderr_, 0.0);

  Rng rng = make_rng(2);
  Matrix h = random_hermitian(4, rng);
  h -= h.trace() / 4.0 * Matrix::Identity(4, 4);
  const Observable w = Observable(SystemShape(2, 2), h).normalized();
  EXPECT_NEAR(simulate_measurement(DensityMatrix::maximally_mixed(SystemShape(2, 2)), w, 0, 1).value, 0.0, 1e-15);
}

TEST(Measurement, FiniteShotsAreUnbiased) {
  Rng rng = make_rng(3);
  const SystemShape shape(2, 2);
  const DensityMatrix rho = random_density_matrix(shape, 2, rng);
  const Observable w = Observable(shape, random_hermitian(4, rng)).normalized();
  const double exact = expectation(w, rho);
  const MeasurementRecord r = simulate_measurement(rho, w, 10000, 99);
  EXPECT_GT(r.stderr_, 0.0);
  EXPECT_LE(std::abs(r.value - exact), 5.0 * r.stderr_);
  EXPECT_EQ(simulate_measurement(rho, w, 10000, 99).value, r.value);
}

TEST(Measurement, DatasetCsv) {
  const DensityMatrix zero = DensityMatrix::pure(SystemShape::flat(2), basis_state(2, 0));
  const auto csv = to_dataset({simulate_measurement(zero, qubit_observable(pauli_z()), 0, 1, "seed-1")});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "provenance,offset,value,shots,stderr");
}

TEST(Incoherence, SingleSitePauli) {
  for (int k : {2, 4}) {
    const SystemShape shape(k, 2);
    const IncoherenceReport r = incoherence_check(embed_local(qubit_observable(pauli_z()), 1, shape), 2.0);
    EXPECT_TRUE(r.passes);
    EXPECT_NEAR(r.norm_inf_squared, 1.0 / shape.dim(), 1e-14);
    EXPECT_NEAR(r.lambda_needed, 1.0, 1e-12);
  }
}

TEST(Incoherence, ProjectorSeedIsCoherent) {
  for (int d : {4, 16, 64}) {
    Matrix m = basis_state(d, 0) * basis_state(d, 0).adjoint();
    m -= Matrix::Identity(d, d) / d;
    const IncoherenceReport r = incoherence_check(Observable(SystemShape::flat(d), m).normalized(), 2.0);
    EXPECT_NEAR(r.norm_inf_squared, 1.0 - 1.0 / d, 1e-12);
    EXPECT_EQ(r.passes, d * (1.0 - 1.0 / d) <= 2.0);
  }
  EXPECT_FALSE(incoherence_check(Observable(SystemShape::flat(16), Matrix(basis_state(16, 0) * basis_state(16, 0).adjoint() - Matrix::Identity(16, 16) / 16.0)).normalized(), 2.0).passes);
}

TEST(CompressedSensing, FullBasisDeterminesState) {
  Rng rng = make_rng(5);
  const SystemShape shape(2, 2);
  const DensityMatrix rho = random_density_matrix(shape, 2, rng);
  std::vector<MeasurementRecord> records;
  for (const auto& w : pauli_basis(2)) records.push_back(simulate_measurement(rho, w, 0, 1));
  const ReconstructionResult r = cs_reconstruct(records);
  EXPECT_TRUE(r.converged);
  EXPECT_LT((r.estimate - rho.matrix()).norm(), 1e-6);
}

TEST(CompressedSensing, RandomPureStateFromHaarFrame) {
  const SystemShape shape(4, 2);
  Rng rng = make_rng(7);
  const DensityMatrix rho = random_density_matrix(shape, 1, rng);
  const ObservableMeasure mu = induced_measure(UnitaryEnsemble::haar(16), embed_local(qubit_observable(pauli_z()), 1, shape));
  std::vector<MeasurementRecord> records;
  for (std::uint64_t i = 0; i < 2048; ++i) records.push_back(simulate_measurement(rho, mu.sample(derive_seed(8, {i})), 0, 1));
  const ReconstructionResult r = cs_reconstruct(records);
  EXPECT_GE(fidelity(rho, r.estimate), 0.99);
}

TEST(CompressedSensing, UnderdeterminedIsFeasible) {
  const SystemShape shape(4, 2);
  Rng rng = make_rng(9);
  const DensityMatrix rho = random_density_matrix(shape, 1, rng);
  const ObservableMeasure mu = induced_measure(UnitaryEnsemble::haar(16), embed_local(qubit_observable(pauli_z()), 1, shape));
  std::vector<MeasurementRecord> records{simulate_measurement(rho, mu.sample(3), 0, 1)};
  const ReconstructionResult r = cs_reconstruct(records);
  EXPECT_LE(r.residual, CsOptions{}.tolerance);
  EXPECT_NEAR(std::abs(r.estimate.trace() - 1.0), 0.0, 1e-12);
}

TEST(CompressedSensing, RejectsEmptyInput) { EXPECT_THROW(cs_reconstruct({}), std::invalid_argument); }

TEST(StateProjection, Properties) {
  Rng rng = make_rng(10);
  const Matrix p = project_to_state(random_hermitian(5, rng));
  Eigen::SelfAdjointEigenSolver<Matrix> es(p);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-14);
  EXPECT_NEAR(p.trace().real(), 1.0, 1e-13);
}

TEST(Fidelity, PureStates) {
  Rng rng = make_rng(12);
  const SystemShape shape(4, 2);
  const Vector psi = random_state(16, rng);
  const Vector phi = random_state(16, rng);
  const DensityMatrix rho = DensityMatrix::pure(shape, psi);
  EXPECT_NEAR(fidelity(rho, rho.matrix()), 1.0, 1e-12);
  EXPECT_LE(fidelity(rho, rho.matrix()), 1.0 + 1e-12);
  EXPECT_NEAR(fidelity(rho, phi * phi.adjoint()), std::norm(psi.dot(phi)), 1e-12);
}

TEST(LightCone, Window) {
  EXPECT_EQ(light_cone(3, 4, 0, 6), (std::pair<int, int>{3, 4}));
  EXPECT_EQ(light_cone(3, 4, 2, 6), (std::pair<int, int>{1, 6}));
  EXPECT_EQ(light_cone(1, 2, 1, 6), (std::pair<int, int>{1, 3}));
}

TEST(LightCone, DepthZeroIsPartialTrace) {
  const SystemShape shape(4, 2);
  const std::vector<LocalTerm> terms{diagonal_seed(shape, 1, 2), diagonal_seed(shape, 3, 2)};
  const Matrix w = local_sum(terms, shape);
  const CircuitSchedule c(shape, 0, 1, GateEnsemble::local_haar(2));
  for (int q = 1; q <= 3; ++q) {
    EXPECT_LT(max_abs(evolved_local_observable(terms, c, q, 2) - partial_trace(w, shape, sites(q, q + 1))), 1e-13);
  }
}

TEST(LightCone, MatchesFullSpaceEvolution) {
  const SystemShape shape(6, 2);
  std::vector<LocalTerm> terms;
  for (int p = 1; p <= 5; ++p) terms.push_back(diagonal_seed(shape, p, 2));
  const Matrix w = local_sum(terms, shape);
  const CircuitSchedule c(shape, 2, 21, GateEnsemble::local_haar(2));
  const Matrix full = apply_circuit(c, w, Direction::kHeisenberg);
  for (int q = 1; q <= 5; ++q) {
    EXPECT_LT(max_abs(evolved_local_observable(terms, c, q, 2) - partial_trace(full, shape, sites(q, q + 1))), 1e-10);
  }
}

TEST(LightCone, SupportWidth) {
  // An evolved single term acts as the identity outside its light cone.
  const SystemShape shape(6, 2);
  const int depth = 1;
  const LocalTerm t = diagonal_seed(shape, 1, 2);
  const CircuitSchedule c(shape, depth, 5, GateEnsemble::local_haar(2));
  const Matrix e = apply_circuit(c, local_sum({t}, shape), Direction::kHeisenberg);
  const auto [first, last] = light_cone(1, 2, depth, 6);
  EXPECT_LE(last - first + 1, 2 + 2 * depth);
  const std::vector<int> inside = sites(first, last);
  const Matrix reduced = partial_trace(e, shape, inside);
  const int outside = 6 - static_cast<int>(inside.size());
  const Matrix rebuilt = embed_sites(reduced / std::pow(2.0, outside), inside, shape);
  EXPECT_LT(max_abs(rebuilt - e), 1e-12);
}

TEST(ReducedDefect, WholeChainMatchesFrameDefect) {
  const SystemShape shape(2, 2);
  const Observable w0 = embed_local(qubit_observable(pauli_z()), 1, shape);
  const UnitaryEnsemble ens = UnitaryEnsemble::haar(4);
  const MonteCarlo mc{20000, 3, 1};
  const ReducedDefectReport r = reduced_defect(ens, w0, 1, 2, mc);
  const SuperOperator w = sampling_operator(induced_measure(ens, w0), mc);
  EXPECT_LE(std::abs(r.defect - tight_frame_defect(w)), 3.0 * std::hypot(r.stderr_, w.defect_stderr()) + 1e-12);
}

TEST(ReducedDefect, NoCircuitIsOrderOne) {
  const SystemShape shape(4, 2);
  const Observable w0(shape, local_sum({diagonal_seed(shape, 1, 2)}, shape));
  const CircuitSchedule c(shape, 0, 1, GateEnsemble::local_haar(2));
  const ReducedDefectReport r = reduced_defect(circuit_ensemble(c), w0.normalized(), 2, 2, MonteCarlo{2000, 1, 1});
  EXPECT_GT(r.defect, 0.5);
}

TEST(Rdm, ProductStateExact) {
  const SystemShape shape(4, 2);
  const DensityMatrix rho = DensityMatrix::pure(shape, basis_state(16, 0b0101));
  const CircuitSchedule family(shape, 1, 3, GateEnsemble::local_haar(2));
  const auto est = estimate_rdms(rho, family, {2, 400, 0, 4, 1e-8, 1});
  ASSERT_EQ(est.size(), 3u);
  for (const auto& e : est) {
    EXPECT_LT((e.rho - partial_trace(rho.matrix(), shape, sites(e.q, e.q + 1))).norm(), 1e-6);
  }
}

TEST(Rdm, RandomMpsSixSites) {
  const SystemShape shape(6, 2);
  Rng rng = make_rng(15);
  const DensityMatrix rho = DensityMatrix::pure(shape, random_mps_state(6, 2, 2, rng));
  const CircuitSchedule family(shape, 1, 5, GateEnsemble::local_haar(2));
  const auto est = estimate_rdms(rho, family, {2, 400, 0, 6, 1e-8, 1});
  for (const auto& e : est) {
    EXPECT_LT((e.rho - partial_trace(rho.matrix(), shape, sites(e.q, e.q + 1))).norm(), 1e-4);
  }
}

TEST(Rdm, TooFewSamplesIsReported) {
  const SystemShape shape(4, 2);
  const DensityMatrix rho = DensityMatrix::maximally_mixed(shape);
  const CircuitSchedule family(shape, 1, 3, GateEnsemble::local_haar(2));
  EXPECT_THROW(estimate_rdms(rho, family, {2, 10, 0, 4, 1e-8, 1}), std::runtime_error);
}

TEST(Certification, DepolarizedSiteIsLocalized) {
  const SystemShape shape(4, 2);
  const DensityMatrix rho = DensityMatrix::pure(shape, basis_state(16, 0b0101));
  const CircuitSchedule family(shape, 1, 3, GateEnsemble::local_haar(2));
  const auto est = estimate_rdms(rho, family, {2, 400, 0, 4, 1e-8, 1});
  const CertificationReport truth = certify_candidate(rho, est, 1e-6);
  EXPECT_TRUE(truth.passes);
  EXPECT_LT(truth.max_defect, 1e-6);
  EXPECT_FALSE(truth.caveat.empty());
  EXPECT_TRUE(certify_candidate(rho, est, 1e-6, true).caveat.empty());

  const CertificationReport dep = certify_candidate(depolarize_site(rho, 2), est, 1e-6);
  EXPECT_FALSE(dep.passes);
  EXPECT_GT(dep.block_defects[0], 1e-3);  // sites 1-2
  EXPECT_GT(dep.block_defects[1], 1e-3);  // sites 2-3
  EXPECT_LT(dep.block_defects[2], 1e-6);  // sites 3-4
}

TEST(Certification, GhzPhaseIsInvisible) {
  const SystemShape shape(4, 2);
  const Vector plus = (basis_state(16, 0) + basis_state(16, 15)) / std::sqrt(2.0);
  const Vector minus = (basis_state(16, 0) - basis_state(16, 15)) / std::sqrt(2.0);
  const CircuitSchedule family(shape, 1, 3, GateEnsemble::local_haar(2));
  const auto est = estimate_rdms(DensityMatrix::pure(shape, plus), family, {2, 400, 0, 4, 1e-8, 1});
  EXPECT_TRUE(certify_candidate(DensityMatrix::pure(shape, minus), est, 1e-6).passes);
}

}  // namespace
}  // namespace randtomo
