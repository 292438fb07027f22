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
#include "randtomo/designs.hpp"
#include "test_util.hpp"

namespace randtomo {
namespace {

using testing::basis_state;
using testing::max_abs;

Vector random_vector(Eigen::Index n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(normal(rng), normal(rng));
  return v;
}

Matrix swap_operator(int d) {
  Matrix s = Matrix::Zero(d * d, d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) s(a * d + b, b * d + a) = 1.0;
  return s;
}

TEST(HaarTwirl, FixesIdentityAndIsProjector) {
  const SystemShape shape = SystemShape::flat(3);
  const MomentOperator h = haar_twirl(shape);
  const Vector one = identity_moment_vector(shape).cast<Complex>();
  EXPECT_LT((h.apply(one) - one).cwiseAbs().maxCoeff(), 1e-13);
  const Vector v = random_vector(h.size(), 41);
  EXPECT_LT((h.apply(h.apply(v)) - h.apply(v)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(HaarTwirl, MatchesMonteCarloOnProductState) {
  const int d = 2;
  const SystemShape shape = SystemShape::flat(d);
  const Matrix x = basis_state(4, 0) * basis_state(4, 0).adjoint();
  const Matrix twirled = moment_vector_to_operator(haar_twirl(shape).apply(operator_to_moment_vector(x, shape)), shape);
  // Closed form (1 + SWAP) / (d (d + 1)).
  EXPECT_LT(max_abs(twirled - (Matrix::Identity(4, 4) + swap_operator(2)) / 6.0), 1e-13);

  Rng rng = make_rng(43);
  const int n = 1000000;
  Matrix sum = Matrix::Zero(4, 4), sum_sq = Matrix::Zero(4, 4);
  for (int i = 0; i < n; ++i) {
    const Matrix u = haar_unitary(d, rng).matrix();
    const Matrix uu = kron(u, u);
    const Matrix y = uu * x * uu.adjoint();
    sum += y;
    sum_sq += y.cwiseAbs2();
  }
  const Matrix mean = sum / n;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double var = std::max(sum_sq(i, j).real() / n - std::norm(mean(i, j)), 1e-30);
      EXPECT_LE(std::abs(mean(i, j) - twirled(i, j)), 5.0 * std::sqrt(var / n) + 1e-12);
    }
}

TEST(MomentOperator, CliffordsFormTwoDesign) {
  const SystemShape shape = SystemShape::flat(2);
  const MomentOperator g = moment_operator(UnitaryEnsemble::uniform(single_qubit_cliffords()), shape);
  EXPECT_LT(max_abs(g.to_dense() - haar_twirl(shape).to_dense()), 1e-10);
  EXPECT_LE(design_epsilon(g, haar_twirl(shape)).epsilon, 1e-9);
}

TEST(MomentOperator, PointMassAtIdentity) {
  const SystemShape shape = SystemShape::flat(2);
  const MomentOperator g = moment_operator(UnitaryEnsemble::point_mass(Unitary::identity(2)), shape);
  EXPECT_LT(max_abs(g.to_dense() - Matrix::Identity(16, 16)), 1e-14);
}

TEST(MomentOperator, HaarMonteCarlo) {
  const SystemShape shape = SystemShape::flat(2);
  const MomentOperator g = moment_operator(UnitaryEnsemble::haar(2), shape, MonteCarlo{100000, 47, 1});
  const DesignReport rep = design_epsilon(g, haar_twirl(shape));
  EXPECT_LE(rep.epsilon, 0.05);
  EXPECT_EQ(rep.method, DesignReport::Method::kMonteCarlo);
}

TEST(DesignEpsilon, SelfDistanceIsZero) {
  const MomentOperator h = haar_twirl(SystemShape::flat(3));
  EXPECT_NEAR(design_epsilon(h, h).epsilon, 0.0, 1e-14);
}

TEST(DesignEpsilon, IdentityCrossMethod) {
  const SystemShape shape = SystemShape::flat(2);
  const MomentOperator id = moment_operator(UnitaryEnsemble::point_mass(Unitary::identity(2)), shape);
  const MomentOperator h = haar_twirl(shape);
  const DesignReport dense = design_epsilon(id, h);
  EXPECT_EQ(dense.method, DesignReport::Method::kExactDense);
  // Matrix-free copies force the power-iteration path.
  const MomentOperator id_free(shape, [](const Vector& v) { return v; }, [](const Vector& v) { return v; }, {}, true, {});
  const MomentOperator h_free(shape, [&](const Vector& v) { return h.apply(v); }, [&](const Vector& v) { return h.apply(v); },
                              {}, true, {});
  // Below the dense threshold design_epsilon still uses the SVD, so drive
  // the power iteration directly on (G - H)^dagger (G - H).
  auto start = [](Rng& rng) {
    std::normal_distribution<double> normal;
    Vector v(16);
    for (auto& x : v) x = Complex(normal(rng), normal(rng));
    return v;
  };
  const auto pi = power_iteration<Complex>(
      [&](const Vector& v) {
        const Vector d = id_free.apply(v) - h_free.apply(v);
        return Vector(id_free.apply_adjoint(d) - h_free.apply_adjoint(d));
      },
      start, {});
  EXPECT_NEAR(std::sqrt(pi.value), dense.epsilon, 1e-6);
  EXPECT_NEAR(dense.epsilon, 1.0, 1e-12);
}

TEST(Lambda2, Examples) {
  const SystemShape shape(2, 2);
  EXPECT_NEAR(lambda2(haar_twirl(shape)).value, 0.0, 1e-8);
  EXPECT_NEAR(lambda2(identity_twirl(shape)).value, 1.0, 1e-8);
  const MomentOperator layer = layer_twirl(shape, Parity::kEven, Boundary::kOpen, PairTwirl<Complex>::haar());
  EXPECT_LT(max_abs(layer.to_dense() - haar_twirl(shape).to_dense()), 1e-12);
  EXPECT_NEAR(lambda2(layer).value, 0.0, 1e-8);
}

TEST(Lambda2, BrickworkStepReferenceValues) {
  // Reference values from an independent dense eigen-decomposition of the
  // step operator (M_e + M_o) / 2 on 2 and 4 qubits.
  const auto pair = PairTwirl<Complex>::haar();
  EXPECT_NEAR(lambda2(circuit_step_twirl(SystemShape(2, 2), Boundary::kOpen, pair)).value, 0.5, 1e-6);
  EXPECT_NEAR(lambda2(circuit_step_twirl(SystemShape(4, 2), Boundary::kOpen, pair)).value, 0.78284, 1e-4);
}

TEST(MixingInequality, EqualityAtSOne) {
  const SystemShape shape(4, 2);
  const auto pair = PairTwirl<Complex>::haar();
  const MomentOperator m_e = layer_twirl(shape, Parity::kEven, Boundary::kOpen, pair);
  const MomentOperator m_o = layer_twirl(shape, Parity::kOdd, Boundary::kOpen, pair);
  const MixingReport r1 = verify_mixing_inequality(m_e, m_o, 1);
  EXPECT_TRUE(r1.holds);
  EXPECT_NEAR(r1.lhs, r1.rhs, 1e-6);
  EXPECT_TRUE(verify_mixing_inequality(m_e, m_o, 2).holds);
  EXPECT_THROW(verify_mixing_inequality(m_e, m_o, 3), std::invalid_argument);
}

}  // namespace
}  // namespace randtomo
