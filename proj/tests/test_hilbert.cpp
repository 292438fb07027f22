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

#include <array>

#include "randtomo/frames.hpp"
#include "randtomo/hilbert.hpp"
#include "test_util.hpp"

namespace randtomo {
namespace {

using testing::basis_state;
using testing::max_abs;
using testing::pauli_x;
using testing::pauli_z;
using testing::qubit_observable;

TEST(HsInner, NormalizedPaulis) {
  const Observable x = qubit_observable(pauli_x());
  const Observable z = qubit_observable(pauli_z());
  EXPECT_NEAR(hs_inner(x, x), 1.0, 1e-14);
  EXPECT_NEAR(hs_inner(x, z), 0.0, 1e-14);
}

TEST(HsInner, IdentityAgainstState) {
  Rng rng = make_rng(3);
  const DensityMatrix rho = random_density_matrix(SystemShape(2, 2), 2, rng);
  const Matrix id = Matrix::Identity(4, 4) / 2.0;
  EXPECT_NEAR(hs_inner(id, rho.matrix()).real(), 0.5, 1e-13);
}

TEST(SchattenNorm, Examples) {
  EXPECT_NEAR(schatten_norm(Matrix::Identity(4, 4), Schatten::kTwo), 2.0, 1e-14);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = -4.0;
  EXPECT_NEAR(schatten_norm(d, Schatten::kOne), 7.0, 1e-13);
  EXPECT_NEAR(schatten_norm(d, Schatten::kInf), 4.0, 1e-13);
}

TEST(SchattenNorm, UnitarilyInvariant) {
  Rng rng = make_rng(5);
  const Matrix a = Matrix::Random(5, 5);
  const Matrix u = haar_unitary(5, rng).matrix();
  for (auto p : {Schatten::kOne, Schatten::kTwo, Schatten::kInf}) {
    EXPECT_NEAR(schatten_norm(u * a * u.adjoint(), p), schatten_norm(a, p), 1e-12);
  }
}

TEST(PartialTrace, ProductAndBell) {
  const SystemShape shape(2, 2);
  const std::array<int, 1> keep{1};
  const Matrix p00 = basis_state(4, 0) * basis_state(4, 0).adjoint();
  const Matrix r = partial_trace(p00, shape, keep);
  EXPECT_LT(max_abs(r - basis_state(2, 0) * basis_state(2, 0).adjoint()), 1e-14);

  Vector bell = (basis_state(4, 0) + basis_state(4, 3)) / std::sqrt(2.0);
  const Matrix rb = partial_trace(Matrix(bell * bell.adjoint()), shape, keep);
  EXPECT_LT(max_abs(rb - Matrix::Identity(2, 2) / 2.0), 1e-14);
}

TEST(PartialTrace, MatchesElementwiseContraction) {
  Rng rng = make_rng(7);
  const Vector psi = random_state(8, rng);
  const Matrix rho = psi * psi.adjoint();
  const std::array<int, 2> keep{1, 2};
  const Matrix r = partial_trace(rho, SystemShape(3, 2), keep);
  // Site 1 is the most significant bit; trace out the last bit.
  Matrix oracle = Matrix::Zero(4, 4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 2; ++c) oracle(a, b) += rho(2 * a + c, 2 * b + c);
  EXPECT_LT(max_abs(r - oracle), 1e-14);

  const std::array<int, 2> outer{1, 3};
  const Matrix r13 = partial_trace(rho, SystemShape(3, 2), outer);
  Matrix oracle13 = Matrix::Zero(4, 4);
  for (int a1 = 0; a1 < 2; ++a1)
    for (int a3 = 0; a3 < 2; ++a3)
      for (int b1 = 0; b1 < 2; ++b1)
        for (int b3 = 0; b3 < 2; ++b3)
          for (int c = 0; c < 2; ++c) oracle13(2 * a1 + a3, 2 * b1 + b3) += rho(4 * a1 + 2 * c + a3, 4 * b1 + 2 * c + b3);
  EXPECT_LT(max_abs(r13 - oracle13), 1e-14);
}

TEST(EmbedLocal, SingleQubitZ) {
  const Observable v = qubit_observable(pauli_z());
  const Observable e = embed_local(v, 1, SystemShape(2, 2));
  EXPECT_LT(max_abs(e.matrix() - kron(pauli_z(), Matrix::Identity(2, 2)) / 2.0), 1e-14);
  EXPECT_NEAR(e.matrix().norm(), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.matrix().trace()), 0.0, 1e-14);
}

TEST(EmbedLocal, OperatorNormScaling) {
  Rng rng = make_rng(11);
  Matrix h = random_hermitian(4, rng);
  h -= h.trace() / 4.0 * Matrix::Identity(4, 4);
  h /= h.norm();
  const Observable v(SystemShape(2, 2), h);
  const double v_inf = schatten_norm(v.matrix(), Schatten::kInf);
  for (int k = 2; k <= 6; ++k) {
    const SystemShape shape(k, 2);
    const Observable e = embed_local(v, 1, shape);
    const double e_inf = schatten_norm(e.matrix(), Schatten::kInf);
    EXPECT_NEAR(e_inf, v_inf / std::sqrt(std::pow(2.0, k - 2)), 1e-12);
    // Incoherence with lambda = d_l^m ||v||_inf^2, independent of k.
    EXPECT_LE(e_inf * e_inf, 4.0 * v_inf * v_inf / shape.dim() + 1e-12);
  }
}

TEST(HermitianCoordinates, IsometryAndRoundTrip) {
  Rng rng = make_rng(13);
  const Matrix a = random_hermitian(5, rng);
  const Matrix b = random_hermitian(5, rng);
  const RealVector ca = hermitian_coordinates(a);
  EXPECT_EQ(ca.size(), 25);
  EXPECT_NEAR(ca.dot(hermitian_coordinates(b)), hs_inner(a, b).real(), 1e-12);
  EXPECT_LT(max_abs(from_hermitian_coordinates(ca, 5) - a), 1e-13);
}

TEST(Observable, RejectsNonHermitian) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(Observable(SystemShape::flat(2), m), std::invalid_argument);
}

TEST(Unitary, RejectsNonUnitary) {
  EXPECT_THROW(Unitary(Matrix::Identity(2, 2) * 2.0), std::invalid_argument);
}

}  // namespace
}  // namespace randtomo
