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

#include "randtomo/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "site_index.hpp"

namespace randtomo {

namespace {

double scale_of(const Matrix& a) {
  return std::max(1.0, a.cwiseAbs().maxCoeff());
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

void require_square(const Matrix& m, int dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim) {
    throw std::invalid_argument(std::string(what) + ": expected a " +
                                std::to_string(dim) + "x" + std::to_string(dim) +
                                " matrix, got " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
  }
}

}  // namespace

SystemShape::SystemShape(int sites, int local_dim, std::int64_t max_dim)
    : sites_(sites), local_dim_(local_dim), dim_(1) {
  if (sites < 1) throw std::invalid_argument("SystemShape: sites must be positive");
  if (local_dim < 1) throw std::invalid_argument("SystemShape: local dimension must be positive");
  std::int64_t d = 1;
  for (int s = 0; s < sites; ++s) {
    d *= local_dim;
    if (d > max_dim) {
      throw std::overflow_error("SystemShape: dimension " + std::to_string(local_dim) + "^" +
                                std::to_string(sites) + " exceeds the maximum " +
                                std::to_string(max_dim));
    }
  }
  dim_ = static_cast<int>(d);
}

double hermiticity_defect(const Matrix& a) {
  if (a.rows() != a.cols()) return INFINITY;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

DensityMatrix::DensityMatrix(SystemShape shape, const Matrix& matrix, const Tolerances& tol)
    : shape_(shape) {
  require_square(matrix, shape.dim(), "DensityMatrix");
  if (hermiticity_defect(matrix) > tol.hermitian * scale_of(matrix)) {
    throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
  }
  matrix_ = symmetrized(matrix);
  const double tr = matrix_.trace().real();
  if (std::abs(tr - 1.0) > tol.trace) {
    throw std::invalid_argument("DensityMatrix: trace " + std::to_string(tr) + " != 1");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(matrix_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol.psd) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                std::to_string(es.eigenvalues().minCoeff()));
  }
}

DensityMatrix DensityMatrix::pure(SystemShape shape, const Vector& psi) {
  if (psi.size() != shape.dim()) throw std::invalid_argument("DensityMatrix::pure: dimension mismatch");
  const Vector n = psi / psi.norm();
  return DensityMatrix(shape, n * n.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(SystemShape shape) {
  return DensityMatrix(shape, Matrix::Identity(shape.dim(), shape.dim()) / shape.dim());
}

Observable::Observable(SystemShape shape, const Matrix& matrix, const Tolerances& tol)
    : shape_(shape) {
  require_square(matrix, shape.dim(), "Observable");
  if (hermiticity_defect(matrix) > tol.hermitian * scale_of(matrix)) {
    throw std::invalid_argument("Observable: matrix is not Hermitian");
  }
  matrix_ = symmetrized(matrix);
  normalized_ = std::abs(matrix_.norm() - 1.0) <= tol.norm;
}

Observable Observable::normalized() const {
  const double n = matrix_.norm();
  if (n == 0.0) throw std::domain_error("Observable::normalized: zero operator");
  return Observable(shape_, matrix_ / n);
}

Unitary::Unitary(const Matrix& matrix, const Tolerances& tol) : matrix_(matrix) {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("Unitary: matrix is not square");
  const Eigen::Index d = matrix.rows();
  const double defect = (matrix.adjoint() * matrix - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (defect > tol.unitary) {
    throw std::invalid_argument("Unitary: ||U^dagger U - 1||_max = " + std::to_string(defect));
  }
  if (d <= 512) {
    const double det = std::abs(matrix.determinant());
    if (std::abs(det - 1.0) > tol.unitary * static_cast<double>(d)) {
      throw std::invalid_argument("Unitary: |det U| != 1");
    }
  }
}

Unitary Unitary::adjoint() const { return Unitary(Unchecked{}, matrix_.adjoint()); }

Unitary operator*(const Unitary& a, const Unitary& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("Unitary product: dimension mismatch");
  return Unitary(Unitary::Unchecked{}, a.matrix() * b.matrix());
}

Complex hs_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("hs_inner: dimension mismatch");
  }
  return (a.conjugate().cwiseProduct(b)).sum();
}

double hs_inner(const Observable& a, const Observable& b) {
  return hs_inner(a.matrix(), b.matrix()).real();
}

double expectation(const Observable& w, const DensityMatrix& rho) {
  return hs_inner(w.matrix(), rho.matrix()).real();
}

double schatten_norm(const Matrix& a, Schatten p) {
  if (!a.allFinite()) throw std::domain_error("schatten_norm: non-finite entries");
  if (p == Schatten::kTwo) return a.norm();
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(a);
  const RealVector& s = svd.singularValues();
  return p == Schatten::kOne ? s.sum() : s.maxCoeff();
}

Matrix partial_trace(const Matrix& op, const SystemShape& shape, std::span<const int> keep) {
  require_square(op, shape.dim(), "partial_trace");
  const detail::SiteIndex idx(shape, keep, /*require_sorted=*/true);
  const Eigen::Index dk = static_cast<Eigen::Index>(idx.selected.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index b = 0; b < dk; ++b) {
    for (Eigen::Index a = 0; a < dk; ++a) {
      Complex acc = 0.0;
      for (Eigen::Index r : idx.rest) acc += op(idx.selected[a] + r, idx.selected[b] + r);
      out(a, b) = acc;
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  const SystemShape reduced(static_cast<int>(keep.size()), rho.shape().local_dim());
  Tolerances loose;
  loose.trace = 1e-8;
  return DensityMatrix(reduced, partial_trace(rho.matrix(), rho.shape(), keep), loose);
}

Matrix embed_sites(const Matrix& op, std::span<const int> sites, const SystemShape& shape) {
  const detail::SiteIndex idx(shape, sites, /*require_sorted=*/false);
  const Eigen::Index dl = static_cast<Eigen::Index>(idx.selected.size());
  if (op.rows() != dl || op.cols() != dl) {
    throw std::invalid_argument("embed_sites: operator dimension does not match the site list");
  }
  Matrix out = Matrix::Zero(shape.dim(), shape.dim());
  for (Eigen::Index r : idx.rest) {
    for (Eigen::Index b = 0; b < dl; ++b) {
      for (Eigen::Index a = 0; a < dl; ++a) {
        out(idx.selected[a] + r, idx.selected[b] + r) = op(a, b);
      }
    }
  }
  return out;
}

Observable embed_local(const Observable& v, int position, const SystemShape& shape) {
  const int m = v.shape().sites();
  if (v.shape().local_dim() != shape.local_dim()) {
    throw std::invalid_argument("embed_local: local dimension mismatch");
  }
  if (position < 1 || position + m - 1 > shape.sites()) {
    throw std::out_of_range("embed_local: position " + std::to_string(position) +
                            " out of range for " + std::to_string(m) + " sites on a chain of " +
                            std::to_string(shape.sites()));
  }
  if (!v.is_normalized()) throw std::invalid_argument("embed_local: v must be normalized");
  if (std::abs(v.matrix().trace()) > 1e-10) {
    throw std::invalid_argument("embed_local: v must be traceless");
  }
  std::vector<int> sites(m);
  for (int j = 0; j < m; ++j) sites[j] = position + j;
  const double rest_dim = static_cast<double>(shape.dim()) / v.dim();
  return Observable(shape, embed_sites(v.matrix(), sites, shape) / std::sqrt(rest_dim));
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

RealVector hermitian_coordinates(const Matrix& x) {
  const Eigen::Index d = x.rows();
  RealVector c(d * d);
  const double r2 = std::sqrt(2.0);
  Eigen::Index p = 0;
  for (Eigen::Index i = 0; i < d; ++i) c(p++) = x(i, i).real();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      c(p++) = r2 * x(i, j).real();
      c(p++) = r2 * x(i, j).imag();
    }
  }
  return c;
}

Matrix from_hermitian_coordinates(const RealVector& c, int dim) {
  if (c.size() != static_cast<Eigen::Index>(dim) * dim) {
    throw std::invalid_argument("from_hermitian_coordinates: size mismatch");
  }
  Matrix x(dim, dim);
  const double r2 = std::sqrt(0.5);
  Eigen::Index p = 0;
  for (int i = 0; i < dim; ++i) x(i, i) = c(p++);
  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j) {
      const Complex z(r2 * c(p), r2 * c(p + 1));
      p += 2;
      x(i, j) = z;
      x(j, i) = std::conj(z);
    }
  }
  return x;
}

Matrix random_hermitian(int dim, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix g(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = Complex(normal(rng), normal(rng));
  return 0.5 * (g + g.adjoint());
}

Vector random_state(int dim, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(normal(rng), normal(rng));
  return v / v.norm();
}

DensityMatrix random_density_matrix(SystemShape shape, int rank, Rng& rng) {
  const int d = shape.dim();
  if (rank < 1 || rank > d) throw std::invalid_argument("random_density_matrix: invalid rank");
  std::normal_distribution<double> normal;
  Matrix g(d, rank);
  for (Eigen::Index j = 0; j < rank; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = Complex(normal(rng), normal(rng));
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ() * Matrix::Identity(d, rank);
  RealVector p(rank);
  std::exponential_distribution<double> expo(1.0);
  for (int j = 0; j < rank; ++j) p(j) = expo(rng);
  p /= p.sum();
  return DensityMatrix(shape, q * p.cast<Complex>().asDiagonal() * q.adjoint());
}

}  // namespace randtomo
