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

#include "randtomo/frames.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>

#include "parallel.hpp"
#include "randtomo/power_iteration.hpp"

namespace randtomo {

namespace {

// Dense storage limit for superoperators (d^2 x d^2 coordinate matrices).
constexpr int kDenseSuperOperatorDim = 64;
// Monte-Carlo frames keep one dense partial sum per jackknife group up to
// this dimension; above it the sampled coordinates are kept instead.
constexpr int kDenseMonteCarloDim = 32;
// Above this many coordinates, norms use power iteration instead of a full
// eigen/singular value decomposition.
constexpr Eigen::Index kDirectNormLimit = 1024;

std::size_t categorical(const std::vector<double>& cumulative, Rng& rng) {
  const double u = uniform01(rng) * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1);
}

std::vector<double> checked_cumulative(const std::vector<double>& weights, std::size_t count) {
  if (weights.size() != count || count == 0) {
    throw std::invalid_argument("finite measure: need one weight per atom and at least one atom");
  }
  double sum = 0.0;
  std::vector<double> cumulative;
  cumulative.reserve(count);
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("finite measure: negative weight");
    sum += w;
    cumulative.push_back(sum);
  }
  if (std::abs(sum - 1.0) > 1e-10) {
    throw std::invalid_argument("finite measure: weights sum to " + std::to_string(sum));
  }
  return cumulative;
}

bool is_symmetric(const RealMatrix& a) {
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff());
}

double dense_norm(const RealMatrix& a) {
  if (a.size() == 0) return 0.0;
  const bool sym = is_symmetric(a);
  if (a.rows() <= kDirectNormLimit) {
    if (sym) {
      Eigen::SelfAdjointEigenSolver<RealMatrix> es(a, Eigen::EigenvaluesOnly);
      return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    Eigen::BDCSVD<RealMatrix> svd(a);
    return svd.singularValues()(0);
  }
  auto start = [&](Rng& rng) {
    std::normal_distribution<double> normal;
    RealVector v(a.rows());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
    return v;
  };
  if (sym) {
    return power_iteration<double>([&](const RealVector& x) { return RealVector(a * x); }, start,
                                   {})
        .value;
  }
  const double sq = power_iteration<double>(
                        [&](const RealVector& x) { return RealVector(a.transpose() * (a * x)); },
                        start, {})
                        .value;
  return std::sqrt(sq);
}

Matrix hermitian_part(const Matrix& x) { return 0.5 * (x + x.adjoint()); }
Matrix antihermitian_part_over_i(const Matrix& x) {
  return (x - x.adjoint()) * Complex(0.0, -0.5);
}

}  // namespace

// ---------------------------------------------------------------------------
// Unitary ensembles

Matrix haar_matrix(int d, Rng& rng, bool special) {
  if (d < 1) throw std::invalid_argument("haar_matrix: dimension must be positive");
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  Matrix z(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) z(i, j) = Complex(normal(rng), normal(rng));
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  for (Eigen::Index j = 0; j < d; ++j) {
    const Complex r = qr.matrixQR()(j, j);
    const double ar = std::abs(r);
    if (ar > 0.0) q.col(j) *= r / ar;
  }
  if (special) {
    const Complex det = q.determinant();
    q *= std::exp(Complex(0.0, -std::arg(det) / d));
  }
  return q;
}

Unitary haar_unitary(int d, Rng& rng) { return Unitary(haar_matrix(d, rng)); }

std::vector<NumberSector> eigenspaces(const Matrix& n_hat, double tol) {
  if (n_hat.rows() != n_hat.cols()) throw std::invalid_argument("eigenspaces: matrix not square");
  if (hermiticity_defect(n_hat) > 1e-10 * std::max(1.0, n_hat.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("eigenspaces: operator is not Hermitian");
  }
  const Eigen::Index d = n_hat.rows();
  RealVector values;
  Matrix vectors;
  Matrix off = n_hat;
  off.diagonal().setZero();
  if (d == 0 || off.cwiseAbs().maxCoeff() <= tol) {
    // Diagonal operator: keep computational basis vectors, ordered by value
    // then by index.
    std::vector<Eigen::Index> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return n_hat(a, a).real() < n_hat(b, b).real();
    });
    values.resize(d);
    vectors = Matrix::Zero(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
      values(j) = n_hat(order[j], order[j]).real();
      vectors(order[j], j) = 1.0;
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(n_hat));
    values = es.eigenvalues();
    vectors = es.eigenvectors();
  }
  std::vector<NumberSector> out;
  Eigen::Index start = 0;
  while (start < d) {
    Eigen::Index end = start + 1;
    while (end < d && values(end) - values(end - 1) <= tol) ++end;
    NumberSector s;
    s.eigenvalue = values.segment(start, end - start).mean();
    s.isometry = vectors.middleCols(start, end - start);
    out.push_back(std::move(s));
    start = end;
  }
  return out;
}

NumberSector number_sector(const Matrix& n_hat, double n, double tol) {
  for (auto& s : eigenspaces(n_hat, tol)) {
    if (std::abs(s.eigenvalue - n) <= std::max(tol, 1e-9)) return s;
  }
  throw std::invalid_argument("number_sector: " + std::to_string(n) +
                              " is not an eigenvalue of the operator");
}

UnitaryEnsemble::UnitaryEnsemble(Kind kind, int dim, Sampler sampler, bool inversion_closed)
    : kind_(kind), dim_(dim), sampler_(std::move(sampler)), inversion_closed_(inversion_closed) {
  if (dim < 1) throw std::invalid_argument("UnitaryEnsemble: dimension must be positive");
  if (!sampler_) throw std::invalid_argument("UnitaryEnsemble: empty sampler");
}

UnitaryEnsemble UnitaryEnsemble::haar(int d) {
  return UnitaryEnsemble(
      Kind::kHaar, d,
      [d](std::uint64_t seed) {
        Rng rng = make_rng(seed);
        return haar_unitary(d, rng);
      },
      /*inversion_closed=*/true);
}

UnitaryEnsemble UnitaryEnsemble::finite_set(std::vector<Unitary> atoms, std::vector<double> weights) {
  const auto cumulative = checked_cumulative(weights, atoms.size());
  const int d = atoms.front().dim();
  for (const auto& u : atoms) {
    if (u.dim() != d) throw std::invalid_argument("UnitaryEnsemble::finite_set: dimension mismatch");
  }
  auto shared = std::make_shared<std::vector<Unitary>>(atoms);
  UnitaryEnsemble ens(Kind::kFiniteSet, d, [shared, cumulative](std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return (*shared)[categorical(cumulative, rng)];
  });
  // Closed under inversion when every atom's adjoint carries the same weight.
  bool closed = true;
  for (std::size_t i = 0; i < atoms.size() && closed; ++i) {
    const Matrix adj = atoms[i].matrix().adjoint();
    double w = 0.0;
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      if ((atoms[j].matrix() - adj).cwiseAbs().maxCoeff() < 1e-12) w += weights[j];
    }
    double wi = 0.0;
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      if ((atoms[j].matrix() - atoms[i].matrix()).cwiseAbs().maxCoeff() < 1e-12) wi += weights[j];
    }
    closed = std::abs(w - wi) < 1e-12;
  }
  ens.inversion_closed_ = closed;
  ens.atoms_ = std::move(atoms);
  ens.weights_ = std::move(weights);
  return ens;
}

UnitaryEnsemble UnitaryEnsemble::uniform(std::vector<Unitary> atoms) {
  std::vector<double> w(atoms.size(), 1.0 / static_cast<double>(atoms.size()));
  return finite_set(std::move(atoms), std::move(w));
}

UnitaryEnsemble UnitaryEnsemble::point_mass(const Unitary& u) { return finite_set({u}, {1.0}); }

UnitaryEnsemble UnitaryEnsemble::number_conserving_haar(const Matrix& n_hat) {
  auto sectors = std::make_shared<std::vector<NumberSector>>(eigenspaces(n_hat));
  const int d = static_cast<int>(n_hat.rows());
  return UnitaryEnsemble(
      Kind::kNumberConservingHaar, d,
      [sectors, d](std::uint64_t seed) {
        Rng rng = make_rng(seed);
        Matrix u = Matrix::Zero(d, d);
        for (const auto& s : *sectors) {
          const Matrix h = haar_matrix(s.dim(), rng, /*special=*/false);
          u += s.isometry * h * s.isometry.adjoint();
        }
        const Complex det = u.determinant();
        u *= std::exp(Complex(0.0, -std::arg(det) / d));
        return Unitary(u);
      },
      /*inversion_closed=*/true);
}

UnitaryEnsemble UnitaryEnsemble::symmetrized() const {
  if (inversion_closed_) return *this;
  if (kind_ == Kind::kFiniteSet) {
    std::vector<Unitary> atoms = atoms_;
    std::vector<double> weights;
    for (double w : weights_) weights.push_back(0.5 * w);
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      atoms.push_back(atoms_[i].adjoint());
      weights.push_back(0.5 * weights_[i]);
    }
    return finite_set(std::move(atoms), std::move(weights));
  }
  Sampler base = sampler_;
  return UnitaryEnsemble(
      kind_, dim_,
      [base](std::uint64_t seed) {
        const Unitary u = base(derive_seed(seed, {0}));
        return (derive_seed(seed, {1}) & 1ULL) ? u.adjoint() : u;
      },
      /*inversion_closed=*/true);
}

UnitaryEnsemble restrict_ensemble(const UnitaryEnsemble& ens, const NumberSector& sector) {
  if (sector.isometry.rows() != ens.dim()) {
    throw std::invalid_argument("restrict_ensemble: sector does not match the ensemble dimension");
  }
  auto v = std::make_shared<Matrix>(sector.isometry);
  Tolerances tol;
  tol.unitary = 1e-8;
  return UnitaryEnsemble(
      UnitaryEnsemble::Kind::kGeneric, sector.dim(),
      [ens, v, tol](std::uint64_t seed) {
        const Unitary u = ens.sample(seed);
        return Unitary(Matrix(v->adjoint() * u.matrix() * (*v)), tol);
      },
      ens.inversion_closed());
}

std::vector<Observable> pauli_basis(int qubits) {
  if (qubits < 1) throw std::invalid_argument("pauli_basis: need at least one qubit");
  const SystemShape shape(qubits, 2);
  Matrix p[4];
  p[0] = Matrix::Identity(2, 2);
  p[1] = Matrix::Zero(2, 2);
  p[1](0, 1) = p[1](1, 0) = 1.0;
  p[2] = Matrix::Zero(2, 2);
  p[2](0, 1) = Complex(0, -1);
  p[2](1, 0) = Complex(0, 1);
  p[3] = Matrix::Zero(2, 2);
  p[3](0, 0) = 1.0;
  p[3](1, 1) = -1.0;
  std::vector<Observable> out;
  const int count = 1 << (2 * qubits);
  const double norm = 1.0 / std::sqrt(static_cast<double>(shape.dim()));
  for (int idx = 0; idx < count; ++idx) {
    Matrix m = Matrix::Identity(1, 1);
    for (int q = qubits - 1; q >= 0; --q) m = kron(m, p[(idx >> (2 * q)) & 3]);
    out.emplace_back(shape, m * norm);
  }
  return out;
}

std::vector<Unitary> single_qubit_cliffords() {
  const double r = 1.0 / std::sqrt(2.0);
  Matrix h(2, 2);
  h << r, r, r, -r;
  Matrix s = Matrix::Zero(2, 2);
  s(0, 0) = 1.0;
  s(1, 1) = Complex(0, 1);
  auto canonical = [](Matrix m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const Complex z = m(i);
      if (std::abs(z) > 1e-6) {
        m /= z / std::abs(z);
        break;
      }
    }
    return m;
  };
  std::vector<Matrix> group{Matrix::Identity(2, 2)};
  for (std::size_t i = 0; i < group.size(); ++i) {
    for (const Matrix& g : {h, s}) {
      const Matrix c = canonical(g * group[i]);
      const bool seen = std::any_of(group.begin(), group.end(), [&](const Matrix& e) {
        return (e - c).cwiseAbs().maxCoeff() < 1e-9;
      });
      if (!seen) group.push_back(c);
    }
  }
  std::vector<Unitary> out;
  for (const Matrix& g : group) {
    const Complex det = g.determinant();
    out.emplace_back(Matrix(g * std::exp(Complex(0.0, -0.5 * std::arg(det)))));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Observable measures

ObservableMeasure ObservableMeasure::finite_set(std::vector<Observable> atoms,
                                                std::vector<double> weights) {
  const auto cumulative = checked_cumulative(weights, atoms.size());
  const SystemShape shape = atoms.front().shape();
  for (const auto& w : atoms) {
    if (!(w.shape() == shape)) throw std::invalid_argument("ObservableMeasure: shape mismatch");
    if (!w.is_normalized()) throw std::invalid_argument("ObservableMeasure: atom not normalized");
  }
  auto shared = std::make_shared<std::vector<Observable>>(atoms);
  ObservableMeasure mu(Kind::kFiniteSet, shape, [shared, cumulative](std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return (*shared)[categorical(cumulative, rng)];
  });
  mu.atoms_ = std::move(atoms);
  mu.weights_ = std::move(weights);
  return mu;
}

ObservableMeasure ObservableMeasure::exact_basis(std::vector<Observable> basis) {
  const std::size_t n = basis.size();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  ObservableMeasure mu = finite_set(std::move(basis), std::move(w));
  mu.kind_ = Kind::kExactBasis;
  return mu;
}

ObservableMeasure ObservableMeasure::point_mass(const Observable& w) { return finite_set({w}, {1.0}); }

ObservableMeasure induced_measure(const UnitaryEnsemble& ens, const Observable& w0) {
  if (ens.dim() != w0.dim()) throw std::invalid_argument("induced_measure: dimension mismatch");
  if (!w0.is_normalized()) throw std::invalid_argument("induced_measure: w0 must be normalized");
  if (std::abs(w0.matrix().trace()) > 1e-10) {
    throw std::invalid_argument("induced_measure: w0 must be traceless");
  }
  const SystemShape shape = w0.shape();
  const int d = shape.dim();
  auto seed_obs = std::make_shared<Matrix>(w0.matrix());
  auto atom = std::make_shared<Observable>(
      shape, Matrix(Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d))));
  const double p_atom = 1.0 / (static_cast<double>(d) * d);
  return ObservableMeasure(
      ObservableMeasure::Kind::kInduced, shape,
      [ens, seed_obs, atom, shape, p_atom](std::uint64_t seed) {
        Rng rng = make_rng(seed);
        if (uniform01(rng) < p_atom) return *atom;
        const Unitary u = ens.sample(derive_seed(seed, {1}));
        return Observable(shape, Matrix(u.matrix().adjoint() * (*seed_obs) * u.matrix()));
      });
}

// ---------------------------------------------------------------------------
// Superoperators

SuperOperator::SuperOperator(RealMatrix coords) : dim_(0) {
  if (coords.rows() != coords.cols()) throw std::invalid_argument("SuperOperator: not square");
  const auto n = coords.rows();
  dim_ = static_cast<int>(std::llround(std::sqrt(static_cast<double>(n))));
  if (static_cast<Eigen::Index>(dim_) * dim_ != n) {
    throw std::invalid_argument("SuperOperator: coordinate dimension is not a square");
  }
  self_adjoint_ = is_symmetric(coords);
  coords_ = std::move(coords);
}

SuperOperator::SuperOperator(int dim, Apply apply, bool self_adjoint)
    : dim_(dim), apply_(std::move(apply)), self_adjoint_(self_adjoint) {
  if (dim < 1) throw std::invalid_argument("SuperOperator: dimension must be positive");
  if (!apply_) throw std::invalid_argument("SuperOperator: empty apply");
}

SuperOperator SuperOperator::identity(int dim) {
  const Eigen::Index n = static_cast<Eigen::Index>(dim) * dim;
  if (dim <= kDenseSuperOperatorDim) return SuperOperator(RealMatrix(RealMatrix::Identity(n, n)));
  return SuperOperator(dim, [](const Matrix& x) { return x; }, true);
}

SuperOperator SuperOperator::zero(int dim) {
  const Eigen::Index n = static_cast<Eigen::Index>(dim) * dim;
  if (dim <= kDenseSuperOperatorDim) return SuperOperator(RealMatrix(RealMatrix::Zero(n, n)));
  return SuperOperator(dim, [](const Matrix& x) { return Matrix(Matrix::Zero(x.rows(), x.cols())); },
                       true);
}

const RealMatrix& SuperOperator::coords() const {
  if (!coords_) throw std::logic_error("SuperOperator: matrix-free operator has no dense coordinates");
  return *coords_;
}

RealVector SuperOperator::apply_coordinates(const RealVector& c) const {
  if (c.size() != static_cast<Eigen::Index>(dim_) * dim_) {
    throw std::invalid_argument("SuperOperator: coordinate dimension mismatch");
  }
  if (coords_) return *coords_ * c;
  return hermitian_coordinates(apply_(from_hermitian_coordinates(c, dim_)));
}

Matrix SuperOperator::apply(const Matrix& x) const {
  if (x.rows() != dim_ || x.cols() != dim_) {
    throw std::invalid_argument("SuperOperator::apply: dimension mismatch");
  }
  const Matrix h1 = hermitian_part(x);
  const Matrix h2 = antihermitian_part_over_i(x);
  const bool has_imag = h2.cwiseAbs().maxCoeff() > 0.0;
  auto apply_h = [&](const Matrix& h) -> Matrix {
    if (coords_) return from_hermitian_coordinates(*coords_ * hermitian_coordinates(h), dim_);
    return apply_(h);
  };
  Matrix out = apply_h(h1);
  if (has_imag) out += Complex(0.0, 1.0) * apply_h(h2);
  return out;
}

SuperOperator SuperOperator::densified() const {
  if (coords_) return *this;
  const Eigen::Index n = static_cast<Eigen::Index>(dim_) * dim_;
  RealMatrix m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m.col(j) = apply_coordinates(RealVector::Unit(n, j));
  SuperOperator out(std::move(m));
  out.samples_ = samples_;
  out.defect_stderr_ = defect_stderr_;
  return out;
}

SuperOperator operator+(const SuperOperator& a, const SuperOperator& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("SuperOperator sum: dimension mismatch");
  if (a.is_dense() && b.is_dense()) return SuperOperator(RealMatrix(a.coords() + b.coords()));
  return SuperOperator(
      a.dim(), [a, b](const Matrix& x) { return Matrix(a.apply(x) + b.apply(x)); },
      a.self_adjoint() && b.self_adjoint());
}

SuperOperator operator-(const SuperOperator& a, const SuperOperator& b) { return a + (-1.0) * b; }

SuperOperator operator*(double s, const SuperOperator& a) {
  if (a.is_dense()) return SuperOperator(RealMatrix(s * a.coords()));
  return SuperOperator(
      a.dim(), [a, s](const Matrix& x) { return Matrix(s * a.apply(x)); }, a.self_adjoint());
}

SuperOperator compose(const SuperOperator& a, const SuperOperator& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("compose: dimension mismatch");
  if (a.is_dense() && b.is_dense()) return SuperOperator(RealMatrix(a.coords() * b.coords()));
  return SuperOperator(
      a.dim(), [a, b](const Matrix& x) { return a.apply(b.apply(x)); }, false);
}

SuperOperator projector_onto(const Observable& w) {
  if (!w.is_normalized()) throw std::invalid_argument("projector_onto: w must be normalized");
  const int d = w.dim();
  if (d <= kDenseSuperOperatorDim) {
    const RealVector c = hermitian_coordinates(w.matrix());
    return SuperOperator(RealMatrix(c * c.transpose()));
  }
  auto m = std::make_shared<Matrix>(w.matrix());
  return SuperOperator(
      d, [m](const Matrix& x) { return Matrix(hs_inner(*m, x) * (*m)); }, true);
}

SuperOperator sampling_operator(const ObservableMeasure& mu) {
  if (mu.kind() == ObservableMeasure::Kind::kInduced) {
    throw std::invalid_argument(
        "sampling_operator: exact mode needs a finite-set or exact-basis measure");
  }
  const int d = mu.dim();
  const double scale = static_cast<double>(d) * d;
  if (d <= kDenseSuperOperatorDim) {
    const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
    RealMatrix acc = RealMatrix::Zero(n, n);
    for (std::size_t i = 0; i < mu.atoms().size(); ++i) {
      const RealVector c = hermitian_coordinates(mu.atoms()[i].matrix());
      acc.noalias() += (scale * mu.weights()[i]) * c * c.transpose();
    }
    return SuperOperator(std::move(acc));
  }
  auto atoms = std::make_shared<std::vector<Observable>>(mu.atoms());
  auto weights = std::make_shared<std::vector<double>>(mu.weights());
  return SuperOperator(
      d,
      [atoms, weights, scale](const Matrix& x) {
        Matrix out = Matrix::Zero(x.rows(), x.cols());
        for (std::size_t i = 0; i < atoms->size(); ++i) {
          const Matrix& w = (*atoms)[i].matrix();
          out += (scale * (*weights)[i] * hs_inner(w, x)) * w;
        }
        return out;
      },
      true);
}

SuperOperator monte_carlo_frame(int dim, const std::function<Matrix(std::uint64_t)>& draw,
                                const MonteCarlo& mc) {
  if (mc.samples < 1) throw std::invalid_argument("monte_carlo_frame: need at least one sample");
  const Eigen::Index n = static_cast<Eigen::Index>(dim) * dim;
  const double scale = static_cast<double>(dim) * dim;
  const std::int64_t total = mc.samples;
  const int groups = static_cast<int>(std::min<std::int64_t>(kJackknifeGroups, total));
  auto coords_of = [&](std::int64_t i) {
    const Matrix w = draw(derive_seed(mc.seed, {static_cast<std::uint64_t>(i)}));
    if (w.rows() != dim || w.cols() != dim) {
      throw std::invalid_argument("monte_carlo_frame: draw has the wrong dimension");
    }
    return hermitian_coordinates(w);
  };

  if (dim <= kDenseMonteCarloDim) {
    std::vector<RealMatrix> sums(groups);
    detail::for_each_index(groups, mc.workers, [&](int g) {
      const auto [begin, end] = detail::group_range(total, groups, g);
      RealMatrix s = RealMatrix::Zero(n, n);
      constexpr std::int64_t kBatch = 256;
      RealMatrix batch(n, kBatch);
      for (std::int64_t i = begin; i < end; i += kBatch) {
        const std::int64_t b = std::min(kBatch, end - i);
        for (std::int64_t j = 0; j < b; ++j) batch.col(j) = coords_of(i + j);
        s.noalias() += batch.leftCols(b) * batch.leftCols(b).transpose();
      }
      sums[g] = std::move(s);
    });
    RealMatrix total_sum = RealMatrix::Zero(n, n);
    for (const auto& s : sums) total_sum += s;
    SuperOperator w(RealMatrix(total_sum * (scale / static_cast<double>(total))));
    double stderr_ = std::numeric_limits<double>::quiet_NaN();
    if (groups >= 2) {
      const RealMatrix id = RealMatrix::Identity(n, n);
      std::vector<double> loo(groups);
      for (int g = 0; g < groups; ++g) {
        const auto [begin, end] = detail::group_range(total, groups, g);
        const double m = static_cast<double>(total - (end - begin));
        loo[g] = dense_norm((total_sum - sums[g]) * (scale / m) - id);
      }
      const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / groups;
      double ss = 0.0;
      for (double v : loo) ss += (v - mean) * (v - mean);
      stderr_ = std::sqrt((groups - 1.0) / groups * ss);
    }
    w.set_monte_carlo(total, stderr_);
    return w;
  }

  // Large dimensions: keep the sampled coordinates and apply matrix-free.
  auto samples = std::make_shared<RealMatrix>(n, total);
  detail::for_each_index(groups, mc.workers, [&](int g) {
    const auto [begin, end] = detail::group_range(total, groups, g);
    for (std::int64_t i = begin; i < end; ++i) samples->col(i) = coords_of(i);
  });
  auto make = [dim, scale](std::shared_ptr<RealMatrix> c, std::int64_t begin_skip,
                           std::int64_t end_skip) {
    const double m = static_cast<double>(c->cols() - (end_skip - begin_skip));
    return SuperOperator(
        dim,
        [c, begin_skip, end_skip, m, scale, dim](const Matrix& x) {
          const RealVector v = hermitian_coordinates(x);
          RealVector proj = c->transpose() * v;
          proj.segment(begin_skip, end_skip - begin_skip).setZero();
          return from_hermitian_coordinates(RealVector((*c) * proj * (scale / m)), dim);
        },
        true);
  };
  SuperOperator w = make(samples, 0, 0);
  double stderr_ = std::numeric_limits<double>::quiet_NaN();
  if (groups >= 2) {
    std::vector<double> loo(groups);
    for (int g = 0; g < groups; ++g) {
      const auto [begin, end] = detail::group_range(total, groups, g);
      loo[g] = tight_frame_defect(make(samples, begin, end));
    }
    const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / groups;
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    stderr_ = std::sqrt((groups - 1.0) / groups * ss);
  }
  w.set_monte_carlo(total, stderr_);
  return w;
}

SuperOperator sampling_operator(const ObservableMeasure& mu, const MonteCarlo& mc) {
  return monte_carlo_frame(
      mu.dim(), [&mu](std::uint64_t seed) { return mu.sample(seed).matrix(); }, mc);
}

double superoperator_norm(const SuperOperator& a) {
  if (a.is_dense()) return dense_norm(a.coords());
  const Eigen::Index n = static_cast<Eigen::Index>(a.dim()) * a.dim();
  if (!a.self_adjoint()) {
    if (n > 4096) {
      throw std::invalid_argument(
          "superoperator_norm: matrix-free operator without adjoint is too large");
    }
    return dense_norm(a.densified().coords());
  }
  auto start = [n](Rng& rng) {
    std::normal_distribution<double> normal;
    RealVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
  };
  return power_iteration<double>([&](const RealVector& x) { return a.apply_coordinates(x); },
                                 start, {})
      .value;
}

double tight_frame_defect(const SuperOperator& w) {
  return superoperator_norm(w - SuperOperator::identity(w.dim()));
}

SuperOperator restricted_projector(const Observable& n_hat, double n) {
  const NumberSector sector = number_sector(n_hat.matrix(), n);
  auto pi = std::make_shared<Matrix>(sector.isometry * sector.isometry.adjoint());
  const int d = n_hat.dim();
  SuperOperator p(
      d, [pi](const Matrix& x) { return Matrix((*pi) * x * (*pi)); }, true);
  if (d <= kDenseSuperOperatorDim) return p.densified();
  return p;
}

}  // namespace randtomo
