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

#include "randtomo/designs.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>

#include "parallel.hpp"

namespace randtomo {

namespace {

constexpr Eigen::Index kMaxMomentSize = Eigen::Index(1) << 28;
constexpr Eigen::Index kDirectSpectralSize = 256;
constexpr Eigen::Index kReplicaSize = 256;

Eigen::Index site_components(const SystemShape& shape) {
  const Eigen::Index d = shape.local_dim();
  return d * d * d * d;
}

// Maps each grouped index to the Kronecker index ((i1 d + i2) d + j1) d + j2.
std::vector<Eigen::Index> grouped_to_kron(const SystemShape& shape) {
  const int k = shape.sites();
  const Eigen::Index dl = shape.local_dim();
  const Eigen::Index d = shape.dim();
  const Eigen::Index q = site_components(shape);
  const Eigen::Index n = moment_size(shape);
  std::vector<Eigen::Index> perm(n);
  for (Eigen::Index g = 0; g < n; ++g) {
    Eigen::Index rest = g;
    Eigen::Index i1 = 0, i2 = 0, j1 = 0, j2 = 0, place = 1;
    for (int s = k; s >= 1; --s) {
      const Eigen::Index comp = rest % q;
      rest /= q;
      const Eigen::Index e = comp % dl, c = (comp / dl) % dl, b = (comp / (dl * dl)) % dl,
                         a = comp / (dl * dl * dl);
      i1 += a * place;
      i2 += b * place;
      j1 += c * place;
      j2 += e * place;
      place *= dl;
    }
    perm[g] = ((i1 * d + i2) * d + j1) * d + j2;
  }
  return perm;
}

// Grouped index of the transpose-conjugate partner: per site (a,b,c,e) ->
// (c,e,a,b).
std::vector<Eigen::Index> adjoint_partner(const SystemShape& shape) {
  const int k = shape.sites();
  const Eigen::Index dl = shape.local_dim();
  const Eigen::Index q = site_components(shape);
  std::vector<Eigen::Index> site(q);
  for (Eigen::Index comp = 0; comp < q; ++comp) {
    const Eigen::Index e = comp % dl, c = (comp / dl) % dl, b = (comp / (dl * dl)) % dl,
                       a = comp / (dl * dl * dl);
    site[comp] = ((c * dl + e) * dl + a) * dl + b;
  }
  std::vector<Eigen::Index> out = {0};
  for (int s = 0; s < k; ++s) {
    std::vector<Eigen::Index> next;
    next.reserve(out.size() * q);
    for (Eigen::Index o : out)
      for (Eigen::Index comp = 0; comp < q; ++comp) next.push_back(o * q + site[comp]);
    out.swap(next);
  }
  return out;
}

RealVector site_product(const SystemShape& shape, bool swap) {
  const Eigen::Index dl = shape.local_dim();
  const Eigen::Index q = site_components(shape);
  RealVector site = RealVector::Zero(q);
  for (Eigen::Index a = 0; a < dl; ++a)
    for (Eigen::Index b = 0; b < dl; ++b) {
      const Eigen::Index comp = swap ? ((a * dl + b) * dl + b) * dl + a : ((a * dl + b) * dl + a) * dl + b;
      site(comp) = 1.0;
    }
  RealVector out = RealVector::Ones(1);
  for (int s = 0; s < shape.sites(); ++s) {
    RealVector next(out.size() * q);
    for (Eigen::Index i = 0; i < out.size(); ++i) next.segment(i * q, q) = out(i) * site;
    out.swap(next);
  }
  return out;
}

Matrix kron4(const Matrix& u) {
  const Matrix uu = kron(u, u);
  return kron(uu, uu.conjugate());
}

Matrix permute_dense(const Matrix& kron_layout, const std::vector<Eigen::Index>& perm) {
  const Eigen::Index n = kron_layout.rows();
  Matrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) out(i, j) = kron_layout(perm[i], perm[j]);
  return out;
}

bool is_flat(const SystemShape& shape) { return shape.sites() == 1; }

void require_same_shape(const MomentOperator& a, const MomentOperator& b, const char* what) {
  if (!(a.shape() == b.shape())) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

template <typename Scalar>
VectorX<Scalar> random_hermitian_moment(const std::vector<Eigen::Index>& partner, Rng& rng) {
  std::normal_distribution<double> normal;
  const Eigen::Index n = static_cast<Eigen::Index>(partner.size());
  VectorX<Scalar> v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if constexpr (std::is_same_v<Scalar, double>) {
      v(i) = normal(rng);
    } else {
      const double re = normal(rng);
      v(i) = Complex(re, normal(rng));
    }
  }
  VectorX<Scalar> h(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if constexpr (std::is_same_v<Scalar, double>) {
      h(i) = 0.5 * (v(i) + v(partner[i]));
    } else {
      h(i) = 0.5 * (v(i) + std::conj(v(partner[i])));
    }
  }
  return h;
}

template <typename Scalar>
std::vector<VectorX<Scalar>> fixed_space(const SystemShape& shape) {
  std::vector<VectorX<Scalar>> basis = {identity_moment_vector(shape).template cast<Scalar>(),
                                        swap_moment_vector(shape).template cast<Scalar>()};
  orthonormalize(basis);
  return basis;
}

double dense_spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

}  // namespace

// ---------------------------------------------------------------------------

Eigen::Index moment_size(const SystemShape& shape) {
  const Eigen::Index d = shape.dim();
  if (d > 0 && static_cast<double>(d) * d * d * d > static_cast<double>(kMaxMomentSize)) {
    throw std::overflow_error("moment operator: d^4 = " + std::to_string(static_cast<double>(d) * d * d * d) +
                              " exceeds the supported size");
  }
  return d * d * d * d;
}

RealVector identity_moment_vector(const SystemShape& shape) { return site_product(shape, false); }
RealVector swap_moment_vector(const SystemShape& shape) { return site_product(shape, true); }

Vector operator_to_moment_vector(const Matrix& x, const SystemShape& shape) {
  const Eigen::Index d2 = static_cast<Eigen::Index>(shape.dim()) * shape.dim();
  if (x.rows() != d2 || x.cols() != d2) {
    throw std::invalid_argument("operator_to_moment_vector: expected a d^2 x d^2 operator");
  }
  const auto perm = grouped_to_kron(shape);
  Vector v(static_cast<Eigen::Index>(perm.size()));
  for (Eigen::Index g = 0; g < v.size(); ++g) v(g) = x(perm[g] / d2, perm[g] % d2);
  return v;
}

Matrix moment_vector_to_operator(const Vector& v, const SystemShape& shape) {
  const Eigen::Index d2 = static_cast<Eigen::Index>(shape.dim()) * shape.dim();
  if (v.size() != moment_size(shape)) {
    throw std::invalid_argument("moment_vector_to_operator: size mismatch");
  }
  const auto perm = grouped_to_kron(shape);
  Matrix x(d2, d2);
  for (Eigen::Index g = 0; g < v.size(); ++g) x(perm[g] / d2, perm[g] % d2) = v(g);
  return x;
}

Vector hermitian_moment_part(const Vector& v, const SystemShape& shape) {
  if (v.size() != moment_size(shape)) throw std::invalid_argument("hermitian_moment_part: size mismatch");
  const auto partner = adjoint_partner(shape);
  Vector h(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) h(i) = 0.5 * (v(i) + std::conj(v(partner[i])));
  return h;
}

// ---------------------------------------------------------------------------
// MomentOperator

MomentOperator::MomentOperator(SystemShape shape, Matrix dense, Info info)
    : shape_(shape), size_(moment_size(shape)), info_(info) {
  if (dense.rows() != size_ || dense.cols() != size_) {
    throw std::invalid_argument("MomentOperator: dense matrix has the wrong size");
  }
  const double scale = std::max(1.0, dense.cwiseAbs().maxCoeff());
  real_dense_ = dense.imag().cwiseAbs().maxCoeff() <= 1e-14 * scale;
  self_adjoint_ = (dense - dense.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
  dense_ = std::move(dense);
}

MomentOperator::MomentOperator(SystemShape shape, Apply apply, Apply apply_adjoint,
                               RealApply real_apply, bool self_adjoint, Info info)
    : shape_(shape),
      size_(moment_size(shape)),
      apply_(std::move(apply)),
      apply_adjoint_(std::move(apply_adjoint)),
      real_apply_(std::move(real_apply)),
      self_adjoint_(self_adjoint),
      info_(info) {
  if (!apply_ && real_apply_) {
    RealApply r = real_apply_;
    apply_ = [r](const Vector& v) {
      const RealVector re = r(v.real());
      const RealVector im = r(v.imag());
      Vector out(re.size());
      out.real() = re;
      out.imag() = im;
      return out;
    };
  }
  if (!apply_) throw std::invalid_argument("MomentOperator: no apply function");
  if (!apply_adjoint_ && self_adjoint_) apply_adjoint_ = apply_;
}

const Matrix& MomentOperator::dense() const {
  if (!dense_) throw std::logic_error("MomentOperator: no dense representation");
  return *dense_;
}

Matrix MomentOperator::to_dense() const {
  if (dense_) return *dense_;
  if (size_ > kDenseMomentSize) {
    throw std::invalid_argument("MomentOperator::to_dense: operator too large (" +
                                std::to_string(size_) + ")");
  }
  Matrix m(size_, size_);
  for (Eigen::Index j = 0; j < size_; ++j) m.col(j) = apply(Vector(Vector::Unit(size_, j)));
  return m;
}

Vector MomentOperator::apply(const Vector& v) const {
  if (v.size() != size_) throw std::invalid_argument("MomentOperator::apply: size mismatch");
  if (dense_) return *dense_ * v;
  return apply_(v);
}

Vector MomentOperator::apply_adjoint(const Vector& v) const {
  if (v.size() != size_) throw std::invalid_argument("MomentOperator::apply_adjoint: size mismatch");
  if (dense_) return dense_->adjoint() * v;
  if (!apply_adjoint_) throw std::logic_error("MomentOperator: adjoint not available");
  return apply_adjoint_(v);
}

RealVector MomentOperator::apply(const RealVector& v) const {
  if (v.size() != size_) throw std::invalid_argument("MomentOperator::apply: size mismatch");
  if (dense_) {
    if (!real_dense_) throw std::logic_error("MomentOperator: operator is not real");
    return dense_->real() * v;
  }
  if (!real_apply_) throw std::logic_error("MomentOperator: operator is not real");
  return real_apply_(v);
}

// ---------------------------------------------------------------------------
// Constructors

MomentOperator haar_twirl(const SystemShape& shape) {
  auto id = std::make_shared<RealVector>(identity_moment_vector(shape));
  auto sw = std::make_shared<RealVector>(swap_moment_vector(shape));
  const double d = shape.dim();
  const double d2 = d * d;
  auto real = [id, sw, d, d2](const RealVector& v) -> RealVector {
    const double si = id->dot(v);
    const double ss = sw->dot(v);
    if (d == 1.0) return *id * si;  // 1 (x) 1 and SWAP coincide
    const double det = d2 * d2 - d2;
    return *id * ((d2 * si - d * ss) / det) + *sw * ((d2 * ss - d * si) / det);
  };
  return MomentOperator(shape, {}, {}, real, true, {true, 0});
}

MomentOperator haar_twirl(int d) { return haar_twirl(SystemShape::flat(d)); }

MomentOperator identity_twirl(const SystemShape& shape) {
  return MomentOperator(shape, {}, {}, [](const RealVector& v) { return v; }, true, {true, 0});
}

MomentOperator moment_operator(const UnitaryEnsemble& ens, const SystemShape& shape) {
  if (ens.dim() != shape.dim()) throw std::invalid_argument("moment_operator: dimension mismatch");
  if (ens.kind() == UnitaryEnsemble::Kind::kHaar) return haar_twirl(shape);
  if (!ens.is_finite()) {
    throw std::invalid_argument("moment_operator: exact mode needs a finite ensemble or exact Haar");
  }
  const Eigen::Index n = moment_size(shape);
  if (n <= kDenseMomentSize) {
    Matrix acc = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < ens.atoms().size(); ++i) acc += ens.weights()[i] * kron4(ens.atoms()[i].matrix());
    if (!is_flat(shape)) acc = permute_dense(acc, grouped_to_kron(shape));
    return MomentOperator(shape, std::move(acc), {true, 0});
  }
  auto atoms = std::make_shared<std::vector<Matrix>>();
  for (const auto& u : ens.atoms()) atoms->push_back(kron(u.matrix(), u.matrix()));
  auto weights = std::make_shared<std::vector<double>>(ens.weights());
  auto make = [atoms, weights, shape](bool adjoint) {
    return [atoms, weights, shape, adjoint](const Vector& v) {
      const Matrix x = moment_vector_to_operator(v, shape);
      Matrix out = Matrix::Zero(x.rows(), x.cols());
      for (std::size_t i = 0; i < atoms->size(); ++i) {
        const Matrix& u2 = (*atoms)[i];
        out += (*weights)[i] * (adjoint ? Matrix(u2.adjoint() * x * u2) : Matrix(u2 * x * u2.adjoint()));
      }
      return operator_to_moment_vector(out, shape);
    };
  };
  return MomentOperator(shape, make(false), make(true), {}, ens.inversion_closed(), {true, 0});
}

MomentOperator moment_operator(const UnitaryEnsemble& ens, const SystemShape& shape,
                               const MonteCarlo& mc) {
  if (ens.dim() != shape.dim()) throw std::invalid_argument("moment_operator: dimension mismatch");
  if (mc.samples < 1) throw std::invalid_argument("moment_operator: need at least one sample");
  const Eigen::Index n = moment_size(shape);
  const std::int64_t total = mc.samples;
  const int groups = static_cast<int>(std::min<std::int64_t>(kJackknifeGroups, total));
  auto draw = [&](std::int64_t i) { return ens.sample(derive_seed(mc.seed, {static_cast<std::uint64_t>(i)})); };

  if (n <= kDenseMomentSize) {
    std::vector<Matrix> sums(groups);
    detail::for_each_index(groups, mc.workers, [&](int g) {
      const auto [begin, end] = detail::group_range(total, groups, g);
      Matrix s = Matrix::Zero(n, n);
      for (std::int64_t i = begin; i < end; ++i) s += kron4(draw(i).matrix());
      sums[g] = std::move(s);
    });
    Matrix sum = Matrix::Zero(n, n);
    for (const auto& s : sums) sum += s;
    const auto perm = is_flat(shape) ? std::vector<Eigen::Index>{} : grouped_to_kron(shape);
    auto finish = [&](const Matrix& m) { return perm.empty() ? m : permute_dense(m, perm); };
    MomentOperator g(shape, finish(sum / static_cast<double>(total)), {false, total});
    if (n <= kReplicaSize && groups >= 2) {
      std::vector<Matrix> replicas;
      for (int k = 0; k < groups; ++k) {
        const auto [begin, end] = detail::group_range(total, groups, k);
        replicas.push_back(finish((sum - sums[k]) / static_cast<double>(total - (end - begin))));
      }
      g.set_jackknife_replicas(std::move(replicas));
    }
    return g;
  }

  auto draws = std::make_shared<std::vector<Matrix>>(total);
  detail::for_each_index(groups, mc.workers, [&](int g) {
    const auto [begin, end] = detail::group_range(total, groups, g);
    for (std::int64_t i = begin; i < end; ++i) {
      const Matrix u = draw(i).matrix();
      (*draws)[i] = kron(u, u);
    }
  });
  auto make = [draws, shape](bool adjoint) {
    return [draws, shape, adjoint](const Vector& v) {
      const Matrix x = moment_vector_to_operator(v, shape);
      Matrix out = Matrix::Zero(x.rows(), x.cols());
      for (const Matrix& u2 : *draws) out += adjoint ? Matrix(u2.adjoint() * x * u2) : Matrix(u2 * x * u2.adjoint());
      return operator_to_moment_vector(Matrix(out / static_cast<double>(draws->size())), shape);
    };
  };
  return MomentOperator(shape, make(false), make(true), {}, false, {false, total});
}

MomentOperator compose(const MomentOperator& a, const MomentOperator& b) {
  require_same_shape(a, b, "compose");
  const MomentOperator::Info info{a.exact() && b.exact(), std::max(a.samples(), b.samples())};
  if (a.has_dense() && b.has_dense()) return MomentOperator(a.shape(), a.dense() * b.dense(), info);
  MomentOperator::RealApply real;
  if (a.is_real() && b.is_real()) real = [a, b](const RealVector& v) { return a.apply(b.apply(v)); };
  return MomentOperator(
      a.shape(), [a, b](const Vector& v) { return a.apply(b.apply(v)); },
      [a, b](const Vector& v) { return b.apply_adjoint(a.apply_adjoint(v)); }, real, false, info);
}

MomentOperator linear_combination(double sa, const MomentOperator& a, double sb,
                                  const MomentOperator& b) {
  require_same_shape(a, b, "linear_combination");
  const MomentOperator::Info info{a.exact() && b.exact(), std::max(a.samples(), b.samples())};
  if (a.has_dense() && b.has_dense()) return MomentOperator(a.shape(), sa * a.dense() + sb * b.dense(), info);
  MomentOperator::RealApply real;
  if (a.is_real() && b.is_real()) {
    real = [a, b, sa, sb](const RealVector& v) { return RealVector(sa * a.apply(v) + sb * b.apply(v)); };
  }
  return MomentOperator(
      a.shape(), [a, b, sa, sb](const Vector& v) { return Vector(sa * a.apply(v) + sb * b.apply(v)); },
      [a, b, sa, sb](const Vector& v) {
        return Vector(sa * a.apply_adjoint(v) + sb * b.apply_adjoint(v));
      },
      real, a.self_adjoint() && b.self_adjoint(), info);
}

MomentOperator power(const MomentOperator& a, int n) {
  if (n < 0) throw std::invalid_argument("power: negative exponent");
  if (n == 0) return identity_twirl(a.shape());
  if (n == 1) return a;
  const MomentOperator::Info info{a.exact(), a.samples()};
  if (a.has_dense()) {
    Matrix m = a.dense();
    Matrix result = Matrix::Identity(m.rows(), m.cols());
    for (int e = n; e > 0; e >>= 1) {
      if (e & 1) result = result * m;
      if (e > 1) m = m * m;
    }
    return MomentOperator(a.shape(), std::move(result), info);
  }
  MomentOperator::RealApply real;
  if (a.is_real()) {
    real = [a, n](const RealVector& v) {
      RealVector x = v;
      for (int i = 0; i < n; ++i) x = a.apply(x);
      return x;
    };
  }
  return MomentOperator(
      a.shape(),
      [a, n](const Vector& v) {
        Vector x = v;
        for (int i = 0; i < n; ++i) x = a.apply(x);
        return x;
      },
      [a, n](const Vector& v) {
        Vector x = v;
        for (int i = 0; i < n; ++i) x = a.apply_adjoint(x);
        return x;
      },
      real, a.self_adjoint(), info);
}

// ---------------------------------------------------------------------------
// Spectral quantities

std::string to_string(DesignReport::Method m) {
  switch (m) {
    case DesignReport::Method::kExactDense:
      return "exact-dense";
    case DesignReport::Method::kPowerIteration:
      return "power-iteration";
    case DesignReport::Method::kMonteCarlo:
      return "monte-carlo";
  }
  return "unknown";
}

DesignReport design_epsilon(const MomentOperator& g, const MomentOperator& reference,
                            const PowerIterationOptions& opt) {
  require_same_shape(g, reference, "design_epsilon");
  DesignReport report;
  const bool exact = g.exact() && reference.exact();
  report.samples = std::max(g.samples(), reference.samples());
  if (g.size() <= kDirectSpectralSize) {
    const Matrix ref = reference.to_dense();
    report.epsilon = dense_spectral_norm(g.to_dense() - ref);
    report.method = exact ? DesignReport::Method::kExactDense : DesignReport::Method::kMonteCarlo;
    const auto& replicas = g.jackknife_replicas();
    if (!replicas.empty() && reference.exact()) {
      std::vector<double> loo;
      for (const Matrix& r : replicas) loo.push_back(dense_spectral_norm(r - ref));
      const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / loo.size();
      double ss = 0.0;
      for (double v : loo) ss += (v - mean) * (v - mean);
      report.stderr_ = std::sqrt((loo.size() - 1.0) / loo.size() * ss);
    }
    return report;
  }
  report.method = exact ? DesignReport::Method::kPowerIteration : DesignReport::Method::kMonteCarlo;
  const auto partner = adjoint_partner(g.shape());
  const bool self_adjoint = g.self_adjoint() && reference.self_adjoint();
  PowerIterationResult r;
  if (g.is_real() && reference.is_real() && self_adjoint) {
    auto diff = [&](const RealVector& v) { return RealVector(g.apply(v) - reference.apply(v)); };
    auto start = [&](Rng& rng) { return random_hermitian_moment<double>(partner, rng); };
    r = power_iteration<double>(diff, start, {}, opt);
  } else {
    auto diff = [&](const Vector& v) { return Vector(g.apply(v) - reference.apply(v)); };
    auto diff_adj = [&](const Vector& v) {
      return Vector(g.apply_adjoint(v) - reference.apply_adjoint(v));
    };
    auto start = [&](Rng& rng) { return random_hermitian_moment<Complex>(partner, rng); };
    if (self_adjoint) {
      r = power_iteration<Complex>(diff, start, {}, opt);
    } else {
      r = power_iteration<Complex>([&](const Vector& v) { return diff_adj(diff(v)); }, start, {}, opt);
      r.value = std::sqrt(r.value);
    }
  }
  report.epsilon = r.value;
  report.iterations = r.iterations;
  report.converged = r.converged;
  return report;
}

Lambda2Report lambda2(const MomentOperator& g, const PowerIterationOptions& opt) {
  Lambda2Report report;
  report.self_adjoint = g.self_adjoint();
  if (g.size() <= kDirectSpectralSize) {
    const auto basis = fixed_space<Complex>(g.shape());
    Matrix q = Matrix::Identity(g.size(), g.size());
    for (const auto& b : basis) q -= b * b.adjoint();
    const Matrix a = q * g.to_dense() * q;
    if (report.self_adjoint) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (a + a.adjoint())), Eigen::EigenvaluesOnly);
      report.value = es.eigenvalues().cwiseAbs().maxCoeff();
    } else {
      report.value = dense_spectral_norm(a);
    }
    return report;
  }
  const auto partner = adjoint_partner(g.shape());
  PowerIterationResult r;
  if (g.is_real() && report.self_adjoint) {
    const auto basis = fixed_space<double>(g.shape());
    r = power_iteration<double>([&](const RealVector& v) { return g.apply(v); },
                                [&](Rng& rng) { return random_hermitian_moment<double>(partner, rng); },
                                basis, opt);
  } else {
    const auto basis = fixed_space<Complex>(g.shape());
    auto start = [&](Rng& rng) { return random_hermitian_moment<Complex>(partner, rng); };
    if (report.self_adjoint) {
      r = power_iteration<Complex>([&](const Vector& v) { return g.apply(v); }, start, basis, opt);
    } else {
      r = power_iteration<Complex>(
          [&](const Vector& v) {
            Vector y = g.apply(v);
            project_out(y, basis);
            return g.apply_adjoint(y);
          },
          start, basis, opt);
      r.value = std::sqrt(r.value);
    }
  }
  report.value = r.value;
  report.iterations = r.iterations;
  report.converged = r.converged;
  return report;
}

MixingReport verify_mixing_inequality(const MomentOperator& m_e, const MomentOperator& m_o, int s,
                                      double tolerance, const PowerIterationOptions& opt) {
  if (s < 1 || (s & (s - 1)) != 0) {
    throw std::invalid_argument("verify_mixing_inequality: s must be a power of two");
  }
  require_same_shape(m_e, m_o, "verify_mixing_inequality");
  MixingReport report;
  report.s = s;
  const MomentOperator squares = linear_combination(0.5, power(m_e, 2), 0.5, power(m_o, 2));
  report.lhs = lambda2(power(squares, s), opt).value;
  report.rhs = lambda2(linear_combination(0.5, power(m_e, 2 * s), 0.5, power(m_o, 2 * s)), opt).value;
  report.holds = report.lhs <= report.rhs + tolerance;
  return report;
}

}  // namespace randtomo
