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

#include "randtomo/recon.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"
#include "site_index.hpp"

namespace randtomo {

namespace {

constexpr char kCertificationCaveat[] =
    "agreement of all l-site reduced density matrices does not identify the global state: "
    "correlations extending over more than l sites leave every block unchanged, so identity "
    "follows only for states known to be fixed by their l-site marginals";

// Hermitian soft threshold: eigenvalues shrink towards zero by tau.
Matrix soft_threshold(const Matrix& x, double tau, double* trace_norm) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (x + x.adjoint()));
  RealVector lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const double a = std::abs(lam(i)) - tau;
    lam(i) = a > 0.0 ? std::copysign(a, lam(i)) : 0.0;
  }
  if (trace_norm) *trace_norm = lam.cwiseAbs().sum();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

double trace_norm(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (x + x.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

struct PseudoInverse {
  RealMatrix pinv;
  RealMatrix row_basis;  // orthonormal basis of the row space (columns)
  int rank = 0;
  double condition = 0.0;
};

PseudoInverse pseudo_inverse(const RealMatrix& a, double cutoff) {
  Eigen::BDCSVD<RealMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  PseudoInverse p;
  const double smax = s.size() > 0 ? s(0) : 0.0;
  while (p.rank < s.size() && s(p.rank) > cutoff * smax) ++p.rank;
  const RealMatrix u = svd.matrixU().leftCols(p.rank);
  const RealMatrix v = svd.matrixV().leftCols(p.rank);
  RealVector inv = s.head(p.rank).cwiseInverse();
  p.pinv = v * inv.asDiagonal() * u.transpose();
  p.row_basis = v;
  p.condition = p.rank > 0 ? smax / s(p.rank - 1) : 0.0;
  return p;
}

std::vector<int> site_range(int first, int last) {
  std::vector<int> out(last - first + 1);
  std::iota(out.begin(), out.end(), first);
  return out;
}

struct WindowOperator {
  int first = 1;
  int last = 1;
  Matrix op;  // on sites first..last
};

// U^dagger (v (x) 1) U restricted to the light cone of v.
WindowOperator evolve_in_window(const LocalTerm& term, const CircuitSchedule& schedule) {
  const SystemShape& shape = schedule.shape();
  const int k = shape.sites();
  const int m = term.op.shape().sites();
  if (term.op.shape().local_dim() != shape.local_dim()) {
    throw std::invalid_argument("local term: local dimension mismatch");
  }
  if (term.position < 1 || term.position + m - 1 > k) throw std::out_of_range("local term: position out of range");
  const auto [first, last] = light_cone(term.position, term.position + m - 1, schedule.depth(), k);
  if (schedule.boundary() == Boundary::kPeriodic && (first != 1 || last != k) && schedule.depth() > 0) {
    throw std::invalid_argument("light-cone evolution needs open boundary unless the cone spans the chain");
  }
  const SystemShape window(last - first + 1, shape.local_dim());
  const auto support = site_range(term.position - first + 1, term.position - first + m);
  Matrix x = embed_sites(term.op.matrix(), support, window);
  for (int step = schedule.depth() - 1; step >= 0; --step) {
    for (const auto& [s, t] : schedule.bonds(step)) {
      if (s < first || s > last || t < first || t > last) continue;
      const Matrix gd = schedule.ensemble().sample(schedule.gate_seed(step, s)).matrix().adjoint();
      const std::array<int, 2> sites{s - first + 1, t - first + 1};
      const Matrix left = apply_gate_left(gd, sites, x, window);
      x = apply_gate_left(gd, sites, left.adjoint(), window).adjoint();
    }
  }
  return {first, last, x};
}

void check_block(const SystemShape& shape, int q, int l) {
  if (l < 1 || q < 1 || q + l - 1 > shape.sites()) {
    throw std::out_of_range("block " + std::to_string(q) + ".." + std::to_string(q + l - 1) + " outside 1.." +
                            std::to_string(shape.sites()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Measurements

MeasurementRecord simulate_measurement(const DensityMatrix& rho, const Observable& w, std::int64_t shots,
                                       std::uint64_t seed, std::string provenance) {
  if (rho.dim() != w.dim()) throw std::invalid_argument("simulate_measurement: dimension mismatch");
  if (shots < 0) throw std::invalid_argument("simulate_measurement: negative shot count");
  MeasurementRecord rec{w, std::move(provenance), 0, 0.0, shots, 0.0};
  if (shots == 0) {
    rec.value = expectation(w, rho);
    return rec;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(w.matrix());
  const RealVector& lam = es.eigenvalues();
  const Eigen::Index n = lam.size();
  RealVector p(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p(i) = std::max(0.0, (es.eigenvectors().col(i).adjoint() * rho.matrix() * es.eigenvectors().col(i))(0).real());
  }
  p /= p.sum();
  // Multinomial draw as a chain of conditional binomials.
  Rng rng = make_rng(seed);
  std::int64_t remaining = shots;
  double mass = 1.0;
  std::vector<std::int64_t> counts(n, 0);
  for (Eigen::Index i = 0; i < n && remaining > 0; ++i) {
    if (i + 1 == n || mass <= 0.0) {
      counts[i] = remaining;
      break;
    }
    const double prob = std::clamp(p(i) / mass, 0.0, 1.0);
    std::binomial_distribution<std::int64_t> binom(remaining, prob);
    counts[i] = binom(rng);
    remaining -= counts[i];
    mass -= p(i);
  }
  double mean = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) mean += counts[i] * lam(i);
  mean /= static_cast<double>(shots);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) ss += counts[i] * (lam(i) - mean) * (lam(i) - mean);
  rec.value = mean;
  rec.stderr_ = shots > 1 ? std::sqrt(ss / static_cast<double>(shots - 1) / static_cast<double>(shots))
                          : lam.cwiseAbs().maxCoeff();
  return rec;
}

std::string to_dataset(const std::vector<MeasurementRecord>& records) {
  std::ostringstream out;
  out << "provenance,offset,value,shots,stderr\n";
  char buf[96];
  for (const auto& r : records) {
    if (r.provenance.find(',') != std::string::npos || r.provenance.find('\n') != std::string::npos) {
      throw std::invalid_argument("to_dataset: provenance may not contain commas or newlines");
    }
    std::snprintf(buf, sizeof buf, ",%d,%.17g,%lld,%.17g\n", r.offset, r.value, static_cast<long long>(r.shots),
                  r.stderr_);
    out << r.provenance << buf;
  }
  return out.str();
}

IncoherenceReport incoherence_check(const Observable& w0, double lambda) {
  if (!w0.is_normalized()) throw std::invalid_argument("incoherence_check: w0 must be normalized");
  IncoherenceReport r;
  const double n = schatten_norm(w0.matrix(), Schatten::kInf);
  r.norm_inf_squared = n * n;
  r.bound = lambda / w0.dim();
  r.margin = r.bound - r.norm_inf_squared;
  r.passes = r.norm_inf_squared <= r.bound * (1.0 + 1e-12);
  r.lambda_needed = w0.dim() * r.norm_inf_squared;
  return r;
}

// ---------------------------------------------------------------------------
// Trace-norm minimization

Matrix project_to_state(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (x + x.adjoint()));
  RealVector lam = es.eigenvalues().cwiseMax(0.0);
  const double t = lam.sum();
  if (t <= 0.0) return Matrix::Identity(x.rows(), x.cols()) / static_cast<double>(x.rows());
  lam /= t;
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

double fidelity(const DensityMatrix& rho, const Matrix& sigma) {
  if (sigma.rows() != rho.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  // Round-off eigenvalues would otherwise contribute O(sqrt(eps)) after the
  // square root.
  auto root_of = [](RealVector lam) {
    const double floor = 1e-13 * std::max(lam.maxCoeff(), 0.0);
    for (auto& x : lam) x = x > floor ? std::sqrt(x) : 0.0;
    return lam;
  };
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  const Matrix s = es.eigenvectors() * root_of(es.eigenvalues()).asDiagonal() * es.eigenvectors().adjoint();
  const Matrix m = s * (0.5 * (sigma + sigma.adjoint())) * s;
  Eigen::SelfAdjointEigenSolver<Matrix> inner(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  const double f = root_of(inner.eigenvalues()).sum();
  return f * f;
}

ReconstructionResult cs_reconstruct(const std::vector<MeasurementRecord>& records, const CsOptions& opt) {
  if (records.empty()) throw std::invalid_argument("cs_reconstruct: no records");
  const int d = records.front().observable.dim();
  const Eigen::Index m = static_cast<Eigen::Index>(records.size());
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  RealMatrix a(m, n);
  RealVector y(m);
  bool noisy = false;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& r = records[i];
    if (r.observable.dim() != d) throw std::invalid_argument("cs_reconstruct: records of different dimension");
    a.row(i) = hermitian_coordinates(r.observable.matrix()).transpose();
    y(i) = r.value;
    noisy = noisy || r.shots > 0;
  }
  ReconstructionResult res;
  res.noisy = noisy;
  const double ynorm = std::max(y.norm(), 1e-300);

  auto finish = [&](const RealVector& x) {
    res.raw = from_hermitian_coordinates(x, d);
    Eigen::SelfAdjointEigenSolver<Matrix> es(res.raw, Eigen::EigenvaluesOnly);
    res.spectrum = es.eigenvalues().reverse();
    res.objective = res.spectrum.cwiseAbs().sum();
    res.estimate = project_to_state(res.raw);
  };

  if (!noisy) {
    const PseudoInverse p = pseudo_inverse(a, 1e-10);
    const RealVector x0 = p.pinv * y;
    if (p.rank == n) {
      // Full column rank: the constraints admit a single point.
      res.residual = (a * x0 - y).norm() / ynorm;
      res.converged = res.residual <= opt.tolerance;
      finish(x0);
      return res;
    }
    auto project = [&](const RealVector& z) -> RealVector { return z - p.pinv * (a * z - y); };
    const double gamma = opt.step * std::max(trace_norm(from_hermitian_coordinates(x0, d)), 1e-12);
    RealVector z = x0;
    RealVector xf = x0;
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opt.max_iterations; ++it) {
      const RealVector xg = project(z);
      double obj = 0.0;
      const Matrix t = soft_threshold(from_hermitian_coordinates(2.0 * xg - z, d), gamma, &obj);
      xf = hermitian_coordinates(t);
      z += xf - xg;
      res.iterations = it;
      res.residual = (a * xf - y).norm() / ynorm;
      const bool stable = std::abs(obj - prev) <= opt.objective_tolerance * std::max(obj, 1e-12);
      prev = obj;
      if (stable && res.residual <= opt.tolerance) {
        res.converged = true;
        break;
      }
    }
    finish(xf);
    return res;
  }

  // Noisy records: min ||X||_1 + 1/2 sum_i (a_i x - y_i)^2 / se_i^2.
  RealVector weight(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& r = records[i];
    const double norm_inf = schatten_norm(r.observable.matrix(), Schatten::kInf);
    const double floor = r.shots > 0 ? norm_inf / static_cast<double>(r.shots) : 1e-9 * std::max(norm_inf, 1e-300);
    const double se = std::max(r.stderr_, floor);
    weight(i) = 1.0 / (se * se);
  }
  const RealMatrix wa = weight.asDiagonal() * a;
  const RealMatrix h = a.transpose() * wa;
  const RealVector b = wa.transpose() * y;
  Eigen::SelfAdjointEigenSolver<RealMatrix> hs(h);
  const double lipschitz = std::max(hs.eigenvalues().maxCoeff(), 1e-300);
  // Weighted least-squares start.
  RealVector inv_ev = hs.eigenvalues();
  const double ev_cut = 1e-10 * lipschitz;
  for (Eigen::Index i = 0; i < inv_ev.size(); ++i) inv_ev(i) = inv_ev(i) > ev_cut ? 1.0 / inv_ev(i) : 0.0;
  RealVector x = hs.eigenvectors() * (inv_ev.asDiagonal() * (hs.eigenvectors().transpose() * b));
  auto objective = [&](const RealVector& v, double tn) {
    const RealVector r = a * v - y;
    return tn + 0.5 * r.dot(weight.asDiagonal() * r);
  };
  RealVector yk = x;
  double tk = 1.0;
  double prev = objective(x, trace_norm(from_hermitian_coordinates(x, d)));
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const RealVector grad = h * yk - b;
    double tn = 0.0;
    const RealVector xn = hermitian_coordinates(soft_threshold(from_hermitian_coordinates(yk - grad / lipschitz, d),
                                                               1.0 / lipschitz, &tn));
    const double obj = objective(xn, tn);
    const double tn1 = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    if (obj > prev) {
      // Monotone restart.
      yk = x;
      tk = 1.0;
      res.iterations = it;
      continue;
    }
    yk = xn + ((tk - 1.0) / tn1) * (xn - x);
    tk = tn1;
    x = xn;
    res.iterations = it;
    const bool stable = std::abs(prev - obj) <= opt.objective_tolerance * std::max(std::abs(obj), 1e-12);
    prev = obj;
    if (stable) {
      res.converged = true;
      break;
    }
  }
  const RealVector r = a * x - y;
  res.residual = std::sqrt(r.dot(weight.asDiagonal() * r) / static_cast<double>(m));
  finish(x);
  return res;
}

// ---------------------------------------------------------------------------
// Local observables and reduced frames

Matrix local_sum(const std::vector<LocalTerm>& terms, const SystemShape& shape) {
  Matrix out = Matrix::Zero(shape.dim(), shape.dim());
  for (const auto& t : terms) out += embed_local(t.op, t.position, shape).matrix();
  return out;
}

LocalTerm diagonal_seed(const SystemShape& shape, int position, int l) {
  check_block(shape, position, l);
  const SystemShape block = shape.block(l);
  const int db = block.dim();
  if (db < 2) throw std::invalid_argument("diagonal_seed: block dimension must be at least 2");
  RealVector diag(db);
  for (int i = 0; i < db; ++i) diag(i) = i - 0.5 * (db - 1);
  diag.normalize();
  return {Observable(block, diag.cast<Complex>().asDiagonal()), position};
}

std::pair<int, int> light_cone(int first, int last, int depth, int sites) {
  return {std::max(1, first - depth), std::min(sites, last + depth)};
}

Matrix evolved_local_observable(const std::vector<LocalTerm>& terms, const CircuitSchedule& schedule, int q,
                                int l) {
  const SystemShape& shape = schedule.shape();
  check_block(shape, q, l);
  const int k = shape.sites();
  const int dl = shape.local_dim();
  const int db = shape.block(l).dim();
  Matrix out = Matrix::Zero(db, db);
  for (const auto& term : terms) {
    const WindowOperator w = evolve_in_window(term, schedule);
    std::vector<int> sites;
    for (int s = 1; s <= k; ++s)
      if ((s >= w.first && s <= w.last) || (s >= q && s < q + l)) sites.push_back(s);
    const int u = static_cast<int>(sites.size());
    const SystemShape ushape(u, dl);
    std::vector<int> wpos, bpos;
    for (int i = 0; i < u; ++i) {
      if (sites[i] >= w.first && sites[i] <= w.last) wpos.push_back(i + 1);
      if (sites[i] >= q && sites[i] < q + l) bpos.push_back(i + 1);
    }
    const Matrix xu = embed_sites(w.op, wpos, ushape);
    const Matrix reduced = partial_trace(xu, ushape, bpos);
    const int m = term.op.shape().sites();
    // Sites outside the union contribute Tr 1 = d_l each; the term carries
    // 1 / sqrt(d_l^(k - m)).
    out += std::pow(static_cast<double>(dl), 0.5 * (k - 2 * u + m)) * reduced;
  }
  return out;
}

ReducedDefectReport reduced_defect(const UnitaryEnsemble& ens, const Observable& w0, int q, int l,
                                   const MonteCarlo& mc, bool normalize) {
  const SystemShape shape = w0.shape();
  check_block(shape, q, l);
  if (ens.dim() != shape.dim()) throw std::invalid_argument("reduced_defect: ensemble dimension mismatch");
  if (!w0.is_normalized()) throw std::invalid_argument("reduced_defect: w0 must be normalized");
  if (std::abs(w0.matrix().trace()) > 1e-10) throw std::invalid_argument("reduced_defect: w0 must be traceless");
  const int d = shape.dim();
  const int db = shape.block(l).dim();
  const double rest_scale = std::sqrt(static_cast<double>(d) / db);
  const auto keep = site_range(q, q + l - 1);
  auto draw = [&](std::uint64_t seed) -> Matrix {
    Rng rng = make_rng(seed);
    Matrix w;
    if (uniform01(rng) < 1.0 / (static_cast<double>(db) * db)) {
      w = Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d));
    } else {
      const Matrix u = ens.sample(derive_seed(seed, {1})).matrix();
      w = u.adjoint() * w0.matrix() * u;
    }
    Matrix wb = partial_trace(w, shape, keep) / rest_scale;
    if (normalize) {
      const double n = wb.norm();
      if (n > 1e-14) wb /= n;
    }
    return wb;
  };
  const SuperOperator frame = monte_carlo_frame(db, draw, mc);
  return {tight_frame_defect(frame), frame.defect_stderr(), mc.samples};
}

// ---------------------------------------------------------------------------
// Reduced density matrices

std::vector<RdmEstimate> estimate_rdms(const DensityMatrix& rho, const CircuitSchedule& family,
                                       const RdmOptions& opt) {
  const SystemShape& shape = family.shape();
  if (!(rho.shape() == shape)) throw std::invalid_argument("estimate_rdms: state and circuit shapes differ");
  const int k = shape.sites();
  const int l = opt.block;
  if (l < 1 || l > k) throw std::invalid_argument("estimate_rdms: block length must lie in 1..k");
  if (opt.samples < 1) throw std::invalid_argument("estimate_rdms: need at least one sample per block");
  const int dl = shape.local_dim();
  const int db = shape.block(l).dim();
  std::vector<RdmEstimate> out;
  for (int q = 1; q + l - 1 <= k; ++q) {
    const LocalTerm seed_term = diagonal_seed(shape, q, l);
    const auto [first, last] = light_cone(q, q + l - 1, family.depth(), k);
    const SystemShape window(last - first + 1, dl);
    const int dw = window.dim();
    const DensityMatrix rho_w = partial_trace(rho, site_range(first, last));
    const double scale = std::pow(static_cast<double>(dl), -0.5 * (k - l));
    const Eigen::Index rows = opt.samples + 1;
    RealMatrix a(rows, static_cast<Eigen::Index>(dw) * dw);
    RealVector y(rows), se(rows);
    // Identity atom: Tr(rho_W) = 1 exactly.
    a.row(0) = hermitian_coordinates(Matrix::Identity(dw, dw)).transpose();
    y(0) = 1.0;
    se(0) = 0.0;
    detail::for_each_index(static_cast<int>(opt.samples), opt.workers, [&](int j) {
      const auto schedule = family.with_seed(derive_seed(opt.seed, {static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(j)}));
      const WindowOperator w = evolve_in_window(seed_term, schedule);
      if (w.first != first || w.last != last) throw std::logic_error("estimate_rdms: inconsistent light cone");
      const Observable obs(window, w.op * scale);
      const auto rec = simulate_measurement(rho_w, obs, opt.shots,
                                            derive_seed(opt.seed, {static_cast<std::uint64_t>(q),
                                                                   static_cast<std::uint64_t>(j), 0x6d656173ULL}));
      a.row(j + 1) = hermitian_coordinates(obs.matrix()).transpose();
      y(j + 1) = rec.value;
      se(j + 1) = rec.stderr_;
    });
    const PseudoInverse p = pseudo_inverse(a, opt.cutoff);
    // Block operators (x) 1 must be determined by the measured functionals.
    std::vector<int> bpos = site_range(q - first + 1, q - first + l);
    const Eigen::Index nb = static_cast<Eigen::Index>(db) * db;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < nb; ++i) {
      const Matrix e = from_hermitian_coordinates(RealVector::Unit(nb, i), db);
      const RealVector c = hermitian_coordinates(embed_sites(e, bpos, window));
      const RealVector r = c - p.row_basis * (p.row_basis.transpose() * c);
      worst = std::max(worst, r.norm() / c.norm());
    }
    if (worst > 1e-6) {
      std::ostringstream msg;
      msg << "estimate_rdms: block " << q << ": design matrix of rank " << p.rank << " (of "
          << static_cast<Eigen::Index>(dw) * dw << " window coordinates, condition " << p.condition
          << ") does not determine the block; relative residual " << worst << ". Use at least "
          << static_cast<Eigen::Index>(dw) * dw << " samples for a " << (last - first + 1) << "-site window";
      throw std::runtime_error(msg.str());
    }
    // Linear map from window coordinates to block coordinates.
    const Eigen::Index nw = static_cast<Eigen::Index>(dw) * dw;
    RealMatrix reduce(nb, nw);
    for (Eigen::Index i = 0; i < nw; ++i) {
      const Matrix e = from_hermitian_coordinates(RealVector::Unit(nw, i), dw);
      reduce.col(i) = hermitian_coordinates(partial_trace(e, window, bpos));
    }
    const RealMatrix jac = reduce * p.pinv;
    RealVector xb = jac * y;
    Matrix rb = from_hermitian_coordinates(xb, db);
    rb = 0.5 * (rb + rb.adjoint());
    const Complex tr = rb.trace();
    rb += Matrix::Identity(db, db) * ((1.0 - tr.real()) / db);
    RdmEstimate est;
    est.q = q;
    est.l = l;
    est.rho = rb;
    est.stderr_ = std::sqrt((jac * se.asDiagonal()).squaredNorm());
    est.window_first = first;
    est.window_last = last;
    est.rank = p.rank;
    est.condition = p.condition;
    out.push_back(std::move(est));
  }
  return out;
}

CertificationReport certify_candidate(const DensityMatrix& candidate, const std::vector<RdmEstimate>& estimates,
                                      double tol, bool injective) {
  CertificationReport r;
  for (const auto& e : estimates) {
    check_block(candidate.shape(), e.q, e.l);
    if (e.rho.rows() != candidate.shape().block(e.l).dim()) {
      throw std::invalid_argument("certify_candidate: estimate does not match the candidate's shape");
    }
    const Matrix reduced = partial_trace(candidate.matrix(), candidate.shape(), site_range(e.q, e.q + e.l - 1));
    r.block_defects.push_back((reduced - e.rho).norm());
    r.max_defect = std::max(r.max_defect, r.block_defects.back());
  }
  r.passes = r.max_defect <= tol;
  if (!injective) r.caveat = kCertificationCaveat;
  return r;
}

DensityMatrix depolarize_site(const DensityMatrix& rho, int site) {
  const std::array<int, 1> sites{site};
  const detail::SiteIndex index(rho.shape(), sites, true);
  const Eigen::Index dl = rho.shape().local_dim();
  Matrix out = Matrix::Zero(rho.dim(), rho.dim());
  for (Eigen::Index r : index.rest) {
    for (Eigen::Index c : index.rest) {
      Complex t = 0.0;
      for (Eigen::Index b = 0; b < dl; ++b) t += rho.matrix()(r + index.selected[b], c + index.selected[b]);
      for (Eigen::Index a = 0; a < dl; ++a) out(r + index.selected[a], c + index.selected[a]) = t / static_cast<double>(dl);
    }
  }
  return DensityMatrix(rho.shape(), out);
}

Vector random_mps_state(int sites, int local_dim, int bond_dim, Rng& rng) {
  if (sites < 1 || local_dim < 1 || bond_dim < 1) throw std::invalid_argument("random_mps_state: invalid sizes");
  const SystemShape shape(sites, local_dim);
  std::normal_distribution<double> normal;
  auto gaussian = [&](int r, int c) {
    Matrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = Complex(normal(rng), normal(rng));
    return m;
  };
  std::vector<Matrix> tensor;
  for (int s = 0; s < local_dim; ++s) tensor.push_back(gaussian(bond_dim, bond_dim));
  const Matrix left = gaussian(1, bond_dim);
  const Matrix right = gaussian(bond_dim, 1);
  // prefix(index) = left * A^{s_1} ... A^{s_j}, site 1 most significant.
  std::vector<Matrix> prefix{left};
  for (int j = 0; j < sites; ++j) {
    std::vector<Matrix> next;
    next.reserve(prefix.size() * local_dim);
    for (const auto& p : prefix)
      for (int s = 0; s < local_dim; ++s) next.push_back(p * tensor[s]);
    prefix.swap(next);
  }
  Vector psi(shape.dim());
  for (Eigen::Index i = 0; i < psi.size(); ++i) psi(i) = (prefix[i] * right)(0, 0);
  return psi / psi.norm();
}

}  // namespace randtomo
