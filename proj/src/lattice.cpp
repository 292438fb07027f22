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

#include "randtomo/lattice.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace randtomo {

namespace {

Matrix local_annihilation(int cutoff) {
  Matrix b = Matrix::Zero(cutoff + 1, cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) b(n - 1, n) = std::sqrt(static_cast<double>(n));
  return b;
}

void check_site(const FockShape& shape, int site) {
  if (site < 1 || site > shape.sites()) {
    throw std::out_of_range("site " + std::to_string(site) + " outside 1.." + std::to_string(shape.sites()));
  }
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Fock spaces

FockShape::FockShape(int sites, int cutoff, std::optional<int> particles)
    : sites_(sites), cutoff_(cutoff), particles_(particles) {
  if (sites < 1) throw std::invalid_argument("FockShape: need at least one site");
  if (cutoff < 1) throw std::invalid_argument("FockShape: cutoff N_S must be at least 1");
  if (particles && (*particles < 0 || *particles > sites * cutoff)) {
    throw std::invalid_argument("FockShape: particle number must lie in 0..k*N_S");
  }
  (void)system();  // validates the total dimension
}

std::vector<std::vector<int>> FockShape::occupations() const {
  std::vector<std::vector<int>> out;
  const int dim = system().dim();
  const int dl = local_dim();
  for (int index = 0; index < dim; ++index) {
    std::vector<int> occ(sites_);
    int rest = index;
    int total = 0;
    for (int s = sites_ - 1; s >= 0; --s) {
      occ[s] = rest % dl;
      rest /= dl;
      total += occ[s];
    }
    if (!particles_ || total == *particles_) out.push_back(std::move(occ));
  }
  return out;
}

int FockShape::sector_dim() const { return static_cast<int>(occupations().size()); }

Matrix FockShape::sector_isometry() const {
  const auto occ = occupations();
  const int dl = local_dim();
  Matrix v = Matrix::Zero(system().dim(), static_cast<Eigen::Index>(occ.size()));
  for (std::size_t j = 0; j < occ.size(); ++j) {
    int index = 0;
    for (int n : occ[j]) index = index * dl + n;
    v(index, static_cast<Eigen::Index>(j)) = 1.0;
  }
  return v;
}

std::string FockShape::truncation_warning() const {
  if (particles_ && *particles_ > cutoff_) {
    return "cutoff N_S = " + std::to_string(cutoff_) + " is below N = " + std::to_string(*particles_) +
           ": states with more than N_S bosons on one site are discarded";
  }
  return {};
}

std::pair<Matrix, Matrix> ladder_operators(const FockShape& shape, int site) {
  check_site(shape, site);
  const std::array<int, 1> where{site};
  const Matrix b = embed_sites(local_annihilation(shape.cutoff()), where, shape.system());
  return {b, b.adjoint()};
}

Matrix number_operator(const FockShape& shape, int site) {
  const auto [b, bd] = ladder_operators(shape, site);
  return bd * b;
}

Matrix total_number_operator(const FockShape& shape) {
  const int d = shape.system().dim();
  Matrix n = Matrix::Zero(d, d);
  for (int s = 1; s <= shape.sites(); ++s) n += number_operator(shape, s);
  return n;
}

// ---------------------------------------------------------------------------
// Hamiltonians and gates

Observable build_hamiltonian(const FockShape& shape, const BoseHubbardParams& params) {
  const int k = shape.sites();
  if (static_cast<int>(params.hopping.size()) != k - 1 || static_cast<int>(params.interaction.size()) != k ||
      static_cast<int>(params.offset.size()) != k) {
    throw std::invalid_argument("build_hamiltonian: need k-1 hoppings and k interactions and offsets");
  }
  auto finite = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  if (!finite(params.hopping) || !finite(params.interaction) || !finite(params.offset)) {
    throw std::invalid_argument("build_hamiltonian: parameters must be finite");
  }
  const int d = shape.system().dim();
  std::vector<Matrix> b(k + 1);
  for (int s = 1; s <= k; ++s) b[s] = ladder_operators(shape, s).first;
  Matrix h = Matrix::Zero(d, d);
  const Matrix id = Matrix::Identity(d, d);
  for (int s = 1; s < k; ++s) {
    const Matrix hop = b[s].adjoint() * b[s + 1];
    h -= params.hopping[s - 1] * (hop + hop.adjoint());
  }
  for (int s = 1; s <= k; ++s) {
    const Matrix n = b[s].adjoint() * b[s];
    h += 0.5 * params.interaction[s - 1] * n * (n - id) + params.offset[s - 1] * n;
  }
  return Observable(shape.system(), h);
}

Unitary bose_hubbard_gate(int cutoff, const TwoSiteParams& params, double time) {
  if (!(time >= 0.0) || !std::isfinite(time)) throw std::invalid_argument("bose_hubbard_gate: need t >= 0");
  const FockShape pair(2, cutoff);
  const Observable h = build_hamiltonian(
      pair, {{params.hopping}, {params.interaction, params.interaction}, {params.offset1, params.offset2}});
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
  const Vector phases = (es.eigenvalues() * (-time)).unaryExpr([](double x) { return std::polar(1.0, x); });
  return Unitary(es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint());
}

std::string SpeckleParams::descriptor() const {
  return "bose-hubbard J=" + format_double(hopping) + " U=" + format_double(interaction) +
         " delta_mean=" + format_double(offset_mean) + " delta_sigma=" + format_double(offset_sigma) +
         " t_min=" + format_double(time_min) + " t_max=" + format_double(time_max) +
         " symmetric=" + (symmetric ? "1" : "0");
}

SpeckleParams SpeckleParams::from(const KeyValues& kv) {
  for (const auto& key : kv.keys()) {
    if (key != "J" && key != "U" && key != "delta_mean" && key != "delta_sigma" && key != "t_min" &&
        key != "t_max" && key != "symmetric") {
      throw ConfigError("bose-hubbard: unknown parameter '" + key + "'");
    }
  }
  SpeckleParams p;
  p.hopping = kv.get_double("J", p.hopping);
  p.interaction = kv.get_double("U", p.interaction);
  p.offset_mean = kv.get_double("delta_mean", p.offset_mean);
  p.offset_sigma = kv.get_double("delta_sigma", p.offset_sigma);
  p.time_min = kv.get_double("t_min", p.time_min);
  p.time_max = kv.get_double("t_max", p.time_max);
  p.symmetric = kv.get_bool("symmetric", p.symmetric);
  return p;
}

GateEnsemble speckle_gate_ensemble(int cutoff, const SpeckleParams& params) {
  if (!(params.offset_sigma >= 0.0)) throw std::invalid_argument("speckle_gate_ensemble: negative standard deviation");
  if (!(params.time_min >= 0.0 && params.time_max >= params.time_min)) {
    throw std::invalid_argument("speckle_gate_ensemble: need 0 <= t_min <= t_max");
  }
  return GateEnsemble(
      GateEnsemble::Kind::kBoseHubbard, cutoff + 1,
      [cutoff, params](std::uint64_t seed) {
        Rng rng = make_rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        TwoSiteParams g;
        g.hopping = params.hopping;
        g.interaction = params.interaction;
        g.offset1 = params.offset_mean + params.offset_sigma * normal(rng);
        g.offset2 = params.offset_mean + params.offset_sigma * normal(rng);
        const double t = params.time_min + (params.time_max - params.time_min) * uniform01(rng);
        const bool flip = params.symmetric && (rng() & 1U);
        const Unitary u = bose_hubbard_gate(cutoff, g, t);
        return flip ? u.adjoint() : u;
      },
      params.descriptor(), params.symmetric, pair_number_operator(cutoff + 1));
}

// ---------------------------------------------------------------------------
// Time of flight

Observable tof_observable(int separation, const FockShape& shape) {
  const int k = shape.sites();
  if (separation < 1 || separation > k - 1) {
    throw std::out_of_range("tof_observable: separation must lie in 1.." + std::to_string(k - 1));
  }
  const int d = shape.system().dim();
  Matrix w = Matrix::Zero(d, d);
  for (int j = 1; j + separation <= k; ++j) {
    const Matrix hop = ladder_operators(shape, j).second * ladder_operators(shape, j + separation).first;
    w += hop + hop.adjoint();
  }
  return Observable(shape.system(), w).normalized();
}

Matrix restrict_to_sector(const Matrix& x, const FockShape& shape) {
  if (!shape.particles()) throw std::invalid_argument("restrict_to_sector: shape has no fixed particle number");
  const Matrix v = shape.sector_isometry();
  return v.adjoint() * x * v;
}

Matrix correlation_matrix(const DensityMatrix& rho, const FockShape& shape) {
  if (!(rho.shape() == shape.system())) throw std::invalid_argument("correlation_matrix: shape mismatch");
  const int k = shape.sites();
  std::vector<Matrix> b(k);
  for (int s = 0; s < k; ++s) b[s] = ladder_operators(shape, s + 1).first;
  Matrix c(k, k);
  for (int s = 0; s < k; ++s)
    for (int l = 0; l < k; ++l) c(s, l) = (rho.matrix() * b[s].adjoint() * b[l]).trace();
  return c;
}

QuasiMomentum quasimomentum_distribution(const DensityMatrix& rho, const FockShape& shape, int points) {
  if (points < 3) throw std::invalid_argument("quasimomentum_distribution: need at least 3 grid points");
  const Matrix c = correlation_matrix(rho, shape);
  const int k = shape.sites();
  QuasiMomentum q;
  q.sites = k;
  q.p.resize(points);
  q.s.resize(points);
  const double pi = std::numbers::pi;
  for (int i = 0; i < points; ++i) {
    const double p = -pi + 2.0 * pi * i / (points - 1);
    Complex sum = 0.0;
    for (int s = 0; s < k; ++s)
      for (int l = 0; l < k; ++l) sum += std::polar(1.0, p * (s - l)) * c(s, l);
    q.p[i] = p;
    q.s[i] = sum.real();
  }
  return q;
}

Complex correlator_from_S(const QuasiMomentum& q, int separation) {
  const std::size_t n = q.p.size();
  if (n < 3 || q.s.size() != n) throw std::invalid_argument("correlator_from_S: malformed grid");
  const double pi = std::numbers::pi;
  if (std::abs(q.p.front() + pi) > 1e-12 || std::abs(q.p.back() - pi) > 1e-12) {
    throw std::invalid_argument("correlator_from_S: grid must cover [-pi, pi]");
  }
  // The trapezoid rule on n - 1 intervals integrates exp(i m p) exactly for
  // |m| < n - 1; the integrand has frequencies up to |l| + k - 1.
  const int intervals = static_cast<int>(n) - 1;
  if (std::abs(separation) + q.sites - 1 >= intervals) {
    throw std::invalid_argument("correlator_from_S: insufficient grid resolution for separation " +
                                std::to_string(separation));
  }
  Complex sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    sum += w * std::polar(1.0, q.p[i] * separation) * q.s[i];
  }
  const double h = 2.0 * pi / intervals;
  return sum * h / (2.0 * pi);
}

Complex direct_correlator(const DensityMatrix& rho, const FockShape& shape, int separation) {
  const Matrix c = correlation_matrix(rho, shape);
  Complex sum = 0.0;
  for (int s = 0; s < shape.sites(); ++s) {
    const int l = s + separation;
    if (l >= 0 && l < shape.sites()) sum += c(s, l);
  }
  return sum;
}

std::string to_csv(const QuasiMomentum& q) {
  std::ostringstream out;
  out << "p,S\n";
  char buf[64];
  for (std::size_t i = 0; i < q.p.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", q.p[i], q.s[i]);
    out << buf;
  }
  return out.str();
}

}  // namespace randtomo
