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

// Measurement simulation, trace-norm reconstruction, and tomography of
// reduced density matrices on blocks of l consecutive sites.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "randtomo/circuits.hpp"
#include "randtomo/frames.hpp"
#include "randtomo/hilbert.hpp"

namespace randtomo {

// ---------------------------------------------------------------------------
// Measurements

struct MeasurementRecord {
  Observable observable;
  std::string provenance;  // e.g. a schedule descriptor; free text without commas
  int offset = 0;          // index of the seed observable that was evolved
  double value = 0.0;
  std::int64_t shots = 0;  // 0: exact expectation value
  double stderr_ = 0.0;
};

/// Exact mode (shots == 0) returns (w, rho). Otherwise draws `shots`
/// eigenvalues of w from the Born distribution of rho and returns their mean
/// and standard error.
MeasurementRecord simulate_measurement(const DensityMatrix& rho, const Observable& w, std::int64_t shots,
                                       std::uint64_t seed, std::string provenance = {});

/// Line-oriented dataset: header plus one CSV row
/// (provenance,offset,value,shots,stderr) per record.
std::string to_dataset(const std::vector<MeasurementRecord>& records);

struct IncoherenceReport {
  bool passes = false;
  double norm_inf_squared = 0.0;  // ||w0||_inf^2
  double bound = 0.0;             // lambda / d
  double margin = 0.0;            // bound - ||w0||_inf^2
  double lambda_needed = 0.0;     // d ||w0||_inf^2
};

/// Checks ||w0||_inf^2 <= lambda / d for a normalized w0.
IncoherenceReport incoherence_check(const Observable& w0, double lambda);

// ---------------------------------------------------------------------------
// Trace-norm minimization

struct CsOptions {
  double tolerance = 1e-6;            // relative constraint residual
  double objective_tolerance = 1e-7;  // relative objective change
  int max_iterations = 20000;
  /// Threshold step of the splitting scheme, relative to the trace norm of
  /// the least-squares solution.
  double step = 0.02;
  int rank_hint = 0;  // informational; reported only
};

struct ReconstructionResult {
  Matrix raw;            // solver output, Hermitian
  Matrix estimate;       // PSD, unit-trace projection of raw
  RealVector spectrum;   // eigenvalues of raw, descending
  double objective = 0.0;  // ||raw||_1
  double residual = 0.0;   // relative (weighted, for noisy data) residual
  int iterations = 0;
  bool converged = false;
  bool noisy = false;
};

/// min ||sigma||_1 subject to (w_i, sigma) = y_i. Exact records use
/// Douglas-Rachford splitting between the trace-norm proximal map and the
/// projection onto the affine constraint set; when any record has finite
/// shots the constraints become a quadratic penalty weighted by inverse
/// variances, minimized by accelerated proximal gradient.
ReconstructionResult cs_reconstruct(const std::vector<MeasurementRecord>& records, const CsOptions& opt = {});

/// Eigenvalue-floored, trace-normalized copy of a Hermitian matrix.
Matrix project_to_state(const Matrix& x);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 for PSD sigma.
double fidelity(const DensityMatrix& rho, const Matrix& sigma);

// ---------------------------------------------------------------------------
// Local observables and reduced frames

/// Traceless, normalized operator on the consecutive sites
/// position..position+m-1.
struct LocalTerm {
  Observable op;
  int position = 1;
};

/// sum_i v_i (x) 1 / sqrt(d_{R_i}) with each term normalized as by
/// embed_local; the sum itself is not renormalized.
Matrix local_sum(const std::vector<LocalTerm>& terms, const SystemShape& shape);

/// Normalized traceless diag(0, 1, ..., d_B - 1) on `l` sites at `position`.
LocalTerm diagonal_seed(const SystemShape& shape, int position, int l);

/// Sites [max(1, first - depth), min(k, last + depth)] reachable from a
/// support [first, last] after `depth` brickwork steps.
std::pair<int, int> light_cone(int first, int last, int depth, int sites);

/// Tr_{R_q} of the Heisenberg-evolved local sum on the block q..q+l-1,
/// evolving each term only inside its light cone. Requires open boundary
/// unless the light cone covers the chain.
Matrix evolved_local_observable(const std::vector<LocalTerm>& terms, const CircuitSchedule& schedule, int q,
                                int l);

struct ReducedDefectReport {
  double defect = 0.0;
  double stderr_ = 0.0;
  std::int64_t samples = 0;
};

/// Monte-Carlo defect ||W_B - id|| of the reduced frame on block q..q+l-1.
/// Each draw is w = 1/sqrt(d) with probability 1/d_B^2 and U^dagger w0 U
/// otherwise; the block observable is Tr_{R_q}(w) / sqrt(d_{R_q}), rescaled to
/// unit norm when `normalize` is set, and W_B = d_B^2 mean(P_{w_B}).
ReducedDefectReport reduced_defect(const UnitaryEnsemble& ens, const Observable& w0, int q, int l,
                                   const MonteCarlo& mc, bool normalize = true);

// ---------------------------------------------------------------------------
// Reduced density matrices

struct RdmEstimate {
  int q = 1;
  int l = 1;
  Matrix rho;                  // d_B x d_B, Hermitian, unit trace
  double stderr_ = 0.0;        // propagated Frobenius standard error
  int window_first = 1;        // sites of the light-cone window used
  int window_last = 1;
  int rank = 0;                // numerical rank of the design matrix
  double condition = 0.0;      // s_max / s_min over the retained values
};

struct RdmOptions {
  int block = 2;
  std::int64_t samples = 0;  // circuit draws per block
  std::int64_t shots = 0;    // 0: exact expectation values
  std::uint64_t seed = 1;
  double cutoff = 1e-8;      // relative singular-value cutoff
  int workers = 1;
};

/// Linear-inversion estimates of every block's reduced density matrix. For
/// block q the seed observable is diagonal_seed(q, l); each draw evolves it
/// with family.with_seed(...) and measures on rho. The design matrix acts on
/// the light-cone window of the block, so it must contain the block
/// operators (x) 1 in its row space; otherwise std::runtime_error reports the
/// rank and condition number.
std::vector<RdmEstimate> estimate_rdms(const DensityMatrix& rho, const CircuitSchedule& family,
                                       const RdmOptions& opt);

struct CertificationReport {
  std::vector<double> block_defects;  // ||Tr_{R_q} rho_c - estimate_q||_2
  double max_defect = 0.0;
  bool passes = false;
  std::string caveat;  // empty only when the caller asserts injectivity
};

CertificationReport certify_candidate(const DensityMatrix& candidate, const std::vector<RdmEstimate>& estimates,
                                      double tol, bool injective = false);

/// Completely depolarizes one site: Tr_site(rho) (x) 1 / d_l in place.
DensityMatrix depolarize_site(const DensityMatrix& rho, int site);

/// Translation-invariant matrix-product state with open boundary vectors
/// and one random tensor of bond dimension D, normalized.
Vector random_mps_state(int sites, int local_dim, int bond_dim, Rng& rng);

}  // namespace randtomo
