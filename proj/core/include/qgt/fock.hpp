#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "qgt/distributions.hpp"
#include "qgt/hypothesis_tests.hpp"

namespace qgt {

// Dense operator on a truncated multimode Fock space.  Mode j lives on
// span{|0>,...,|dims[j]-1>}; the flat index is mixed-radix with mode 0 as the
// most significant digit.
struct FockOperator {
  std::vector<int> dims;
  Eigen::MatrixXcd data;
  bool hermitian_flag = false;

  long long dim_total() const {
    long long d = 1;
    for (int x : dims) d *= x;
    return d;
  }
};

struct TruncationReport {
  double leakage = 0.0;
  int dim = 0;
};

// Allocation guard: dense matrices are refused once 16*rows*cols exceeds the
// QGT_MAX_BYTES env var (default 4 GiB).
long long max_bytes();
void check_alloc(long long rows, long long cols);

FockOperator annihilation(int dim);

std::pair<FockOperator, TruncationReport> coherent_state(
    cplx xi, int dim, double leak_budget = 1e-8);

// W_theta diag(geometric(N)) W_theta^+; the report's leakage is the number
// distribution's mass at and beyond the truncation, so the kept trace is
// always within [1 - leakage, 1].
std::pair<FockOperator, TruncationReport> gaussian_state(
    const GaussianParams& p, int dim, double leak_budget = 1e-8);

// exp(theta a^+ - conj(theta) a) of the truncated generator: exactly unitary
// on the truncated space.
FockOperator mean_shift(cplx theta, int dim);

// diag(e^{ikt}).
FockOperator phase_shift(double t, int dim);

// exp(itH) with H = i(a_B^+ a_A - a_A^+ a_B); maps |a)|b) to
// |a cos t + b sin t)|-a sin t + b cos t).  Conserves total photon number.
FockOperator beam_splitter(double t, int dimA, int dimB);

// A single beam-splitter step applied to a mode pair.
struct PairGate {
  int a, b;  // modes (first mode of the displayed map is a)
  double t;
};

// Gate sequence plus a final mode relabeling: output slot j carries what the
// gate stage left in mode final_perm[j].
struct GatePlan {
  int modes = 0;
  std::vector<PairGate> gates;   // applied left to right
  std::vector<int> final_perm;
};

enum class SplitterVariant { U2, U3 };

// Plans shared by the dense constructors, the sector-streamed evaluator and
// the identity certificates.
GatePlan concentrator_plan(int n);
GatePlan splitter_plan(int m, int n, SplitterVariant variant);

// Evolves per-mode coherent amplitudes through a plan (the exact mean map).
std::vector<cplx> plan_apply_means(const GatePlan& plan,
                                   const std::vector<cplx>& mu);

// n-mode unitary concentrating equal-amplitude inputs into mode 0:
// U rho_{theta,N}^{(x)n} U^+ = rho_{sqrt(n) theta, N} (x) rho_{0,N}^{(x)(n-1)}.
FockOperator concentrator(int n, int dim_each);

// Two-sample splitters on m + n modes.  U2 ends with
// [rho_{c1(m theta + n eta),N}, rho_{c0(theta - eta),N}, thermal ancillas
// rho_{0,N}], c0 = sqrt(mn/(m+n)), c1 = 1/sqrt(m+n); U3 concentrates each
// block: [rho_{sqrt(m) theta, M}, rho_{sqrt(n) eta, N}, thermal ancillas
// rho_{0,M} (m-1 of them) then rho_{0,N} (n-1)].
FockOperator splitter_two_sample(int m, int n, SplitterVariant variant,
                                 int dim_each);

FockOperator tensor(const std::vector<FockOperator>& ops);

// Mode relabeling: output mode j of the result is input mode perm[j].
FockOperator permute_modes(const FockOperator& op, const std::vector<int>& perm);

// Tr(rho T); the imaginary part is discarded (Hermitian inputs make it
// vanish to rounding).
double trace_against(const FockOperator& rho, const FockOperator& T);

// Discrete S^1 average (1/g) sum_m e^{i 2 pi m N_0 / g} T e^{-i ...} over the
// first mode; exact once grid >= 2*dims[0].
FockOperator phase_average(const FockOperator& T, int grid);

// Exact trace norm (Hermitian eigenvalues or singular values).
double trace_norm(const FockOperator& A);
// sqrt(dim) * Frobenius norm: a cheap rigorous upper bound on the trace norm.
double trace_norm_upper_bound(const FockOperator& A);

// Stepwise verification of a concentrating identity: each beam-splitter step
// is compared on its two-mode factor at full truncation, and the per-step
// trace-norm deviations add up (unitary invariance + triangle inequality) to
// a bound on |U rho U^+ - target|_1 over the whole mode register.
struct IdentityCertificate {
  double trace_norm_bound = 0.0;
  double state_leakage = 0.0;           // summed per-mode input leakage
  std::vector<double> step_bounds;
  int dim_each = 0;
  std::vector<cplx> final_means;        // exact output amplitudes
};

IdentityCertificate concentrator_identity_certificate(int n, cplx theta,
                                                      double N, int dim_each);
IdentityCertificate splitter_identity_certificate(int m, int n,
                                                  SplitterVariant variant,
                                                  cplx theta, cplx eta,
                                                  double M, double N,
                                                  int dim_each);

// Executes a composed problem on the product state with the given per-mode
// parameters: returns Tr(rho U^+ (T (x) I) U) plus the truncation report.
// Number-conserving pre-unitaries stream over total-photon sectors; W-shift
// pre-unitaries conjugate each mode and convolve the diagonals.
std::pair<double, TruncationReport> run_composed(
    const ComposedTest& ct, const std::vector<GaussianParams>& state,
    const std::vector<int>& dims, double leak_budget = 1e-6);

}  // namespace qgt
