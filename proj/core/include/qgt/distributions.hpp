#pragma once

#include <complex>

namespace qgt {

using cplx = std::complex<double>;

// Single-mode quantum Gaussian state parameters: mean amplitude theta,
// thermal number parameter N >= 0.  Only |theta|^2 enters any probability.
struct GaussianParams {
  cplx theta{0.0, 0.0};
  double n_param = 0.0;
};

struct Moments {
  double mean;
  double variance;
};

// Laguerre polynomial L_k(x) by the three-term recurrence, O(k).
double laguerre(int k, double x);

// log L_k(-x) for x >= 0.  Scaled recurrence; values grow like exp(2*sqrt(k*x))
// so the plain polynomial overflows long before k=500, x=200.
double log_laguerre_neg(int k, double x);

// Number-measurement outcome law of a displaced thermal state.
// N > 0: (1/(N+1)) (N/(N+1))^k exp(-|theta|^2/(N+1)) L_k(-|theta|^2/(N(N+1))).
// N = 0: Poisson with mean |theta|^2 (analytic limit).
double number_pmf(const GaussianParams& p, int k);
double log_number_pmf(const GaussianParams& p, int k);

// P(X <= k0) and P(X > k0), term-by-term; absolute error <= 1e-12.
double number_cdf(const GaussianParams& p, int k0);
double number_survival(const GaussianParams& p, int k0);

// Rigorous upper bound on P(X > k0), from the geometric factor times the
// Laguerre growth envelope L_k(-x) <= exp(2*sqrt(k*x)).
double number_tail_bound(const GaussianParams& p, int k0);

// Smallest dim with P(X >= dim) below `leak`; state support fits in [0, dim).
int suggest_dim(const GaussianParams& p, double leak);

// Pmf over k = 0,1,2,... with an explicit tail-bound rule.
struct NumberPmf {
  GaussianParams p;
  double mass(int k) const { return number_pmf(p, k); }
  double tail_bound(int k0) const { return number_tail_bound(p, k0); }
};

// (|theta|^2 + N, N(N+1) + |theta|^2 (2N+1)).
Moments gaussian_moments(const GaussianParams& p);

// Negative binomial with C(k+n-1, n-1) (1/(N+1))^n (N/(N+1))^k.
double negbin_pmf(int n, double N, int k);
double log_negbin_pmf(int n, double N, int k);
double negbin_cdf(int n, double N, int k0);
double negbin_survival(int n, double N, int k0);

// Regularized lower incomplete gamma P(a, x); classical chi-square CDF.
double gamma_p(double a, double x);
double chisq_cdf(int dof, double x);

// Law of 2K/N for K ~ negbin(dof, N), supported on the lattice (2/N) Z>=0.
struct NChiSqParams {
  int dof;
  double n_param;
};

// Upper-alpha point: (2/N) * max{k : P(K >= k) >= alpha}.
double nchisq_upper_point(const NChiSqParams& q, double alpha);
double nchisq_cdf(const NChiSqParams& q, double x);

}  // namespace qgt
