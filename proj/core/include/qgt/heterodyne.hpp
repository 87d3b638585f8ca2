#pragma once

#include <vector>

namespace qgt {

// One comparison point: abscissa (r or N), number-measurement test beta,
// heterodyne-baseline beta.
struct ErrorCurvePoint {
  double x;
  double beta_number;
  double beta_heterodyne;
};

enum class ComparisonFigure { fig1, fig2 };

// Heterodyne outcome of a displaced thermal state is complex Gaussian with
// mean theta and per-quadrature variance (N+1)/2.

// Classical rotation-invariant test of theta=0 vs |theta|=r at known N:
// reject when |z|^2 > -(N+1) ln(alpha).  Returns the type II error beta(r)
// via the noncentral-chi-square series, absolute error < 1e-10.
double het_mean_test_beta(double N, double alpha, double r);

// Classical UMP test of N <= N0 vs N > N0 on |z|^2 (exponential, mean N+1):
// beta(N) = 1 - alpha^((N0+1)/(N+1)).
double het_number_test_beta(double N0, double alpha, double N);

// Paired type II error curves at the N=1/9, alpha=0.1, single-copy setting:
// fig1 sweeps the mean amplitude r, fig2 sweeps the alternative N.  Checks
// beta_number <= beta_heterodyne + 1e-9 at every grid point.
std::vector<ErrorCurvePoint> comparison_curve(ComparisonFigure fig,
                                              const std::vector<double>& grid);

}  // namespace qgt
