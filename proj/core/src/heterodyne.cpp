#include "qgt/heterodyne.hpp"

#include <cmath>
#include <stdexcept>

#include "qgt/distributions.hpp"
#include "qgt/hypothesis_tests.hpp"

namespace qgt {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("alpha must lie in (0,1)");
}

}  // namespace

double het_mean_test_beta(double N, double alpha, double r) {
  if (!(N > 0.0)) throw std::domain_error("N must be positive");
  check_alpha(alpha);
  if (!(r >= 0.0)) throw std::domain_error("r must be >= 0");

  // |z|^2 scaled by 2/(N+1) is noncentral chi-square with 2 dof and
  // noncentrality delta = 2 r^2/(N+1); the cut is at t = -2 ln(alpha).
  // beta = sum_j Pois(j; delta/2) P(chi^2_{2j+2} <= t), and the even-dof CDF
  // is the Erlang closed form 1 - e^{-x} sum_{i<=j} x^i/i! at x = t/2.
  const long double half_delta = static_cast<long double>(r) * r / (N + 1.0);
  const long double x = -std::log(static_cast<long double>(alpha));

  long double pterm = std::exp(-half_delta);  // Pois(0)
  long double eterm = std::exp(-x);           // e^{-x} x^j / j!
  long double ecdf = 1.0L - eterm;            // P(chi^2_2 <= t)
  long double wsum = 0.0L, beta = 0.0L;
  for (long long j = 0;; ++j) {
    beta += pterm * ecdf;
    wsum += pterm;
    if (1.0L - wsum < 1e-14L) break;
    if (j > 100000)
      throw std::runtime_error("noncentral chi-square series did not converge");
    pterm *= half_delta / static_cast<long double>(j + 1);
    eterm *= x / static_cast<long double>(j + 1);
    ecdf -= eterm;
    if (ecdf < 0.0L) ecdf = 0.0L;
  }
  double out = static_cast<double>(beta);
  if (out < 0.0) out = 0.0;
  if (out > 1.0) out = 1.0;
  return out;
}

double het_number_test_beta(double N0, double alpha, double N) {
  if (!(N0 > 0.0) || !(N > 0.0))
    throw std::domain_error("number parameters must be positive");
  check_alpha(alpha);
  return 1.0 - std::pow(alpha, (N0 + 1.0) / (N + 1.0));
}

std::vector<ErrorCurvePoint> comparison_curve(ComparisonFigure fig,
                                              const std::vector<double>& grid) {
  const double N0 = 1.0 / 9.0;
  const double alpha = 0.1;
  std::vector<ErrorCurvePoint> out;
  out.reserve(grid.size());

  if (fig == ComparisonFigure::fig1) {
    const ThresholdTest t = build_mean_test(0.0, N0, alpha);
    for (double r : grid) {
      if (!(r >= 0.0)) throw std::domain_error("fig1 grid needs r >= 0");
      ErrorCurvePoint pt;
      pt.x = r;
      pt.beta_number = 1.0 - mean_test_power(t, r, N0);
      pt.beta_heterodyne = het_mean_test_beta(N0, alpha, r);
      if (pt.beta_number > pt.beta_heterodyne + 1e-9)
        throw std::logic_error("number test lost to the heterodyne baseline");
      out.push_back(pt);
    }
  } else {
    const ThresholdTest t = build_chi2_test(1, N0, alpha);
    for (double N : grid) {
      if (!(N >= N0))
        throw std::domain_error("fig2 grid needs N >= the boundary 1/9");
      ErrorCurvePoint pt;
      pt.x = N;
      pt.beta_number = 1.0 - chi2_power(t, 1, N);
      pt.beta_heterodyne = het_number_test_beta(N0, alpha, N);
      if (pt.beta_number > pt.beta_heterodyne + 1e-9)
        throw std::logic_error("number test lost to the heterodyne baseline");
      out.push_back(pt);
    }
  }
  return out;
}

}  // namespace qgt
