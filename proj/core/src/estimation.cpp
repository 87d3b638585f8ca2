#include "qgt/estimation.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace qgt {

double sld_fisher(int n, double N) {
  if (n < 2) throw std::domain_error("estimation needs n >= 2 copies");
  if (!(N > 0.0)) throw std::domain_error("N must be positive");
  return static_cast<double>(n - 1) / (N * (N + 1.0));
}

UmvueResult umvue_simulate(int n, double N, cplx theta, long long draws,
                           std::uint64_t seed) {
  (void)theta;
  if (n < 2) throw std::domain_error("estimation needs n >= 2 copies");
  if (!(N >= 0.0)) throw std::domain_error("N must be >= 0");
  if (draws < 1) throw std::domain_error("draws must be >= 1");

  const int k = n - 1;
  long double s1 = 0.0L, s2 = 0.0L;   // sums of est, est^2
  long double q1 = 0.0L, q2 = 0.0L;   // sums of (est-N)^2 and its square

  if (N == 0.0) {
    // Thermal part absent: every count is zero and the estimator is exact.
    return UmvueResult{0.0, 0.0, 0.0, 0.0};
  }

  std::mt19937_64 rng(seed);
  // Total of k iid geometric(N) counts, failure probability N/(N+1).
  std::negative_binomial_distribution<long long> total(k, 1.0 / (N + 1.0));
  for (long long i = 0; i < draws; ++i) {
    const double est = static_cast<double>(total(rng)) / k;
    const double dev = (est - N) * (est - N);
    s1 += est;
    s2 += static_cast<long double>(est) * est;
    q1 += dev;
    q2 += static_cast<long double>(dev) * dev;
  }
  const long double d = static_cast<long double>(draws);
  const double mean = static_cast<double>(s1 / d);
  const double mse = static_cast<double>(q1 / d);
  const double var_est = static_cast<double>(s2 / d) - mean * mean;
  const double var_dev = static_cast<double>(q2 / d) - mse * mse;
  UmvueResult out;
  out.mean_est = mean;
  out.mse_est = mse;
  out.mean_stderr = std::sqrt(std::max(var_est, 0.0) / static_cast<double>(draws));
  out.mse_stderr = std::sqrt(std::max(var_dev, 0.0) / static_cast<double>(draws));
  return out;
}

}  // namespace qgt
