#pragma once

#include <cstdint>

#include "qgt/distributions.hpp"

namespace qgt {

struct UmvueResult {
  double mean_est;     // empirical mean of the estimates
  double mse_est;      // empirical mean of (estimate - N)^2
  double mean_stderr;  // standard error of mean_est
  double mse_stderr;   // standard error of mse_est
};

// SLD Fisher information about N carried by n copies after concentrating:
// (n-1)/(N(N+1)).
double sld_fisher(int n, double N);

// Simulates the unbiased estimator: total count of the n-1 post-concentrator
// ancilla modes (iid geometric(N), independent of theta) divided by n-1.
// theta is accepted to document the invariance; it never enters the law.
UmvueResult umvue_simulate(int n, double N, cplx theta, long long draws,
                           std::uint64_t seed);

}  // namespace qgt
