#include "qgt/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qgt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Streams log P(X=k) for k = 0,1,2,... carrying the Laguerre recurrence
// (scaled) so a full prefix costs O(k_max) instead of O(k_max^2).
class LogPmfSeq {
 public:
  explicit LogPmfSeq(const GaussianParams& p)
      : n_(p.n_param), t2_(std::norm(p.theta)) {
    if (n_ > 0.0) {
      logq_ = std::log(n_ / (n_ + 1.0));
      base_ = -std::log(n_ + 1.0) - t2_ / (n_ + 1.0);
      x_ = t2_ / (n_ * (n_ + 1.0));
    }
  }

  // log P(X = k) for the current k, then advances.
  double next() {
    double v;
    if (n_ == 0.0) {
      v = (t2_ == 0.0) ? (k_ == 0 ? 0.0 : kNegInf)
                       : k_ * std::log(t2_) - t2_ - std::lgamma(k_ + 1.0);
    } else {
      v = base_ + k_ * logq_ + lcur_ + std::log(cur_);
    }
    advance();
    return v;
  }

 private:
  void advance() {
    if (n_ > 0.0) {
      // L_{k+1}(-x) = ((x + 2k + 1) L_k(-x) - k L_{k-1}(-x)) / (k + 1)
      double nxt = ((x_ + 2.0 * k_ + 1.0) * cur_ - k_ * prev_) / (k_ + 1.0);
      prev_ = cur_;
      cur_ = nxt;
      if (cur_ > 1e280) {
        prev_ /= cur_;
        lcur_ += std::log(cur_);
        cur_ = 1.0;
      }
    }
    ++k_;
  }

  double n_, t2_;
  double logq_ = 0.0, base_ = 0.0, x_ = 0.0;
  long long k_ = 0;
  double prev_ = 0.0, cur_ = 1.0, lcur_ = 0.0;  // scaled L_{k-1}, L_k
};

}  // namespace

double laguerre(int k, double x) {
  if (k < 0) throw std::domain_error("laguerre: k < 0");
  double prev = 1.0, cur = 1.0 - x;
  if (k == 0) return prev;
  for (int j = 1; j < k; ++j) {
    double nxt = ((-x + 2.0 * j + 1.0) * cur - j * prev) / (j + 1.0);
    prev = cur;
    cur = nxt;
  }
  return cur;
}

double log_laguerre_neg(int k, double x) {
  if (k < 0) throw std::domain_error("log_laguerre_neg: k < 0");
  if (x < 0.0) throw std::domain_error("log_laguerre_neg: x < 0");
  double prev = 1.0, cur = 1.0 + x, scale = 0.0;
  if (k == 0) return 0.0;
  for (int j = 1; j < k; ++j) {
    double nxt = ((x + 2.0 * j + 1.0) * cur - j * prev) / (j + 1.0);
    prev = cur;
    cur = nxt;
    if (cur > 1e280) {
      prev /= cur;
      scale += std::log(cur);
      cur = 1.0;
    }
  }
  return scale + std::log(cur);
}

double log_number_pmf(const GaussianParams& p, int k) {
  if (k < 0) throw std::domain_error("number_pmf: k < 0");
  double N = p.n_param;
  double t2 = std::norm(p.theta);
  if (N < 0.0) throw std::domain_error("number_pmf: N < 0");
  if (N == 0.0) {
    if (t2 == 0.0) return k == 0 ? 0.0 : kNegInf;
    return k * std::log(t2) - t2 - std::lgamma(k + 1.0);
  }
  double x = t2 / (N * (N + 1.0));
  return -std::log(N + 1.0) + k * std::log(N / (N + 1.0)) - t2 / (N + 1.0) +
         log_laguerre_neg(k, x);
}

double number_pmf(const GaussianParams& p, int k) {
  return std::exp(log_number_pmf(p, k));
}

double number_cdf(const GaussianParams& p, int k0) {
  if (k0 < 0) return 0.0;
  LogPmfSeq seq(p);
  long double acc = 0.0L;
  for (int k = 0; k <= k0; ++k) acc += std::exp((long double)seq.next());
  return (double)std::min(acc, 1.0L);
}

double number_survival(const GaussianParams& p, int k0) {
  return std::max(0.0, 1.0 - number_cdf(p, k0));
}

double number_tail_bound(const GaussianParams& p, int k0) {
  double N = p.n_param;
  double t2 = std::norm(p.theta);
  if (k0 < 0) return 1.0;
  if (N == 0.0) {
    if (t2 == 0.0) return 0.0;
    // Poisson: ratios lambda/(k+1) are decreasing, so past k0+1 the terms are
    // dominated by a geometric with ratio r = lambda/(k0+2).
    double r = t2 / (k0 + 2.0);
    if (r >= 1.0) return 1.0;
    double logterm = (k0 + 1.0) * std::log(t2) - t2 - std::lgamma(k0 + 2.0);
    return std::min(1.0, std::exp(logterm) / (1.0 - r));
  }
  double q = N / (N + 1.0);
  if (t2 == 0.0) return std::exp((k0 + 1.0) * std::log(q));
  // P(k) <= (1/(N+1)) e^{-t2/(N+1)} q^k e^{2 sqrt(k x)} and
  // 2 sqrt(kx) <= eps k + x/eps with eps = -log(q)/2, so the tail is dominated
  // by a geometric with ratio sqrt(q).
  double x = t2 / (N * (N + 1.0));
  double eps = -0.5 * std::log(q);
  double logpref = -std::log(N + 1.0) - t2 / (N + 1.0) + x / eps;
  double logtail =
      logpref + (k0 + 1.0) * 0.5 * std::log(q) - std::log(1.0 - std::sqrt(q));
  return std::min(1.0, std::exp(logtail));
}

int suggest_dim(const GaussianParams& p, double leak) {
  if (leak <= 0.0) throw std::domain_error("suggest_dim: leak must be > 0");
  LogPmfSeq seq(p);
  long double acc = 0.0L;
  const int kMax = 1 << 20;
  for (int k = 0; k < kMax; ++k) {
    acc += std::exp((long double)seq.next());
    if ((double)(1.0L - acc) < 0.5 * leak) return k + 1;
  }
  throw std::runtime_error("suggest_dim: support exceeds iteration cap");
}

Moments gaussian_moments(const GaussianParams& p) {
  double N = p.n_param;
  double t2 = std::norm(p.theta);
  return {t2 + N, N * (N + 1.0) + t2 * (2.0 * N + 1.0)};
}

double log_negbin_pmf(int n, double N, int k) {
  if (n < 1) throw std::domain_error("negbin_pmf: n < 1");
  if (N <= 0.0) throw std::domain_error("negbin_pmf: N <= 0");
  if (k < 0) return kNegInf;
  return std::lgamma(k + (double)n) - std::lgamma((double)n) -
         std::lgamma(k + 1.0) - n * std::log(N + 1.0) +
         k * std::log(N / (N + 1.0));
}

double negbin_pmf(int n, double N, int k) {
  return std::exp(log_negbin_pmf(n, N, k));
}

double negbin_cdf(int n, double N, int k0) {
  if (n < 1) throw std::domain_error("negbin_cdf: n < 1");
  if (N <= 0.0) throw std::domain_error("negbin_cdf: N <= 0");
  if (k0 < 0) return 0.0;
  double q = N / (N + 1.0);
  long double term = std::exp(-n * (long double)std::log(N + 1.0));
  long double acc = term;
  for (int k = 0; k < k0; ++k) {
    term *= q * (k + (long double)n) / (k + 1.0L);
    acc += term;
  }
  return (double)std::min(acc, 1.0L);
}

double negbin_survival(int n, double N, int k0) {
  return std::max(0.0, 1.0 - negbin_cdf(n, N, k0));
}

double gamma_p(double a, double x) {
  if (a <= 0.0) throw std::domain_error("gamma_p: a <= 0");
  if (x < 0.0) throw std::domain_error("gamma_p: x < 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) {
    // series for P(a, x)
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  // continued fraction for Q(a, x), modified Lentz
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  double q = std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  return 1.0 - q;
}

double chisq_cdf(int dof, double x) {
  if (dof < 1) throw std::domain_error("chisq_cdf: dof < 1");
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * dof, 0.5 * x);
}

double nchisq_upper_point(const NChiSqParams& q, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("nchisq_upper_point: alpha outside (0,1)");
  if (q.dof < 1) throw std::domain_error("nchisq_upper_point: dof < 1");
  if (q.n_param <= 0.0) throw std::domain_error("nchisq_upper_point: N <= 0");
  // P(K >= k) = 1 - cdf(k-1) is decreasing in k and equals 1 at k=0, so the
  // largest k keeping it >= alpha is the step before the tail drops below.
  int n = q.dof;
  double N = q.n_param;
  double qq = N / (N + 1.0);
  // powl keeps the boundary case P(K >= k) == alpha exact for dyadic N
  long double term = powl((long double)(N + 1.0), -(long double)n);
  long double cdf = 0.0L;
  int k = 0;
  for (;;) {
    // tail at threshold k+1 is 1 - cdf(k); ties within 1e-12 relative count
    // as >= alpha so transcendental rounding cannot flip the equality case
    cdf += term;
    if ((double)(1.0L - cdf) < alpha * (1.0 - 1e-12)) break;
    term *= qq * (k + (long double)n) / (k + 1.0L);
    ++k;
    if (k > 100000000)
      throw std::runtime_error("nchisq_upper_point: threshold out of range");
  }
  return (2.0 / N) * k;
}

double nchisq_cdf(const NChiSqParams& q, double x) {
  if (q.dof < 1) throw std::domain_error("nchisq_cdf: dof < 1");
  if (q.n_param <= 0.0) throw std::domain_error("nchisq_cdf: N <= 0");
  if (x < 0.0) return 0.0;
  double v = q.n_param * x / 2.0;
  double k0 = std::floor(v + 1e-12);
  if (k0 > 2e9) return 1.0;
  return negbin_cdf(q.dof, q.n_param, (int)k0);
}

}  // namespace qgt
