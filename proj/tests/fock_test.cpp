#include "qgt/fock.hpp"

#include <cmath>
#include <complex>
#include <vector>
#include <gtest/gtest.h>

#include "qgt/distributions.hpp"
#include "oracle_helpers.hpp"

using namespace qgt;
using Eigen::MatrixXcd;

namespace {

FockOperator identity_op(int d) {
  return FockOperator{{d}, MatrixXcd::Identity(d, d), true};
}

FockOperator quadrature(int d) {
  FockOperator a = annihilation(d);
  return FockOperator{{d}, MatrixXcd(a.data + a.data.adjoint()), true};
}

FockOperator number_op(int d) {
  FockOperator a = annihilation(d);
  return FockOperator{{d}, MatrixXcd(a.data.adjoint() * a.data), true};
}

double max_abs(const MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

// Deterministic pseudo-random Hermitian block, seeded per call site.
MatrixXcd pseudo_hermitian(int d, unsigned seed) {
  MatrixXcd m(d, d);
  unsigned long long x = 0x9e3779b97f4a7c15ull + seed;
  auto next = [&x]() {
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    return static_cast<double>(x % 2000) / 1000.0 - 1.0;
  };
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(next(), next());
  m = (m + m.adjoint()).eval();
  return m;
}

}  // namespace

TEST(Annihilation, MatrixElementsAndValidation) {
  FockOperator a = annihilation(5);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) {
      double want = (c == r + 1) ? std::sqrt(static_cast<double>(c)) : 0.0;
      EXPECT_NEAR(std::abs(a.data(r, c) - cplx(want, 0)), 0.0, 1e-15);
    }
  EXPECT_THROW(annihilation(1), std::invalid_argument);
}

TEST(CoherentState, AmplitudesAndLeakage) {
  cplx xi(0.8, -0.3);
  auto [v, rep] = coherent_state(xi, 25);
  double a2 = std::norm(xi);
  long double norm2 = 0.0L;
  for (int k = 0; k < 25; ++k) {
    long double lg = -a2 / 2.0L + k * std::log(std::abs(xi)) -
                     0.5L * std::lgamma(static_cast<long double>(k) + 1.0L);
    long double mag = std::exp(static_cast<double>(lg));
    // the returned operator is the projector; amplitudes sit on its diagonal
    double amp = std::sqrt(std::max(0.0, v.data(k, k).real()));
    EXPECT_NEAR(amp, static_cast<double>(mag), 1e-12);
    norm2 += mag * mag;
  }
  EXPECT_NEAR(rep.leakage, static_cast<double>(1.0L - norm2), 1e-12);
  EXPECT_THROW(coherent_state(cplx(3.0, 0.0), 2), std::runtime_error);
}

TEST(GaussianState, ThermalDiagonalIsGeometric) {
  auto [rho, rep] = gaussian_state({cplx(0, 0), 1.0}, 60);
  for (int k = 0; k < 60; ++k)
    EXPECT_NEAR(rho.data(k, k).real(), std::pow(0.5, k + 1), 1e-10) << k;
  EXPECT_TRUE(rho.hermitian_flag);
  // off-diagonals vanish for a thermal state
  MatrixXcd off = rho.data;
  off.diagonal().setZero();
  EXPECT_LT(max_abs(off), 1e-14);
}

TEST(GaussianState, DiagonalMatchesNumberLaw) {
  GaussianParams p{cplx(1.0, 0.0), 0.5};
  auto [rho, rep] = gaussian_state(p, 80);
  for (int k = 0; k <= 20; ++k)
    EXPECT_NEAR(rho.data(k, k).real(),
                static_cast<double>(oracle::number_pmf(1.0, 0.5, k)), 1e-8)
        << k;
}

TEST(GaussianState, DualityBothWaysAtRequestedLeak) {
  std::vector<GaussianParams> grid = {
      {cplx(0, 0), 1.0}, {cplx(1, 0), 0.5}, {cplx(1, 1), 0.1}};
  for (const auto& p : grid) {
    int dim = suggest_dim(p, 1e-8);
    auto [rho, rep] = gaussian_state(p, dim, 1e-7);
    EXPECT_LT(rep.leakage, 1e-8);
    long double diag_sum = 0.0L, pmf_sum = 0.0L;
    for (int k = 0; k < dim; ++k) {
      double pk = number_pmf(p, k);
      EXPECT_NEAR(rho.data(k, k).real(), pk, 1e-8);
      diag_sum += rho.data(k, k).real();
      pmf_sum += pk;
    }
    // the kept mass agrees with the number law's partial sum at the order of
    // the requested truncation budget (the unitary also rotates tail mass)
    EXPECT_NEAR(static_cast<double>(diag_sum - pmf_sum), 0.0, 2e-8);
  }
}

TEST(GaussianState, MomentsTraceAndPositivity) {
  GaussianParams p{cplx(0.7, 0.4), 0.6};
  auto [rho, rep] = gaussian_state(p, 70);
  double tr = rho.data.trace().real();
  EXPECT_LE(tr, 1.0 + 1e-12);
  EXPECT_GE(tr, 1.0 - rep.leakage - 1e-12);
  double mean = trace_against(rho, number_op(70));
  EXPECT_NEAR(mean, std::norm(p.theta) + p.n_param, 1e-6);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho.data);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
}

TEST(GaussianState, Validation) {
  EXPECT_THROW(gaussian_state({cplx(0, 0), 1.0}, 1), std::invalid_argument);
  EXPECT_THROW(gaussian_state({cplx(0, 0), -0.5}, 10), std::invalid_argument);
  // dim 3 cannot hold mean photon number 1.5 at the default budget
  EXPECT_THROW(gaussian_state({cplx(1, 0), 0.5}, 3), std::runtime_error);
}

TEST(MeanShift, UnitaryWithExactInverse) {
  cplx th(0.7, -0.2);
  FockOperator w = mean_shift(th, 30);
  EXPECT_LT(max_abs(w.data * w.data.adjoint() - MatrixXcd::Identity(30, 30)),
            1e-10);
  FockOperator winv = mean_shift(-th, 30);
  EXPECT_LT(max_abs(w.data * winv.data - MatrixXcd::Identity(30, 30)), 1e-9);
  EXPECT_THROW(mean_shift(th, 1), std::invalid_argument);
}

TEST(MeanShift, DisplacesTheVacuumToACoherentState) {
  cplx th(0.9, 0.3);
  FockOperator w = mean_shift(th, 40);
  auto [v, rep] = coherent_state(th, 40);
  Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(40);
  vac(0) = 1.0;
  Eigen::VectorXcd got = w.data * vac;
  // recover the unit vector from the projector's first column; phases agree
  // as well, not just magnitudes, because the k=0 amplitude is real positive
  Eigen::VectorXcd want = v.data.col(0) / std::sqrt(v.data(0, 0).real());
  EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(PhaseShift, DiagonalAndCovariance) {
  double t = 0.7;
  FockOperator r = phase_shift(t, 25);
  for (int k = 0; k < 25; ++k)
    EXPECT_LT(std::abs(r.data(k, k) - std::exp(cplx(0, k * t))), 1e-14);

  GaussianParams p{cplx(0.6, 0.0), 0.4};
  auto [rho, rep] = gaussian_state(p, 50);
  GaussianParams q{p.theta * std::exp(cplx(0, t)), p.n_param};
  auto [rho2, rep2] = gaussian_state(q, 50);
  FockOperator r50 = phase_shift(t, 50);
  MatrixXcd moved = r50.data * rho.data * r50.data.adjoint();
  EXPECT_LT(max_abs(moved - rho2.data), 1e-9);
}

TEST(BeamSplitter, CoherentSplitAndSignConvention) {
  const int d = 40;
  FockOperator b = beam_splitter(M_PI / 4, d, d);
  auto unit_vec = [](const FockOperator& proj) {
    return Eigen::VectorXcd(proj.data.col(0) /
                            std::sqrt(proj.data(0, 0).real()));
  };
  Eigen::VectorXcd va = unit_vec(coherent_state(cplx(1, 0), d).first);
  Eigen::VectorXcd vb = unit_vec(coherent_state(cplx(0, 0), d).first);
  Eigen::VectorXcd in(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      in(static_cast<long long>(i) * d + j) = va(i) * vb(j);
  Eigen::VectorXcd out = b.data * in;

  double s = 1.0 / std::sqrt(2.0);
  Eigen::VectorXcd ta = unit_vec(coherent_state(cplx(s, 0), d).first);
  Eigen::VectorXcd tb = unit_vec(coherent_state(cplx(-s, 0), d).first);
  Eigen::VectorXcd target(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      target(static_cast<long long>(i) * d + j) = ta(i) * tb(j);
  double fid = std::norm(target.dot(out));
  EXPECT_GT(fid, 1.0 - 1e-6);

  // mode-B mean must come out negative under this sign convention
  FockOperator rho_out{{d, d}, MatrixXcd(out * out.adjoint()), true};
  FockOperator xb = tensor({identity_op(d), quadrature(d)});
  EXPECT_NEAR(trace_against(rho_out, xb), -std::sqrt(2.0), 1e-6);
}

TEST(BeamSplitter, ConservesTotalPhotonNumber) {
  const int d = 12;
  FockOperator b = beam_splitter(0.9, d, d);
  FockOperator ntot = tensor({number_op(d), identity_op(d)});
  ntot.data += tensor({identity_op(d), number_op(d)}).data;
  EXPECT_LT(max_abs(b.data * ntot.data - ntot.data * b.data), 1e-10);
}

TEST(GatePlans, ConcentratorSchedule) {
  GatePlan p = concentrator_plan(4);
  ASSERT_EQ(p.gates.size(), 3u);
  for (int j = 1; j < 4; ++j) {
    EXPECT_EQ(p.gates[j - 1].a, 0);
    EXPECT_EQ(p.gates[j - 1].b, j);
    EXPECT_NEAR(p.gates[j - 1].t, std::atan(1.0 / std::sqrt(double(j))), 1e-15);
  }
  for (int j = 0; j < 4; ++j) EXPECT_EQ(p.final_perm[j], j);
}

TEST(GatePlans, MeanMapsOfBothSplitters) {
  const int m = 2, n = 3;
  cplx th(0.7, 0.2), et(-0.3, 0.5);
  std::vector<cplx> mu(m + n);
  for (int j = 0; j < m; ++j) mu[j] = th;
  for (int j = 0; j < n; ++j) mu[m + j] = et;

  auto u2 = plan_apply_means(splitter_plan(m, n, SplitterVariant::U2), mu);
  double c0 = std::sqrt(double(m) * n / (m + n));
  double c1 = 1.0 / std::sqrt(double(m + n));
  EXPECT_LT(std::abs(u2[0] - c1 * (double(m) * th + double(n) * et)), 1e-12);
  EXPECT_LT(std::abs(u2[1] - c0 * (th - et)), 1e-12);
  for (int j = 2; j < m + n; ++j) EXPECT_LT(std::abs(u2[j]), 1e-12);

  auto u3 = plan_apply_means(splitter_plan(m, n, SplitterVariant::U3), mu);
  EXPECT_LT(std::abs(u3[0] - std::sqrt(double(m)) * th), 1e-12);
  EXPECT_LT(std::abs(u3[1] - std::sqrt(double(n)) * et), 1e-12);
  for (int j = 2; j < m + n; ++j) EXPECT_LT(std::abs(u3[j]), 1e-12);
}

TEST(Concentrator, CoherentInputsConcentrateExactly) {
  const int d = 24;
  cplx th(1.0, 0.0);
  FockOperator u = concentrator(2, d);
  auto [r1, q1] = gaussian_state({th, 0.0}, d);
  FockOperator rho = tensor({r1, r1});
  MatrixXcd moved = u.data * rho.data * u.data.adjoint();

  auto [t0, s0] = gaussian_state({std::sqrt(2.0) * th, 0.0}, d);
  auto [t1, s1] = gaussian_state({cplx(0, 0), 0.0}, d, 1.0);
  FockOperator target = tensor({t0, t1});
  FockOperator diff{{d, d}, MatrixXcd(moved - target.data), true};
  // the identity is exact in infinite dimension; at d = 24 only the
  // truncation residual of the rotated Poisson tails remains
  EXPECT_LT(trace_norm(diff), 1e-8);
}

TEST(Concentrator, CertificateAgreesWithDenseTraceNorm) {
  const int d = 24;
  cplx th(0.6, 0.2);
  const double N = 0.4;
  IdentityCertificate cert = concentrator_identity_certificate(2, th, N, d);
  EXPECT_EQ(cert.dim_each, d);
  ASSERT_EQ(cert.step_bounds.size(), 1u);
  EXPECT_LT(std::abs(cert.final_means[0] - std::sqrt(2.0) * th), 1e-12);

  FockOperator u = concentrator(2, d);
  auto [r1, q1] = gaussian_state({th, N}, d, 1.0);
  FockOperator rho = tensor({r1, r1});
  auto [t0, s0] = gaussian_state({std::sqrt(2.0) * th, N}, d, 1.0);
  auto [t1, s1] = gaussian_state({cplx(0, 0), N}, d, 1.0);
  FockOperator target = tensor({t0, t1});
  FockOperator diff{
      {d, d}, MatrixXcd(u.data * rho.data * u.data.adjoint() - target.data),
      true};
  double direct = trace_norm(diff);
  EXPECT_GE(cert.trace_norm_bound, direct - 1e-12);
  EXPECT_NEAR(cert.trace_norm_bound, direct, 1e-7);
  EXPECT_LT(direct, 1e-5);
}

TEST(Splitter, CertificateAgreesWithDenseTraceNorm) {
  const int d = 22;
  cplx th(0.5, -0.3), et(-0.4, 0.1);
  const double N = 0.3;
  IdentityCertificate cert = splitter_identity_certificate(
      1, 1, SplitterVariant::U2, th, et, N, N, d);
  ASSERT_EQ(cert.final_means.size(), 2u);
  double c0 = std::sqrt(0.5), c1 = std::sqrt(0.5);
  EXPECT_LT(std::abs(cert.final_means[0] - c1 * (th + et)), 1e-12);
  EXPECT_LT(std::abs(cert.final_means[1] - c0 * (th - et)), 1e-12);

  FockOperator u = splitter_two_sample(1, 1, SplitterVariant::U2, d);
  auto [ra, qa] = gaussian_state({th, N}, d, 1.0);
  auto [rb, qb] = gaussian_state({et, N}, d, 1.0);
  FockOperator rho = tensor({ra, rb});
  auto [t0, s0] = gaussian_state({c1 * (th + et), N}, d, 1.0);
  auto [t1, s1] = gaussian_state({c0 * (th - et), N}, d, 1.0);
  FockOperator target = tensor({t0, t1});
  FockOperator diff{
      {d, d}, MatrixXcd(u.data * rho.data * u.data.adjoint() - target.data),
      true};
  double direct = trace_norm(diff);
  EXPECT_GE(cert.trace_norm_bound, direct - 1e-12);
  EXPECT_NEAR(cert.trace_norm_bound, direct, 1e-7);
  EXPECT_LT(direct, 1e-5);
}

TEST(Splitter, ThreeModeBlockReductionDense) {
  // U3 on (m,n) = (2,1): slot 0 concentrates block 1, slot 1 carries block 2,
  // slot 2 is block 1's thermal ancilla.
  const int d = 10;
  cplx th(0.3, 0.1), et(0.2, -0.1);
  const double M = 0.2, N = 0.35;
  FockOperator u = splitter_two_sample(2, 1, SplitterVariant::U3, d);
  auto [r1, q1] = gaussian_state({th, M}, d, 1.0);
  auto [r2, q2] = gaussian_state({et, N}, d, 1.0);
  FockOperator rho = tensor({r1, r1, r2});
  auto [t0, s0] = gaussian_state({std::sqrt(2.0) * th, M}, d, 1.0);
  auto [t2, s2] = gaussian_state({cplx(0, 0), M}, d, 1.0);
  FockOperator target = tensor({t0, r2, t2});
  FockOperator diff{
      {d, d, d},
      MatrixXcd(u.data * rho.data * u.data.adjoint() - target.data), true};
  // truncation residual at d = 10 sits near 1.4e-5 and shrinks with d
  EXPECT_LT(trace_norm(diff), 5e-5);
}

TEST(Splitter, ThermalInputsMakeTheIdentityExact) {
  IdentityCertificate c1 =
      concentrator_identity_certificate(3, cplx(0, 0), 0.4, 40);
  EXPECT_LT(c1.trace_norm_bound, 1e-7);
  IdentityCertificate c2 = splitter_identity_certificate(
      2, 2, SplitterVariant::U3, cplx(0, 0), cplx(0, 0), 0.5, 0.5, 40);
  EXPECT_LT(c2.trace_norm_bound, 1e-7);
}

TEST(Splitter, CrossSplitterRequiresEqualNumbers) {
  EXPECT_THROW(
      splitter_identity_certificate(1, 1, SplitterVariant::U2, cplx(0.5, 0),
                                    cplx(0.2, 0), 0.2, 0.3, 16),
      std::invalid_argument);
}

TEST(TensorPermute, RoundTripOnNonuniformDims) {
  FockOperator a{{2}, pseudo_hermitian(2, 1), false};
  FockOperator b{{3}, pseudo_hermitian(3, 2), false};
  FockOperator c{{4}, pseudo_hermitian(4, 3), false};
  a.data(0, 1) += cplx(0.0, 0.5);  // break hermiticity on purpose
  FockOperator t = tensor({a, b, c});
  ASSERT_EQ(t.dims, (std::vector<int>{2, 3, 4}));

  FockOperator p = permute_modes(t, {2, 0, 1});
  ASSERT_EQ(p.dims, (std::vector<int>{4, 2, 3}));
  FockOperator back = permute_modes(p, {1, 2, 0});
  ASSERT_EQ(back.dims, t.dims);
  EXPECT_EQ(max_abs(back.data - t.data), 0.0);

  // spot entry: permuted element equals the source element with digits moved
  // (flat index has mode 0 most significant)
  // row (i4,i2,i3) of p = row (i2,i3,i4) of t
  long long row_t = (1 * 3 + 2) * 4 + 3;  // (1,2,3)
  long long row_p = (3 * 2 + 1) * 3 + 2;  // (3,1,2)
  EXPECT_EQ(p.data(row_p, row_p), t.data(row_t, row_t));
}

TEST(TensorPermute, TraceFactorizes) {
  // dim 24 keeps the thermal N = 0.7 tail under the default leak budget
  auto [r1, q1] = gaussian_state({cplx(0.5, 0), 0.3}, 24);
  auto [r2, q2] = gaussian_state({cplx(0, 0), 0.7}, 24);
  FockOperator t1 = number_op(24);
  FockOperator t2 = identity_op(24);
  double joint = trace_against(tensor({r1, r2}), tensor({t1, t2}));
  double split = trace_against(r1, t1) * trace_against(r2, t2);
  EXPECT_NEAR(joint, split, 1e-12);
}

TEST(TraceAgainst, IdentityAndTailProjector) {
  auto [rho, rep] = gaussian_state({cplx(0, 0), 1.0}, 60);
  EXPECT_NEAR(trace_against(rho, identity_op(60)), 1.0 - rep.leakage, 1e-10);
  FockOperator tail = identity_op(60);
  tail.data(0, 0) = 0.0;
  EXPECT_NEAR(trace_against(rho, tail), 0.5, 1e-10);
  EXPECT_THROW(trace_against(rho, identity_op(59)), std::invalid_argument);
}

TEST(PhaseAverage, ProjectsOntoFirstModeDiagonal) {
  FockOperator t{{6}, pseudo_hermitian(6, 7), true};
  FockOperator avg = phase_average(t, 12);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      cplx want = (i == j) ? t.data(i, j) : cplx(0, 0);
      EXPECT_LT(std::abs(avg.data(i, j) - want), 1e-12);
    }
  EXPECT_THROW(phase_average(t, 11), std::invalid_argument);
}

TEST(PhaseAverage, LeavesOtherModesAlone) {
  FockOperator t{{3, 4}, pseudo_hermitian(12, 11), true};
  FockOperator avg = phase_average(t, 8);
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 4; ++a)
      for (int j = 0; j < 3; ++j)
        for (int b = 0; b < 4; ++b) {
          cplx want = (i == j) ? t.data(i * 4 + a, j * 4 + b) : cplx(0, 0);
          EXPECT_LT(std::abs(avg.data(i * 4 + a, j * 4 + b) - want), 1e-12);
        }
}

TEST(TraceNorm, KnownSpectraAndUpperBound) {
  MatrixXcd m = MatrixXcd::Zero(3, 3);
  m(0, 0) = 3.0;
  m(1, 1) = -1.0;
  m(2, 2) = 0.5;
  EXPECT_NEAR(trace_norm({{3}, m, true}), 4.5, 1e-12);

  MatrixXcd nilp = MatrixXcd::Zero(2, 2);
  nilp(0, 1) = 2.0;
  EXPECT_NEAR(trace_norm({{2}, nilp, false}), 2.0, 1e-12);

  FockOperator r{{5}, pseudo_hermitian(5, 13), true};
  EXPECT_LE(trace_norm(r), trace_norm_upper_bound(r) + 1e-12);
}

TEST(AllocationGuard, RefusesOversizedDenseMatrices) {
  EXPECT_GT(max_bytes(), 0);
  EXPECT_THROW(check_alloc(1LL << 20, 1LL << 20), std::runtime_error);
  check_alloc(100, 100);  // small request passes
}

// An operator commuting with every W_xi (x) I must act as I (x) T'.  Checked
// on one candidate of each form: the product form commutes and is recovered
// by averaging its first-mode diagonal blocks; a candidate with first-mode
// coherences fails both ways by a wide margin.
TEST(Invariance, CommutingWithShiftsForcesProductForm) {
  const int d0 = 8, d1 = 5;
  std::vector<cplx> grid = {cplx(0.3, 0), cplx(0, 0.7), cplx(-0.2, 0.5),
                            cplx(1.1, -0.4)};

  auto kron = [&](const MatrixXcd& x, const MatrixXcd& y) {
    return tensor({FockOperator{{static_cast<int>(x.rows())}, x, false},
                   FockOperator{{static_cast<int>(y.rows())}, y, false}})
        .data;
  };
  auto commutator_norm = [&](const MatrixXcd& t) {
    double worst = 0.0;
    for (cplx xi : grid) {
      MatrixXcd wfull =
          kron(mean_shift(xi, d0).data, MatrixXcd::Identity(d1, d1));
      worst = std::max(worst, max_abs(wfull * t - t * wfull));
    }
    return worst;
  };
  auto reconstruction_gap = [&](const MatrixXcd& t) {
    MatrixXcd tp = MatrixXcd::Zero(d1, d1);
    for (int i = 0; i < d0; ++i)
      tp += t.block(i * d1, i * d1, d1, d1);
    tp /= d0;
    return max_abs(t - kron(MatrixXcd::Identity(d0, d0), tp));
  };

  MatrixXcd tprime = pseudo_hermitian(d1, 21);
  MatrixXcd good = kron(MatrixXcd::Identity(d0, d0), tprime);
  EXPECT_LT(commutator_norm(good), 1e-6);
  EXPECT_LT(reconstruction_gap(good), 1e-6);

  MatrixXcd hop = MatrixXcd::Zero(d0, d0);
  hop(0, 1) = 1.0;
  hop(1, 0) = 1.0;
  MatrixXcd bad = kron(hop, MatrixXcd::Identity(d1, d1));
  EXPECT_GT(commutator_norm(bad), 0.1);
  EXPECT_GT(reconstruction_gap(bad), 0.1);
}

// Replacing a test by its phase average never lowers the worst power over
// the phase orbit: min_t Tr(rho_{r e^{it}} T) <= Tr(rho_r avg(T)).
TEST(Invariance, PhaseAveragingHelpsAgainstThePhaseOrbit) {
  const int d = 30, g = 64;
  const double r = 0.8, N = 0.3;
  auto [c, rep] = coherent_state(cplx(r, 0), d);
  FockOperator t{{d}, MatrixXcd(c.data * c.data.adjoint()), true};
  FockOperator avg = phase_average(t, g);

  auto [rho0, q0] = gaussian_state({cplx(r, 0), N}, d);
  double averaged_power = trace_against(rho0, avg);
  double worst = 1.0;
  for (int m = 0; m < g; ++m) {
    double ph = 2.0 * M_PI * m / g;
    auto [rhom, qm] = gaussian_state({r * std::exp(cplx(0, ph)), N}, d);
    worst = std::min(worst, trace_against(rhom, t));
  }
  EXPECT_LE(worst, averaged_power + 1e-9);
  // and the average is strictly better than the worst phase here
  EXPECT_GT(averaged_power, worst + 1e-3);
}
