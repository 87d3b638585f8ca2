// Command-line front end: tabulate count laws, build tests, emit error
// curves, run the verification suites, and drive the estimator.

#include <complex>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qgt/distributions.hpp"
#include "qgt/estimation.hpp"
#include "qgt/fock.hpp"
#include "qgt/heterodyne.hpp"
#include "qgt/hypothesis_tests.hpp"

using namespace qgt;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(12);
  os << v;
  return os.str();
}

// Accepts "a", "bi", "a+bi", "a-bi" (also bare "i" / "-i").
cplx parse_complex(const std::string& raw) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw std::domain_error("empty complex literal");

  auto to_double = [](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    size_t used = 0;
    double v = std::stod(t, &used);
    if (used != t.size()) throw std::domain_error("bad complex literal");
    return v;
  };

  if (s.back() != 'i') return cplx(to_double(s), 0.0);
  std::string body = s.substr(0, s.size() - 1);
  // split at the last sign that is not leading and not part of an exponent
  for (size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') &&
        body[i - 1] != 'e' && body[i - 1] != 'E') {
      return cplx(to_double(body.substr(0, i)), to_double(body.substr(i)));
    }
  }
  return cplx(0.0, to_double(body));
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  if (parts.size() == 1) return {std::stod(parts[0])};
  if (parts.size() != 3) throw std::domain_error("grid must be x or a:b:step");
  double a = std::stod(parts[0]), b = std::stod(parts[1]),
         step = std::stod(parts[2]);
  if (!(step > 0.0) || b < a) throw std::domain_error("grid needs step > 0, b >= a");
  std::vector<double> g;
  long long count = static_cast<long long>((b - a) / step + 1e-9) + 1;
  for (long long i = 0; i < count; ++i) g.push_back(a + i * step);
  return g;
}

struct Ctx {
  std::string format = "csv";
  bool json() const { return format == "json"; }
  void emit(const ordered_json& j, const std::string& csv) const {
    if (json())
      std::cout << j.dump() << "\n";
    else
      std::cout << csv;
  }
};

// ------------------------------------------------------------------- dist
int cmd_dist(const Ctx& ctx, const std::string& theta_s, double nparam,
             long long kmax) {
  GaussianParams p{parse_complex(theta_s), nparam};
  ordered_json rows = ordered_json::array();
  std::ostringstream csv;
  csv << "k,pmf,cdf\n";
  long long k = 0;
  while (true) {
    double pk = number_pmf(p, static_cast<int>(k));
    double ck = number_cdf(p, static_cast<int>(k));
    rows.push_back({{"k", k}, {"pmf", pk}, {"cdf", ck}});
    csv << k << "," << fmt(pk) << "," << fmt(ck) << "\n";
    ++k;
    if (kmax >= 0 ? k > kmax : ck >= 1.0 - 1e-9) break;
    if (k > 2000000) throw std::runtime_error("cutoff not reached");
  }
  ordered_json j{{"schema", 1},
                 {"theta", theta_s},
                 {"nparam", nparam},
                 {"rows", rows}};
  ctx.emit(j, csv.str());
  return 0;
}

// ------------------------------------------------------------- test build
const char* pre_name(ComposedTest::PreKind k) {
  switch (k) {
    case ComposedTest::PreKind::WShifts: return "shifts";
    case ComposedTest::PreKind::Concentrator: return "concentrator";
    case ComposedTest::PreKind::SplitterU2: return "U2";
    case ComposedTest::PreKind::SplitterU3: return "U3";
  }
  return "?";
}
const char* core_name(ComposedTest::CoreKind k) {
  switch (k) {
    case ComposedTest::CoreKind::chi2: return "chi2";
    case ComposedTest::CoreKind::mean: return "mean";
    case ComposedTest::CoreKind::t: return "t";
    case ComposedTest::CoreKind::F: return "f";
  }
  return "?";
}

int cmd_test_build(const Ctx& ctx, const std::string& kind, int n, int m,
                   double alpha, double n0, double nparam, double r0,
                   const std::string& theta_s, const std::string& eta_s,
                   long long smax) {
  if (kind == "chi2") {
    ThresholdTest t = build_chi2_test(n, n0, alpha);
    ordered_json j{{"schema", 1}, {"test", "chi2"}, {"n", n},
                   {"N0", n0},    {"alpha", alpha}, {"K0", t.cutoff},
                   {"gamma", t.gamma}};
    std::ostringstream csv;
    csv << "K0," << t.cutoff << "\ngamma," << fmt(t.gamma) << "\n";
    ctx.emit(j, csv.str());
    return 0;
  }
  if (kind == "mean") {
    ThresholdTest t = build_mean_test(r0, nparam, alpha);
    ordered_json j{{"schema", 1}, {"test", "mean"},  {"R", r0},
                   {"N", nparam}, {"alpha", alpha},  {"kR", t.cutoff},
                   {"gamma", t.gamma}};
    std::ostringstream csv;
    csv << "kR," << t.cutoff << "\ngamma," << fmt(t.gamma) << "\n";
    ctx.emit(j, csv.str());
    return 0;
  }
  if (kind == "t") {
    ConditionalTest ct = ConditionalTest::t_test(n, alpha);
    ordered_json rows = ordered_json::array();
    std::ostringstream csv;
    csv << "s,c,gamma\n";
    for (long long s = 0; s <= smax; ++s) {
      auto row = ct.t_row(s);
      rows.push_back({{"s", s}, {"c", row.c}, {"gamma", row.gamma}});
      csv << s << "," << row.c << "," << fmt(row.gamma) << "\n";
    }
    ordered_json j{{"schema", 1}, {"test", "t"}, {"n", n},
                   {"alpha", alpha}, {"rows", rows}};
    ctx.emit(j, csv.str());
    return 0;
  }
  if (kind == "f") {
    ConditionalTest ct = ConditionalTest::f_test(m, n, alpha);
    ordered_json rows = ordered_json::array();
    std::ostringstream csv;
    csv << "s,c1,c2,g1,g2\n";
    for (long long s = 0; s <= smax; ++s) {
      auto row = ct.f_row(s);
      rows.push_back({{"s", s},
                      {"c1", row.c1},
                      {"c2", row.c2},
                      {"g1", row.g1},
                      {"g2", row.g2}});
      csv << s << "," << row.c1 << "," << row.c2 << "," << fmt(row.g1) << ","
          << fmt(row.g2) << "\n";
    }
    ordered_json j{{"schema", 1}, {"test", "f"}, {"m", m}, {"n", n},
                   {"alpha", alpha}, {"rows", rows}};
    ctx.emit(j, csv.str());
    return 0;
  }

  // composed problems h1..h8
  static const std::map<std::string, ComposedTest::Problem> kProblems = {
      {"h1", ComposedTest::Problem::H1}, {"h2", ComposedTest::Problem::H2},
      {"h3", ComposedTest::Problem::H3}, {"h4", ComposedTest::Problem::H4},
      {"h5", ComposedTest::Problem::H5}, {"h6", ComposedTest::Problem::H6},
      {"h7", ComposedTest::Problem::H7}, {"h8", ComposedTest::Problem::H8}};
  auto it = kProblems.find(kind);
  if (it == kProblems.end()) throw std::domain_error("unknown test kind");
  ComposeParams cp;
  cp.n = n;
  cp.m = m;
  cp.alpha = alpha;
  cp.R0 = r0;
  cp.N = nparam;
  cp.N0 = n0;
  cp.theta = parse_complex(theta_s);
  cp.eta = parse_complex(eta_s);
  ComposedTest ct = compose_test(it->second, cp);

  ordered_json j{{"schema", 1},
                 {"problem", kind},
                 {"pre", pre_name(ct.pre)},
                 {"core", core_name(ct.core_kind)},
                 {"total_modes", ct.total_modes},
                 {"core_modes", ct.core_modes},
                 {"passthrough_modes", ct.passthrough_modes}};
  std::ostringstream csv;
  csv << "problem," << kind << "\npre," << pre_name(ct.pre) << "\ncore,"
      << core_name(ct.core_kind) << "\ntotal_modes," << ct.total_modes << "\n";
  if (ct.core_kind == ComposedTest::CoreKind::chi2 ||
      ct.core_kind == ComposedTest::CoreKind::mean) {
    j["cutoff"] = ct.threshold_core.cutoff;
    j["gamma"] = ct.threshold_core.gamma;
    csv << "cutoff," << ct.threshold_core.cutoff << "\ngamma,"
        << fmt(ct.threshold_core.gamma) << "\n";
  } else {
    j["core_alpha"] = ct.cond_core->level();
    if (ct.core_kind == ComposedTest::CoreKind::F)
      j["f_block1"] = ct.f_block1;
  }
  ctx.emit(j, csv.str());
  return 0;
}

// ------------------------------------------------------------------ curve
int cmd_curve(const Ctx& ctx, int figure, const std::string& kind, int n,
              int m, double alpha, double n0, double nparam, double r0,
              const std::string& grid_s) {
  std::vector<double> grid = parse_grid(grid_s);
  std::ostringstream csv;
  ordered_json rows = ordered_json::array();
  std::vector<std::string> cols;

  if (figure != 0) {
    auto pts = comparison_curve(
        figure == 1 ? ComparisonFigure::fig1 : ComparisonFigure::fig2, grid);
    cols = {"x", "beta_number", "beta_heterodyne"};
    csv << "x,beta_number,beta_heterodyne\n";
    for (const auto& pt : pts) {
      csv << fmt(pt.x) << "," << fmt(pt.beta_number) << ","
          << fmt(pt.beta_heterodyne) << "\n";
      rows.push_back({pt.x, pt.beta_number, pt.beta_heterodyne});
    }
  } else if (kind == "chi2") {
    ThresholdTest t = build_chi2_test(n, n0, alpha);
    cols = {"x", "beta"};
    csv << "x,beta\n";
    for (double x : grid) {
      double beta = 1.0 - chi2_power(t, n, x);
      csv << fmt(x) << "," << fmt(beta) << "\n";
      rows.push_back({x, beta});
    }
  } else if (kind == "mean") {
    ThresholdTest t = build_mean_test(r0, nparam, alpha);
    cols = {"x", "beta"};
    csv << "x,beta\n";
    for (double x : grid) {
      double beta = 1.0 - mean_test_power(t, x, nparam);
      csv << fmt(x) << "," << fmt(beta) << "\n";
      rows.push_back({x, beta});
    }
  } else if (kind == "t") {
    cols = {"x", "beta"};
    csv << "x,beta\n";
    for (double x : grid) {
      double beta = t_test_type2(n, alpha, x, nparam);
      csv << fmt(x) << "," << fmt(beta) << "\n";
      rows.push_back({x, beta});
    }
  } else if (kind == "f") {
    cols = {"x", "beta"};
    csv << "x,beta\n";
    for (double x : grid) {
      double beta = f_test_type2(m, n, alpha, x, nparam);
      csv << fmt(x) << "," << fmt(beta) << "\n";
      rows.push_back({x, beta});
    }
  } else {
    throw std::domain_error("curve needs --figure 1|2 or a test kind");
  }

  ordered_json j{{"schema", 1}, {"columns", cols}, {"rows", rows}};
  ctx.emit(j, csv.str());
  return 0;
}

// ----------------------------------------------------------------- verify
struct SuiteResult {
  std::string name;
  bool pass;
  std::string detail;
};

SuiteResult suite_lemma_prob() {
  double worst = 0.0, leak = 0.0;
  for (cplx th : {cplx(0, 0), cplx(0.5, 0), cplx(1, 0), cplx(1, 1)})
    for (double N : {0.1, 0.5, 1.0}) {
      GaussianParams p{th, N};
      int dim = suggest_dim(p, 1e-8);
      auto [rho, rep] = gaussian_state(p, dim, 1e-8);
      leak = std::max(leak, rep.leakage);
      for (int k = 0; k < dim; ++k)
        worst = std::max(worst,
                         std::abs(rho.data(k, k).real() - number_pmf(p, k)));
    }
  std::ostringstream os;
  os << "max |pmf - diagonal| " << fmt(worst) << ", max leakage " << fmt(leak);
  return {"lemma-prob", worst < 1e-8 && leak < 1e-8, os.str()};
}

SuiteResult suite_moments() {
  double worst = 0.0;
  for (cplx th : {cplx(0, 0), cplx(0.5, 0), cplx(1, 0), cplx(1, 1)})
    for (double N : {0.1, 0.5, 1.0}) {
      GaussianParams p{th, N};
      int dim = suggest_dim(p, 1e-12) + 10;
      long double m1 = 0.0L, m2 = 0.0L;
      for (int k = 0; k < dim; ++k) {
        long double pk = number_pmf(p, k);
        m1 += k * pk;
        m2 += static_cast<long double>(k) * k * pk;
      }
      double mw = std::norm(th) + N;
      double vw = N * (N + 1.0) + std::norm(th) * (2.0 * N + 1.0);
      worst = std::max(worst, std::abs(static_cast<double>(m1) - mw) / mw);
      worst = std::max(
          worst, std::abs(static_cast<double>(m2 - m1 * m1) - vw) / vw);
    }
  return {"moments", worst < 1e-6,
          "max relative moment error " + fmt(worst)};
}

SuiteResult suite_concentrator(int n, int dim) {
  if (dim <= 0) dim = 60;
  IdentityCertificate c =
      concentrator_identity_certificate(n, cplx(1.0, 0.0), 0.5, dim);
  std::ostringstream os;
  os << "trace distance bound " << fmt(c.trace_norm_bound) << " at dim "
     << dim;
  return {"concentrator", c.trace_norm_bound < 1e-5, os.str()};
}

SuiteResult suite_splitter(int dim) {
  if (dim <= 0) dim = 50;
  IdentityCertificate a = splitter_identity_certificate(
      1, 1, SplitterVariant::U2, cplx(0.6, 0), cplx(-0.4, 0), 0.3, 0.3,
      std::min(dim, 50));
  IdentityCertificate b = splitter_identity_certificate(
      2, 1, SplitterVariant::U3, cplx(0, 0.5), cplx(0.7, 0), 0.6, 0.4, dim);
  double worst = std::max(a.trace_norm_bound, b.trace_norm_bound);
  return {"splitter", worst < 1e-5, "trace distance bound " + fmt(worst)};
}

SuiteResult suite_appendix_a2() {
  // The difference of the two fixed tests admits the closed form
  // (3/32) e^{-r^2/2} (r^2 - (4/3) r + 2/3); its discriminant is negative,
  // so the difference never vanishes on r > 0.
  double worst = 0.0, min_diff = 1e300;
  for (int i = 0; i <= 48; ++i) {
    double r = 0.25 * i;
    GaussianParams p{cplx(r, 0), 1.0};
    int dim = std::max(suggest_dim(p, 1e-12) + 8, 24);
    auto [rho, rep] = gaussian_state(p, dim, 1e-10);
    FockOperator t1{{dim}, Eigen::MatrixXcd::Identity(dim, dim), true};
    t1.data(0, 0) = 0.0;
    FockOperator t2 = t1;
    t2.data(0, 0) = 0.25;
    t2.data(1, 1) = 0.25;
    t2.data(0, 1) = 0.25;
    t2.data(1, 0) = 0.25;
    double diff = trace_against(rho, t1) - trace_against(rho, t2);
    double form = (3.0 / 32.0) * std::exp(-r * r / 2.0) *
                  (r * r - (4.0 / 3.0) * r + 2.0 / 3.0);
    worst = std::max(worst, std::abs(diff - form));
    // beyond r ~ 7 the true difference drops under double rounding noise,
    // so positivity is only checkable where the form is resolvable
    if (r <= 7.0) min_diff = std::min(min_diff, diff);
  }
  std::ostringstream os;
  os << "max |formula - computed| " << fmt(worst)
     << "; no sign change, min over r <= 7 is " << fmt(min_diff);
  return {"appendix-a2", worst < 1e-10 && min_diff > 0.0, os.str()};
}

SuiteResult suite_hunt_stein() {
  const int d = 30, g = 64;
  const double r = 0.8, N = 0.3;
  auto [t, rep] = coherent_state(cplx(r, 0), d);  // rank-one projector
  FockOperator avg = phase_average(t, g);
  auto [rho0, q0] = gaussian_state({cplx(r, 0), N}, d);
  double averaged = trace_against(rho0, avg);
  double worst_orbit = 1.0;
  for (int m = 0; m < g; ++m) {
    double ph = 2.0 * M_PI * m / g;
    auto [rhom, qm] = gaussian_state({r * std::exp(cplx(0, ph)), N}, d);
    worst_orbit = std::min(worst_orbit, trace_against(rhom, t));
  }
  std::ostringstream os;
  os << "orbit-worst power " << fmt(worst_orbit) << " <= averaged "
     << fmt(averaged);
  return {"hunt-stein", worst_orbit <= averaged + 1e-9, os.str()};
}

SuiteResult suite_composed(int dim) {
  ComposeParams cp;
  cp.n = 2;
  cp.alpha = 0.1;
  cp.N0 = 0.5;
  cp.theta = cplx(0.5, 0);
  ComposedTest ct = compose_test(ComposedTest::Problem::H5, cp);
  int d = dim > 0 ? dim : suggest_dim({cp.theta, 0.5}, 1e-9);
  auto [size, rep] = run_composed(
      ct, std::vector<GaussianParams>(2, {cp.theta, 0.5}),
      std::vector<int>(2, d));
  std::ostringstream os;
  os << "size gap " << fmt(std::abs(size - 0.1)) << " at leakage "
     << fmt(rep.leakage);
  return {"composed", std::abs(size - 0.1) < 1e-5, os.str()};
}

int cmd_verify(const Ctx& ctx, const std::string& suite, int n, int dim) {
  std::vector<SuiteResult> results;
  auto want = [&](const char* name) {
    return suite == "all" || suite == name;
  };
  if (want("lemma-prob")) results.push_back(suite_lemma_prob());
  if (want("moments")) results.push_back(suite_moments());
  if (want("concentrator")) results.push_back(suite_concentrator(n, dim));
  if (want("splitter")) results.push_back(suite_splitter(dim));
  if (want("appendix-a2")) results.push_back(suite_appendix_a2());
  if (want("hunt-stein")) results.push_back(suite_hunt_stein());
  if (want("composed")) results.push_back(suite_composed(dim));
  if (results.empty()) throw std::domain_error("unknown suite: " + suite);

  bool all_pass = true;
  ordered_json arr = ordered_json::array();
  std::ostringstream txt;
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    arr.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    txt << "suite " << r.name << ": " << (r.pass ? "pass" : "FAIL") << " ("
        << r.detail << ")\n";
  }
  ordered_json j{{"schema", 1}, {"suites", arr}};
  ctx.emit(j, txt.str());
  return all_pass ? 0 : 1;
}

// --------------------------------------------------------------- estimate
int cmd_estimate(const Ctx& ctx, int n, double nparam,
                 const std::string& theta_s, long long draws,
                 std::uint64_t seed) {
  UmvueResult r = umvue_simulate(n, nparam, parse_complex(theta_s), draws,
                                 seed);
  double target = nparam > 0.0 ? nparam * (nparam + 1.0) / (n - 1) : 0.0;
  ordered_json j{{"schema", 1},
                 {"n", n},
                 {"N", nparam},
                 {"draws", draws},
                 {"seed", seed},
                 {"mean_est", r.mean_est},
                 {"mean_stderr", r.mean_stderr},
                 {"mse_est", r.mse_est},
                 {"mse_stderr", r.mse_stderr},
                 {"target_mse", target}};
  std::ostringstream csv;
  csv << "mean_est," << fmt(r.mean_est) << "\nmean_stderr,"
      << fmt(r.mean_stderr) << "\nmse_est," << fmt(r.mse_est)
      << "\nmse_stderr," << fmt(r.mse_stderr) << "\ntarget_mse,"
      << fmt(target) << "\n";
  ctx.emit(j, csv.str());
  return 0;
}

// ----------------------------------------------------------------- nchisq
int cmd_nchisq(const Ctx& ctx, int dof, double nparam, double alpha,
               double x) {
  NChiSqParams q{dof, nparam};
  ordered_json j{{"schema", 1}, {"dof", dof}, {"N", nparam}};
  std::ostringstream csv;
  if (alpha > 0.0) {
    double point = nchisq_upper_point(q, alpha);
    double cdf = nchisq_cdf(q, point);
    j["alpha"] = alpha;
    j["upper_point"] = point;
    j["cdf_at_point"] = cdf;
    csv << "upper_point," << fmt(point) << "\ncdf_at_point," << fmt(cdf)
        << "\n";
  } else {
    j["x"] = x;
    j["cdf"] = nchisq_cdf(q, x);
    csv << "cdf," << fmt(nchisq_cdf(q, x)) << "\n";
  }
  ctx.emit(j, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal hypothesis tests for quantum Gaussian states"};
  app.require_subcommand(1);

  Ctx ctx;
  int exit_code = 0;

  // shared knobs; registered per subcommand so they sit after the verb
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", ctx.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  // dist
  std::string d_theta = "0";
  double d_nparam = 0.0;
  long long d_kmax = -1;
  auto* dist = app.add_subcommand("dist", "tabulate the number law");
  dist->add_option("--theta", d_theta, "mean amplitude (a+bi)");
  dist->add_option("--nparam", d_nparam, "thermal number parameter")
      ->required();
  dist->add_option("--kmax", d_kmax, "largest k (default: mass 1-1e-9)");
  add_format(dist);
  dist->callback(
      [&] { exit_code = cmd_dist(ctx, d_theta, d_nparam, d_kmax); });

  // test build
  std::string b_kind;
  int b_n = 1, b_m = 1;
  double b_alpha = 0.1, b_n0 = 0.0, b_nparam = 0.0, b_r0 = 0.0;
  std::string b_theta = "0", b_eta = "0";
  long long b_smax = 20;
  auto* test = app.add_subcommand("test", "test constructions");
  test->require_subcommand(1);
  auto* build = test->add_subcommand("build", "build a test and print it");
  build
      ->add_option("kind", b_kind,
                   "chi2|mean|t|f|h1|h2|h3|h4|h5|h6|h7|h8")
      ->required()
      ->check(CLI::IsMember({"chi2", "mean", "t", "f", "h1", "h2", "h3", "h4",
                             "h5", "h6", "h7", "h8"}));
  build->add_option("-n,--copies", b_n, "copies / second block");
  build->add_option("-m,--mcopies", b_m, "first block size");
  build->add_option("--alpha", b_alpha, "level");
  build->add_option("--n0", b_n0, "null boundary number parameter");
  build->add_option("--nparam", b_nparam, "known number parameter");
  build->add_option("--r0", b_r0, "null mean radius");
  build->add_option("--theta", b_theta, "known mean (a+bi)");
  build->add_option("--eta", b_eta, "known second-sample mean (a+bi)");
  build->add_option("--smax", b_smax, "largest conditioning total to print");
  add_format(build);
  build->callback([&] {
    exit_code = cmd_test_build(ctx, b_kind, b_n, b_m, b_alpha, b_n0, b_nparam,
                               b_r0, b_theta, b_eta, b_smax);
  });

  // curve
  int c_figure = 0;
  std::string c_kind;
  int c_n = 1, c_m = 1;
  double c_alpha = 0.1, c_n0 = 0.0, c_nparam = 0.0, c_r0 = 0.0;
  std::string c_grid;
  auto* curve = app.add_subcommand("curve", "type II error curves");
  curve->add_option("kind", c_kind, "chi2|mean|t|f (omit with --figure)")
      ->check(CLI::IsMember({"chi2", "mean", "t", "f"}));
  curve->add_option("--figure", c_figure, "comparison figure preset (1|2)")
      ->check(CLI::Range(1, 2));
  curve->add_option("-n,--copies", c_n, "copies / second block");
  curve->add_option("-m,--mcopies", c_m, "first block size");
  curve->add_option("--alpha", c_alpha, "level");
  curve->add_option("--n0", c_n0, "null boundary number parameter");
  curve->add_option("--nparam", c_nparam, "known number parameter");
  curve->add_option("--r0", c_r0, "null mean radius");
  curve->add_option("--grid", c_grid, "x or a:b:step")->required();
  add_format(curve);
  curve->callback([&] {
    exit_code = cmd_curve(ctx, c_figure, c_kind, c_n, c_m, c_alpha, c_n0,
                          c_nparam, c_r0, c_grid);
  });

  // verify
  std::string v_suite = "all";
  int v_n = 3, v_dim = 0;
  auto* verify = app.add_subcommand("verify", "run the verification suites");
  verify->add_option("--suite", v_suite,
                     "lemma-prob|moments|concentrator|splitter|appendix-a2|"
                     "hunt-stein|composed|all");
  verify->add_option("-n,--copies", v_n, "copies for the concentrator suite");
  verify->add_option("--dim", v_dim, "per-mode truncation override");
  add_format(verify);
  verify->callback([&] { exit_code = cmd_verify(ctx, v_suite, v_n, v_dim); });

  // estimate
  int e_n = 2;
  double e_nparam = 1.0;
  std::string e_theta = "0";
  long long e_draws = 100000;
  std::uint64_t e_seed = 12345;
  auto* estimate = app.add_subcommand("estimate", "simulate the estimator");
  estimate->add_option("-n,--copies", e_n, "copies")->required();
  estimate->add_option("--nparam", e_nparam, "number parameter")->required();
  estimate->add_option("--theta", e_theta, "mean amplitude (ignored by law)");
  estimate->add_option("--draws", e_draws, "Monte Carlo draws");
  estimate->add_option("--seed", e_seed, "RNG seed");
  add_format(estimate);
  estimate->callback([&] {
    exit_code = cmd_estimate(ctx, e_n, e_nparam, e_theta, e_draws, e_seed);
  });

  // nchisq
  int q_dof = 1;
  double q_nparam = 1.0, q_alpha = 0.0, q_x = 0.0;
  auto* nchisq = app.add_subcommand("nchisq", "scaled count-law quantiles");
  nchisq->add_option("--dof", q_dof, "degrees of freedom n")->required();
  nchisq->add_option("--nparam", q_nparam, "number parameter")->required();
  nchisq->add_option("--alpha", q_alpha, "upper tail mass");
  nchisq->add_option("--x", q_x, "cdf evaluation point");
  add_format(nchisq);
  nchisq->callback(
      [&] { exit_code = cmd_nchisq(ctx, q_dof, q_nparam, q_alpha, q_x); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    if (ctx.json()) {
      ordered_json j{{"schema", 1}, {"error", e.what()}};
      std::cout << j.dump() << "\n";
    } else {
      std::cerr << "error: " << e.what() << "\n";
    }
    return 2;
  }
  return exit_code;
}
