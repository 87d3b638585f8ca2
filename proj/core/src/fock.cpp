#include "qgt/fock.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace qgt {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr double kUnitaryTol = 1e-10;
// Joint eigenvalue mass a certificate step may leave outside its reduced
// spectral solve; it enters the step bound additively.
constexpr double kStepTailBudget = 1e-8;

const cplx kI(0.0, 1.0);

std::vector<long long> strides_of(const std::vector<int>& dims) {
  std::vector<long long> s(dims.size());
  long long acc = 1;
  for (int j = static_cast<int>(dims.size()) - 1; j >= 0; --j) {
    s[j] = acc;
    acc *= dims[j];
  }
  return s;
}

long long checked_product(const std::vector<int>& dims) {
  long long d = 1;
  for (int x : dims) {
    if (x < 1) throw std::invalid_argument("mode dimensions must be positive");
    if (d > (4LL << 40) / x)
      throw std::runtime_error("mode dimension product overflows any supported envelope");
    d *= x;
  }
  return d;
}

// Unitarity tripwire: full Gram up to 256 columns, deterministic column
// sample above that.
void check_unitary(const MatrixXcd& u, const char* what) {
  const long long d = u.cols();
  double err = 0.0;
  if (d <= 256) {
    MatrixXcd g = u.adjoint() * u;
    g.diagonal().array() -= 1.0;
    err = g.cwiseAbs().maxCoeff();
  } else {
    std::vector<long long> cols = {0, d - 1};
    std::uint64_t x = 0x9e3779b97f4a7c15ull;
    for (int i = 0; i < 6; ++i) {
      x = x * 6364136223846793005ull + 1442695040888963407ull;
      cols.push_back(static_cast<long long>(x % static_cast<std::uint64_t>(d)));
    }
    for (long long k : cols) {
      VectorXcd w = u.adjoint() * u.col(k);
      w(k) -= 1.0;
      err = std::max(err, w.cwiseAbs().maxCoeff());
    }
  }
  if (!(err <= kUnitaryTol)) {
    std::ostringstream os;
    os << what << ": unitarity check failed, max deviation " << err;
    throw std::logic_error(os.str());
  }
}

VectorXd geometric_weights(double n_param, int dim) {
  VectorXd g = VectorXd::Zero(dim);
  if (n_param <= 0.0) {
    g(0) = 1.0;
    return g;
  }
  double q = n_param / (n_param + 1.0);
  g(0) = 1.0 / (n_param + 1.0);
  for (int k = 1; k < dim; ++k) g(k) = g(k - 1) * q;
  return g;
}

// Tail of the exact number distribution past the truncation, kept safe
// against cancellation by the rigorous bound.
double state_tail(const GaussianParams& p, int dim) {
  double s = number_survival(p, dim - 1);
  double b = number_tail_bound(p, dim - 1);
  return std::max(0.0, std::min(s, b));
}

struct RawState {
  MatrixXcd data;
  double leakage = 0.0;
};

RawState gaussian_state_raw(const GaussianParams& p, int dim) {
  VectorXd g = geometric_weights(p.n_param, dim);
  MatrixXcd data;
  if (p.theta == cplx(0.0, 0.0)) {
    data = MatrixXcd::Zero(dim, dim);
    data.diagonal() = g.cast<cplx>();
  } else {
    MatrixXcd w = mean_shift(p.theta, dim).data;
    data.noalias() = w * g.asDiagonal() * w.adjoint();
    MatrixXcd sym = 0.5 * (data + data.adjoint());
    data = std::move(sym);
  }
  return {std::move(data), state_tail(p, dim)};
}

// Per-total-photon blocks of exp(itH), H = i(a_B^+ a_A - a_A^+ a_B), on the
// (dimA, dimB) pair grid.  Sector q has basis |a, q-a>, a ascending.
struct SectorBlocks {
  int da = 0, db = 0;
  std::vector<int> alo;
  std::vector<MatrixXcd> block;
};

SectorBlocks bs_sector_blocks(double t, int da, int db) {
  SectorBlocks sb;
  sb.da = da;
  sb.db = db;
  int qmax = da + db - 2;
  sb.alo.resize(qmax + 1);
  sb.block.resize(qmax + 1);
  for (int q = 0; q <= qmax; ++q) {
    int alo = std::max(0, q - db + 1);
    int ahi = std::min(q, da - 1);
    int len = ahi - alo + 1;
    MatrixXcd h = MatrixXcd::Zero(len, len);
    for (int x = 1; x < len; ++x) {
      int a = alo + x;
      // a_B^+ a_A |a, q-a> = sqrt(a (q-a+1)) |a-1, q-a+1>
      h(x - 1, x) = kI * std::sqrt(static_cast<double>(a) * (q - a + 1));
      h(x, x - 1) = std::conj(h(x - 1, x));
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
    VectorXcd ph(len);
    for (int i = 0; i < len; ++i) ph(i) = std::exp(kI * (t * es.eigenvalues()(i)));
    sb.alo[q] = alo;
    sb.block[q] = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  }
  return sb;
}

VectorXcd sector_apply_vec(const SectorBlocks& sb, const VectorXcd& v) {
  VectorXcd y(v.size());
  for (int q = 0; q < static_cast<int>(sb.block.size()); ++q) {
    const MatrixXcd& b = sb.block[q];
    int len = static_cast<int>(b.rows());
    VectorXcd slice(len);
    for (int x = 0; x < len; ++x) {
      int a = sb.alo[q] + x;
      slice(x) = v(static_cast<long long>(a) * sb.db + (q - a));
    }
    VectorXcd out = b * slice;
    for (int x = 0; x < len; ++x) {
      int a = sb.alo[q] + x;
      y(static_cast<long long>(a) * sb.db + (q - a)) = out(x);
    }
  }
  return y;
}

bool is_identity_perm(const std::vector<int>& perm) {
  for (int j = 0; j < static_cast<int>(perm.size()); ++j)
    if (perm[j] != j) return false;
  return true;
}

void validate_perm(const std::vector<int>& perm, int modes, const char* what) {
  if (static_cast<int>(perm.size()) != modes)
    throw std::invalid_argument(std::string(what) + ": permutation size mismatch");
  std::vector<char> seen(modes, 0);
  for (int p : perm) {
    if (p < 0 || p >= modes || seen[p])
      throw std::invalid_argument(std::string(what) + ": not a permutation");
    seen[p] = 1;
  }
}

// rmap[flat(k)] = flat(k') with k'[j] = k[perm[j]] in the permuted dims.
std::vector<long long> perm_row_map(const std::vector<int>& dims,
                                    const std::vector<int>& perm) {
  int modes = static_cast<int>(dims.size());
  std::vector<int> out_dims(modes);
  for (int j = 0; j < modes; ++j) out_dims[j] = dims[perm[j]];
  auto sout = strides_of(out_dims);
  long long d = checked_product(dims);
  std::vector<long long> rmap(d);
  std::vector<int> k(modes, 0);
  for (long long r = 0; r < d; ++r) {
    long long rr = 0;
    for (int j = 0; j < modes; ++j) rr += static_cast<long long>(k[perm[j]]) * sout[j];
    rmap[r] = rr;
    for (int j = modes - 1; j >= 0; --j) {
      if (++k[j] < dims[j]) break;
      k[j] = 0;
    }
  }
  return rmap;
}

// Left-multiplies M by the beam splitter embedded on the mode pair (g.a, g.b).
void apply_pair_gate_rows(MatrixXcd& m, const std::vector<int>& dims,
                          const PairGate& g) {
  auto st = strides_of(dims);
  int da = dims[g.a], db = dims[g.b];
  long long block = static_cast<long long>(da) * db;
  MatrixXcd gate = beam_splitter(g.t, da, db).data;
  long long d = m.rows();
  long long sa = st[g.a], sb = st[g.b];
  std::vector<long long> bases;
  bases.reserve(static_cast<size_t>(d / block) + 1);
  {
    std::vector<int> k(dims.size(), 0);
    for (long long r = 0; r < d; ++r) {
      if (k[g.a] == 0 && k[g.b] == 0) bases.push_back(r);
      for (int j = static_cast<int>(dims.size()) - 1; j >= 0; --j) {
        if (++k[j] < dims[j]) break;
        k[j] = 0;
      }
    }
  }
  long long cols = m.cols();
  long long chunk =
      std::max<long long>(1, std::min<long long>(cols, (8LL << 20) / (16 * block)));
  MatrixXcd tmp(block, chunk), out(block, chunk);
  for (long long c0 = 0; c0 < cols; c0 += chunk) {
    long long cw = std::min(chunk, cols - c0);
    for (long long r0 : bases) {
      for (int x = 0; x < da; ++x)
        for (int y = 0; y < db; ++y)
          tmp.row(static_cast<long long>(x) * db + y).head(cw) =
              m.row(r0 + x * sa + y * sb).segment(c0, cw);
      out.leftCols(cw).noalias() = gate * tmp.leftCols(cw);
      for (int x = 0; x < da; ++x)
        for (int y = 0; y < db; ++y)
          m.row(r0 + x * sa + y * sb).segment(c0, cw) =
              out.row(static_cast<long long>(x) * db + y).head(cw);
    }
  }
}

FockOperator materialize_plan(const GatePlan& plan, int dim_each,
                              const char* what) {
  if (dim_each < 2)
    throw std::invalid_argument(std::string(what) + ": dim_each must be >= 2");
  std::vector<int> dims(plan.modes, dim_each);
  long long d = checked_product(dims);
  check_alloc(d, d);
  MatrixXcd u = MatrixXcd::Identity(d, d);
  for (const auto& g : plan.gates) apply_pair_gate_rows(u, dims, g);
  if (!is_identity_perm(plan.final_perm)) {
    auto rmap = perm_row_map(dims, plan.final_perm);
    check_alloc(d, d);
    MatrixXcd v(d, d);
    for (long long r = 0; r < d; ++r) v.row(rmap[r]) = u.row(r);
    u = std::move(v);
  }
  check_unitary(u, what);
  return {std::move(dims), std::move(u), false};
}

std::uint64_t pack_tuple(const int* k, int modes) {
  std::uint64_t key = 0;
  for (int j = 0; j < modes; ++j)
    key = (key << 8) | static_cast<std::uint64_t>(static_cast<std::uint8_t>(k[j]));
  return key;
}

// Test-function value of the composed core at a photon count tuple.
double phi_value(const ComposedTest& ct, const int* k) {
  switch (ct.core_kind) {
    case ComposedTest::CoreKind::chi2: {
      long long s = 0;
      for (int m : ct.core_modes) s += k[m];
      return ct.threshold_core.rejection_prob(s);
    }
    case ComposedTest::CoreKind::mean:
      return ct.threshold_core.rejection_prob(k[ct.core_modes[0]]);
    case ComposedTest::CoreKind::t: {
      long long s = 0;
      for (int m : ct.core_modes) s += k[m];
      return ct.cond_core->t_rejection_prob(k[ct.core_modes[0]], s);
    }
    case ComposedTest::CoreKind::F: {
      long long x1 = 0, x2 = 0;
      for (int i = 0; i < static_cast<int>(ct.core_modes.size()); ++i) {
        x2 += k[ct.core_modes[i]];
        if (i < ct.f_block1) x1 += k[ct.core_modes[i]];
      }
      return ct.cond_core->f_rejection_prob(x1, x2);
    }
  }
  throw std::logic_error("unknown core kind");
}

VectorXd convolve(const VectorXd& p, const VectorXd& q) {
  VectorXd r = VectorXd::Zero(p.size() + q.size() - 1);
  for (long long i = 0; i < p.size(); ++i)
    for (long long j = 0; j < q.size(); ++j) r(i + j) += p(i) * q(j);
  return r;
}

GatePlan plan_for(const ComposedTest& ct) {
  switch (ct.pre) {
    case ComposedTest::PreKind::Concentrator:
      return concentrator_plan(ct.n);
    case ComposedTest::PreKind::SplitterU2:
      return splitter_plan(ct.m, ct.n, SplitterVariant::U2);
    case ComposedTest::PreKind::SplitterU3:
      return splitter_plan(ct.m, ct.n, SplitterVariant::U3);
    default:
      throw std::logic_error("no gate plan for W-shift reductions");
  }
}

// Tr(rho (T (x) I)) after per-mode W conjugation: diagonals convolve.
std::pair<double, TruncationReport> run_wshift(
    const ComposedTest& ct, const std::vector<GaussianParams>& state,
    const std::vector<int>& dims, double leak_budget) {
  int modes = ct.total_modes;
  if (static_cast<int>(ct.shifts.size()) != modes)
    throw std::logic_error("shift count does not match the mode count");
  std::vector<VectorXd> diag(modes);
  double leak = 0.0;
  int dim_max = 0;
  for (int j = 0; j < modes; ++j) {
    RawState raw = gaussian_state_raw(state[j], dims[j]);
    leak = leak + raw.leakage - leak * raw.leakage;
    dim_max = std::max(dim_max, dims[j]);
    if (ct.shifts[j] == cplx(0.0, 0.0)) {
      diag[j] = raw.data.diagonal().real();
    } else {
      MatrixXcd w = mean_shift(ct.shifts[j], dims[j]).data;
      MatrixXcd a;
      a.noalias() = w * raw.data;
      diag[j] = (a.array() * w.array().conjugate()).rowwise().sum().real();
    }
  }
  double core;
  switch (ct.core_kind) {
    case ComposedTest::CoreKind::chi2: {
      VectorXd q = diag[ct.core_modes[0]];
      for (size_t i = 1; i < ct.core_modes.size(); ++i)
        q = convolve(q, diag[ct.core_modes[i]]);
      long double acc = 0.0L;
      for (long long s = 0; s < q.size(); ++s)
        acc += q(s) * ct.threshold_core.rejection_prob(s);
      core = static_cast<double>(acc);
      break;
    }
    case ComposedTest::CoreKind::mean: {
      const VectorXd& q = diag[ct.core_modes[0]];
      long double acc = 0.0L;
      for (long long s = 0; s < q.size(); ++s)
        acc += q(s) * ct.threshold_core.rejection_prob(s);
      core = static_cast<double>(acc);
      break;
    }
    case ComposedTest::CoreKind::t: {
      const VectorXd& p0 = diag[ct.core_modes[0]];
      VectorXd qa = diag[ct.core_modes[1]];
      for (size_t i = 2; i < ct.core_modes.size(); ++i)
        qa = convolve(qa, diag[ct.core_modes[i]]);
      long double acc = 0.0L;
      for (long long k0 = 0; k0 < p0.size(); ++k0)
        for (long long sa = 0; sa < qa.size(); ++sa)
          acc += p0(k0) * qa(sa) * ct.cond_core->t_rejection_prob(k0, k0 + sa);
      core = static_cast<double>(acc);
      break;
    }
    case ComposedTest::CoreKind::F: {
      VectorXd q1 = diag[ct.core_modes[0]];
      for (int i = 1; i < ct.f_block1; ++i)
        q1 = convolve(q1, diag[ct.core_modes[i]]);
      VectorXd q2 = diag[ct.core_modes[ct.f_block1]];
      for (size_t i = ct.f_block1 + 1; i < ct.core_modes.size(); ++i)
        q2 = convolve(q2, diag[ct.core_modes[i]]);
      long double acc = 0.0L;
      for (long long a = 0; a < q1.size(); ++a)
        for (long long b = 0; b < q2.size(); ++b)
          acc += q1(a) * q2(b) * ct.cond_core->f_rejection_prob(a, a + b);
      core = static_cast<double>(acc);
      break;
    }
    default:
      throw std::logic_error("unknown core kind");
  }
  double value = core;
  for (int j : ct.passthrough_modes) value *= diag[j].sum();
  if (leak > leak_budget) {
    std::ostringstream os;
    os << "truncation leakage " << leak << " exceeds budget " << leak_budget
       << "; increase dims";
    throw std::runtime_error(os.str());
  }
  value = std::min(1.0, std::max(0.0, value));
  return {value, {leak, dim_max}};
}

// Streams U rho U^+ over total-photon sectors; exact for number-diagonal
// test operators because the plan unitary conserves the total count.
std::pair<double, TruncationReport> run_sectors(
    const ComposedTest& ct, const std::vector<GaussianParams>& state,
    const std::vector<int>& dims, double leak_budget) {
  int modes = ct.total_modes;
  if (modes > 8)
    throw std::runtime_error("sector evaluator supports at most 8 modes");
  for (int j = 0; j < modes; ++j) {
    if (dims[j] != dims[0])
      throw std::invalid_argument("gate plans require a uniform per-mode dim");
    if (dims[j] > 255)
      throw std::invalid_argument("per-mode dim above 255 is not supported");
  }
  GatePlan plan = plan_for(ct);
  if (plan.modes != modes) throw std::logic_error("plan does not cover all modes");

  std::vector<MatrixXcd> rho(modes);
  for (int j = 0; j < modes; ++j) rho[j] = gaussian_state_raw(state[j], dims[j]).data;

  std::vector<SectorBlocks> gate_blocks;
  gate_blocks.reserve(plan.gates.size());
  for (const auto& g : plan.gates)
    gate_blocks.push_back(bs_sector_blocks(g.t, dims[g.a], dims[g.b]));

  const bool need_perm = !is_identity_perm(plan.final_perm);
  long long smax = 0;
  for (int j = 0; j < modes; ++j) smax += dims[j] - 1;

  long double value = 0.0L, cum = 0.0L;
  std::vector<int> flat, tmpk(modes);
  std::unordered_map<std::uint64_t, int> rank;
  for (long long s = 0; s <= smax; ++s) {
    flat.clear();
    std::function<void(int, int)> rec = [&](int j, int rem) {
      if (j == modes - 1) {
        if (rem < dims[j]) {
          tmpk[j] = rem;
          flat.insert(flat.end(), tmpk.begin(), tmpk.end());
        }
        return;
      }
      int hi = std::min<int>(rem, dims[j] - 1);
      for (int v = 0; v <= hi; ++v) {
        tmpk[j] = v;
        rec(j + 1, rem - v);
      }
    };
    rec(0, static_cast<int>(s));
    long long ds = static_cast<long long>(flat.size()) / modes;
    if (ds == 0) continue;
    check_alloc(ds, 3 * ds);

    MatrixXcd rho_s(ds, ds);
    for (long long i = 0; i < ds; ++i) {
      const int* ki = &flat[i * modes];
      for (long long j = 0; j < ds; ++j) {
        const int* kj = &flat[j * modes];
        cplx prod(1.0, 0.0);
        for (int m = 0; m < modes; ++m) prod *= rho[m](ki[m], kj[m]);
        rho_s(i, j) = prod;
      }
    }
    double mass = rho_s.trace().real();

    MatrixXcd u = MatrixXcd::Identity(ds, ds);
    for (size_t gi = 0; gi < plan.gates.size(); ++gi) {
      const auto& g = plan.gates[gi];
      const SectorBlocks& sb = gate_blocks[gi];
      std::unordered_map<std::uint64_t, std::vector<int>> buckets;
      for (long long i = 0; i < ds; ++i) {
        const int* k = &flat[i * modes];
        std::copy(k, k + modes, tmpk.begin());
        tmpk[g.a] = 0;
        tmpk[g.b] = 0;
        buckets[pack_tuple(tmpk.data(), modes)].push_back(static_cast<int>(i));
      }
      for (auto& kv : buckets) {
        auto& rows = kv.second;
        std::sort(rows.begin(), rows.end(), [&](int i, int j) {
          return flat[static_cast<long long>(i) * modes + g.a] <
                 flat[static_cast<long long>(j) * modes + g.a];
        });
        int q = flat[static_cast<long long>(rows[0]) * modes + g.a] +
                flat[static_cast<long long>(rows[0]) * modes + g.b];
        const MatrixXcd& b = sb.block[q];
        int len = static_cast<int>(b.rows());
        if (static_cast<int>(rows.size()) != len)
          throw std::logic_error("sector bucket does not match the gate block");
        MatrixXcd tmp(len, ds);
        for (int x = 0; x < len; ++x) tmp.row(x) = u.row(rows[x]);
        MatrixXcd out;
        out.noalias() = b * tmp;
        for (int x = 0; x < len; ++x) u.row(rows[x]) = out.row(x);
      }
    }
    if (need_perm) {
      rank.clear();
      for (long long i = 0; i < ds; ++i)
        rank.emplace(pack_tuple(&flat[i * modes], modes), static_cast<int>(i));
      MatrixXcd v(ds, ds);
      for (long long i = 0; i < ds; ++i) {
        const int* k = &flat[i * modes];
        for (int j = 0; j < modes; ++j) tmpk[j] = k[plan.final_perm[j]];
        v.row(rank.at(pack_tuple(tmpk.data(), modes))) = u.row(i);
      }
      u = std::move(v);
    }

    MatrixXcd m;
    m.noalias() = u * rho_s;
    VectorXd rowdot = (m.array() * u.array().conjugate()).rowwise().sum().real();
    for (long long i = 0; i < ds; ++i)
      value += phi_value(ct, &flat[i * modes]) * rowdot(i);
    cum += mass;
    if (1.0L - cum <= static_cast<long double>(leak_budget)) break;
  }
  double leak = std::max(0.0, static_cast<double>(1.0L - cum));
  if (leak > leak_budget) {
    std::ostringstream os;
    os << "truncation leakage " << leak << " exceeds budget " << leak_budget
       << "; increase dims";
    throw std::runtime_error(os.str());
  }
  double v = std::min(1.0, std::max(0.0, static_cast<double>(value)));
  return {v, {leak, dims[0]}};
}

// Exact trace norm of B(rho_a (x) rho_b)B^+ - rho_c (x) rho_d for displaced
// thermal factors sharing one number parameter.  Both sides have the same
// eigenvalues (thermal weights are constant on photon-number sectors and the
// truncated splitter is unitary on every sector slice), so the difference is
// C S C^+ with C the weighted eigenvector columns and S = diag(+1, -1); its
// nonzero spectrum is computed from the signed Gram matrix of the dominant
// columns, and the discarded tail adds 2 * tail.
double gate_step_bound(const SectorBlocks& adj, int d, double n_param, cplx mu_a,
                       cplx mu_b, cplx mu_c, cplx mu_d) {
  VectorXd g1 = geometric_weights(n_param, d);
  double mode_mass = g1.sum();
  double total = mode_mass * mode_mass;
  int cmax = 2 * (d - 1);
  std::vector<double> diag_mass(cmax + 1, 0.0);
  for (int j = 0; j <= cmax; ++j) {
    double m = 0.0;
    for (int a = std::max(0, j - (d - 1)); a <= std::min(j, d - 1); ++a)
      m += g1(a) * g1(j - a);
    diag_mass[j] = m;
  }
  int cut = cmax;
  double tail = 0.0;
  {
    double acc = 0.0;
    for (int j = 0; j <= cmax; ++j) {
      acc += diag_mass[j];
      if (total - acc <= 0.5 * kStepTailBudget) {
        cut = j;
        break;
      }
    }
    tail = std::max(0.0, total - std::accumulate(diag_mass.begin(),
                                                 diag_mass.begin() + cut + 1, 0.0));
  }
  struct KP {
    int a, b;
  };
  std::vector<KP> big;
  for (int j = 0; j <= cut; ++j)
    for (int a = std::max(0, j - (d - 1)); a <= std::min(j, d - 1); ++a)
      big.push_back({a, j - a});
  int kbig = static_cast<int>(big.size());
  if (2 * kbig > 3000)
    throw std::runtime_error(
        "identity certificate: reduced spectral problem too large for this "
        "number parameter");
  VectorXd gb(kbig);
  for (int i = 0; i < kbig; ++i) gb(i) = g1(big[i].a) * g1(big[i].b);

  MatrixXcd wa = mean_shift(mu_a, d).data;
  MatrixXcd wb = mean_shift(mu_b, d).data;
  MatrixXcd wc = mean_shift(mu_c, d).data;
  MatrixXcd wd = mean_shift(mu_d, d).data;
  int ca = 0, cb = 0;
  for (const auto& kp : big) {
    ca = std::max(ca, kp.a + 1);
    cb = std::max(cb, kp.b + 1);
  }
  MatrixXcd wa_big = wa.leftCols(ca);
  MatrixXcd wb_big = wb.leftCols(cb);

  // G[k, l] = <w_k, B^+ v_l>, w_k and v_l the displaced number columns.
  MatrixXcd g_ov(kbig, kbig);
  VectorXcd v(static_cast<long long>(d) * d);
  for (int l = 0; l < kbig; ++l) {
    for (int a = 0; a < d; ++a)
      v.segment(static_cast<long long>(a) * d, d) = wc(a, big[l].a) * wd.col(big[l].b);
    VectorXcd y = sector_apply_vec(adj, v);
    Eigen::Map<const MatrixXcd> ymat(y.data(), d, d);  // ymat(b, a) = y(a d + b)
    MatrixXcd z = wa_big.adjoint() * ymat.transpose() * wb_big.conjugate();
    for (int k = 0; k < kbig; ++k) g_ov(k, l) = z(big[k].a, big[k].b);
  }

  int r = 2 * kbig;
  MatrixXcd p = MatrixXcd::Zero(r, r);
  p.topLeftCorner(kbig, kbig).diagonal() = gb.cast<cplx>();
  p.bottomRightCorner(kbig, kbig).diagonal() = gb.cast<cplx>();
  VectorXd sg = gb.cwiseSqrt();
  p.topRightCorner(kbig, kbig) = sg.asDiagonal() * g_ov * sg.asDiagonal();
  p.bottomLeftCorner(kbig, kbig) = p.topRightCorner(kbig, kbig).adjoint();

  // P is PSD up to rounding; with P = F F^+ the nonzero spectrum of S P
  // equals that of F^+ S F.
  Eigen::SelfAdjointEigenSolver<MatrixXcd> esp(p);
  if (esp.info() != Eigen::Success)
    throw std::runtime_error("identity certificate: Gram factorization failed");
  VectorXd lam = esp.eigenvalues().cwiseMax(0.0);
  MatrixXcd f = esp.eigenvectors() * lam.cwiseSqrt().asDiagonal();
  VectorXd sgn(r);
  sgn.head(kbig).setOnes();
  sgn.tail(kbig).setConstant(-1.0);
  MatrixXcd h = f.adjoint() * sgn.asDiagonal() * f;
  MatrixXcd hs = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hs, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum() + 2.0 * tail;
}

IdentityCertificate run_plan_certificate(const GatePlan& plan,
                                         std::vector<cplx> mu,
                                         const std::vector<double>& ns,
                                         int dim_each) {
  if (dim_each < 2)
    throw std::invalid_argument("identity certificate: dim_each must be >= 2");
  IdentityCertificate cert;
  cert.dim_each = dim_each;
  for (int j = 0; j < plan.modes; ++j)
    cert.state_leakage += state_tail({mu[j], ns[j]}, dim_each);
  for (const auto& g : plan.gates) {
    if (!(ns[g.a] == ns[g.b]))
      throw std::logic_error(
          "identity certificate requires equal number parameters on every gate");
    double c = std::cos(g.t), s = std::sin(g.t);
    cplx mc = mu[g.a] * c + mu[g.b] * s;
    cplx md = -mu[g.a] * s + mu[g.b] * c;
    SectorBlocks adj = bs_sector_blocks(-g.t, dim_each, dim_each);
    double eps = gate_step_bound(adj, dim_each, ns[g.a], mu[g.a], mu[g.b], mc, md);
    cert.step_bounds.push_back(eps);
    cert.trace_norm_bound += eps;
    mu[g.a] = mc;
    mu[g.b] = md;
  }
  cert.final_means.resize(plan.modes);
  for (int j = 0; j < plan.modes; ++j) cert.final_means[j] = mu[plan.final_perm[j]];
  return cert;
}

}  // namespace

long long max_bytes() {
  const char* env = std::getenv("QGT_MAX_BYTES");
  if (env == nullptr || *env == '\0') return 4LL << 30;
  char* end = nullptr;
  long long v = std::strtoll(env, &end, 10);
  if (end == env || *end != '\0' || v <= 0)
    throw std::runtime_error("QGT_MAX_BYTES must be a positive integer");
  return v;
}

void check_alloc(long long rows, long long cols) {
  if (rows <= 0 || cols <= 0)
    throw std::invalid_argument("matrix dimensions must be positive");
  const long long budget = max_bytes();
  if (cols > budget / 16 || rows > budget / (16 * cols)) {
    std::ostringstream os;
    os << "dense " << rows << " x " << cols
       << " complex matrix exceeds QGT_MAX_BYTES = " << budget;
    throw std::runtime_error(os.str());
  }
}

FockOperator annihilation(int dim) {
  if (dim < 2) throw std::invalid_argument("annihilation: dim must be >= 2");
  check_alloc(dim, dim);
  MatrixXcd a = MatrixXcd::Zero(dim, dim);
  for (int k = 1; k < dim; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return {{dim}, std::move(a), false};
}

std::pair<FockOperator, TruncationReport> coherent_state(cplx xi, int dim,
                                                         double leak_budget) {
  if (dim < 1) throw std::invalid_argument("coherent_state: dim must be >= 1");
  check_alloc(dim, dim);
  VectorXcd v(dim);
  v(0) = std::exp(-0.5 * std::norm(xi));
  for (int k = 1; k < dim; ++k) v(k) = v(k - 1) * xi / std::sqrt(static_cast<double>(k));
  double leak = std::max(0.0, 1.0 - v.squaredNorm());
  if (!(leak < leak_budget)) {
    std::ostringstream os;
    os << "coherent_state: truncation leakage " << leak << " at dim " << dim
       << " is not below " << leak_budget << "; increase dim";
    throw std::runtime_error(os.str());
  }
  FockOperator op{{dim}, v * v.adjoint(), true};
  return {std::move(op), {leak, dim}};
}

std::pair<FockOperator, TruncationReport> gaussian_state(const GaussianParams& p,
                                                         int dim,
                                                         double leak_budget) {
  if (dim < 2) throw std::invalid_argument("gaussian_state: dim must be >= 2");
  if (p.n_param < 0)
    throw std::invalid_argument("gaussian_state: number parameter must be >= 0");
  check_alloc(dim, dim);
  RawState raw = gaussian_state_raw(p, dim);
  if (!(raw.leakage < leak_budget)) {
    std::ostringstream os;
    os << "gaussian_state: truncation leakage " << raw.leakage << " at dim " << dim
       << " is not below " << leak_budget << "; increase dim";
    throw std::runtime_error(os.str());
  }
  FockOperator op{{dim}, std::move(raw.data), true};
  return {std::move(op), {raw.leakage, dim}};
}

FockOperator mean_shift(cplx theta, int dim) {
  if (dim < 2) throw std::invalid_argument("mean_shift: dim must be >= 2");
  check_alloc(dim, dim);
  if (theta == cplx(0.0, 0.0)) return {{dim}, MatrixXcd::Identity(dim, dim), false};
  // exp(theta a^+ - conj(theta) a) = exp(iH) with Hermitian H below; the
  // truncated-generator exponential stays exactly unitary.
  MatrixXcd h = MatrixXcd::Zero(dim, dim);
  for (int k = 0; k + 1 < dim; ++k) {
    h(k + 1, k) = -kI * theta * std::sqrt(static_cast<double>(k + 1));
    h(k, k + 1) = std::conj(h(k + 1, k));
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  VectorXcd ph(dim);
  for (int i = 0; i < dim; ++i) ph(i) = std::exp(kI * es.eigenvalues()(i));
  MatrixXcd w = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  check_unitary(w, "mean_shift");
  return {{dim}, std::move(w), false};
}

FockOperator phase_shift(double t, int dim) {
  if (dim < 1) throw std::invalid_argument("phase_shift: dim must be >= 1");
  check_alloc(dim, dim);
  MatrixXcd s = MatrixXcd::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) s(k, k) = std::exp(kI * (t * k));
  return {{dim}, std::move(s), false};
}

FockOperator beam_splitter(double t, int dimA, int dimB) {
  if (dimA < 1 || dimB < 1)
    throw std::invalid_argument("beam_splitter: dims must be >= 1");
  long long d = static_cast<long long>(dimA) * dimB;
  check_alloc(d, d);
  SectorBlocks sb = bs_sector_blocks(t, dimA, dimB);
  MatrixXcd u = MatrixXcd::Zero(d, d);
  for (int q = 0; q < static_cast<int>(sb.block.size()); ++q) {
    const MatrixXcd& b = sb.block[q];
    int len = static_cast<int>(b.rows());
    for (int xo = 0; xo < len; ++xo) {
      int ao = sb.alo[q] + xo;
      long long ro = static_cast<long long>(ao) * dimB + (q - ao);
      for (int xi = 0; xi < len; ++xi) {
        int ai = sb.alo[q] + xi;
        u(ro, static_cast<long long>(ai) * dimB + (q - ai)) = b(xo, xi);
      }
    }
  }
  check_unitary(u, "beam_splitter");
  return {{dimA, dimB}, std::move(u), false};
}

GatePlan concentrator_plan(int n) {
  if (n < 1) throw std::invalid_argument("concentrator_plan: n must be >= 1");
  GatePlan p;
  p.modes = n;
  // Mode 0 carries the running sum sqrt(j) theta; folding in fresh mode j
  // needs cos t = sqrt(j/(j+1)) and leaves mode j at the vacuum mean.
  for (int j = 1; j < n; ++j)
    p.gates.push_back({0, j, std::atan(1.0 / std::sqrt(static_cast<double>(j)))});
  p.final_perm.resize(n);
  std::iota(p.final_perm.begin(), p.final_perm.end(), 0);
  return p;
}

GatePlan splitter_plan(int m, int n, SplitterVariant variant) {
  if (m < 1 || n < 1)
    throw std::invalid_argument("splitter_plan: block sizes must be >= 1");
  GatePlan p;
  p.modes = m + n;
  GatePlan cm = concentrator_plan(m);
  for (const auto& g : cm.gates) p.gates.push_back(g);
  GatePlan cn = concentrator_plan(n);
  for (const auto& g : cn.gates) p.gates.push_back({g.a + m, g.b + m, g.t});
  p.final_perm.resize(m + n);
  std::iota(p.final_perm.begin(), p.final_perm.end(), 0);
  if (variant == SplitterVariant::U2) {
    // Cross angle sending the block heads to c0(theta - eta) in mode 0 and
    // c1(m theta + n eta) in mode m.
    p.gates.push_back(
        {0, m, -std::atan(std::sqrt(static_cast<double>(m) / static_cast<double>(n)))});
    p.final_perm[0] = m;
    if (m + n >= 2) p.final_perm[1] = 0;
    for (int j = 2; j <= m; ++j) p.final_perm[j] = j - 1;
  } else {
    p.final_perm[0] = 0;
    if (m + n >= 2) p.final_perm[1] = m;
    for (int j = 2; j <= m; ++j) p.final_perm[j] = j - 1;
  }
  return p;
}

std::vector<cplx> plan_apply_means(const GatePlan& plan,
                                   const std::vector<cplx>& mu) {
  if (static_cast<int>(mu.size()) != plan.modes)
    throw std::invalid_argument("plan_apply_means: mean count mismatch");
  std::vector<cplx> v = mu;
  for (const auto& g : plan.gates) {
    cplx a = v[g.a], b = v[g.b];
    double c = std::cos(g.t), s = std::sin(g.t);
    v[g.a] = a * c + b * s;
    v[g.b] = -a * s + b * c;
  }
  std::vector<cplx> out(plan.modes);
  for (int j = 0; j < plan.modes; ++j) out[j] = v[plan.final_perm[j]];
  return out;
}

FockOperator concentrator(int n, int dim_each) {
  return materialize_plan(concentrator_plan(n), dim_each, "concentrator");
}

FockOperator splitter_two_sample(int m, int n, SplitterVariant variant,
                                 int dim_each) {
  return materialize_plan(splitter_plan(m, n, variant), dim_each,
                          "splitter_two_sample");
}

FockOperator tensor(const std::vector<FockOperator>& ops) {
  if (ops.empty()) throw std::invalid_argument("tensor: need at least one factor");
  FockOperator out = ops[0];
  for (size_t i = 1; i < ops.size(); ++i) {
    long long ra = out.data.rows(), rb = ops[i].data.rows();
    check_alloc(ra * rb, ra * rb);
    MatrixXcd k(ra * rb, ra * rb);
    for (long long x = 0; x < ra; ++x)
      for (long long y = 0; y < ra; ++y)
        k.block(x * rb, y * rb, rb, rb) = out.data(x, y) * ops[i].data;
    out.data = std::move(k);
    out.dims.insert(out.dims.end(), ops[i].dims.begin(), ops[i].dims.end());
    out.hermitian_flag = out.hermitian_flag && ops[i].hermitian_flag;
  }
  return out;
}

FockOperator permute_modes(const FockOperator& op, const std::vector<int>& perm) {
  int modes = static_cast<int>(op.dims.size());
  validate_perm(perm, modes, "permute_modes");
  std::vector<int> out_dims(modes);
  for (int j = 0; j < modes; ++j) out_dims[j] = op.dims[perm[j]];
  long long d = checked_product(op.dims);
  if (op.data.rows() != d || op.data.cols() != d)
    throw std::invalid_argument("permute_modes: data size does not match dims");
  auto rmap = perm_row_map(op.dims, perm);
  check_alloc(d, d);
  MatrixXcd out(d, d);
  for (long long i = 0; i < d; ++i)
    for (long long j = 0; j < d; ++j) out(rmap[i], rmap[j]) = op.data(i, j);
  return {std::move(out_dims), std::move(out), op.hermitian_flag};
}

double trace_against(const FockOperator& rho, const FockOperator& t) {
  if (rho.dims != t.dims)
    throw std::invalid_argument("trace_against: mode dimensions differ");
  if (rho.data.rows() != t.data.rows() || rho.data.cols() != t.data.cols())
    throw std::invalid_argument("trace_against: matrix sizes differ");
  cplx s = (rho.data.transpose().array() * t.data.array()).sum();
  return s.real();
}

FockOperator phase_average(const FockOperator& t, int grid) {
  if (t.dims.empty()) throw std::invalid_argument("phase_average: no modes");
  int d0 = t.dims[0];
  if (grid < 2 * d0)
    throw std::invalid_argument("phase_average: grid must be >= 2 * dims[0]");
  // Literal discrete average: entry (k0, l0) picks up the weight
  // (1/grid) sum_m e^{2 pi i m (k0 - l0) / grid}.
  std::vector<cplx> w(2 * d0 - 1);
  for (int delta = -(d0 - 1); delta <= d0 - 1; ++delta) {
    cplx acc(0.0, 0.0);
    for (int m = 0; m < grid; ++m)
      acc += std::exp(kI * (2.0 * M_PI * m * delta / grid));
    w[delta + d0 - 1] = acc / static_cast<double>(grid);
  }
  long long d = checked_product(t.dims);
  long long block = d / d0;
  MatrixXcd out(d, d);
  for (long long i = 0; i < d; ++i) {
    int k0 = static_cast<int>(i / block);
    for (long long j = 0; j < d; ++j) {
      int l0 = static_cast<int>(j / block);
      out(i, j) = t.data(i, j) * w[k0 - l0 + d0 - 1];
    }
  }
  return {t.dims, std::move(out), t.hermitian_flag};
}

double trace_norm(const FockOperator& a) {
  double scale = std::max(1.0, a.data.cwiseAbs().maxCoeff());
  double herm_dev = (a.data - a.data.adjoint()).cwiseAbs().maxCoeff();
  if (a.hermitian_flag || herm_dev <= 1e-12 * scale) {
    MatrixXcd sym = 0.5 * (a.data + a.data.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<MatrixXcd> svd(a.data);
  return svd.singularValues().sum();
}

double trace_norm_upper_bound(const FockOperator& a) {
  double r = static_cast<double>(std::min(a.data.rows(), a.data.cols()));
  return std::sqrt(r) * a.data.norm();
}

IdentityCertificate concentrator_identity_certificate(int n, cplx theta, double N,
                                                      int dim_each) {
  if (n < 1) throw std::invalid_argument("certificate: n must be >= 1");
  if (N < 0) throw std::invalid_argument("certificate: N must be >= 0");
  return run_plan_certificate(concentrator_plan(n), std::vector<cplx>(n, theta),
                              std::vector<double>(n, N), dim_each);
}

IdentityCertificate splitter_identity_certificate(int m, int n,
                                                  SplitterVariant variant,
                                                  cplx theta, cplx eta, double M,
                                                  double N, int dim_each) {
  if (m < 1 || n < 1)
    throw std::invalid_argument("certificate: block sizes must be >= 1");
  if (M < 0 || N < 0)
    throw std::invalid_argument("certificate: number parameters must be >= 0");
  if (variant == SplitterVariant::U2 && M != N)
    throw std::invalid_argument(
        "certificate: the cross splitter mixes the blocks, equal number "
        "parameters required");
  std::vector<cplx> mu(m + n, theta);
  std::fill(mu.begin() + m, mu.end(), eta);
  std::vector<double> ns(m + n, M);
  std::fill(ns.begin() + m, ns.end(), N);
  return run_plan_certificate(splitter_plan(m, n, variant), std::move(mu), ns,
                              dim_each);
}

std::pair<double, TruncationReport> run_composed(
    const ComposedTest& ct, const std::vector<GaussianParams>& state,
    const std::vector<int>& dims, double leak_budget) {
  if (static_cast<int>(state.size()) != ct.total_modes)
    throw std::invalid_argument("run_composed: state parameter count mismatch");
  if (static_cast<int>(dims.size()) != ct.total_modes)
    throw std::invalid_argument("run_composed: dim count mismatch");
  for (int x : dims)
    if (x < 2) throw std::invalid_argument("run_composed: dims must be >= 2");
  if (!(leak_budget > 0))
    throw std::invalid_argument("run_composed: leak budget must be positive");
  if (ct.pre == ComposedTest::PreKind::WShifts)
    return run_wshift(ct, state, dims, leak_budget);
  return run_sectors(ct, state, dims, leak_budget);
}

}  // namespace qgt
