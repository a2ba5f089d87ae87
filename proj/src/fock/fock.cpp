#include "gkpsim/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace gkpsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

long stride_of(const State& s, int mode) {
  long r = 1;
  for (int k = mode + 1; k < s.modes; ++k) r *= s.dim;
  return r;
}

void check_mode(const State& s, int mode) {
  if (mode < 0 || mode >= s.modes) throw std::out_of_range("mode index out of range");
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string("non-finite parameter: ") + what);
}

// Gathers modes (ma, mb) of s to the front: out layout (na·d + nb)·R + rest.
// `order` receives the flat source index for each gathered position so the
// scatter can invert exactly.
void gather_pair(const State& s, int ma, int mb, Vec& out, std::vector<long>& order) {
  const int d = s.dim;
  const long sa = stride_of(s, ma);
  const long sb = stride_of(s, mb);
  std::vector<int> rest;
  for (int m = 0; m < s.modes; ++m)
    if (m != ma && m != mb) rest.push_back(m);
  long nrest = 1;
  for (size_t k = 0; k < rest.size(); ++k) nrest *= d;
  out.resize(s.amp.size());
  order.assign(s.amp.size(), 0);
  std::vector<int> digits(rest.size(), 0);
  for (long rarest = 0; rarest < nrest; ++rarest) {
    long base = 0;
    {
      long tmp = rarest;
      for (int k = static_cast<int>(rest.size()) - 1; k >= 0; --k) {
        digits[k] = static_cast<int>(tmp % d);
        tmp /= d;
      }
      for (size_t k = 0; k < rest.size(); ++k) base += digits[k] * stride_of(s, rest[k]);
    }
    for (int na = 0; na < d; ++na)
      for (int nb = 0; nb < d; ++nb) {
        long src = base + na * sa + nb * sb;
        long dst = (static_cast<long>(na) * d + nb) * nrest + rarest;
        out[dst] = s.amp[src];
        order[dst] = src;
      }
  }
}

void scatter_pair(State& s, const Vec& data, const std::vector<long>& order) {
  for (long i = 0; i < data.size(); ++i) s.amp[order[i]] = data[i];
}

// ------------------------------------------------------------- gate caches
struct SqueezeKey {
  std::uint64_t rbits;
  int d;
  bool operator<(const SqueezeKey& o) const { return std::tie(rbits, d) < std::tie(o.rbits, o.d); }
};

std::uint64_t dbits(double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, sizeof(u));
  return u;
}

std::mutex g_cache_mutex;
std::map<SqueezeKey, Mat> g_squeeze_cache;
std::map<std::tuple<std::uint64_t, std::uint64_t, int, int>, std::unique_ptr<BsBlocks>> g_bs_cache;
std::map<int, QuadBasis> g_quad_cache;

}  // namespace

// ---------------------------------------------------------------- operators
Mat op_a(int d) {
  Mat m = Mat::Zero(d, d);
  for (int n = 1; n < d; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
  return m;
}

Mat op_n(int d) {
  Mat m = Mat::Zero(d, d);
  for (int n = 0; n < d; ++n) m(n, n) = n;
  return m;
}

Mat op_q(int d) {
  Mat a = op_a(d);
  return (a + a.adjoint()) / std::sqrt(2.0);
}

Mat op_p(int d) {
  Mat a = op_a(d);
  return (a - a.adjoint()) / (cxd(0.0, 1.0) * std::sqrt(2.0));
}

Mat expm_antiherm(const Mat& A) {
  Mat H = cxd(0.0, -1.0) * A;
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  const RVec& w = es.eigenvalues();
  const Mat& V = es.eigenvectors();
  Vec phases(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) phases[i] = std::exp(cxd(0.0, w[i]));
  return V * phases.asDiagonal() * V.adjoint();
}

Mat u_displace(cxd alpha, int d) {
  Mat a = op_a(d);
  return expm_antiherm(alpha * a.adjoint() - std::conj(alpha) * a);
}

Mat u_squeeze(double r, int d) {
  Mat a = op_a(d);
  Mat a2 = a * a;
  return expm_antiherm(0.5 * (a2 - a2.adjoint()) * r);
}

Mat u_rotate(double theta, int d) {
  Mat m = Mat::Zero(d, d);
  for (int n = 0; n < d; ++n) m(n, n) = std::exp(cxd(0.0, theta * n));
  return m;
}

// -------------------------------------------------------------------- State
double State::tail_mass(int mode, int band) const {
  const int d = dim;
  long stride = 1;
  for (int k = mode + 1; k < modes; ++k) stride *= d;
  double mass = 0.0;
  const long total = amp.size();
  for (long i = 0; i < total; ++i) {
    int digit = static_cast<int>((i / stride) % d);
    if (digit >= d - band) mass += std::norm(amp[i]);
  }
  return mass;
}

State make_state(const Vec& ket) {
  State s;
  s.modes = 1;
  s.dim = static_cast<int>(ket.size());
  s.amp = ket;
  return s;
}

State product_state(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("product_state: dim mismatch");
  State s;
  s.modes = 2;
  s.dim = static_cast<int>(a.size());
  s.amp = Vec(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) s.amp[i * b.size() + j] = a[i] * b[j];
  return s;
}

State product_state(const Vec& a, const Vec& b, const Vec& c) {
  State ab = product_state(a, b);
  return attach_mode(ab, c);
}

State attach_mode(const State& s, const Vec& ket) {
  if (static_cast<int>(ket.size()) != s.dim)
    throw std::invalid_argument("attach_mode: dim mismatch");
  if (s.modes >= 3) throw std::invalid_argument("attach_mode: at most 3 modes supported");
  State out;
  out.modes = s.modes + 1;
  out.dim = s.dim;
  out.amp = Vec(s.amp.size() * ket.size());
  for (long i = 0; i < s.amp.size(); ++i)
    for (Eigen::Index n = 0; n < ket.size(); ++n) out.amp[i * ket.size() + n] = s.amp[i] * ket[n];
  return out;
}

// --------------------------------------------------------------- application
void apply_one_mode(State& s, const Mat& u, int mode) {
  const int d = s.dim;
  const long R = stride_of(s, mode);
  long L = 1;
  for (int k = 0; k < mode; ++k) L *= d;
  using RowMat = Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  for (long l = 0; l < L; ++l) {
    Eigen::Map<RowMat> blk(s.amp.data() + l * d * R, d, R);
    RowMat tmp = u * blk;
    blk = tmp;
  }
}

const QuadBasis& quad_basis(int d) {
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto it = g_quad_cache.find(d);
  if (it != g_quad_cache.end()) return it->second;
  Eigen::SelfAdjointEigenSolver<Mat> es(op_q(d));
  QuadBasis qb;
  qb.x = es.eigenvalues();
  qb.v = es.eigenvectors();
  return g_quad_cache.emplace(d, std::move(qb)).first->second;
}

void apply_q_phase(State& s, const RVec& phase_of_x, int mode) {
  const QuadBasis& qb = quad_basis(s.dim);
  apply_one_mode(s, qb.v.adjoint(), mode);
  const long stride = stride_of(s, mode);
  const int d = s.dim;
  Vec ph(d);
  for (int i = 0; i < d; ++i) ph[i] = std::exp(cxd(0.0, phase_of_x[i]));
  for (long i = 0; i < s.amp.size(); ++i) s.amp[i] *= ph[(i / stride) % d];
  apply_one_mode(s, qb.v, mode);
}

void apply_q_factor(State& s, const Vec& factor_of_x, int mode) {
  const QuadBasis& qb = quad_basis(s.dim);
  apply_one_mode(s, qb.v.adjoint(), mode);
  const long stride = stride_of(s, mode);
  const int d = s.dim;
  for (long i = 0; i < s.amp.size(); ++i) s.amp[i] *= factor_of_x[(i / stride) % d];
  apply_one_mode(s, qb.v, mode);
}

void apply_cz(State& s, double g, int ma, int mb) {
  const QuadBasis& qb = quad_basis(s.dim);
  const int d = s.dim;
  apply_one_mode(s, qb.v.adjoint(), ma);
  apply_one_mode(s, qb.v.adjoint(), mb);
  const long sa = stride_of(s, ma);
  const long sb = stride_of(s, mb);
  // d² phase table
  Vec ph(static_cast<long>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) ph[static_cast<long>(i) * d + j] = std::exp(cxd(0.0, g * qb.x[i] * qb.x[j]));
  for (long i = 0; i < s.amp.size(); ++i) {
    int ia = static_cast<int>((i / sa) % d);
    int ib = static_cast<int>((i / sb) % d);
    s.amp[i] *= ph[static_cast<long>(ia) * d + ib];
  }
  apply_one_mode(s, qb.v, ma);
  apply_one_mode(s, qb.v, mb);
}

// ------------------------------------------------------------------ BsBlocks
BsBlocks::BsBlocks(double theta, double phi, int d) : BsBlocks(theta, phi, d, d) {}

BsBlocks::BsBlocks(double theta, double phi, int d1, int d2) : d1_(d1), d2_(d2) {
  const cxd rp = std::exp(cxd(0.0, phi));
  for (int N = 0; N <= d1 + d2 - 2; ++N) {
    int lo = std::max(0, N - (d2 - 1));
    int hi = std::min(N, d1 - 1);
    int B = hi - lo + 1;
    Mat G = Mat::Zero(B, B);
    for (int i = 0; i + 1 < B; ++i) {
      int n1 = lo + i;
      int n2 = N - n1;
      // a₁†a₂ raises n₁: couples (n1, n2) → (n1+1, n2−1)
      G(i + 1, i) = theta * rp * std::sqrt(static_cast<double>((n1 + 1) * n2));
    }
    Mat A = G - G.adjoint();
    blocks_.emplace_back(lo, expm_antiherm(A));
  }
}

void BsBlocks::apply_raw(cxd* data, long R) const {
  Eigen::Map<Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> flat(
      data, static_cast<long>(d1_) * d2_, R);
  for (size_t N = 0; N < blocks_.size(); ++N) {
    const int lo = blocks_[N].first;
    const Mat& U = blocks_[N].second;
    const int B = static_cast<int>(U.rows());
    Mat sub(B, R);
    for (int i = 0; i < B; ++i) {
      int n1 = lo + i;
      int n2 = static_cast<int>(N) - n1;
      sub.row(i) = flat.row(static_cast<long>(n1) * d2_ + n2);
    }
    Mat res = U * sub;
    for (int i = 0; i < B; ++i) {
      int n1 = lo + i;
      int n2 = static_cast<int>(N) - n1;
      flat.row(static_cast<long>(n1) * d2_ + n2) = res.row(i);
    }
  }
}

void BsBlocks::apply(State& s, int ma, int mb) const {
  if (d1_ != s.dim || d2_ != s.dim)
    throw std::invalid_argument("BsBlocks: dim mismatch with state");
  check_mode(s, ma);
  check_mode(s, mb);
  Vec tmp;
  std::vector<long> order;
  gather_pair(s, ma, mb, tmp, order);
  apply_raw(tmp.data(), tmp.size() / (static_cast<long>(d1_) * d2_));
  scatter_pair(s, tmp, order);
}

const BsBlocks& bs_cached(double theta, double phi, int d1, int d2) {
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto key = std::make_tuple(dbits(theta), dbits(phi), d1, d2);
  auto it = g_bs_cache.find(key);
  if (it != g_bs_cache.end()) return *it->second;
  auto ptr = std::make_unique<BsBlocks>(theta, phi, d1, d2);
  return *g_bs_cache.emplace(key, std::move(ptr)).first->second;
}

namespace {

const Mat& squeeze_cached(double r, int d) {
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  SqueezeKey key{dbits(r), d};
  auto it = g_squeeze_cache.find(key);
  if (it != g_squeeze_cache.end()) return it->second;
  if (g_squeeze_cache.size() > 256) g_squeeze_cache.clear();
  return g_squeeze_cache.emplace(key, u_squeeze(r, d)).first->second;
}

// Two-mode squeezing conserves n₁ − n₂; apply blockwise over the difference.
void apply_tms(State& s, double r, int ma, int mb) {
  const int d = s.dim;
  Vec tmp;
  std::vector<long> order;
  gather_pair(s, ma, mb, tmp, order);
  const long R = tmp.size() / (static_cast<long>(d) * d);
  Eigen::Map<Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> flat(
      tmp.data(), static_cast<long>(d) * d, R);
  for (int delta = -(d - 1); delta <= d - 1; ++delta) {
    int lo = std::max(0, delta);
    int hi = d - 1 + std::min(0, delta);
    int B = hi - lo + 1;
    if (B <= 0) continue;
    Mat G = Mat::Zero(B, B);
    for (int i = 0; i + 1 < B; ++i) {
      int n1 = lo + i;
      int n2 = n1 - delta;
      // a₁†a₂† raises both: (n1, n2) → (n1+1, n2+1)
      G(i + 1, i) = r * std::sqrt(static_cast<double>((n1 + 1) * (n2 + 1)));
    }
    Mat A = G - G.adjoint();
    Mat U = expm_antiherm(A);
    Mat sub(B, R);
    for (int i = 0; i < B; ++i) {
      int n1 = lo + i;
      sub.row(i) = flat.row(static_cast<long>(n1) * d + (n1 - delta));
    }
    Mat res = U * sub;
    for (int i = 0; i < B; ++i) {
      int n1 = lo + i;
      flat.row(static_cast<long>(n1) * d + (n1 - delta)) = res.row(i);
    }
  }
  scatter_pair(s, tmp, order);
}

}  // namespace

// ------------------------------------------------------------ gate dispatch
GaussianOp GaussianOp::squeeze(double r, int m) {
  GaussianOp op;
  op.kind = GateKind::Squeeze;
  op.r = r;
  op.m1 = m;
  return op;
}
GaussianOp GaussianOp::displace(cxd alpha, int m) {
  GaussianOp op;
  op.kind = GateKind::Displace;
  op.alpha = alpha;
  op.m1 = m;
  return op;
}
GaussianOp GaussianOp::rotate(double theta, int m) {
  GaussianOp op;
  op.kind = GateKind::Rotate;
  op.theta = theta;
  op.m1 = m;
  return op;
}
GaussianOp GaussianOp::beamsplitter(double theta, double phi, int m1, int m2) {
  GaussianOp op;
  op.kind = GateKind::Beamsplitter;
  op.theta = theta;
  op.phi = phi;
  op.m1 = m1;
  op.m2 = m2;
  return op;
}
GaussianOp GaussianOp::cz(double g, int m1, int m2) {
  GaussianOp op;
  op.kind = GateKind::CZ;
  op.g = g;
  op.m1 = m1;
  op.m2 = m2;
  return op;
}
GaussianOp GaussianOp::two_mode_squeeze(double r, int m1, int m2) {
  GaussianOp op;
  op.kind = GateKind::TwoModeSqueeze;
  op.r = r;
  op.m1 = m1;
  op.m2 = m2;
  return op;
}

double apply_gaussian(State& state, const GaussianOp& op, double leakage_bound) {
  check_mode(state, op.m1);
  bool two_mode = op.kind == GateKind::Beamsplitter || op.kind == GateKind::CZ ||
                  op.kind == GateKind::TwoModeSqueeze;
  if (two_mode) {
    check_mode(state, op.m2);
    if (op.m1 == op.m2) throw std::invalid_argument("two-mode gate needs distinct modes");
  }
  switch (op.kind) {
    case GateKind::Squeeze:
      check_finite(op.r, "squeeze r");
      apply_one_mode(state, squeeze_cached(op.r, state.dim), op.m1);
      break;
    case GateKind::Displace:
      check_finite(op.alpha.real(), "displace alpha");
      check_finite(op.alpha.imag(), "displace alpha");
      if (op.alpha != cxd(0.0, 0.0))
        apply_one_mode(state, u_displace(op.alpha, state.dim), op.m1);
      break;
    case GateKind::Rotate: {
      check_finite(op.theta, "rotate theta");
      const long stride = stride_of(state, op.m1);
      const int d = state.dim;
      Vec ph(d);
      for (int n = 0; n < d; ++n) ph[n] = std::exp(cxd(0.0, op.theta * n));
      for (long i = 0; i < state.amp.size(); ++i) state.amp[i] *= ph[(i / stride) % d];
      break;
    }
    case GateKind::Beamsplitter:
      check_finite(op.theta, "bs theta");
      check_finite(op.phi, "bs phi");
      bs_cached(op.theta, op.phi, state.dim, state.dim).apply(state, op.m1, op.m2);
      break;
    case GateKind::CZ:
      check_finite(op.g, "cz g");
      apply_cz(state, op.g, op.m1, op.m2);
      break;
    case GateKind::TwoModeSqueeze:
      check_finite(op.r, "tms r");
      apply_tms(state, op.r, op.m1, op.m2);
      break;
  }
  double leakage = state.tail_mass(op.m1);
  if (two_mode) leakage = std::max(leakage, state.tail_mass(op.m2));
  if (leakage > leakage_bound)
    throw TruncationError("gate leakage " + std::to_string(leakage) +
                          " exceeds bound; dim too small for this state");
  return leakage;
}

State applied_gaussian(const State& state, const GaussianOp& op, double leakage_bound,
                       double* leakage) {
  State out = state;
  double l = apply_gaussian(out, op, leakage_bound);
  if (leakage) *leakage = l;
  return out;
}

// -------------------------------------------------------------- measurements
RVec hermite_point(int d, double x) {
  RVec h(d);
  h[0] = std::pow(kPi, -0.25) * std::exp(-x * x / 2.0);
  if (d > 1) h[1] = std::sqrt(2.0) * x * h[0];
  for (int n = 1; n + 1 < d; ++n)
    h[n + 1] = std::sqrt(2.0 / (n + 1)) * x * h[n] - std::sqrt(n / (n + 1.0)) * h[n - 1];
  return h;
}

std::vector<double> pnr_marginal(const State& s, int mode) {
  check_mode(s, mode);
  const int d = s.dim;
  const long stride = stride_of(s, mode);
  std::vector<double> probs(d, 0.0);
  for (long i = 0; i < s.amp.size(); ++i)
    probs[(i / stride) % d] += std::norm(s.amp[i]);
  return probs;
}

namespace {

// Removes `mode`, keeping only entries with that digit equal to n, scaled by
// per-entry weights if provided. Returns the unnormalized remainder.
Vec slice_mode(const State& s, int mode, int n) {
  const int d = s.dim;
  const long stride = stride_of(s, mode);
  Vec out(s.amp.size() / d);
  long w = 0;
  for (long i = 0; i < s.amp.size(); ++i)
    if (static_cast<int>((i / stride) % d) == n) out[w++] = s.amp[i];
  return out;
}

}  // namespace

PnrOutcome pnr_measure(State& s, int mode, Rng& rng) {
  std::vector<double> probs = pnr_marginal(s, mode);
  double total = 0.0;
  for (double p : probs) total += p;
  if (total < 1e-12) throw MeasurementError("pnr: state norm vanished");
  double u = rng.uniform() * total;
  int n = 0;
  double acc = 0.0;
  for (; n < s.dim; ++n) {
    acc += probs[n];
    if (u < acc) break;
  }
  if (n == s.dim) n = s.dim - 1;
  PnrOutcome out;
  out.n = n;
  out.prob = probs[n] / total;
  Vec rest = slice_mode(s, mode, n);
  double nrm = rest.norm();
  if (nrm < 1e-300) throw MeasurementError("pnr: zero-probability branch");
  s.amp = rest / nrm;
  s.modes -= 1;
  return out;
}

double pnr_project(State& s, int mode, int n) {
  check_mode(s, mode);
  if (n < 0 || n >= s.dim) throw std::out_of_range("pnr_project: n out of range");
  Vec rest = slice_mode(s, mode, n);
  double prob = rest.squaredNorm();
  if (prob < 1e-300) throw MeasurementError("pnr_project: zero-probability outcome");
  s.amp = rest / std::sqrt(prob);
  s.modes -= 1;
  return prob;
}

double homodyne_project(State& s, int mode, double theta, double m, double min_density) {
  check_mode(s, mode);
  const int d = s.dim;
  RVec h = hermite_point(d, m);
  Vec coeff(d);
  for (int n = 0; n < d; ++n) coeff[n] = h[n] * std::exp(cxd(0.0, -theta * n));
  const long stride = stride_of(s, mode);
  Vec out = Vec::Zero(s.amp.size() / d);
  // out[rest] = Σ_n coeff[n] ψ(..., n, ...)
  long w = 0;
  long outer = 1;
  for (int k = 0; k < mode; ++k) outer *= d;
  const long inner = stride;
  for (long l = 0; l < outer; ++l)
    for (long r = 0; r < inner; ++r) {
      cxd acc = 0.0;
      const long base = l * d * inner + r;
      for (int n = 0; n < d; ++n) acc += coeff[n] * s.amp[base + n * inner];
      out[w++] = acc;
    }
  double density = out.squaredNorm();
  if (density < min_density)
    throw MeasurementError("homodyne: outcome density " + std::to_string(density) +
                           " below threshold");
  s.amp = out / std::sqrt(density);
  s.modes -= 1;
  return density;
}

double homodyne_sample(State& s, int mode, double theta, Rng& rng, int grid_points,
                       double* density) {
  check_mode(s, mode);
  const int d = s.dim;
  Mat rho = reduced_density(s, mode);
  const double L = std::sqrt(2.0 * d) + 5.0;
  const double dx = 2.0 * L / (grid_points - 1);
  std::vector<double> pdf(grid_points);
  Vec h(d);
  for (int gpt = 0; gpt < grid_points; ++gpt) {
    double x = -L + gpt * dx;
    RVec hr = hermite_point(d, x);
    for (int n = 0; n < d; ++n) h[n] = hr[n] * std::exp(cxd(0.0, -theta * n));
    pdf[gpt] = std::max(0.0, (h.adjoint() * rho * h)(0, 0).real());
  }
  std::vector<double> cdf(grid_points, 0.0);
  for (int gpt = 1; gpt < grid_points; ++gpt)
    cdf[gpt] = cdf[gpt - 1] + 0.5 * (pdf[gpt] + pdf[gpt - 1]) * dx;
  double total = cdf.back();
  if (total < 1e-9) throw MeasurementError("homodyne_sample: vanished marginal");
  double u = rng.uniform() * total;
  int hi = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  if (hi == 0) hi = 1;
  if (hi >= grid_points) hi = grid_points - 1;
  double seg = cdf[hi] - cdf[hi - 1];
  double frac = seg > 0 ? (u - cdf[hi - 1]) / seg : 0.5;
  double m = -L + (hi - 1 + frac) * dx;
  double dens = homodyne_project(s, mode, theta, m, 1e-300);
  if (density) *density = dens;
  return m;
}

// ---------------------------------------------------------------- densities
Mat density_from_ket(const Vec& ket) { return ket * ket.adjoint(); }

Mat reduced_density(const State& s, int keep) {
  check_mode(s, keep);
  const int d = s.dim;
  // Gather kept mode to the front: A(n, rest); ρ = A A†.
  long outer = 1;
  for (int k = 0; k < keep; ++k) outer *= d;
  const long inner = stride_of(s, keep);
  Mat A(d, s.amp.size() / d);
  long col = 0;
  for (long l = 0; l < outer; ++l)
    for (long r = 0; r < inner; ++r) {
      const long base = l * d * inner + r;
      for (int n = 0; n < d; ++n) A(n, col) = s.amp[base + n * inner];
      ++col;
    }
  return A * A.adjoint();
}

double fidelity(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("fidelity: dim mismatch");
  return std::norm(a.dot(b));
}

double fidelity(const State& a, const State& b) {
  if (a.modes != b.modes || a.dim != b.dim)
    throw std::invalid_argument("fidelity: shape mismatch");
  return std::norm(a.amp.dot(b.amp));
}

double fidelity(const Mat& rho, const Vec& psi) {
  if (rho.rows() != psi.size()) throw std::invalid_argument("fidelity: shape mismatch");
  return (psi.adjoint() * rho * psi)(0, 0).real();
}

double fidelity(const Mat& rho, const Mat& sigma) {
  if (rho.rows() != sigma.rows()) throw std::invalid_argument("fidelity: shape mismatch");
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  RVec w = es.eigenvalues().cwiseMax(0.0);
  Mat sq = es.eigenvectors() * w.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
  Mat m = sq * sigma * sq;
  Eigen::SelfAdjointEigenSolver<Mat> es2(m);
  double tr = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return tr * tr;
}

}  // namespace gkpsim
