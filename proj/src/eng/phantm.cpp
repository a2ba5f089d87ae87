#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gkpsim/engineering.hpp"

namespace gkpsim {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Detector headroom above the cap: outcomes in (cap, dtap) are observed and
// rejected; mass that would lie at/above dtap is negligible for weak taps.
int tap_dim(int cap) { return cap + 4; }

std::vector<double> default_schedule(int n) {
  // Linear ramp chosen so per-detector count histograms come out roughly
  // uniform; endpoints are config inputs in production runs.
  std::vector<double> a(n);
  if (n == 1) {
    a[0] = 0.14;
    return a;
  }
  for (int i = 0; i < n; ++i) a[i] = 0.08 + (0.20 - 0.08) * i / (n - 1.0);
  return a;
}
}  // namespace

void PhantmConfig::finalize() {
  if (angle_schedule.empty())
    angle_schedule = default_schedule(subtractions_per_step);
}

void PhantmConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("phantm: steps must be >= 1");
  if (subtractions_per_step < 1)
    throw std::invalid_argument("phantm: subtractions_per_step must be >= 1");
  if (static_cast<int>(angle_schedule.size()) != subtractions_per_step)
    throw std::invalid_argument(
        "phantm: angle_schedule length must equal subtractions_per_step");
  for (double th : angle_schedule)
    if (!(th >= 0.0) || th > kPi / 2)
      throw std::invalid_argument("phantm: angles must lie in [0, pi/2]");
  if (gradient &&
      !std::is_sorted(angle_schedule.begin(), angle_schedule.end()))
    throw std::invalid_argument(
        "phantm: gradient mode requires a nondecreasing angle schedule");
  if (pnr_cap < 1) throw std::invalid_argument("phantm: pnr_cap must be >= 1");
  if (dim < 8) throw std::invalid_argument("phantm: dim must be >= 8");
  if (cluster_db <= 0.0)
    throw std::invalid_argument("phantm: cluster_db must be positive");
  if (cell == CellKind::Chain && cz_weight == 0.0)
    throw std::invalid_argument("phantm: chain cell needs nonzero cz_weight");
}

int subtract_photons(State& s, int mode, double theta, int dtap, int cap,
                     Rng& rng) {
  const int d = s.dim;
  if (mode < 0 || mode >= s.modes)
    throw std::out_of_range("subtract_photons: bad mode");
  if (theta == 0.0) return 0;  // no tap, vacuum detector reads 0

  // Gather `mode` to the slow axis of a (d·dtap, R) row-major scratch buffer
  // with the detector mode starting in vacuum.
  const long total = s.amp.size();
  const long R = total / d;
  long stride = 1;
  for (int m = s.modes - 1; m > mode; --m) stride *= d;

  std::vector<cxd> flat(static_cast<std::size_t>(d) * dtap * R, cxd(0, 0));
  std::vector<long> rest_index(R);
  {
    long idx = 0;
    for (long i = 0; i < total; ++i) {
      const int a = static_cast<int>((i / stride) % d);
      if (a == 0) rest_index[idx++] = i;  // enumerate rest coordinates once
    }
  }
  for (int a = 0; a < d; ++a) {
    const long base = static_cast<long>(a) * dtap * R;
    for (long rI = 0; rI < R; ++rI)
      flat[base + rI] = s.amp[rest_index[rI] + a * stride];
  }

  bs_cached(theta, 0.0, d, dtap).apply_raw(flat.data(), R);

  // Detector marginal.
  std::vector<double> probs(dtap, 0.0);
  for (int a = 0; a < d; ++a)
    for (int k = 0; k < dtap; ++k) {
      const long base = (static_cast<long>(a) * dtap + k) * R;
      double acc = 0.0;
      for (long rI = 0; rI < R; ++rI) acc += std::norm(flat[base + rI]);
      probs[k] += acc;
    }
  double tot = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (tot < 1e-12) throw MeasurementError("subtract_photons: norm vanished");
  double u = rng.uniform() * tot;
  int n = 0;
  double acc = 0.0;
  for (; n < dtap; ++n) {
    acc += probs[n];
    if (u < acc) break;
  }
  if (n == dtap) n = dtap - 1;
  if (n > cap) return -1;

  // Project the detector on |n⟩ and scatter back.
  double nrm = std::sqrt(probs[n]);
  for (int a = 0; a < d; ++a) {
    const long base = (static_cast<long>(a) * dtap + n) * R;
    for (long rI = 0; rI < R; ++rI)
      s.amp[rest_index[rI] + a * stride] = flat[base + rI] / nrm;
  }
  return n;
}

namespace {

// Runs the per-step subtraction block on `mode`; fills result.photons.
// Returns false when a count exceeds the cap.
bool run_taps(State& st, int mode, const PhantmConfig& cfg, Rng& rng,
              std::vector<int>& photons) {
  const int nsub = cfg.subtractions_per_step;
  if (cfg.tap == TapMode::Sequential) {
    for (int k = 0; k < nsub; ++k) {
      int n = subtract_photons(st, mode, cfg.angle_schedule[k],
                               tap_dim(cfg.pnr_cap), cfg.pnr_cap, rng);
      if (n < 0) return false;
      photons.push_back(n);
    }
    return true;
  }
  // Coherent: one tap at the combined angle, then a multinomial split of the
  // total count across virtual detectors weighted by sin²θᵢ.
  double s2 = 0.0;
  std::vector<double> w(nsub);
  for (int k = 0; k < nsub; ++k) {
    w[k] = std::pow(std::sin(cfg.angle_schedule[k]), 2);
    s2 += w[k];
  }
  const double theta_eff = std::asin(std::min(1.0, std::sqrt(s2)));
  const int dtap = std::min(nsub * cfg.pnr_cap, 80) + 4;
  int n_tot = subtract_photons(st, mode, theta_eff, dtap,
                               nsub * cfg.pnr_cap, rng);
  if (n_tot < 0) return false;
  std::vector<int> counts(nsub, 0);
  double wsum = s2;
  for (int i = 0; i < n_tot; ++i) {
    double u = rng.uniform() * wsum;
    double accw = 0.0;
    int k = 0;
    for (; k < nsub; ++k) {
      accw += w[k];
      if (u < accw) break;
    }
    if (k == nsub) k = nsub - 1;
    counts[k] += 1;
  }
  for (int k = 0; k < nsub; ++k)
    if (counts[k] > cfg.pnr_cap) return false;
  photons.insert(photons.end(), counts.begin(), counts.end());
  return true;
}

}  // namespace

PhantmStepResult phantm_step(State& wire, const PhantmConfig& cfg, Rng& rng) {
  if (wire.modes != 1 || wire.dim != cfg.dim)
    throw std::invalid_argument("phantm_step: wire must be single-mode at cfg.dim");
  PhantmStepResult res;
  const int d = cfg.dim;
  const double r3 = db_to_r(cfg.cluster_db);
  const double g = cfg.cz_weight;

  // Fresh momentum-squeezed ancilla; both cells entangle it to the wire with a
  // weighted CZ. They differ only in the survivor correction applied after the
  // homodyne: the teleport cell restores the input frame, the chain cell keeps
  // the raw measurement gauge.
  Vec anc = ket_squeezed_vacuum(-r3, 0.0, d);
  State st = product_state(wire.amp, anc);  // mode 0 = wire, mode 1 = ancilla
  apply_cz(st, g, 0, 1);

  if (!run_taps(st, 0, cfg, rng, res.photons)) {
    res.ok = false;
    return res;
  }

  // Wire leaves through the p-homodyne; the ancilla survives.
  if (cfg.sample_homodyne) {
    res.homodyne_m = homodyne_sample(st, 0, kPi / 2, rng);
  } else {
    homodyne_project(st, 0, kPi / 2, 0.0);
    res.homodyne_m = 0.0;
  }
  st.normalize();

  if (cfg.cell == CellKind::Macronode) {
    // Survivor correction, innermost first: gauge squeeze (identity at unit CZ
    // weight), optional envelope damping, frame rotation, feedforward kick.
    if (g != 1.0)
      apply_gaussian(st, GaussianOp::squeeze(-std::log(g), 0));
    if (cfg.g_damping) {
      // Envelope damping ∝ e^{−q²/(2s²)}, s = e^{ln g + r3}.
      const double s_env = std::exp(std::log(g) + r3);
      const QuadBasis& qb = quad_basis(d);
      Vec f(d);
      for (int i = 0; i < d; ++i)
        f[i] = std::exp(-qb.x[i] * qb.x[i] / (2.0 * s_env * s_env));
      apply_q_factor(st, f, 0);
      st.normalize();
    }
    apply_gaussian(st, GaussianOp::rotate(kPi / 2, 0));
  }
  if (cfg.sample_homodyne && res.homodyne_m != 0.0) {
    // Unit-gain momentum kick correction e^{−i m q̂}.
    const QuadBasis& qb = quad_basis(d);
    RVec ph(d);
    for (int i = 0; i < d; ++i) ph[i] = -res.homodyne_m * qb.x[i];
    apply_q_phase(st, ph, 0);
  }
  st.normalize();
  wire = std::move(st);
  return res;
}

CatRecord run_phantm_trial(const PhantmConfig& cfg, std::uint64_t trial_index,
                           Vec* out_state) {
  PhantmConfig c = cfg;
  c.finalize();
  c.validate();
  Rng rng(mix_seed(c.seed, trial_index, 0));
  CatRecord rec;
  State wire(1, c.dim);
  // The wire is itself a cluster mode, so a trial starts from a
  // momentum-squeezed mode at the cluster squeezing, not from bare vacuum.
  wire.amp = ket_squeezed_vacuum(-db_to_r(c.cluster_db), 0.0, c.dim);
  try {
    for (int s = 0; s < c.steps; ++s) {
      PhantmStepResult step = phantm_step(wire, c, rng);
      rec.photons.insert(rec.photons.end(), step.photons.begin(),
                         step.photons.end());
      rec.homodyne_sum += std::abs(step.homodyne_m);
      if (!step.ok) {
        rec.truncated = true;
        rec.accepted = false;
        return rec;
      }
    }
  } catch (const TruncationError&) {
    rec.truncated = true;
    rec.accepted = false;
    return rec;
  } catch (const MeasurementError&) {
    rec.truncated = true;
    rec.accepted = false;
    return rec;
  }
  rec.total_photons =
      std::accumulate(rec.photons.begin(), rec.photons.end(), 0);
  FitResult f = fit_cat(wire.amp);
  rec.alpha = f.alpha;
  rec.r_cat = f.r;
  rec.parity = f.parity;
  rec.fit_fidelity = f.fid;
  rec.alpha_c = f.alpha_c;
  rec.orient = f.orient;
  rec.tail = f.tail;
  rec.nbar = f.nbar;
  rec.accepted = f.fid > 0.95;
  if (out_state) *out_state = wire.amp;
  return rec;
}

}  // namespace gkpsim
