#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "gkpsim/engineering.hpp"

using namespace gkpsim;

namespace {
constexpr double kPi = 3.14159265358979323846;

PhantmConfig quick_cfg() {
  PhantmConfig cfg;
  cfg.cluster_db = 13.0;
  cfg.steps = 10;
  cfg.dim = 60;
  cfg.seed = 4242;
  cfg.finalize();
  return cfg;
}

double mean_quadrature(const State& st, Quadrature which) {
  State t = st;
  apply_one_mode(t, which == Quadrature::Q ? op_q(st.dim) : op_p(st.dim), 0);
  return st.amp.dot(t.amp).real();
}

// Dense two-mode beamsplitter oracle built the slow way.
Mat dense_bs(double theta, double phi, int d) {
  Mat a1 = Eigen::kroneckerProduct(op_a(d), Mat::Identity(d, d));
  Mat a2 = Eigen::kroneckerProduct(Mat::Identity(d, d), op_a(d));
  Mat g = theta * (std::exp(cxd(0.0, phi)) * a1.adjoint() * a2 -
                   std::exp(cxd(0.0, -phi)) * a1 * a2.adjoint());
  return g.exp();
}
}  // namespace

TEST_CASE("config validation") {
  PhantmConfig cfg = quick_cfg();
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.angle_schedule.size() == 8);
  CHECK(cfg.angle_schedule.front() == doctest::Approx(0.08));
  CHECK(cfg.angle_schedule.back() == doctest::Approx(0.20));

  PhantmConfig bad = cfg;
  bad.angle_schedule = {0.2, 0.1};  // decreasing under gradient mode
  bad.subtractions_per_step = 2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.gradient = false;
  CHECK_NOTHROW(bad.validate());

  bad = cfg;
  bad.angle_schedule.pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.steps = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("no-tap step teleports a Fock state up to the cell's fixed frame") {
  // |1⟩ is a rotation eigenstate, so teleport fidelity isolates the cell's
  // residual (finite ancilla squeezing) from frame rotations.
  for (CellKind cell : {CellKind::Macronode, CellKind::Chain}) {
    PhantmConfig cfg = quick_cfg();
    cfg.cell = cell;
    cfg.angle_schedule.assign(8, 0.0);
    Rng rng(7);
    State wire(1, cfg.dim);
    wire.amp = ket_fock(1, cfg.dim);
    PhantmStepResult res = phantm_step(wire, cfg, rng);
    REQUIRE(res.ok);
    for (int n : res.photons) CHECK(n == 0);
    CHECK(res.homodyne_m == 0.0);
    CHECK(fidelity(wire.amp, ket_fock(1, cfg.dim)) > 0.90);
  }
}

TEST_CASE("teleport cell preserves quadrature orientation of displaced states") {
  // Two no-tap steps must return a coherent state to itself (the single-step
  // map is a parity flip plus weak envelope damping); the chain cell keeps the
  // raw measurement gauge and rotates the displacement into p instead.
  PhantmConfig cfg = quick_cfg();
  cfg.angle_schedule.assign(8, 0.0);
  Vec probe = ket_displaced_squeezed(1.2, 0.0, cfg.dim);

  Rng rng(7);
  State wire(1, cfg.dim);
  wire.amp = probe;
  phantm_step(wire, cfg, rng);
  State mid = wire;
  CHECK(std::abs(mean_quadrature(mid, Quadrature::Q) + 1.2 * std::sqrt(2.0)) <
        0.05);
  CHECK(std::abs(mean_quadrature(mid, Quadrature::P)) < 0.05);
  phantm_step(wire, cfg, rng);
  CHECK(fidelity(wire.amp, probe) > 0.99);

  PhantmConfig chain = cfg;
  chain.cell = CellKind::Chain;
  Rng rng2(7);
  State cw(1, cfg.dim);
  cw.amp = probe;
  phantm_step(cw, chain, rng2);
  CHECK(std::abs(mean_quadrature(cw, Quadrature::P) - 1.2 * std::sqrt(2.0)) <
        0.05);
}

TEST_CASE("photon subtraction removes one photon from a Fock state") {
  // Weak tap on |3⟩: conditioned on detecting 1, the state is exactly |2⟩.
  const int d = 20;
  State s(1, d);
  s.amp = ket_fock(3, d);
  Rng rng(11);
  int got = -2;
  for (int attempt = 0; attempt < 200 && got != 1; ++attempt) {
    State t = s;
    got = subtract_photons(t, 0, 0.3, 8, 10, rng);
    if (got == 1) {
      CHECK(fidelity(t.amp, ket_fock(2, d)) > 1.0 - 1e-10);
    }
  }
  CHECK(got == 1);  // a 1-count must occur in 200 draws at θ = 0.3
}

TEST_CASE("parity conservation and fit acceptance on full trials") {
  PhantmConfig cfg = quick_cfg();
  int accepted = 0;
  for (std::uint64_t t = 0; t < 12; ++t) {
    CatRecord rec = run_phantm_trial(cfg, t);
    if (rec.truncated) continue;
    CHECK(rec.total_photons ==
          std::accumulate(rec.photons.begin(), rec.photons.end(), 0));
    if (rec.accepted) {
      ++accepted;
      CHECK(rec.parity == rec.total_photons % 2);
      CHECK(rec.fit_fidelity > 0.95);
      CHECK(rec.alpha_c == doctest::Approx(rec.alpha * std::exp(rec.r_cat)));
    }
  }
  CHECK(accepted >= 1);
}

TEST_CASE("fitted parity equals the state's own parity expectation") {
  PhantmConfig cfg = quick_cfg();
  cfg.steps = 6;
  for (std::uint64_t t = 0; t < 6; ++t) {
    Vec out;
    CatRecord rec = run_phantm_trial(cfg, t, &out);
    if (rec.truncated || !rec.accepted) continue;
    double odd_mass = 0.0;
    for (int n = 1; n < cfg.dim; n += 2) odd_mass += std::norm(out[n]);
    const int meas = odd_mass > 0.5 ? 1 : 0;
    CHECK(rec.parity == meas);
  }
}

TEST_CASE("per-detector means stay roughly uniform under the ramp schedule") {
  PhantmConfig cfg = quick_cfg();
  cfg.steps = 8;
  std::vector<double> per_det(8, 0.0);
  int events = 0;
  for (std::uint64_t t = 0; t < 25; ++t) {
    CatRecord rec = run_phantm_trial(cfg, t);
    if (rec.truncated) continue;
    for (std::size_t i = 0; i < rec.photons.size(); ++i)
      per_det[i % 8] += rec.photons[i];
    events += static_cast<int>(rec.photons.size()) / 8;
  }
  REQUIRE(events > 0);
  double lo = 1e300, hi = 0.0;
  for (double v : per_det) {
    lo = std::min(lo, v / events);
    hi = std::max(hi, v / events);
  }
  CHECK(hi / std::max(lo, 1e-9) < 2.0);
}

TEST_CASE("trial streams are deterministic in (config, trial index)") {
  PhantmConfig cfg = quick_cfg();
  cfg.steps = 4;
  for (TapMode tap : {TapMode::Sequential, TapMode::Coherent}) {
    cfg.tap = tap;
    CatRecord a = run_phantm_trial(cfg, 3);
    CatRecord b = run_phantm_trial(cfg, 3);
    CHECK(a.photons == b.photons);
    CHECK(a.alpha == b.alpha);
    CHECK(a.r_cat == b.r_cat);
    CHECK(a.fit_fidelity == b.fit_fidelity);
    CatRecord c = run_phantm_trial(cfg, 4);
    CHECK(a.photons != c.photons);
  }
}

TEST_CASE("nelder-mead finds a quadratic minimum") {
  NmResult r = nelder_mead_2d(
      [](double x, double y) {
        return (x - 1.3) * (x - 1.3) + (y + 0.4) * (y + 0.4);
      },
      0.0, 0.0);
  CHECK(r.converged);
  CHECK(r.x0 == doctest::Approx(1.3).epsilon(1e-3));
  CHECK(r.x1 == doctest::Approx(-0.4).epsilon(1e-3));
}

TEST_CASE("cat fitter") {
  const int d = 60;
  SUBCASE("self-fit recovers parameters") {
    Vec c = ket_cat(2.0, 0.3, Parity::Even, d);
    FitResult f = fit_cat(c);
    CHECK(f.fid > 0.999);
    CHECK(f.alpha == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(f.r == doctest::Approx(0.3).epsilon(1e-2));
    CHECK(f.parity == 0);
    CHECK(f.orient == 'q');
  }
  SUBCASE("odd cat and rotated orientation") {
    Vec c = ket_cat(1.8, -0.2, Parity::Odd, d);
    Vec cp = u_rotate(kPi / 2, d) * c;
    FitResult f = fit_cat(cp);
    CHECK(f.fid > 0.999);
    CHECK(f.parity == 1);
    CHECK(f.orient == 'p');
    CHECK(f.alpha == doctest::Approx(1.8).epsilon(1e-2));
    CHECK(fidelity(ket_from_fit(f, d), cp) > 0.999);
  }
  SUBCASE("vacuum lands on the degenerate small-alpha branch") {
    FitResult f = fit_cat(ket_vacuum(d));
    CHECK(f.fid > 0.999);
    CHECK(f.alpha < 0.2);
  }
}

TEST_CASE("breeding event matches a dense two-mode oracle") {
  const int d = 24;
  BreedParams bp;
  bp.M = 1;
  bp.r_cluster = 1.4972;
  const double ab = bp.alpha_b();  // ξ/2 at M = 1
  Vec cat = ket_cat(ab, 0.0, Parity::Even, d);

  Vec bred = breed_pair(cat, cat, d);

  // Oracle: dense BS then contraction against the p = 0 homodyne bra.
  Mat u = dense_bs(kPi / 4, 0.0, d);
  Vec joint = Vec::Zero(static_cast<long>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      joint[static_cast<long>(i) * d + j] = cat[i] * cat[j];
  joint = u * joint;
  RVec h = hermite_point(d, 0.0);
  Vec out = Vec::Zero(d);
  for (int i = 0; i < d; ++i) {
    cxd acc(0.0, 0.0);
    for (int j = 0; j < d; ++j)
      acc += std::conj(h[j] * std::exp(cxd(0.0, -kPi / 2 * j))) *
             joint[static_cast<long>(i) * d + j];
    out[i] = acc;
  }
  out.normalize();
  CHECK(fidelity(bred, out) > 1.0 - 1e-10);

  // Breeding narrows the bred quadrature against a single input cat.
  double dp_in = effective_squeezing(cat, bp.xi, Quadrature::P);
  double dp_out = effective_squeezing(bred, bp.xi, Quadrature::P);
  CHECK(dp_out < dp_in);
}

TEST_CASE("leaf adjustment follows the feasibility windows") {
  BreedParams bp;
  bp.M = 3;
  bp.r_cluster = 1.4972;  // 13 dB
  bp.r_lb = 0.5;
  const int d = 60;
  const double ab = bp.alpha_b();
  CHECK(ab == doctest::Approx(bp.xi));

  Leaf l1 = adjust_leaf(ab * std::exp(0.8), 0, bp, d);
  CHECK(l1.kind == LeafKind::AtAlphaB);
  CHECK(l1.s == doctest::Approx(0.8));

  Leaf l2 = adjust_leaf(2.0 * ab * std::exp(0.9), 0, bp, d);
  CHECK(l2.kind == LeafKind::AtTwoAlphaB);
  CHECK(l2.s == doctest::Approx(0.9));

  Leaf l3 = adjust_leaf(1.0, 0, bp, d);  // too small for both targets
  CHECK(l3.kind == LeafKind::Substituted);
  CHECK(fidelity(l3.state, ket_squeezed_vacuum(-bp.r_cluster, 0.0, d)) >
        1.0 - 1e-12);

  Leaf l4 = adjust_leaf(40.0, 0, bp, d);  // too large for both targets
  CHECK(l4.kind == LeafKind::Substituted);

  // Odd parity at the same amplitude must change the leaf (momentum kick).
  Leaf even = adjust_leaf(ab * std::exp(0.8), 0, bp, d);
  Leaf odd = adjust_leaf(ab * std::exp(0.8), 1, bp, d);
  CHECK(fidelity(even.state, odd.state) < 0.999);
}

TEST_CASE("adaptive breeding produces sensor-grade samples from good records") {
  const int d = 60;
  BreedParams bp;
  bp.M = 3;
  bp.r_cluster = 1.4972;
  bp.r_lb = 0.5;
  std::vector<CatRecord> recs(8);
  for (auto& r : recs) {
    r.alpha_c = bp.alpha_b() * std::exp(0.9);
    r.parity = 0;
  }
  auto [state, sample] = adaptive_breed(recs, bp, d);
  CHECK(sample.delta_q > 0.0);
  CHECK(sample.delta_p > 0.0);
  CHECK(sample.source == SampleSource::Bred);
  // Ideal even cats at a healthy window point must land inside the
  // correctable disc delta_q² + delta_p² <= 2·10^{−1.02}.
  CHECK(sample.delta_q * sample.delta_q + sample.delta_p * sample.delta_p <
        2.0 * std::pow(10.0, -1.02));

  CHECK_THROWS_AS(adaptive_breed({recs[0]}, bp, d), std::invalid_argument);
}

TEST_CASE("substituting a squeezed vacuum trades one quadrature for the other") {
  const int d = 60;
  BreedParams bp;
  bp.M = 2;
  bp.r_cluster = 1.4972;
  bp.r_lb = 0.5;
  std::vector<CatRecord> good(4);
  for (auto& r : good) {
    r.alpha_c = bp.alpha_b() * std::exp(0.9);
    r.parity = 0;
  }
  std::vector<CatRecord> mixed = good;
  mixed[3].alpha_c = 0.3;  // forces the substitution branch
  auto [sg, good_sample] = adaptive_breed(good, bp, d);
  auto [sm, mixed_sample] = adaptive_breed(mixed, bp, d);
  const double dq_shift = mixed_sample.delta_q - good_sample.delta_q;
  const double dp_shift = mixed_sample.delta_p - good_sample.delta_p;
  CHECK(dq_shift * dp_shift < 0.0);  // one improves, the other degrades
}

TEST_CASE("state-based breeding path agrees with the record path on ideal cats") {
  const int d = 60;
  BreedParams bp;
  bp.M = 1;
  bp.r_cluster = 1.4972;
  bp.r_lb = 0.5;
  const double ab = bp.alpha_b();
  const double s = 0.9;
  std::vector<CatRecord> recs(2);
  std::vector<Vec> states;
  for (auto& r : recs) {
    r.alpha_c = ab * std::exp(s);
    r.r_cat = 0.25;
    r.alpha = r.alpha_c * std::exp(-r.r_cat);
    r.parity = 0;
    states.push_back(ket_cat(r.alpha, r.r_cat, Parity::Even, d));
  }
  auto [a, sa] = adaptive_breed(recs, bp, d);
  auto [b, sb] = adaptive_breed_states(states, recs, bp, d);
  CHECK(fidelity(a, b) > 0.99);
  CHECK(sa.delta_p == doctest::Approx(sb.delta_p).epsilon(0.05));
}

TEST_CASE("squeezing-gate decomposition") {
  SUBCASE("equal angles give a pure rotation") {
    VGateParams p = squeezing_gate_params(0.7, 0.7);
    CHECK(p.squeeze_magnitude == doctest::Approx(0.0));
    CHECK(p.pre_rotation == doctest::Approx(0.7));
  }
  SUBCASE("quarter-turn split gives unit magnitude") {
    VGateParams p = squeezing_gate_params(kPi / 2, 0.0);
    CHECK(p.pre_rotation == doctest::Approx(kPi / 4));
    CHECK(p.squeeze_magnitude == doctest::Approx(1.0));
    CHECK(p.post_rotation == doctest::Approx(kPi / 4));
  }
  SUBCASE("antipodal angles are rejected") {
    CHECK_THROWS_AS(squeezing_gate_params(kPi / 2, -kPi / 2),
                    std::invalid_argument);
  }
  SUBCASE("composed gate equals the product of its factors") {
    const int d = 20;
    VGateParams p = squeezing_gate_params(0.9, 0.3);
    Mat direct = u_rotate(p.post_rotation, d) *
                 u_squeeze(p.squeeze_magnitude, d) *
                 u_rotate(p.pre_rotation, d);
    Vec in = ket_cat(0.8, 0.1, Parity::Even, d);
    State s = make_state(in);
    apply_v_gate(s, 0, p);
    Vec via_op = direct * in;
    CHECK((s.amp - via_op).norm() < 1e-8);
  }
}
