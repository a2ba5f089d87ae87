// Calibration utility for the photon-subtraction cat factory: scans angle
// schedules and reports pool statistics (mean amplitude, acceptance,
// per-detector uniformity, truncation) plus the breeding success rate each
// pool supports. Used to pick default schedule endpoints; not part of the
// shipped command-line interface.
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include <fstream>

#include "CLI11.hpp"
#include "gkpsim/engineering.hpp"
#include "gkpsim/metrology.hpp"
#include "gkpsim/success.hpp"

using namespace gkpsim;

namespace {

struct PoolStats {
  std::vector<CatRecord> records;
  int ok = 0;
  int accepted = 0;
  double mean_ac = 0.0;
  double sd_ac = 0.0;
  double odd_frac = 0.0;
  double perdet_ratio = 0.0;
  double trunc_frac = 0.0;
  double mean_photons = 0.0;
};

PoolStats run_pool(const PhantmConfig& cfg, int trials, int threads) {
  PoolStats st;
  st.records.resize(trials);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int t = next.fetch_add(1);
      if (t >= trials) return;
      st.records[t] = run_phantm_trial(cfg, static_cast<std::uint64_t>(t));
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < std::max(1, threads); ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  const int nsub = cfg.subtractions_per_step;
  std::vector<double> per_det(nsub, 0.0);
  int det_events = 0;
  double sum = 0.0, sum2 = 0.0;
  int odd = 0;
  for (const CatRecord& r : st.records) {
    if (r.truncated) continue;
    ++st.ok;
    st.mean_photons += r.total_photons;
    for (std::size_t i = 0; i < r.photons.size(); ++i)
      per_det[i % nsub] += r.photons[i];
    det_events += static_cast<int>(r.photons.size()) / nsub;
    if (r.accepted) {
      ++st.accepted;
      sum += r.alpha_c;
      sum2 += r.alpha_c * r.alpha_c;
      odd += r.parity;
    }
  }
  st.trunc_frac = 1.0 - static_cast<double>(st.ok) / trials;
  if (st.ok > 0) st.mean_photons /= st.ok;
  if (st.accepted > 0) {
    st.mean_ac = sum / st.accepted;
    st.sd_ac = std::sqrt(std::max(0.0, sum2 / st.accepted - st.mean_ac * st.mean_ac));
    st.odd_frac = static_cast<double>(odd) / st.accepted;
  }
  if (det_events > 0) {
    double lo = 1e300, hi = 0.0;
    for (double v : per_det) {
      lo = std::min(lo, v / det_events);
      hi = std::max(hi, v / det_events);
    }
    st.perdet_ratio = hi / std::max(lo, 1e-12);
  }
  return st;
}

std::vector<double> ramp_schedule(double lo, double hi, int n, double gamma) {
  std::vector<double> sched(n);
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    sched[i] = lo + (hi - lo) * std::pow(t, gamma);
  }
  return sched;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cat-factory schedule calibration"};
  std::vector<std::string> schedules;  // "lo:hi" pairs
  std::vector<double> dbs{13.0};
  std::vector<int> steps{20};
  int trials = 48;
  int dim = 60;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  int breed_iters = 200;
  int breed_m = 3;
  double r_lb = 0.5;
  std::uint64_t seed = 20260818;
  std::string cell = "macronode";
  std::string dump;
  bool sample_hd = false;
  double gamma = 1.0;
  app.add_option("--schedule", schedules, "angle schedule endpoints lo:hi (repeatable)");
  app.add_option("--db", dbs, "cluster squeezing values in dB");
  app.add_option("--steps", steps, "step counts");
  app.add_option("--trials", trials, "trials per setting");
  app.add_option("--dim", dim, "Fock dimension");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--breed-iters", breed_iters, "breeding iterations for the success estimate (0 = skip)");
  app.add_option("--breed-m", breed_m, "breeding rounds");
  app.add_option("--r-lb", r_lb, "lower squeezing bound for leaf adjustment");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--cell", cell, "cell kind: macronode|chain");
  app.add_option("--dump-pool", dump, "write accepted records as JSON lines to this file prefix");
  app.add_flag("--sample-homodyne", sample_hd, "sample the wire homodyne instead of post-selecting 0");
  app.add_option("--gamma", gamma, "ramp shape exponent (1 = linear, >1 late-heavy)");
  CLI11_PARSE(app, argc, argv);

  if (schedules.empty()) schedules = {"0.08:0.20"};

  std::printf(
      "%-11s %5s %5s %6s %4s %4s %7s %7s %6s %7s %7s %7s %9s %7s %7s\n",
      "schedule", "db", "steps", "trials", "ok", "acc", "mean_ac", "sd_ac",
      "odd%", "perdet", "trunc%", "phot", "succ", "dq", "dp");
  for (const std::string& sch : schedules) {
    const auto colon = sch.find(':');
    const double lo = std::stod(sch.substr(0, colon));
    const double hi = colon == std::string::npos ? lo : std::stod(sch.substr(colon + 1));
    for (double db : dbs) {
      for (int nstep : steps) {
        PhantmConfig cfg;
        cfg.cluster_db = db;
        cfg.steps = nstep;
        cfg.dim = dim;
        cfg.seed = mix_seed(seed, static_cast<std::uint64_t>(db * 100),
                            static_cast<std::uint64_t>(nstep));
        cfg.cell = cell == "chain" ? CellKind::Chain : CellKind::Macronode;
        cfg.sample_homodyne = sample_hd;
        cfg.angle_schedule = ramp_schedule(lo, hi, cfg.subtractions_per_step, gamma);
        cfg.finalize();
        PoolStats st = run_pool(cfg, trials, threads);
        if (!dump.empty()) {
          std::ofstream out(dump + "_" + std::to_string((int)db) + "_" +
                            std::to_string(nstep) + ".jsonl");
          for (const CatRecord& r : st.records) {
            if (r.truncated) continue;
            out << "{\"ac\":" << r.alpha_c << ",\"alpha\":" << r.alpha
                << ",\"r\":" << r.r_cat << ",\"fid\":" << r.fit_fidelity
                << ",\"parity\":" << r.parity << ",\"tot\":" << r.total_photons
                << ",\"acc\":" << (r.accepted ? 1 : 0) << "}\n";
          }
        }

        double succ = -1.0, mdq = 0.0, mdp = 0.0;
        if (breed_iters > 0 && st.accepted >= (1 << breed_m)) {
          BreedParams bp;
          bp.M = breed_m;
          bp.r_cluster = db_to_r(db);
          bp.r_lb = r_lb;
          PoolEstimate est = estimate_success_from_pool(
              st.records, bp, dim, breed_iters, mix_seed(seed, 77), {}, threads);
          succ = est.success;
          mdq = est.mean_delta_q;
          mdp = est.mean_delta_p;
        }
        std::printf(
            "%-11s %5.1f %5d %6d %4d %4d %7.3f %7.3f %6.2f %7.2f %7.2f %7.2f %9.3f %7.3f %7.3f\n",
            sch.c_str(), db, nstep, trials, st.ok, st.accepted, st.mean_ac,
            st.sd_ac, st.odd_frac, st.perdet_ratio, 100.0 * st.trunc_frac,
            st.mean_photons, succ, mdq, mdp);
        std::fflush(stdout);
      }
    }
  }
  return 0;
}
