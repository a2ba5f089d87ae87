#include "gkpsim/success.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace gkpsim {

bool ThresholdSurface::correctable(double delta_q, double delta_p) const {
  if (boundary.empty())
    return delta_q * delta_q + delta_p * delta_p <= radius_sq;
  // Polyline: boundary points sorted by Δ_q give the largest admissible Δ_p
  // at each Δ_q; outside the sampled range the nearest endpoint extends flat.
  if (delta_q <= boundary.front().first)
    return delta_p <= boundary.front().second;
  if (delta_q >= boundary.back().first)
    return delta_p <= boundary.back().second;
  auto hi = std::lower_bound(
      boundary.begin(), boundary.end(), delta_q,
      [](const std::pair<double, double>& pt, double q) { return pt.first < q; });
  auto lo = hi - 1;
  const double t = (delta_q - lo->first) / (hi->first - lo->first);
  const double dp_max = lo->second + t * (hi->second - lo->second);
  return delta_p <= dp_max;
}

double gkp_success_rate(const std::vector<GkpSample>& samples,
                        const ThresholdSurface& surface) {
  if (samples.empty())
    throw std::invalid_argument("gkp_success_rate: empty sample list");
  std::size_t inside = 0;
  for (const GkpSample& s : samples)
    if (surface.correctable(s.delta_q, s.delta_p)) ++inside;
  return static_cast<double>(inside) / static_cast<double>(samples.size());
}

PoolEstimate estimate_success_from_pool(const std::vector<CatRecord>& pool,
                                        const BreedParams& bp, int dim,
                                        int iterations, std::uint64_t seed,
                                        const ThresholdSurface& surface,
                                        int threads) {
  bp.validate();
  if (iterations <= 0)
    throw std::invalid_argument("estimate_success_from_pool: iterations <= 0");
  const std::size_t draw = std::size_t{1} << bp.M;
  std::vector<CatRecord> viable;
  for (const CatRecord& r : pool)
    if (r.accepted) viable.push_back(r);
  if (viable.size() < draw)
    throw std::invalid_argument(
        "estimate_success_from_pool: accepted pool smaller than 2^M");

  std::vector<GkpSample> samples(iterations);
  std::atomic<int> next{0};
  const int nthreads = std::max(1, std::min(threads, iterations));
  auto worker = [&]() {
    for (;;) {
      const int it = next.fetch_add(1);
      if (it >= iterations) return;
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(it), 0x5uL));
      std::vector<CatRecord> batch(draw);
      for (std::size_t k = 0; k < draw; ++k) {
        const std::size_t idx = static_cast<std::size_t>(
            rng.uniform() * static_cast<double>(viable.size()));
        batch[k] = viable[std::min(idx, viable.size() - 1)];
      }
      samples[it] = adaptive_breed(batch, bp, dim).second;
    }
  };
  std::vector<std::thread> ts;
  for (int k = 0; k < nthreads; ++k) ts.emplace_back(worker);
  for (auto& t : ts) t.join();

  PoolEstimate est;
  est.iterations = iterations;
  est.viable_pool = static_cast<int>(viable.size());
  est.success = gkp_success_rate(samples, surface);
  for (const GkpSample& s : samples) {
    est.mean_delta_q += s.delta_q / iterations;
    est.mean_delta_p += s.delta_p / iterations;
  }
  return est;
}

}  // namespace gkpsim
