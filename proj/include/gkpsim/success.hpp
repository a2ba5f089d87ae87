// Success-rate estimation for bred grid states: the likelihood that adaptive
// breeding of a fitted-cat pool produces a sample inside the correctable
// region of the (Δ_q, Δ_p) plane.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gkpsim/engineering.hpp"

namespace gkpsim {

// Radius² of the default correctable disc Δ_q² + Δ_p² ≤ 2·10^{−1.02}, the
// quarter-circle approximation of the biased-noise correctability boundary.
inline constexpr double kCorrectableRadiusSq = 0.1909985172042872;

// Correctability test in the (Δ_q, Δ_p) plane. With an empty boundary the
// default disc applies; otherwise `boundary` is a polyline of boundary points
// sorted by Δ_q, and a sample is correctable when its Δ_p lies at or below the
// interpolated boundary (less noise than the boundary admits).
struct ThresholdSurface {
  double radius_sq = kCorrectableRadiusSq;
  std::vector<std::pair<double, double>> boundary;

  bool correctable(double delta_q, double delta_p) const;
};

// Fraction of samples inside the correctable region. Throws
// std::invalid_argument on an empty sample list.
double gkp_success_rate(const std::vector<GkpSample>& samples,
                        const ThresholdSurface& surface = {});

struct PoolEstimate {
  double success = 0.0;    // fraction of iterations that landed correctable
  int iterations = 0;
  int viable_pool = 0;     // accepted records available for drawing
  double mean_delta_q = 0.0;
  double mean_delta_p = 0.0;
};

// Monte Carlo estimate over a fitted-cat pool: each iteration draws 2^M
// accepted records uniformly with replacement, runs adaptive breeding, and
// scores the resulting sample against the surface. Deterministic in `seed`;
// iterations are distributed over `threads`. Throws std::invalid_argument
// when fewer than 2^M accepted records exist.
PoolEstimate estimate_success_from_pool(const std::vector<CatRecord>& pool,
                                        const BreedParams& bp, int dim,
                                        int iterations, std::uint64_t seed,
                                        const ThresholdSurface& surface = {},
                                        int threads = 1);

}  // namespace gkpsim
