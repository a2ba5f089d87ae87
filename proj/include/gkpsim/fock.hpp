// Truncated Fock-space state engine: kets over 1-3 bosonic modes with exact
// unitary Gaussian gates, photon-number-resolved measurement, and homodyne
// projection.
//
// Conventions (fixed throughout the library):
//   [a, a†] = 1,  q = (a + a†)/√2,  p = (a − a†)/(i√2),  vacuum variance 1/2.
//   D(α) = exp(α a† − α* a)                     ⟨q⟩ shift = √2 Re α
//   S(r) = exp(r/2 (a² − a†²)), r real > 0      squeezes q: σ_q = e^{−r}/√2
//   R(θ) = exp(iθ n̂)
//   BS(θ, φ) = exp(θ (e^{iφ} a₁†a₂ − e^{−iφ} a₁a₂†)),  r = e^{iφ}sinθ, t = cosθ
//   CZ(g) = exp(i g q₁ q₂)
//   TMS(r) = exp(r (a₁†a₂† − a₁a₂))
//
// Every gate is the matrix exponential of its truncated generator, computed by
// Hermitian eigendecomposition, so gates are exactly unitary on the truncated
// space and agree with a direct expm oracle to round-off. Truncation pressure
// is reported as "leakage": the post-gate population of the top Fock levels of
// each touched mode. Exceeding the leakage bound throws TruncationError rather
// than silently renormalizing, because amplitudes grow over repeated steps and
// a quiet clip would corrupt downstream statistics.
//
// Multimode kets are stored flat with mode 0 slowest:
//   index(n₀, n₁, ..) = ((n₀·dim) + n₁)·dim + ...
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "gkpsim/rng.hpp"

namespace gkpsim {

using cxd = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

struct TruncationError : std::runtime_error {
  explicit TruncationError(const std::string& what) : std::runtime_error(what) {}
};
struct MeasurementError : std::runtime_error {
  explicit MeasurementError(const std::string& what) : std::runtime_error(what) {}
};

// Number of top Fock levels per mode whose population counts as leakage.
inline constexpr int kLeakageBand = 2;
inline constexpr double kDefaultLeakageBound = 1e-3;

// ------------------------------------------------------------------- State
struct State {
  int modes = 1;
  int dim = 0;
  Vec amp;  // dim^modes amplitudes, mode 0 slowest

  State() = default;
  State(int modes_, int dim_) : modes(modes_), dim(dim_) {
    amp = Vec::Zero(size_for(modes_, dim_));
    amp[0] = 1.0;
  }

  static Eigen::Index size_for(int modes, int dim) {
    Eigen::Index s = 1;
    for (int k = 0; k < modes; ++k) s *= dim;
    return s;
  }

  double norm() const { return amp.norm(); }
  void normalize() { amp /= amp.norm(); }

  // Population of the top `band` Fock levels of `mode`.
  double tail_mass(int mode, int band = kLeakageBand) const;
};

// Single-mode state from a ket.
State make_state(const Vec& ket);
// Product state |a⟩⊗|b⟩ (and |a⟩⊗|b⟩⊗|c⟩); all kets share the same dim.
State product_state(const Vec& a, const Vec& b);
State product_state(const Vec& a, const Vec& b, const Vec& c);
// Append a fresh mode carrying `ket` as the new last mode.
State attach_mode(const State& s, const Vec& ket);

// -------------------------------------------------------- operator building
Mat op_a(int d);
Mat op_n(int d);
Mat op_q(int d);
Mat op_p(int d);

// exp(A) for anti-Hermitian A, via eigendecomposition of −iA. Exactly unitary.
Mat expm_antiherm(const Mat& A);

Mat u_displace(cxd alpha, int d);
Mat u_squeeze(double r, int d);
Mat u_rotate(double theta, int d);

// ----------------------------------------------------------- gate descriptor
enum class GateKind { Squeeze, Displace, Rotate, Beamsplitter, CZ, TwoModeSqueeze };

struct GaussianOp {
  GateKind kind;
  double r = 0.0;      // squeeze / two-mode squeeze magnitude
  double theta = 0.0;  // rotation angle / beamsplitter mixing angle
  double phi = 0.0;    // beamsplitter phase
  double g = 0.0;      // CZ weight
  cxd alpha{0.0, 0.0};
  int m1 = 0;
  int m2 = 1;

  static GaussianOp squeeze(double r, int m = 0);
  static GaussianOp displace(cxd alpha, int m = 0);
  static GaussianOp rotate(double theta, int m = 0);
  static GaussianOp beamsplitter(double theta, double phi, int m1, int m2);
  static GaussianOp cz(double g, int m1, int m2);
  static GaussianOp two_mode_squeeze(double r, int m1, int m2);
};

// Applies the gate in place; returns the leakage diagnostic (max tail mass over
// touched modes). Throws TruncationError when leakage exceeds `leakage_bound`,
// std::out_of_range on bad mode indices, std::invalid_argument on non-finite
// parameters.
double apply_gaussian(State& state, const GaussianOp& op,
                      double leakage_bound = kDefaultLeakageBound);

// Convenience non-mutating wrapper.
State applied_gaussian(const State& state, const GaussianOp& op,
                       double leakage_bound = kDefaultLeakageBound,
                       double* leakage = nullptr);

// Low-level single-mode application (no leakage policy) used by internal code.
void apply_one_mode(State& s, const Mat& u, int mode);

// Block-diagonal beamsplitter (photon-number conserving), built once per
// (θ, φ, dims) and reusable across trials. Supports asymmetric dims so a
// low-dim detector tap can couple to a full-dim mode.
class BsBlocks {
 public:
  BsBlocks(double theta, double phi, int d);
  BsBlocks(double theta, double phi, int d1, int d2);
  // Applies to modes (ma, mb) of s in place (requires d1 == d2 == s.dim).
  void apply(State& s, int ma, int mb) const;
  // Applies to raw data laid out as (n₁·d2 + n₂)·R + rest.
  void apply_raw(cxd* data, long R) const;
  int dim1() const { return d1_; }
  int dim2() const { return d2_; }

 private:
  int d1_;
  int d2_;
  std::vector<std::pair<int, Mat>> blocks_;  // (first n₁ in window, unitary)
};

// Process-wide immutable cache of beamsplitter blocks.
const BsBlocks& bs_cached(double theta, double phi, int d1, int d2);

// q-quadrature eigenbasis of the truncated q operator; shared by CZ and
// q-diagonal phases.
struct QuadBasis {
  RVec x;  // eigenvalues
  Mat v;   // eigenvectors (columns)
};
const QuadBasis& quad_basis(int d);

// CZ(g) on modes (ma, mb) via the q eigenbasis: exact expm of the truncated
// generator at O(d³) cost.
void apply_cz(State& s, double g, int ma, int mb);

// exp(i f(q̂)) with per-eigenvalue phases, single mode.
void apply_q_phase(State& s, const RVec& phase_of_x, int mode);

// f(q̂) with arbitrary complex per-eigenvalue factors, single mode.
// Non-unitary factors are allowed (measurement-like damping); the caller is
// responsible for renormalizing afterwards.
void apply_q_factor(State& s, const Vec& factor_of_x, int mode);

// ------------------------------------------------------------- measurements
// ψ_n(x) for n = 0..d−1 in vacuum-variance-1/2 units (ψ₀ = π^{−1/4} e^{−x²/2}).
RVec hermite_point(int d, double x);

// Photon-number marginal of `mode`.
std::vector<double> pnr_marginal(const State& s, int mode);

struct PnrOutcome {
  int n = 0;
  double prob = 0.0;
};
// Samples n from the marginal, projects (removing the mode), renormalizes.
PnrOutcome pnr_measure(State& s, int mode, Rng& rng);
// Deterministic projection onto |n⟩ of `mode`; returns outcome probability.
double pnr_project(State& s, int mode, int n);

// Projects `mode` onto the quadrature eigenbra ⟨x_θ = m|; removes the mode and
// renormalizes. Returns the outcome probability density. Throws
// MeasurementError when the density is below `min_density`.
double homodyne_project(State& s, int mode, double theta, double m,
                        double min_density = 1e-12);

// Samples a homodyne outcome from the exact marginal on a grid (inverse CDF
// with linear interpolation), then projects at the sampled value.
// Returns the sampled m; density reported via out-param if non-null.
double homodyne_sample(State& s, int mode, double theta, Rng& rng,
                       int grid_points = 2048, double* density = nullptr);

// --------------------------------------------------------------- density ops
Mat density_from_ket(const Vec& ket);
// Reduced density matrix of `keep` after tracing out the other modes.
Mat reduced_density(const State& s, int keep);

// Uhlmann fidelity; reduces to |⟨a|b⟩|² for kets.
double fidelity(const State& a, const State& b);
double fidelity(const Vec& a, const Vec& b);
double fidelity(const Mat& rho, const Vec& psi);
double fidelity(const Mat& rho, const Mat& sigma);

}  // namespace gkpsim
