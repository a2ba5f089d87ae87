#pragma once
// Non-Gaussian state engineering: photon-subtraction cat factories on a
// teleportation wire, cat fitting, adaptive breeding into grid states, and
// the measurement-based squeezing-gate decomposition.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gkpsim/fock.hpp"
#include "gkpsim/metrology.hpp"
#include "gkpsim/rng.hpp"
#include "gkpsim/states.hpp"

namespace gkpsim {

// ----------------------------------------------------------------- cat factory

// Which two-mode teleportation cell carries the wire state forward.
//  Macronode: reduced dual-rail circuit — balanced BS(π/4, π/2), wire rotated
//    +π/2, CZ(1/√2), wire rotated −π/2, subtractions, p-homodyne of the wire;
//    the surviving mode then receives the fixed correction (optional Gaussian
//    damping, S(−ln g), R(−π/2)).
//  Chain: canonical cluster cell — CZ(weight) against a fresh p-squeezed
//    ancilla, subtractions, p-homodyne of the wire; the ancilla survives.
enum class CellKind { Macronode, Chain };

// How the per-step photon subtractions are realized.
//  Sequential: one weak tap + PNR per schedule entry (the physical layout).
//  Coherent: a single tap at the combined angle, one PNR of the total count,
//    then a multinomial split across virtual detectors weighted by sin²θᵢ.
//    Statistically close in the weak-tap regime and useful for profiling.
enum class TapMode { Sequential, Coherent };

struct PhantmConfig {
  double cluster_db = 13.0;  // cluster squeezing, r = dB·ln10/20
  int steps = 20;
  int subtractions_per_step = 8;
  std::vector<double> angle_schedule;  // beamsplitter θ per subtraction
  bool gradient = true;                // enforce a nondecreasing schedule
  int pnr_cap = 10;                    // outcomes above this flag the trial
  int dim = 60;
  CellKind cell = CellKind::Macronode;
  TapMode tap = TapMode::Sequential;
  double cz_weight = 1.0;       // chain-cell entangling weight
  bool g_damping = false;       // include the envelope damping operator
  bool sample_homodyne = false; // default: post-select homodyne at 0
  std::uint64_t seed = 0;

  // Fills angle_schedule with the default linear ramp when empty.
  void finalize();
  // Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct CatRecord {
  double alpha = 0.0;        // fitted displacement
  double r_cat = 0.0;        // fitted squeezing
  int parity = 0;            // 0 even, 1 odd
  double fit_fidelity = 0.0;
  double alpha_c = 0.0;      // amplitude referred to zero squeezing: α·e^{r}
  std::vector<int> photons;  // PNR outcome per subtraction event, all steps
  bool accepted = false;     // fit_fidelity > 0.95 and trial completed
  // Diagnostics.
  char orient = 'q';         // axis of the fitted cat ('q' or 'p')
  double tail = 0.0;         // top-8-level Fock mass of the trial output
  double nbar = 0.0;
  int total_photons = 0;
  bool truncated = false;    // trial aborted: truncation failure or PNR > cap
  double homodyne_sum = 0.0; // accumulated |m| when sampling homodyne
};

struct PhantmStepResult {
  std::vector<int> photons;  // one entry per subtraction event
  double homodyne_m = 0.0;   // wire homodyne outcome (0 when post-selected)
  bool ok = true;            // false: PNR above cap, state preserved invalid
};

// Taps `mode` with a beamsplitter of angle theta against a fresh detector mode
// of dimension dtap and number-resolves it. Returns the detected count and
// leaves `s` projected/renormalized; returns -1 (state unspecified) when the
// count exceeds `cap`.
int subtract_photons(State& s, int mode, double theta, int dtap, int cap,
                     Rng& rng);

// Advances the wire by one teleportation step. `wire` must be single-mode at
// cfg.dim. On ok=false the wire content is unspecified and the trial should be
// flagged. Throws TruncationError on leakage-bound violation.
PhantmStepResult phantm_step(State& wire, const PhantmConfig& cfg, Rng& rng);

// Runs a full trial (steps × subtractions + fit). Deterministic in
// (cfg.seed, trial_index). Never throws for physics reasons: truncation and
// cap violations return a flagged record.
CatRecord run_phantm_trial(const PhantmConfig& cfg, std::uint64_t trial_index,
                           Vec* out_state = nullptr);

// ------------------------------------------------------------------- cat fits

struct FitResult {
  double alpha = 0.0;
  double r = 0.0;
  double fid = 0.0;
  int parity = 0;
  char orient = 'q';
  double alpha_c = 0.0;
  double nbar = 0.0;
  double tail = 0.0;       // top-8-level mass of the fitted input
  int meas_parity = 0;     // photon-number parity read off the state itself
  bool converged = true;
};

// Maximum-fidelity squeezed-cat fit over (α, r) × parity × axis orientation.
// Multi-start Nelder–Mead with a representability guard (candidate cats whose
// own Fock tail exceeds tolerance at this dimension are rejected as fits).
FitResult fit_cat(const Vec& psi, double rmax = 2.5, double amax = 14.0);

// The reference state a FitResult describes (axis orientation applied).
Vec ket_from_fit(const FitResult& f, int d);

// Generic 2-D Nelder–Mead minimizer used by the fitters (exposed for tests).
struct NmResult {
  double x0 = 0.0, x1 = 0.0, value = 0.0;
  bool converged = false;
  int evals = 0;
};
NmResult nelder_mead_2d(const std::function<double(double, double)>& f,
                        double x0, double x1, double xatol = 1e-5,
                        double fatol = 1e-10, int maxiter = 500);

// ------------------------------------------------------------------- breeding

struct BreedParams {
  int M = 3;                    // breeding rounds (2^M inputs)
  double xi = kSensorPeriod;    // target grid spacing ξ = √(2π)
  double r_cluster = 0.0;       // available squeezing (natural log units)
  double r_lb = 0.5;            // lower acceptable cat squeezing
  double alpha_b() const;       // ξ·2^{(M−3)/2}
  void validate() const;        // throws std::invalid_argument
};

enum class LeafKind { AtAlphaB, AtTwoAlphaB, Substituted };

struct Leaf {
  Vec state;
  LeafKind kind = LeafKind::Substituted;
  double s = 0.0;  // squeezing applied to reach the target amplitude
};

// Algorithm-1 leaf adjustment from a fitted record: try target amplitudes α_b
// then 2α_b with s = ln(α_c/α_t), feasible iff r_lb < s < r_cluster; odd
// parity is fixed by the small momentum displacement e^{iδq̂}, δ = π/(2√2·α_t);
// infeasible falls back to a momentum-squeezed vacuum at r_cluster.
Leaf adjust_leaf(double alpha_c, int parity, const BreedParams& bp, int dim);

// One breeding event: balanced beamsplitter (φ = 0) then p-homodyne of the
// second mode post-selected at 0; returns the normalized survivor.
Vec breed_pair(const Vec& a, const Vec& b, int dim);

// Pairwise tree reduction of 2^M leaves.
Vec breed_tree(std::vector<Vec> layer, int dim);

enum class SampleSource { Bred = 0, Phenomenological = 1 };

struct GkpSample {
  double delta_q = 0.0;
  double delta_p = 0.0;
  SampleSource source = SampleSource::Bred;
};

// Full adaptive breeding from 2^M fitted records: leaf adjustment, M pairwise
// rounds, effective-squeezing readout at the sensor period. Throws
// std::invalid_argument when records.size() != 2^M.
std::pair<Vec, GkpSample> adaptive_breed(const std::vector<CatRecord>& records,
                                         const BreedParams& bp, int dim);

// Spec-literal variant operating on the actual trial states: each state gets
// the additional squeeze s − r_cat (plus the odd-parity fix) instead of being
// replaced by its fitted ideal cat.
std::pair<Vec, GkpSample> adaptive_breed_states(
    const std::vector<Vec>& states, const std::vector<CatRecord>& records,
    const BreedParams& bp, int dim);

// --------------------------------------------------- measurement-based squeeze

struct VGateParams {
  double pre_rotation = 0.0;      // θ₊
  double squeeze_magnitude = 0.0; // tan(θ₋)
  double post_rotation = 0.0;     // θ₊
};

// Decomposition V = R(θ₊)·S(tan θ₋)·R(θ₊) with θ± = (θa ± θb)/2 of the
// homodyne-driven squeezing gate. Throws std::invalid_argument at |θ₋| = π/2
// (infinite squeeze).
VGateParams squeezing_gate_params(double theta_a, double theta_b);

// Applies the decomposition to one mode via the exact Gaussian gates.
void apply_v_gate(State& s, int mode, const VGateParams& p,
                  double leakage_bound = kDefaultLeakageBound);

}  // namespace gkpsim
