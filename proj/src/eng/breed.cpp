#include <cmath>
#include <stdexcept>

#include "gkpsim/engineering.hpp"

namespace gkpsim {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Small momentum kick e^{iδq̂} that re-pins an odd cat's comb onto the even
// lattice; the relative phase between branches flips by π/2 per application.
void apply_parity_fix(State& s, int mode, double alpha_t) {
  const double delta = kPi / (2.0 * std::sqrt(2.0) * alpha_t);
  const QuadBasis& qb = quad_basis(s.dim);
  RVec ph(s.dim);
  for (int i = 0; i < s.dim; ++i) ph[i] = delta * qb.x[i];
  apply_q_phase(s, ph, mode);
}
}  // namespace

double BreedParams::alpha_b() const {
  return xi * std::pow(2.0, (M - 3) / 2.0);
}

void BreedParams::validate() const {
  if (M < 1) throw std::invalid_argument("breed: M must be >= 1");
  if (!(xi > 0.0)) throw std::invalid_argument("breed: xi must be positive");
  if (!(r_cluster > 0.0))
    throw std::invalid_argument("breed: r_cluster must be positive");
  if (r_lb < 0.0) throw std::invalid_argument("breed: r_lb must be >= 0");
  if (r_lb >= r_cluster)
    throw std::invalid_argument("breed: r_lb must be below r_cluster");
}

Leaf adjust_leaf(double alpha_c, int parity, const BreedParams& bp, int dim) {
  const double ab = bp.alpha_b();
  for (int k = 0; k < 2; ++k) {
    const double a_t = (k == 0) ? ab : 2.0 * ab;
    const double s = std::log(std::max(alpha_c, 1e-12) / a_t);
    if (s > bp.r_lb && s < bp.r_cluster) {
      Leaf leaf;
      leaf.kind = (k == 0) ? LeafKind::AtAlphaB : LeafKind::AtTwoAlphaB;
      leaf.s = s;
      Vec ket =
          ket_cat(a_t, s, parity == 0 ? Parity::Even : Parity::Odd, dim);
      if (parity == 1) {
        State st = make_state(ket);
        apply_parity_fix(st, 0, a_t);
        ket = st.amp;
      }
      leaf.state = std::move(ket);
      return leaf;
    }
  }
  Leaf leaf;
  leaf.kind = LeafKind::Substituted;
  leaf.s = bp.r_cluster;
  leaf.state = ket_squeezed_vacuum(-bp.r_cluster, 0.0, dim);
  return leaf;
}

Vec breed_pair(const Vec& a, const Vec& b, int dim) {
  State st = product_state(a, b);
  bs_cached(kPi / 4, 0.0, dim, dim).apply(st, 0, 1);
  homodyne_project(st, 1, kPi / 2, 0.0);
  st.normalize();
  return st.amp;
}

Vec breed_tree(std::vector<Vec> layer, int dim) {
  if (layer.empty()) throw std::invalid_argument("breed_tree: empty input");
  while (layer.size() > 1) {
    if (layer.size() % 2 != 0)
      throw std::invalid_argument("breed_tree: layer size must be even");
    std::vector<Vec> next;
    next.reserve(layer.size() / 2);
    for (std::size_t i = 0; i < layer.size(); i += 2)
      next.push_back(breed_pair(layer[i], layer[i + 1], dim));
    layer = std::move(next);
  }
  return layer[0];
}

namespace {

std::pair<Vec, GkpSample> finish_breed(std::vector<Vec> leaves,
                                       const BreedParams& bp, int dim) {
  Vec out = breed_tree(std::move(leaves), dim);
  GkpSample sample;
  sample.delta_q = effective_squeezing(out, bp.xi, Quadrature::Q);
  sample.delta_p = effective_squeezing(out, bp.xi, Quadrature::P);
  sample.source = SampleSource::Bred;
  return {std::move(out), sample};
}

void check_count(std::size_t n, const BreedParams& bp) {
  std::size_t want = std::size_t{1} << bp.M;
  if (n != want)
    throw std::invalid_argument("adaptive_breed: need exactly 2^M inputs");
}

}  // namespace

std::pair<Vec, GkpSample> adaptive_breed(const std::vector<CatRecord>& records,
                                         const BreedParams& bp, int dim) {
  bp.validate();
  check_count(records.size(), bp);
  std::vector<Vec> leaves;
  leaves.reserve(records.size());
  for (const CatRecord& r : records)
    leaves.push_back(adjust_leaf(r.alpha_c, r.parity, bp, dim).state);
  return finish_breed(std::move(leaves), bp, dim);
}

std::pair<Vec, GkpSample> adaptive_breed_states(
    const std::vector<Vec>& states, const std::vector<CatRecord>& records,
    const BreedParams& bp, int dim) {
  bp.validate();
  check_count(states.size(), bp);
  if (records.size() != states.size())
    throw std::invalid_argument(
        "adaptive_breed_states: records/states size mismatch");
  const double ab = bp.alpha_b();
  std::vector<Vec> leaves;
  leaves.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const CatRecord& r = records[i];
    bool placed = false;
    for (int k = 0; k < 2 && !placed; ++k) {
      const double a_t = (k == 0) ? ab : 2.0 * ab;
      const double s = std::log(std::max(r.alpha_c, 1e-12) / a_t);
      if (s > bp.r_lb && s < bp.r_cluster) {
        State st = make_state(states[i]);
        // The record's cat already carries r_cat; apply only the difference.
        apply_gaussian(st, GaussianOp::squeeze(s - r.r_cat, 0));
        if (r.parity == 1) apply_parity_fix(st, 0, a_t);
        st.normalize();
        leaves.push_back(st.amp);
        placed = true;
      }
    }
    if (!placed) leaves.push_back(ket_squeezed_vacuum(-bp.r_cluster, 0.0, dim));
  }
  return finish_breed(std::move(leaves), bp, dim);
}

VGateParams squeezing_gate_params(double theta_a, double theta_b) {
  const double tp = (theta_a + theta_b) / 2.0;
  const double tm = (theta_a - theta_b) / 2.0;
  if (std::abs(std::cos(tm)) < 1e-12)
    throw std::invalid_argument(
        "squeezing_gate_params: theta_minus = pi/2 gives an infinite squeeze");
  VGateParams p;
  p.pre_rotation = tp;
  p.squeeze_magnitude = std::tan(tm);
  p.post_rotation = tp;
  return p;
}

void apply_v_gate(State& s, int mode, const VGateParams& p,
                  double leakage_bound) {
  apply_gaussian(s, GaussianOp::rotate(p.pre_rotation, mode), leakage_bound);
  apply_gaussian(s, GaussianOp::squeeze(p.squeeze_magnitude, mode),
                 leakage_bound);
  apply_gaussian(s, GaussianOp::rotate(p.post_rotation, mode), leakage_bound);
}

}  // namespace gkpsim
