#include <algorithm>
#include <array>
#include <cmath>

#include "gkpsim/engineering.hpp"

namespace gkpsim {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Is cat(α, r) honestly representable at dim d? Checks the candidate's own
// Fock tail so the optimizer cannot escape into truncation artifacts.
bool representable(double alpha, double r, int d, int tail_levels = 8,
                   double tol = 1e-4) {
  Vec c = ket_cat(alpha, r, Parity::Even, d);
  double mass = 0.0;
  for (int n = d - tail_levels; n < d; ++n) mass += std::norm(c[n]);
  return mass < tol;
}

double overlap2(const Vec& a, const Vec& b) { return std::norm(a.dot(b)); }

}  // namespace

NmResult nelder_mead_2d(const std::function<double(double, double)>& f,
                        double x0, double x1, double xatol, double fatol,
                        int maxiter) {
  struct Pt {
    double x[2];
    double v;
  };
  std::array<Pt, 3> s;
  const double h0 = (x0 != 0.0) ? 0.05 * std::abs(x0) + 0.00025 : 0.00025;
  const double h1 = (x1 != 0.0) ? 0.05 * std::abs(x1) + 0.00025 : 0.00025;
  s[0] = {{x0, x1}, 0.0};
  s[1] = {{x0 + h0, x1}, 0.0};
  s[2] = {{x0, x1 + h1}, 0.0};
  int evals = 0;
  for (auto& p : s) {
    p.v = f(p.x[0], p.x[1]);
    ++evals;
  }
  auto order = [&] {
    std::sort(s.begin(), s.end(),
              [](const Pt& a, const Pt& b) { return a.v < b.v; });
  };
  order();
  int iter = 0;
  for (; iter < maxiter; ++iter) {
    const double xspread =
        std::max(std::max(std::abs(s[1].x[0] - s[0].x[0]),
                          std::abs(s[2].x[0] - s[0].x[0])),
                 std::max(std::abs(s[1].x[1] - s[0].x[1]),
                          std::abs(s[2].x[1] - s[0].x[1])));
    const double fspread = std::abs(s[2].v - s[0].v);
    if (xspread <= xatol && fspread <= fatol) break;
    const double cx = (s[0].x[0] + s[1].x[0]) / 2.0;
    const double cy = (s[0].x[1] + s[1].x[1]) / 2.0;
    auto eval = [&](double px, double py) {
      ++evals;
      return f(px, py);
    };
    // Reflection.
    double rx = cx + (cx - s[2].x[0]), ry = cy + (cy - s[2].x[1]);
    double rv = eval(rx, ry);
    if (rv < s[0].v) {
      // Expansion.
      double ex = cx + 2.0 * (cx - s[2].x[0]), ey = cy + 2.0 * (cy - s[2].x[1]);
      double ev = eval(ex, ey);
      if (ev < rv)
        s[2] = {{ex, ey}, ev};
      else
        s[2] = {{rx, ry}, rv};
    } else if (rv < s[1].v) {
      s[2] = {{rx, ry}, rv};
    } else {
      // Contraction (outside if the reflection helped over the worst).
      double bx, by;
      if (rv < s[2].v) {
        bx = cx + 0.5 * (rx - cx);
        by = cy + 0.5 * (ry - cy);
      } else {
        bx = cx + 0.5 * (s[2].x[0] - cx);
        by = cy + 0.5 * (s[2].x[1] - cy);
      }
      double bv = eval(bx, by);
      if (bv < std::min(rv, s[2].v)) {
        s[2] = {{bx, by}, bv};
      } else {
        // Shrink toward the best vertex.
        for (int k = 1; k < 3; ++k) {
          s[k].x[0] = s[0].x[0] + 0.5 * (s[k].x[0] - s[0].x[0]);
          s[k].x[1] = s[0].x[1] + 0.5 * (s[k].x[1] - s[0].x[1]);
          s[k].v = eval(s[k].x[0], s[k].x[1]);
        }
      }
    }
    order();
  }
  NmResult out;
  out.x0 = s[0].x[0];
  out.x1 = s[0].x[1];
  out.value = s[0].v;
  out.converged = iter < maxiter;
  out.evals = evals;
  return out;
}

FitResult fit_cat(const Vec& psi, double rmax, double amax) {
  const int d = static_cast<int>(psi.size());
  FitResult best;
  best.fid = -1.0;

  Mat rot = u_rotate(-kPi / 2, d);
  for (char orient : {'q', 'p'}) {
    Vec ps = (orient == 'q') ? psi : Vec(rot * psi);
    // Moment-based starting point.
    Mat q = op_q(d), p = op_p(d);
    double q2 = ps.dot(q * (q * ps)).real();
    double p2 = ps.dot(p * (p * ps)).real();
    double r0 = 0.5 * std::log(std::max(2.0 * p2, 1e-6));
    double a0 =
        std::sqrt(std::max(q2 - std::exp(-2.0 * r0) / 2.0, 1e-4) / 2.0);
    const std::array<std::pair<double, double>, 6> starts = {{
        {a0, r0},
        {a0, 0.0},
        {std::max(a0 / 2.0, 0.2), r0},
        {std::min(2.0 * a0, amax), r0},
        {a0, std::min(r0 + 0.7, rmax)},
        {a0, std::max(r0 - 0.7, -rmax)},
    }};
    for (int par = 0; par < 2; ++par) {
      auto neg_fid = [&](double al, double r) -> double {
        if (al < 0.0 || al > amax || std::abs(r) > rmax) return 1.0;
        if (!representable(al, r, d)) return 1.0;
        if (par == 1 && al < 1e-6) return 1.0;  // odd cat degenerates at α = 0
        Vec c = ket_cat(al, r, par == 0 ? Parity::Even : Parity::Odd, d);
        return -overlap2(c, ps);
      };
      for (const auto& st : starts) {
        NmResult res = nelder_mead_2d(neg_fid, st.first, st.second);
        double fid = -res.value;
        if (fid > best.fid) {
          best.fid = fid;
          best.alpha = res.x0;
          best.r = res.x1;
          best.parity = par;
          best.orient = orient;
          best.converged = res.converged;
        }
      }
    }
  }
  best.alpha_c = best.alpha * std::exp(best.r);
  // Diagnostics on the state itself.
  double odd_mass = 0.0;
  for (int n = 1; n < d; n += 2) odd_mass += std::norm(psi[n]);
  best.meas_parity = odd_mass > 0.5 ? 1 : 0;
  best.tail = 0.0;
  for (int n = std::max(0, d - 8); n < d; ++n) best.tail += std::norm(psi[n]);
  best.nbar = 0.0;
  for (int n = 0; n < d; ++n) best.nbar += n * std::norm(psi[n]);
  return best;
}

Vec ket_from_fit(const FitResult& f, int d) {
  Vec c = ket_cat(f.alpha, f.r, f.parity == 0 ? Parity::Even : Parity::Odd, d);
  if (f.orient == 'p') c = u_rotate(kPi / 2, d) * c;
  return c;
}

}  // namespace gkpsim
