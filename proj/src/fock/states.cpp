#include "gkpsim/states.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace gkpsim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Vec ket_vacuum(int d) {
  Vec v = Vec::Zero(d);
  v[0] = 1.0;
  return v;
}

Vec ket_fock(int n, int d) {
  if (n < 0 || n >= d) throw std::invalid_argument("ket_fock: n out of range");
  Vec v = Vec::Zero(d);
  v[n] = 1.0;
  return v;
}

Vec ket_displaced_squeezed(double alpha, double r, int d) {
  // Recurrence for c_n = ⟨n|D(α)S(r)|0⟩ with real α, r (normalized at the end;
  // validated against the gate route in the test suite).
  const double ch = std::cosh(r), sh = std::sinh(r);
  std::vector<double> c(d, 0.0);
  c[0] = 1.0;
  const double num = alpha * (1.0 + sh * ch + sh * sh);
  for (int n = 0; n + 1 < d; ++n) {
    double prev = n >= 1 ? c[n - 1] : 0.0;
    c[n + 1] = (num * c[n] - sh * ch * std::sqrt(static_cast<double>(n)) * prev) /
               (ch * ch * std::sqrt(static_cast<double>(n + 1)));
  }
  Vec v(d);
  for (int n = 0; n < d; ++n) v[n] = c[n];
  v /= v.norm();
  return v;
}

Vec ket_squeezed_vacuum(double r, double angle, int d) {
  Vec v = ket_displaced_squeezed(0.0, r, d);
  if (angle != 0.0) {
    for (int n = 0; n < d; ++n) v[n] *= std::exp(cxd(0.0, angle * n));
  }
  return v;
}

Vec ket_cat(double alpha, double r, Parity parity, int d) {
  Vec plus = ket_displaced_squeezed(alpha, r, d);
  Vec minus = ket_displaced_squeezed(-alpha, r, d);
  Vec v = parity == Parity::Even ? Vec(plus + minus) : Vec(plus - minus);
  double n = v.norm();
  if (n < 1e-12) throw std::invalid_argument("ket_cat: degenerate odd cat at alpha=0");
  return v / n;
}

Vec ket_comb(double spacing, double offset, double delta, int d, int nrange) {
  if (delta <= 0.0) throw std::invalid_argument("ket_comb: delta must be positive");
  const double r_tooth = -std::log(std::sqrt(2.0) * delta);  // tooth std = Δ
  Vec v = Vec::Zero(d);
  for (int n = -nrange; n <= nrange; ++n) {
    double qn = (n + offset) * spacing;
    double w = std::exp(-delta * delta * qn * qn);
    if (w < 1e-14) continue;
    v += w * ket_displaced_squeezed(qn / std::sqrt(2.0), r_tooth, d);
  }
  double nr = v.norm();
  if (nr < 1e-12) throw std::invalid_argument("ket_comb: empty comb");
  return v / nr;
}

Vec ket_sensor(double delta, int d) { return ket_comb(std::sqrt(2.0 * kPi), 0.0, delta, d); }

Vec ket_gkp(int mu, double delta, int d) {
  if (mu != 0 && mu != 1) throw std::invalid_argument("ket_gkp: mu must be 0 or 1");
  return ket_comb(2.0 * std::sqrt(kPi), mu / 2.0, delta, d);
}

Vec ket_magic_h(double delta, int d) {
  Vec v = ket_gkp(0, delta, d) + std::exp(cxd(0.0, kPi / 2.0)) * ket_gkp(1, delta, d);
  return v / v.norm();
}

Vec ket_from_spec(const std::string& spec, int d) {
  auto colon = spec.find(':');
  std::string name = spec.substr(0, colon);
  std::vector<double> args;
  std::string parity_word;
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok == "even" || tok == "odd") {
        parity_word = tok;
      } else {
        args.push_back(std::stod(tok));
      }
    }
  }
  auto need = [&](size_t n) {
    if (args.size() < n) throw std::invalid_argument("state spec '" + spec + "': missing arguments");
  };
  if (name == "vacuum") return ket_vacuum(d);
  if (name == "fock") {
    need(1);
    return ket_fock(static_cast<int>(args[0]), d);
  }
  if (name == "squeezed_vacuum") {
    need(1);
    return ket_squeezed_vacuum(args[0], args.size() > 1 ? args[1] : 0.0, d);
  }
  if (name == "cat") {
    need(2);
    Parity p = parity_word == "odd" ? Parity::Odd : Parity::Even;
    return ket_cat(args[0], args[1], p, d);
  }
  if (name == "finite_sensor") {
    need(1);
    return ket_sensor(args[0], d);
  }
  if (name == "finite_gkp") {
    need(2);
    return ket_gkp(static_cast<int>(args[0]), args[1], d);
  }
  if (name == "magic_h") {
    need(1);
    return ket_magic_h(args[0], d);
  }
  throw std::invalid_argument("unknown state spec '" + spec + "'");
}

}  // namespace gkpsim
