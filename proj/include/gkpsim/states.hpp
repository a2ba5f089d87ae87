// Reference single-mode kets: Fock states, squeezed vacua, squeezed cats, and
// finite-width grid states (sensor, square-grid computational, H-type magic).
//
// Grid states are built as Gaussian-weighted superpositions of displaced
// squeezed vacua: teeth of standard deviation Δ at q = (n + offset)·spacing,
// with amplitude envelope e^{−Δ² q_n² } (the standard finite-energy damping of
// the ideal comb). The sensor state has period √(2π) in both quadratures; the
// square-grid computational states have q-period 2√π with |1⟩ offset by √π.
#pragma once

#include <string>

#include "gkpsim/fock.hpp"

namespace gkpsim {

enum class Parity { Even = 0, Odd = 1 };

Vec ket_vacuum(int d);
Vec ket_fock(int n, int d);

// D(α) S(r) |0⟩ for real α, r via a stable three-term recurrence.
Vec ket_displaced_squeezed(double alpha, double r, int d);

// Squeezing axis rotated by `angle`: R(angle) S(r) |0⟩.
Vec ket_squeezed_vacuum(double r, double angle, int d);

// Normalized (D(α) ± D(−α)) S(r) |0⟩.
Vec ket_cat(double alpha, double r, Parity parity, int d);

// Grid comb; see file header. nrange teeth on each side (envelope-pruned).
Vec ket_comb(double spacing, double offset, double delta, int d, int nrange = 24);

Vec ket_sensor(double delta, int d);
Vec ket_gkp(int mu, double delta, int d);  // mu ∈ {0, 1}
// (|0⟩_G + e^{iπ/2} |1⟩_G)/norm at tooth width Δ.
Vec ket_magic_h(double delta, int d);

// Parses a textual state spec used by the CLI and the C facade:
//   "vacuum" | "fock:n" | "squeezed_vacuum:r[,angle]" | "cat:alpha,r,parity"
//   | "finite_sensor:delta" | "finite_gkp:mu,delta" | "magic_h:delta"
Vec ket_from_spec(const std::string& spec, int d);

}  // namespace gkpsim
