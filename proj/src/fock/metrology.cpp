#include "gkpsim/metrology.hpp"

#include <cmath>
#include <limits>

namespace gkpsim {

cxd displacement_expectation(const Vec& psi, cxd gamma) {
  Mat u = u_displace(gamma, static_cast<int>(psi.size()));
  return psi.dot(u * psi);
}

double effective_squeezing(const Vec& psi, double u, Quadrature quad) {
  cxd gamma = quad == Quadrature::Q ? cxd(0.0, u / std::sqrt(2.0))
                                    : cxd(u / std::sqrt(2.0), 0.0);
  double val = std::abs(displacement_expectation(psi, gamma));
  if (val <= 0.0) return std::numeric_limits<double>::infinity();
  if (val > 1.0) val = 1.0;
  double arg = -2.0 * std::log(val);
  return (1.0 / u) * std::sqrt(std::max(arg, 0.0));
}

double db_absolute(double delta) { return -10.0 * std::log10(delta * delta); }

double db_vacuum_relative(double delta) { return -10.0 * std::log10(2.0 * delta * delta); }

double db_to_r(double db) { return db * std::log(10.0) / 20.0; }

double delta2_from_db(double db) { return std::pow(10.0, -db / 10.0); }

}  // namespace gkpsim
