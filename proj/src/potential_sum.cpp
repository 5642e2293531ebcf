#include "potential_sum.hpp"

#include <cmath>

namespace fraclap::detail {

double potential_sum(const ChargeSet& charges, double px, double py, double pz, double half_exponent) {
  double acc = 0.0;
  for (std::size_t j = 0; j < charges.count; ++j) {
    const double dx = px - charges.x[j];
    const double dy = py - charges.y[j];
    const double dz = pz - charges.z[j];
    acc += charges.q[j] * std::exp(half_exponent * std::log(dx * dx + dy * dy + dz * dz));
  }
  return acc;
}

}  // namespace fraclap::detail
