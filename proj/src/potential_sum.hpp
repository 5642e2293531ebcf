#pragma once

#include <cstddef>

namespace fraclap::detail {

// Structure-of-arrays charge set for sum_j q_j |x - y_j|^(2 e).
struct ChargeSet {
  const double* x;
  const double* y;
  const double* z;
  const double* q;
  std::size_t count;
};

// sum_j q_j (|p - y_j|^2)^half_exponent. Compiled separately with relaxed
// floating-point rules so the loop vectorizes; callers keep p off the nodes.
double potential_sum(const ChargeSet& charges, double px, double py, double pz, double half_exponent);

}  // namespace fraclap::detail
