#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "fraclap/io.hpp"
#include "fraclap/quadrature.hpp"

using namespace fraclap;

namespace {

double rule_sum(const QuadratureRule& q, auto&& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * f(q.nodes[i]);
  return s;
}

}  // namespace

TEST_CASE("Gauss-Legendre is exact to degree 2n - 1") {
  for (int n : {1, 2, 5, 12, 40}) {
    const QuadratureRule q = gauss_legendre(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
      CHECK(rule_sum(q, [k](double x) { return std::pow(x, k); }) == doctest::Approx(exact).epsilon(1e-13));
    }
    CHECK(std::is_sorted(q.nodes.begin(), q.nodes.end()));
  }
  const QuadratureRule m = gauss_legendre(8, 1.0, 3.0);
  CHECK(rule_sum(m, [](double x) { return std::exp(x); }) == doctest::Approx(std::exp(3.0) - std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("Gauss-Jacobi moments match Beta integrals") {
  // int_{-1}^{1} (1-x)^a (1+x)^b dx = 2^(a+b+1) B(a+1, b+1).
  for (auto [a, b] : {std::pair{0.0, 0.0}, {-0.5, 0.3}, {0.7, -0.8}, {1.5, 2.0}}) {
    const QuadratureRule q = gauss_jacobi(10, a, b);
    const double exact = std::pow(2.0, a + b + 1.0) * std::beta(a + 1.0, b + 1.0);
    CHECK(rule_sum(q, [](double) { return 1.0; }) == doctest::Approx(exact).epsilon(1e-12));
    // Degree-5 polynomial moment via the same identity after expanding (1 + x)^5 into the weight.
    const double exact5 = std::pow(2.0, a + b + 6.0) * std::beta(a + 1.0, b + 6.0);
    CHECK(rule_sum(q, [](double x) { return std::pow(1.0 + x, 5); }) == doctest::Approx(exact5).epsilon(1e-12));
  }
}

TEST_CASE("Radial power rule") {
  for (double beta : {-0.8, -0.25, 0.0, 1.3}) {
    const double r = 0.7;
    const QuadratureRule q = radial_power_rule(12, beta, r);
    CHECK(rule_sum(q, [](double) { return 1.0; }) == doctest::Approx(std::pow(r, beta + 1) / (beta + 1)).epsilon(1e-13));
    CHECK(rule_sum(q, [](double x) { return x * x; }) == doctest::Approx(std::pow(r, beta + 3) / (beta + 3)).epsilon(1e-13));
    for (double x : q.nodes) CHECK((x > 0.0 && x < r));
  }
}

TEST_CASE("Cutoff is a partition-of-unity profile") {
  CHECK(cutoff(0.0) == 1.0);
  CHECK(cutoff(1.0) == 0.0);
  CHECK(cutoff(1.7) == 0.0);
  double prev = 1.0;
  for (int i = 1; i < 100; ++i) {
    const double v = cutoff(i / 100.0);
    CHECK(v <= prev);
    CHECK(v >= 0.0);
    prev = v;
  }
}

TEST_CASE("Lagrange weights reproduce polynomials") {
  const std::vector<double> nodes = {-1.0, -0.4, 0.1, 0.5, 1.2};
  std::vector<double> w(nodes.size());
  for (double x : {-0.9, 0.0, 0.33, 1.1}) {
    lagrange_weights(nodes, x, w);
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    double p = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) p += w[i] * (nodes[i] * nodes[i] * nodes[i] - 2.0 * nodes[i]);
    CHECK(p == doctest::Approx(x * x * x - 2.0 * x).epsilon(1e-13));
  }
  lagrange_weights(nodes, 0.1, w);
  CHECK(w[2] == 1.0);
  CHECK(w[0] == 0.0);
}

TEST_CASE("Number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300})
    CHECK(parse_double(format_double(v)) == v);
  CHECK(parse_double("  4.5\r") == 4.5);
  CHECK_THROWS(parse_double("4.5x"));
  const std::vector<double> a = {1.0, 2.0};
  const std::vector<double> b = {1.0, 2.0000000000000004};
  CHECK(fnv1a_of(std::span<const double>(a)) != fnv1a_of(std::span<const double>(b)));
}
