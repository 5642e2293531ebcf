#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <vector>

#include "fraclap/errors.hpp"
#include "fraclap/kernel.hpp"
#include "oracles.hpp"

using namespace fraclap;

TEST_CASE("Riesz constants at familiar orders") {
  // s = 2 gives the Newtonian kernel with this Fourier convention: pi / |x|.
  CHECK(riesz_constant(3, 2.0) == doctest::Approx(oracle::pi).epsilon(1e-15));
  CHECK(riesz_constant(3, 1.5) == doctest::Approx(1.0).epsilon(1e-15));
  for (double s : {0.3, 0.8, 1.2, 1.7, 2.5})
    CHECK(riesz_constant(3, s) == doctest::Approx(oracle::riesz3(s)).epsilon(1e-14));
  // c(n, s) c(n, n - s) = 1 (the kernels of orders s and n - s are mutually inverse up to delta).
  for (int n : {3, 4, 5})
    for (double s : {0.4, 1.1, 2.3})
      CHECK(riesz_constant(n, s) * riesz_constant(n, n - s) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("Riesz constant domain") {
  CHECK_THROWS_AS(riesz_constant(3, 0.0), DomainError);
  CHECK_THROWS_AS(riesz_constant(3, 3.0), DomainError);
  CHECK_THROWS_AS(riesz_constant(2, 1.0), DomainError);
  CHECK_THROWS_AS(KernelSpec(3, -1.0), DomainError);
}

TEST_CASE("Kernel values and singularity") {
  const KernelSpec k(3, 1.5);
  CHECK(k.constant() == doctest::Approx(1.0));
  CHECK(kernel_eval(k, Vec3(0.0, 3.0, 4.0)) == doctest::Approx(std::pow(5.0, -1.5)).epsilon(1e-15));
  CHECK(k.from_squared_distance(4.0) == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-15));
  CHECK_THROWS_AS(kernel_eval(k, Vec3::Zero()), SingularityError);
  const std::vector<double> two = {1.0, 2.0};
  CHECK_THROWS_AS(kernel_eval(k, std::span<const double>(two)), MismatchError);

  const KernelSpec k4(4, 1.0);
  const std::array<double, 4> x = {1.0, 1.0, 1.0, 1.0};
  CHECK(kernel_eval(k4, x) == doctest::Approx(riesz_constant(4, 1.0) * std::pow(2.0, -3.0)).epsilon(1e-15));
}

TEST_CASE("Kernel gradient against central differences") {
  for (double s : {0.6, 1.5, 2.0}) {
    const KernelSpec k(3, s);
    const Vec3 x(0.3, -0.7, 0.45);
    const Vec3 g = kernel_gradient(k, x);
    const double h = 1e-5;
    for (int i = 0; i < 3; ++i) {
      Vec3 e = Vec3::Zero();
      e(i) = h;
      const double fd = (kernel_eval(k, x + e) - kernel_eval(k, x - e)) / (2.0 * h);
      CHECK(g(i) == doctest::Approx(fd).epsilon(1e-8));
    }
    const std::vector<double> xs = {x.x(), x.y(), x.z()};
    const std::vector<double> gs = kernel_gradient(k, std::span<const double>(xs));
    CHECK(gs[1] == doctest::Approx(g(1)));
  }
}

TEST_CASE("Fractional symbol") {
  const std::array<double, 3> xi = {0.3, 0.0, 0.4};
  CHECK(fractional_symbol(0.75, xi) == doctest::Approx(std::pow(2.0 * oracle::pi * 0.5, 1.5)).epsilon(1e-15));
  CHECK(fractional_symbol(1.0, xi) == doctest::Approx(std::pow(2.0 * oracle::pi * 0.5, 2.0)).epsilon(1e-15));
  const std::array<double, 3> zero = {0.0, 0.0, 0.0};
  CHECK(fractional_symbol(0.5, zero) == 0.0);
  CHECK_THROWS_AS(fractional_symbol(0.0, xi), DomainError);
  CHECK_THROWS_AS(fractional_symbol(1.2, xi), DomainError);
}
