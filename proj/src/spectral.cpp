#include "fraclap/spectral.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "fraclap/errors.hpp"
#include "fraclap/quadrature.hpp"

namespace fraclap {

using std::numbers::pi;

namespace {

// Normalized associated Legendre values pbar[l][m] = N_lm P_l^m(x), stored at
// l(l+1)/2 + m, for the given sin(theta) and cos(theta).
void normalized_legendre(int lmax, double x, double sint, std::vector<double>& p) {
  auto at = [](int l, int m) { return l * (l + 1) / 2 + m; };
  p.assign(static_cast<std::size_t>((lmax + 1) * (lmax + 2) / 2), 0.0);
  p[0] = 1.0 / std::sqrt(4.0 * pi);
  for (int m = 1; m <= lmax; ++m) {
    p[at(m, m)] = std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sint * p[at(m - 1, m - 1)];
  }
  for (int m = 0; m < lmax; ++m) {
    p[at(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * p[at(m, m)];
  }
  for (int m = 0; m <= lmax; ++m) {
    for (int l = m + 2; l <= lmax; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
      const double b = std::sqrt(((l - 1.0) * (l - 1.0) - m * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      p[at(l, m)] = a * (x * p[at(l - 1, m)] - b * p[at(l - 2, m)]);
    }
  }
}

void require_sphere(const SurfaceMesh& mesh) {
  if (mesh.descriptor().kind != SurfaceKind::Sphere) {
    throw DomainError("spherical-harmonic transforms need a sphere mesh");
  }
}

}  // namespace

void real_sph_harm(int lmax, double theta, double phi, std::span<double> out) {
  std::vector<double> p;
  normalized_legendre(lmax, std::cos(theta), std::sin(theta), p);
  for (int l = 0; l <= lmax; ++l) {
    const int base = l * (l + 1) / 2;
    out[sh_index(l, 0)] = p[base];
    for (int m = 1; m <= l; ++m) {
      const double v = std::sqrt(2.0) * p[base + m];
      out[sh_index(l, m)] = v * std::cos(m * phi);
      out[sh_index(l, -m)] = v * std::sin(m * phi);
    }
  }
}

Eigen::VectorXd sample_harmonic(const SurfaceMesh& mesh, int l, int m) {
  if (l < 0 || std::abs(m) > l) throw DomainError("sample_harmonic: need |m| <= l");
  std::vector<double> y(sh_count(l));
  Eigen::VectorXd v(mesh.size());
  for (int j = 0; j < mesh.size(); ++j) {
    real_sph_harm(l, mesh.theta()[j], mesh.phi()[j], y);
    v(j) = y[sh_index(l, m)];
  }
  return v;
}

double legendre(int l, double t) {
  if (l == 0) return 1.0;
  double p0 = 1.0;
  double p1 = t;
  for (int k = 2; k <= l; ++k) {
    const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double funk_hecke_eigenvalue(double s, int l) {
  if (!(s > 1.0) || s > 2.0) {
    throw DomainError("funk_hecke_eigenvalue: the surface integral diverges unless 1 < s <= 2");
  }
  if (l < 0) throw DomainError("funk_hecke_eigenvalue: degree must be non-negative");
  // (2 - 2t)^a = 2^a (1 - t)^a: Gauss-Jacobi with weight (1 - t)^a integrates
  // the polynomial P_l exactly once the rule has more than l/2 nodes.
  const double a = 0.5 * (s - 3.0);
  const QuadratureRule rule = gauss_jacobi(l / 2 + 8, a, 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) sum += rule.weights[k] * legendre(l, rule.nodes[k]);
  return 2.0 * pi * riesz_constant(3, s) * std::pow(2.0, a) * sum;
}

SpectralCoeffs sht_forward(const Density& phi, int lmax) {
  const SurfaceMesh& mesh = *phi.mesh;
  require_sphere(mesh);
  if (lmax < 0) throw DomainError("sht_forward: lmax must be non-negative");
  if (mesh.nlat() < lmax + 1 || mesh.nlon() < 2 * lmax + 1) {
    throw ResolutionError("sht_forward: mesh " + std::to_string(mesh.nlat()) + "x" +
                          std::to_string(mesh.nlon()) + " aliases degree " + std::to_string(lmax));
  }
  const int nlon = mesh.nlon();
  const double dphi = 2.0 * pi / nlon;
  SpectralCoeffs out{lmax, Eigen::VectorXd::Zero(sh_count(lmax))};
  std::vector<double> p;
  std::vector<double> a(lmax + 1), b(lmax + 1);
  for (int ring = 0; ring < mesh.nlat(); ++ring) {
    const double theta = mesh.ring_colatitudes()[ring];
    normalized_legendre(lmax, std::cos(theta), std::sin(theta), p);
    // Longitude Fourier sums for this ring.
    for (int m = 0; m <= lmax; ++m) {
      double sc = 0.0;
      double ss = 0.0;
      for (int j = 0; j < nlon; ++j) {
        const int idx = ring * nlon + j;
        const double ph = mesh.phi()[idx];
        sc += phi.values(idx) * std::cos(m * ph);
        ss += phi.values(idx) * std::sin(m * ph);
      }
      a[m] = sc;
      b[m] = ss;
    }
    const double w = mesh.ring_gauss_weights()[ring] * dphi;
    for (int l = 0; l <= lmax; ++l) {
      const int base = l * (l + 1) / 2;
      out(l, 0) += w * p[base] * a[0];
      for (int m = 1; m <= l; ++m) {
        const double v = w * std::sqrt(2.0) * p[base + m];
        out(l, m) += v * a[m];
        out(l, -m) += v * b[m];
      }
    }
  }
  return out;
}

Density sht_inverse(const SpectralCoeffs& coeffs, MeshPtr mesh) {
  require_sphere(*mesh);
  Eigen::VectorXd v(mesh->size());
  std::vector<double> y(sh_count(coeffs.lmax));
  for (int j = 0; j < mesh->size(); ++j) {
    real_sph_harm(coeffs.lmax, mesh->theta()[j], mesh->phi()[j], y);
    v(j) = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()))
               .dot(coeffs.coeffs);
  }
  return {std::move(mesh), std::move(v)};
}

double spectral_sobolev_norm(const SpectralCoeffs& coeffs, double s) {
  if (s < -2.0 || s > 2.0) throw DomainError("spectral_sobolev_norm: need -2 <= s <= 2");
  double sum = 0.0;
  for (int l = 0; l <= coeffs.lmax; ++l) {
    const double factor = std::pow(1.0 + l * (l + 1.0), s);
    for (int m = -l; m <= l; ++m) sum += factor * coeffs(l, m) * coeffs(l, m);
  }
  return std::sqrt(sum);
}

}  // namespace fraclap
