#pragma once

#include <span>

#include <Eigen/Core>

#include "fraclap/surface.hpp"

namespace fraclap {

// Real spherical harmonics, orthonormal on the unit sphere, without the
// Condon-Shortley phase:
//   Y_l0  = N_l0 P_l(cos t)
//   Y_lm  = sqrt(2) N_lm P_l^m(cos t) cos(m p)     (m > 0)
//   Y_l-m = sqrt(2) N_lm P_l^m(cos t) sin(m p)     (m > 0)
// Coefficient (l, m) lives at index l^2 + l + m.
constexpr int sh_index(int l, int m) { return l * l + l + m; }
constexpr int sh_count(int lmax) { return (lmax + 1) * (lmax + 1); }

/// All Y_lm(theta, phi), l <= lmax, written at sh_index(l, m).
void real_sph_harm(int lmax, double theta, double phi, std::span<double> out);

/// Single harmonic sampled at the mesh's chart parameters.
Eigen::VectorXd sample_harmonic(const SurfaceMesh& mesh, int l, int m);

/// Legendre polynomial P_l(t).
double legendre(int l, double t);

/// Eigenvalue of the Riesz single-layer operator of order s on the unit
/// sphere acting on degree-l harmonics (Funk-Hecke):
///   lambda_l(s) = 2 pi c(3, s) int_{-1}^{1} (2 - 2t)^((s-3)/2) P_l(t) dt.
/// Requires 1 < s <= 2 (DomainError otherwise; the integral diverges for s <= 1).
double funk_hecke_eigenvalue(double s, int l);

struct SpectralCoeffs {
  int lmax = 0;
  Eigen::VectorXd coeffs;

  double operator()(int l, int m) const { return coeffs(sh_index(l, m)); }
  double& operator()(int l, int m) { return coeffs(sh_index(l, m)); }
};

/// Analysis on a sphere mesh; exact for band-limited data of degree <= lmax.
/// Throws ResolutionError when nlat < lmax + 1 or nlon < 2 lmax + 1 and
/// DomainError for non-spherical meshes.
SpectralCoeffs sht_forward(const Density& phi, int lmax);
Density sht_inverse(const SpectralCoeffs& coeffs, MeshPtr mesh);

/// (sum (1 + l(l+1))^s |c_lm|^2)^(1/2), -2 <= s <= 2.
double spectral_sobolev_norm(const SpectralCoeffs& coeffs, double s);

}  // namespace fraclap
