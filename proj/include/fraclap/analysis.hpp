#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "fraclap/field.hpp"
#include "fraclap/spectral.hpp"

namespace fraclap {

using Vec2 = Eigen::Vector2d;

// ---------------------------------------------------------------------------
// Flat composition of Riesz kernels restricted to a plane

struct FlatQuadrature {
  int radial_order = 24;     // per singular disk
  int angular_order = 64;    // per singular disk
  int middle_radial = 32;    // per radial panel of the middle region
  int middle_angular = 256;
  double cutoff_radius = 0.45;  // singular disks, in units of |x' - y'|
  double outer_radius = 100.0;  // quadrature region, in units of |x' - y'|
};

struct FlatSemigroupResult {
  double lhs = 0.0;            // int_{R^2} Gamma_{2a}(x'-z', 0) Gamma_{3-2a}(y'-z', 0) dz'
  double rhs = 0.0;            // Gamma_2(x'-y', 0) = pi / |x'-y'|
  double normalization = 0.0;  // flat_composition_constant(alpha)
  double tail = 0.0;           // analytic part beyond outer_radius
};

/// Requires 1/2 < alpha < 1 and xp != yp.
FlatSemigroupResult flat_semigroup_check(double alpha, const Vec2& xp, const Vec2& yp, const FlatQuadrature& q = {});

/// With the three-dimensional constants c(3, s) the planar convolution of
/// Gamma_{2a} and Gamma_{3-2a} equals K(alpha) Gamma_2, where
///   K = c(3, 2a) c(3, 3-2a) / (pi c(2, 2a-1) c(2, 2-2a)).
/// K is also the limit of lambda_l(2a) lambda_l(3-2a) / lambda_l(2).
double flat_composition_constant(double alpha);

// ---------------------------------------------------------------------------
// Spectral diagnostics

struct CompositionRow {
  int l = 0;
  double lambda_a = 0.0;  // lambda_l(2 alpha)
  double lambda_b = 0.0;  // lambda_l(3 - 2 alpha)
  double lambda_2 = 0.0;  // lambda_l(2)
  double ratio = 0.0;     // lambda_a lambda_b / lambda_2
};

struct CompositionReport {
  double alpha = 0.0;
  int fit_from = 0;
  std::vector<CompositionRow> rows;
  // Log-log slopes over fit_from <= l <= lmax.
  double slope_reference = 0.0;   // of lambda_2
  double slope_difference = 0.0;  // of |lambda_a lambda_b - lambda_2|
  double slope_gap = 0.0;         // slope_reference - slope_difference
  // Same with the product divided by flat_composition_constant(alpha).
  double limit_ratio = 0.0;
  double slope_normalized = 0.0;
  double normalized_gap = 0.0;
};

/// Requires 1/2 < alpha < 1 and lmax >= 4.
CompositionReport composition_spectrum_report(double alpha, int lmax, int fit_from = 4);

struct NormEquivalence {
  double alpha = 0.0;
  std::vector<double> values;  // lambda_l(2a) (1 + l(l+1))^((2a-1)/2), l = 0..lmax
  double lower = 0.0;
  double upper = 0.0;
};

NormEquivalence norm_equivalence_profile(double alpha, int lmax);

// ---------------------------------------------------------------------------
// Besov seminorm on a planar patch

/// (int int |f(x) - f(y)|^p / |x - y|^(2 + p s) dx dy)^(1/p) over a square
/// patch of side `side`, from cell-centred samples f(i, j) at
/// ((i + 1/2) h, (j + 1/2) h), h = side / rows. Requires a square sample
/// matrix of size >= 3, 0 < s < 1 and 1 <= p < inf.
double besov_seminorm_patch(const Eigen::MatrixXd& f, double side, double s, double p);

/// Same seminorm of a function given pointwise on [0, side]^2, by nested
/// quadrature: composite Gauss-Legendre over x with `panels` panels of
/// `order` nodes per axis, and for y a Duffy split of the square into four
/// triangles with apex x, with the radial factor t^(p(1-s)-1) built into a
/// Gauss-Jacobi rule. Accurate for smooth f.
double besov_seminorm_reference(const std::function<double(const Vec2&)>& f, double side, double s, double p,
                                int panels = 8, int order = 8);

// ---------------------------------------------------------------------------
// Riesz volume potentials

struct RieszOptions {
  double near_cells = 6.0;  // radius of the polar correction, in grid steps
  int radial_order = 16;
  int sphere_nlat = 16;
  int interp_order = 6;
  // Trapezoidal half weights on the faces of the box; needed when the data
  // does not vanish at the boundary.
  bool trapezoid_faces = false;
};

/// Samples of a function on the node grid of an axis-aligned cube (see
/// GridFunction; the last node sits on the far face).
GridFunction sample_grid(const std::function<double(const Vec3&)>& f, const Vec3& center, double side, int n);

/// I_s f(x) = int Gamma_s(x - y) f(y) dy for gridded f (zero outside the
/// box): grid quadrature, with a polar correction of Gamma_s near x on the
/// interpolated data. Requires 0 < s < 3.
std::vector<double> riesz_potential_apply(const GridFunction& f, double s, const std::vector<Vec3>& points,
                                          const RieszOptions& options = {});

/// The same quadrature at every grid node, through a zero-padded FFT
/// convolution. The data should vanish near the box faces.
GridFunction riesz_potential_grid(const GridFunction& f, double s, const RieszOptions& options = {});

struct RieszSemigroupReport {
  double s1 = 0.0;
  double s2 = 0.0;
  std::vector<Vec3> points;
  std::vector<double> composed;  // I_{s1}(I_{s2} f)
  std::vector<double> direct;    // I_{s1 + s2} f
  double max_rel_error = 0.0;
};

/// Compares I_{s1}(I_{s2} psi) with I_{s1+s2} psi for the bump psi on a node
/// grid with n points per axis over a cube of side box_factor * radius. The
/// inner potential is gridded; its part outside the box is integrated along
/// rays with values from the far-field sum. Requires s1 + s2 < 3.
RieszSemigroupReport riesz_semigroup_check(const BumpSpec& bump, double s1, double s2,
                                           const std::vector<Vec3>& points, int n, double box_factor = 8.0,
                                           const RieszOptions& options = {});

/// I_s of exp(-pi |x|^2) at distance r from the origin from the radial
/// Fourier integral 4 pi int rho^(2-s) exp(-pi rho^2) sinc(2 pi rho r) drho.
double riesz_gaussian_reference(double s, double r);

nlohmann::json to_json(const FlatSemigroupResult& result);
nlohmann::json to_json(const CompositionReport& report);
nlohmann::json to_json(const NormEquivalence& profile);
nlohmann::json to_json(const RieszSemigroupReport& report);

}  // namespace fraclap
