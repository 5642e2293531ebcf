#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "fraclap/surface.hpp"

namespace fraclap {

/// Closest point on the surface to x together with the Euclidean distance.
struct SurfaceProjection {
  Vec3 point;
  double dist = 0.0;
  bool inside = false;
};

SurfaceProjection project_to_surface(const SurfaceDescriptor& surface, const Vec3& x);
double surface_distance(const SurfaceDescriptor& surface, const Vec3& x);

enum class QuadratureTag { Base, Upsampled };
std::string to_string(QuadratureTag tag);

struct FieldSample {
  Vec3 point;
  double value = 0.0;
  double dist = 0.0;
  QuadratureTag quadrature = QuadratureTag::Base;
};

struct FieldOptions {
  // Points closer than near_factor * h to the surface use the mesh refined
  // by upsample_factor; points closer than min_factor * h_up are rejected.
  // h is the characteristic spacing of the mesh in use.
  double near_factor = 2.0;
  int upsample_factor = 4;
  double min_factor = 0.5;
  int interp_order = 8;
};

/// Evaluates u(x) = sum_j Gamma_{2 alpha}(x - Q_j) phi_j w_j off the surface.
/// The refined mesh and the interpolated density are built on first use.
/// Not safe for concurrent use from several threads.
class FieldEvaluator {
public:
  FieldEvaluator(Density phi, double alpha, FieldOptions options = {});
  ~FieldEvaluator();
  FieldEvaluator(FieldEvaluator&&) noexcept;
  FieldEvaluator& operator=(FieldEvaluator&&) noexcept;

  double alpha() const { return alpha_; }
  const Density& density() const { return phi_; }
  double base_spacing() const;
  double upsampled_spacing() const;

  /// Throws SingularityError when x is closer than min_factor * h_up.
  FieldSample sample(const Vec3& x) const;
  std::vector<FieldSample> sample(const std::vector<Vec3>& points) const;

  /// Value with an explicit quadrature choice and no distance checks.
  double value(const Vec3& x, QuadratureTag quadrature) const;

private:
  struct Charges;
  const Charges& upsampled() const;

  Density phi_;
  double alpha_;
  FieldOptions options_;
  std::unique_ptr<Charges> base_;
  mutable std::unique_ptr<Charges> fine_;
};

std::vector<FieldSample> eval_potential(const Density& phi, double alpha, const std::vector<Vec3>& points,
                                        const FieldOptions& options = {});

struct DecayFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double expected_exponent = 0.0;   // 2 alpha - 3
  double expected_prefactor = 0.0;  // c(3, 2 alpha) sum_j phi_j w_j
  std::vector<FieldSample> samples;
};

/// Least-squares fit of log|u| = log(prefactor) + exponent log r along the
/// ray center + r * direction. Requires every radius >= 5 surface diameters
/// and a density with nonzero total mass.
DecayFit decay_fit(const Density& phi, double alpha, const std::vector<double>& radii,
                   const Vec3& direction = Vec3(1.0, 1.0, 1.0).normalized());

/// psi(x) = exp(-1 / (1 - |x - center|^2 / radius^2)) inside the ball, 0 outside.
struct BumpSpec {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;

  double operator()(const Vec3& x) const;
  /// int psi dx.
  double integral() const;
};

struct GridSpec {
  int n = 128;               // points per axis
  double box_factor = 8.0;   // box side in bump radii
  int oversample = 2;        // the transform runs on an n * oversample grid
};

/// Values on the periodic node grid x_ijk = origin + spacing * (i, j, k).
struct GridFunction {
  Vec3 origin;
  double spacing = 0.0;
  int n = 0;
  std::vector<double> values;  // index (i * n + j) * n + k

  Vec3 point(int i, int j, int k) const { return origin + spacing * Vec3(i, j, k); }
  double at(int i, int j, int k) const { return values[(static_cast<std::size_t>(i) * n + j) * n + k]; }
};

/// Fractional Laplacian of the bump on a box of side box_factor * radius
/// centred on the bump, through the discrete Fourier transform with symbol
/// (2 pi |xi|)^(2 alpha). Requires 0 < alpha < 1 and box_factor >= 4.
GridFunction frac_laplacian_bump(const BumpSpec& bump, double alpha, const GridSpec& grid = {});

/// Same quantity at one point from the second-difference singular integral
///   (C/2) int (2 psi(x) - psi(x + y) - psi(x - y)) / |y|^(3 + 2 alpha) dy,
/// C = 4^alpha Gamma(3/2 + alpha) / (pi^(3/2) |Gamma(-alpha)|).
double frac_laplacian_bump_direct(const BumpSpec& bump, double alpha, const Vec3& x, int radial_order = 300,
                                  int sphere_nlat = 96);

/// Normalising constant C(3, alpha) of the singular-integral form.
double frac_laplacian_constant(double alpha);

struct WeakResidualReport {
  double residual = 0.0;    // |integral + tail| / (max|u| * l1_norm)
  double integral = 0.0;    // grid sum of u * frac_laplacian(psi)
  double tail = 0.0;        // quadrature of the part outside the box
  double tail_bound = 0.0;  // a-priori bound on |tail|
  double max_u = 0.0;
  double l1_norm = 0.0;
  double mean = 0.0;       // grid sum of frac_laplacian(psi)
  int grid_n = 0;
  std::int64_t upsampled_points = 0;
  std::int64_t shifted_points = 0;  // pushed out to the minimum distance
};

/// Normalised weak residual int u (-Delta)^alpha psi dx for the bump. The
/// bump support must stay clear of the surface (DomainError otherwise).
WeakResidualReport weak_residual(const Density& phi, double alpha, const BumpSpec& bump,
                                 const GridSpec& grid = {}, const FieldOptions& options = {});

nlohmann::json to_json(const DecayFit& fit);
nlohmann::json to_json(const WeakResidualReport& report);

/// CSV `x,y,z,u,dist`.
void write_field_csv(const std::filesystem::path& path, const std::vector<FieldSample>& samples);

}  // namespace fraclap
