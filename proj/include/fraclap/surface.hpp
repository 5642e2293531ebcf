#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fraclap/kernel.hpp"

namespace fraclap {

enum class SurfaceKind { Sphere, Ellipsoid };

std::string to_string(SurfaceKind kind);
SurfaceKind surface_kind_from_string(const std::string& name);

// Closed surfaces of the form Q(u) = center + diag(axes) u, u on the unit
// sphere. A sphere of radius R has axes (R, R, R).
struct SurfaceDescriptor {
  SurfaceKind kind = SurfaceKind::Sphere;
  Vec3 center = Vec3::Zero();
  Vec3 axes = Vec3::Ones();

  static SurfaceDescriptor sphere(double radius, const Vec3& center = Vec3::Zero());
  static SurfaceDescriptor ellipsoid(double a, double b, double c, const Vec3& center = Vec3::Zero());

  Vec3 map(const Vec3& u) const { return center + axes.cwiseProduct(u); }
  // Ratio of surface measure on the surface to that on the unit sphere at u.
  double area_factor(const Vec3& u) const;
  Vec3 normal(const Vec3& u) const;
  // Unit-sphere preimage of a surface point (exact only on the surface).
  Vec3 preimage(const Vec3& x) const;
  double diameter() const { return 2.0 * axes.maxCoeff(); }
};

inline Vec3 unit_point(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

// Parameters (theta, phi) of a unit vector, theta in [0, pi], phi in [0, 2 pi).
void unit_params(const Vec3& u, double& theta, double& phi);

/// Quadrature mesh on a parametric closed surface: Gauss-Legendre in
/// cos(theta) times a uniform longitude grid. Node index = ring * nlon + column.
class SurfaceMesh {
public:
  struct Parts {
    SurfaceDescriptor descriptor;
    int nlat = 0;
    int nlon = 0;
    std::vector<Vec3> nodes;
    std::vector<double> weights;
    std::vector<Vec3> normals;
    std::vector<double> theta;
    std::vector<double> phi;
  };

  /// Builds a mesh from explicit node data (used when reading files). The
  /// node layout must be the product grid implied by nlat and nlon.
  explicit SurfaceMesh(Parts parts);

  int size() const { return static_cast<int>(nodes_.size()); }
  int nlat() const { return nlat_; }
  int nlon() const { return nlon_; }
  const SurfaceDescriptor& descriptor() const { return descriptor_; }

  const std::vector<Vec3>& nodes() const { return nodes_; }
  const Vec3& node(int j) const { return nodes_[j]; }
  const std::vector<double>& weights() const { return weights_; }
  const Eigen::VectorXd& weight_vector() const { return weight_vec_; }
  const std::vector<Vec3>& normals() const { return normals_; }
  const std::vector<double>& theta() const { return theta_; }
  const std::vector<double>& phi() const { return phi_; }
  const std::vector<Vec3>& unit_points() const { return unit_; }

  /// Colatitude of each ring (increasing) and the associated Gauss weight in cos(theta).
  const std::vector<double>& ring_colatitudes() const { return ring_theta_; }
  const std::vector<double>& ring_gauss_weights() const { return ring_gauss_w_; }

  /// Minimum distance between distinct nodes.
  double min_spacing() const { return min_spacing_; }
  /// Characteristic spacing: largest nearest-neighbour distance over nodes.
  double spacing() const { return spacing_; }
  double area() const;

  /// 64-bit FNV-1a hash over the node, weight and resolution data.
  std::uint64_t hash() const { return hash_; }

private:
  void finalize();

  SurfaceDescriptor descriptor_;
  int nlat_;
  int nlon_;
  std::vector<Vec3> nodes_;
  std::vector<double> weights_;
  Eigen::VectorXd weight_vec_;
  std::vector<Vec3> normals_;
  std::vector<double> theta_;
  std::vector<double> phi_;
  std::vector<Vec3> unit_;
  std::vector<double> ring_theta_;
  std::vector<double> ring_gauss_w_;
  double min_spacing_ = 0.0;
  double spacing_ = 0.0;
  std::uint64_t hash_ = 0;
};

using MeshPtr = std::shared_ptr<const SurfaceMesh>;

/// Nodal samples of a scalar function on a mesh.
struct Density {
  Density(MeshPtr mesh, Eigen::VectorXd values);
  static Density constant(MeshPtr mesh, double value);

  MeshPtr mesh;
  Eigen::VectorXd values;
};

/// Mesh for a general descriptor. Requires nlat >= 4, nlon >= 8 and nlon even.
MeshPtr make_mesh(const SurfaceDescriptor& descriptor, int nlat, int nlon);
MeshPtr make_sphere_mesh(double radius, const Vec3& center, int nlat, int nlon);
MeshPtr make_ellipsoid_mesh(double a, double b, double c, int nlat, int nlon);

/// Same surface with nlat and nlon multiplied by factor (>= 2).
MeshPtr refine(const SurfaceMesh& mesh, int factor);

/// sum_j w_j f_j.
double surface_integral(const SurfaceMesh& mesh, std::span<const double> f);
double surface_integral(const Density& f);

bool same_mesh(const SurfaceMesh& a, const SurfaceMesh& b);

/// Tensor-product Lagrange interpolation of nodal data in the (theta, phi)
/// chart. Stencils that reach past a pole continue on the opposite meridian,
/// so interpolation is uniform over the whole surface.
class GridInterpolator {
public:
  GridInterpolator(const SurfaceMesh& mesh, int order);

  int order() const { return order_; }
  int stencil_size() const { return order_ * order_; }

  /// Node indices and weights reproducing f(theta, phi) from nodal values.
  void stencil(double theta, double phi, std::span<int> index, std::span<double> weight) const;

  /// Interpolated value at a unit-sphere preimage point.
  double evaluate(const Eigen::VectorXd& values, const Vec3& u) const;

private:
  int nlat_;
  int nlon_;
  int order_;
  std::vector<double> ext_theta_;  // ring colatitudes continued across both poles
  std::vector<int> ext_ring_;
  std::vector<int> ext_shift_;  // longitude shift (0 or nlon/2) of continued rings
};

/// CSV `x,y,z,w,nx,ny,nz,theta,phi[,extra...]` plus a JSON sidecar
/// (`<path>.json`) with the descriptor and resolution.
void write_mesh_csv(const std::filesystem::path& path, const SurfaceMesh& mesh,
                    const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& extra = {});

struct MeshFile {
  MeshPtr mesh;
  std::vector<std::string> extra_names;
  std::vector<Eigen::VectorXd> extra_columns;
};

MeshFile read_mesh_csv(const std::filesystem::path& path);

}  // namespace fraclap
