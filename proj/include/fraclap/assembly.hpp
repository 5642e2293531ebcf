#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fraclap/kernel.hpp"
#include "fraclap/surface.hpp"

namespace fraclap {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Local singular-quadrature settings for the near field of each target.
struct CorrectionOptions {
  // Patch radius in units of the characteristic mesh spacing. Nodes closer
  // than patch_radius to a target (geodesic distance on the unit-sphere
  // chart) see a smoothly blended local quadrature.
  double near_factor = 8.0;
  int radial_order = 16;
  int angular_order = 32;
  int interp_order = 8;
  // Longitudinal bandwidth kept by the patch interpolation on a ring at
  // colatitude theta: ceil(polar_filter * nlat * sin(theta)) + filter_margin,
  // capped at nlon/2. Zero disables the filter.
  double polar_filter = 1.0;
  int filter_margin = 2;
};

struct CorrectionInfo {
  std::string scheme;
  double patch_radius = 0.0;  // geodesic radius on the unit-sphere chart
  int radial_order = 0;
  int angular_order = 0;
  int interp_order = 0;
  std::int64_t corrected_entries = 0;
};

/// Dense Nystrom matrix of the single-layer operator S_s on a mesh:
/// (A phi)_i approximates int Gamma_s(P_i - Q) phi(Q) dQ.
struct BoundaryOperator {
  RowMatrix matrix;
  KernelSpec spec;
  MeshPtr mesh;
  CorrectionInfo correction;
  // corrected(i, j) != 0 when entry (i, j) differs from Gamma_s(P_i - Q_j) w_j.
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> corrected;

  int size() const { return static_cast<int>(matrix.rows()); }
};

/// Geodesic patch radius used for a mesh under the given options.
double patch_radius(const SurfaceMesh& mesh, const CorrectionOptions& options);

/// Per-ring longitudinal bandwidth used by the patch interpolation.
std::vector<int> ring_bandwidths(const SurfaceMesh& mesh, const CorrectionOptions& options);

/// Symbol of the single layer on a plane at spatial frequency k (cycles per
/// unit length): k^(1-s) sqrt(pi) Gamma((s-1)/2) / Gamma(s/2).
double flat_symbol(double s, double frequency);

/// Assembles S_s for 1 < s <= 2. Throws DomainError for s outside that range
/// and ResolutionError when the mesh cannot support the local stencil.
BoundaryOperator assemble_single_layer(MeshPtr mesh, double s, const CorrectionOptions& options = {});

Density apply(const BoundaryOperator& op, const Density& phi);

/// Dense product op1 * op2 (both include quadrature weights).
RowMatrix compose(const BoundaryOperator& op1, const BoundaryOperator& op2);

/// B = W^(1/2) K W^(1/2) where A = K W, i.e. B = W^(1/2) A W^(-1/2).
RowMatrix weighted_symmetrize(const BoundaryOperator& op);

struct SymmetryReport {
  double far_asymmetry = 0.0;        // max |B_ij - B_ji| over pairs with both entries uncorrected
  double near_asymmetry = 0.0;       // max over remaining pairs, relative to max |B|
  double far_relative = 0.0;         // far_asymmetry relative to max |B|
  std::int64_t far_pairs = 0;
  std::int64_t near_pairs = 0;
};

SymmetryReport symmetry_report(const BoundaryOperator& op);

/// Binary dump: one line of JSON header (N, s, mesh hash, correction), then
/// N*N little-endian doubles in row-major order.
void save_operator(const std::filesystem::path& path, const BoundaryOperator& op);

/// Loads a dump and checks it against the mesh hash. The correction mask is
/// not stored; every entry is marked corrected.
BoundaryOperator load_operator(const std::filesystem::path& path, MeshPtr mesh);

}  // namespace fraclap
