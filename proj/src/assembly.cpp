#include "fraclap/assembly.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "fraclap/errors.hpp"
#include "fraclap/quadrature.hpp"

namespace fraclap {

using std::numbers::pi;

namespace {

// Geodesic angle between unit vectors, accurate for small separations.
double chart_distance(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

void tangent_frame(const Vec3& u, Vec3& e1, Vec3& e2) {
  // Any orthonormal pair works; pick the axis least aligned with u.
  Eigen::Index k = 0;
  u.cwiseAbs().minCoeff(&k);
  const Vec3 axis = Vec3::Unit(k);
  e1 = (axis - axis.dot(u) * u).normalized();
  e2 = u.cross(e1);
}

void require_same_mesh(const SurfaceMesh& a, const SurfaceMesh& b, const char* what) {
  if (!same_mesh(a, b)) throw MismatchError(std::string(what) + ": operands live on different meshes");
}

}  // namespace

double patch_radius(const SurfaceMesh& mesh, const CorrectionOptions& options) {
  const double chart_step = std::max(pi / mesh.nlat(), 2.0 * pi / mesh.nlon());
  return std::min(options.near_factor * chart_step, 0.5 * pi);
}

std::vector<int> ring_bandwidths(const SurfaceMesh& mesh, const CorrectionOptions& options) {
  std::vector<int> band;
  const int nyquist = mesh.nlon() / 2;
  for (double theta : mesh.ring_colatitudes()) {
    if (options.polar_filter <= 0.0) {
      band.push_back(nyquist);
      continue;
    }
    const double m = std::ceil(options.polar_filter * mesh.nlat() * std::sin(theta)) + options.filter_margin;
    band.push_back(static_cast<int>(std::min<double>(m, nyquist)));
  }
  return band;
}

double flat_symbol(double s, double frequency) {
  // Plane single layer of c(3,s)|x|^(s-3) on exp(2 pi i k.x):
  // int_R (k^2 + t^2)^(-s/2) dt.
  return std::pow(frequency, 1.0 - s) * std::sqrt(pi) * std::tgamma(0.5 * (s - 1.0)) / std::tgamma(0.5 * s);
}

namespace {

// Interpolation along the polar patch: Lagrange in colatitude across rings
// continued over the poles; in longitude either Lagrange (full-band rings) or
// trigonometric interpolation truncated to the ring bandwidth.
class PatchInterpolator {
public:
  PatchInterpolator(const SurfaceMesh& mesh, int order, std::vector<int> band)
      : nlat_(mesh.nlat()), nlon_(mesh.nlon()), order_(order), band_(std::move(band)) {
    const auto& rings = mesh.ring_colatitudes();
    for (int e = -order_; e < nlat_ + order_; ++e) {
      if (e < 0) {
        ext_.push_back({-rings[-e - 1], -e - 1, nlon_ / 2});
      } else if (e >= nlat_) {
        const int ring = 2 * nlat_ - 1 - e;
        ext_.push_back({2.0 * pi - rings[ring], ring, nlon_ / 2});
      } else {
        ext_.push_back({rings[e], e, 0});
      }
    }
  }

  // row(j) += scale * (interpolation weight of node j at (theta, phi)).
  template <class Row, class Mask>
  void scatter(double theta, double phi, double scale, Row& row, Mask& mask) const {
    const int p = order_;
    const int lead = (p - 1) / 2;
    int e0 = 0;
    while (e0 + 1 < static_cast<int>(ext_.size()) && ext_[e0 + 1].theta <= theta) ++e0;
    const int e_start = std::clamp(e0 - lead, 0, static_cast<int>(ext_.size()) - p);

    const double dphi = 2.0 * pi / nlon_;
    const int j0 = static_cast<int>(std::floor(phi / dphi));
    const int j_start = j0 - lead;

    double tnodes[32], pnodes[32], tw[32], pw[32];
    for (int a = 0; a < p; ++a) {
      tnodes[a] = ext_[e_start + a].theta;
      pnodes[a] = (j_start + a) * dphi;
    }
    lagrange_weights({tnodes, static_cast<std::size_t>(p)}, theta, {tw, static_cast<std::size_t>(p)});
    lagrange_weights({pnodes, static_cast<std::size_t>(p)}, phi, {pw, static_cast<std::size_t>(p)});

    for (int a = 0; a < p; ++a) {
      const Ring& ring = ext_[e_start + a];
      const int base = ring.index * nlon_;
      const double ta = scale * tw[a];
      const int band = band_[ring.index];
      if (2 * band >= nlon_) {
        for (int b = 0; b < p; ++b) {
          const int col = (((j_start + b + ring.shift) % nlon_) + nlon_) % nlon_;
          row(base + col) += ta * pw[b];
          mask(base + col) = 1;
        }
        continue;
      }
      // Dirichlet kernel sin((M + 1/2) x) / sin(x / 2) / nlon with
      // x = phi - j dphi, stepped by angle addition.
      const double h = band + 0.5;
      double sn = std::sin(h * phi), cn = std::cos(h * phi);
      double sd = std::sin(0.5 * phi), cd = std::cos(0.5 * phi);
      const double sdn = std::sin(h * dphi), cdn = std::cos(h * dphi);
      const double sdd = std::sin(0.5 * dphi), cdd = std::cos(0.5 * dphi);
      for (int j = 0; j < nlon_; ++j) {
        const double w = std::abs(sd) < 1e-9 ? 2.0 * band + 1.0 : sn / sd;
        const int col = (j + ring.shift) % nlon_;
        row(base + col) += ta * w / nlon_;
        mask(base + col) = 1;
        const double sn1 = sn * cdn - cn * sdn, cn1 = cn * cdn + sn * sdn;
        const double sd1 = sd * cdd - cd * sdd, cd1 = cd * cdd + sd * sdd;
        sn = sn1, cn = cn1, sd = sd1, cd = cd1;
      }
    }
  }

private:
  struct Ring {
    double theta;
    int index;
    int shift;
  };
  int nlat_;
  int nlon_;
  int order_;
  std::vector<int> band_;
  std::vector<Ring> ext_;
};

}  // namespace

BoundaryOperator assemble_single_layer(MeshPtr mesh_ptr, double s, const CorrectionOptions& options) {
  if (!(s > 1.0) || s > 2.0) {
    throw DomainError("assemble_single_layer: the surface singularity |P-Q|^(s-3) is integrable "
                      "only for 1 < s <= 2 (got s = " + std::to_string(s) + ")");
  }
  if (options.radial_order < 2 || options.angular_order < 4) {
    throw DomainError("assemble_single_layer: local quadrature orders too small");
  }
  const SurfaceMesh& mesh = *mesh_ptr;
  if (options.interp_order < 2 || options.interp_order > mesh.nlat() / 2 || options.interp_order > mesh.nlon() / 2) {
    throw ResolutionError("assemble_single_layer: mesh " + std::to_string(mesh.nlat()) + "x" +
                          std::to_string(mesh.nlon()) + " too coarse for the correction stencil");
  }

  const KernelSpec spec(3, s);
  const SurfaceDescriptor& d = mesh.descriptor();
  const int n = mesh.size();
  const int nlon = mesh.nlon();
  const double radius = patch_radius(mesh, options);
  const std::vector<int> band = ring_bandwidths(mesh, options);
  const PatchInterpolator interp(mesh, options.interp_order, band);

  // rho^(s-2) carries the polar-coordinate singularity exactly.
  const QuadratureRule radial = radial_power_rule(options.radial_order, s - 2.0, radius);
  const int nang = options.angular_order;
  const double dpsi = 2.0 * pi / nang;

  BoundaryOperator op{RowMatrix::Zero(n, n), spec, mesh_ptr, {}, {}};
  op.corrected.setZero(n, n);
  op.correction = {"partition-of-unity polar patch, Gauss-Jacobi radial, filtered interpolation",
                   radius, options.radial_order, options.angular_order, options.interp_order, 0};

  const auto& units = mesh.unit_points();
  for (int i = 0; i < n; ++i) {
    const Vec3& ui = units[i];
    const Vec3& pi_ = mesh.node(i);
    auto row = op.matrix.row(i);
    auto mask = op.corrected.row(i);

    // Far field with the complementary blend.
    for (int j = 0; j < n; ++j) {
      if (j == i) {
        mask(j) = 1;
        continue;
      }
      const double r2 = (pi_ - mesh.node(j)).squaredNorm();
      const double k = spec.from_squared_distance(r2) * mesh.weights()[j];
      const double t = chart_distance(ui, units[j]) / radius;
      if (t >= 1.0) {
        row(j) = k;
      } else {
        row(j) = k * (1.0 - cutoff(t));
        mask(j) = 1;
      }
    }

    // Local polar patch around u_i in geodesic coordinates.
    Vec3 e1, e2;
    tangent_frame(ui, e1, e2);
    for (std::size_t kr = 0; kr < radial.size(); ++kr) {
      const double rho = radial.nodes[kr];
      const double sr = std::sin(rho);
      const double cr = std::cos(rho);
      const double blend = cutoff(rho / radius);
      for (int ka = 0; ka < nang; ++ka) {
        const double psi = ka * dpsi;
        const Vec3 u = cr * ui + sr * (std::cos(psi) * e1 + std::sin(psi) * e2);
        const Vec3 x = d.map(u);
        // |P - Q|^(s-3) sin(rho) / rho^(s-2) is smooth in rho.
        const double dist = (x - pi_).norm();
        const double smooth = spec.constant() * std::pow(dist / rho, s - 3.0) * (sr / rho);
        const double scale = radial.weights[kr] * dpsi * blend * smooth * d.area_factor(u);
        double theta = 0.0, phi = 0.0;
        unit_params(u, theta, phi);
        interp.scatter(theta, phi, scale, row, mask);
      }
    }
  }

  // Azimuthal modes above a ring's bandwidth are invisible to the patch
  // quadrature; they see the flat-surface symbol at their wavenumber.
  for (int r = 0; r < mesh.nlat(); ++r) {
    if (2 * band[r] >= nlon) continue;
    double perimeter = 0.0;
    for (int j = 0; j < nlon; ++j) {
      perimeter += (mesh.node(r * nlon + (j + 1) % nlon) - mesh.node(r * nlon + j)).norm();
    }
    std::vector<double> kernel(nlon, 0.0);
    for (int m = band[r] + 1; m <= nlon / 2; ++m) {
      const double mult = flat_symbol(s, m / perimeter) * (2 * m == nlon ? 1.0 : 2.0) / nlon;
      for (int j = 0; j < nlon; ++j) kernel[j] += mult * std::cos(2.0 * pi * m * j / nlon);
    }
    for (int a = 0; a < nlon; ++a) {
      for (int b = 0; b < nlon; ++b) {
        op.matrix(r * nlon + a, r * nlon + b) += kernel[(a - b + nlon) % nlon];
        op.corrected(r * nlon + a, r * nlon + b) = 1;
      }
    }
  }
  op.correction.corrected_entries = op.corrected.cast<std::int64_t>().sum();
  return op;
}

Density apply(const BoundaryOperator& op, const Density& phi) {
  require_same_mesh(*op.mesh, *phi.mesh, "apply");
  return {op.mesh, op.matrix * phi.values};
}

RowMatrix compose(const BoundaryOperator& op1, const BoundaryOperator& op2) {
  require_same_mesh(*op1.mesh, *op2.mesh, "compose");
  RowMatrix product = op1.matrix * op2.matrix;
  return product;
}

RowMatrix weighted_symmetrize(const BoundaryOperator& op) {
  const Eigen::VectorXd sw = op.mesh->weight_vector().cwiseSqrt();
  return sw.asDiagonal() * op.matrix * sw.cwiseInverse().asDiagonal();
}

SymmetryReport symmetry_report(const BoundaryOperator& op) {
  const RowMatrix b = weighted_symmetrize(op);
  const double scale = b.cwiseAbs().maxCoeff();
  SymmetryReport rep;
  const int n = op.size();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double diff = std::abs(b(i, j) - b(j, i));
      if (op.corrected(i, j) == 0 && op.corrected(j, i) == 0) {
        rep.far_asymmetry = std::max(rep.far_asymmetry, diff);
        ++rep.far_pairs;
      } else {
        rep.near_asymmetry = std::max(rep.near_asymmetry, diff / scale);
        ++rep.near_pairs;
      }
    }
  }
  rep.far_relative = rep.far_asymmetry / scale;
  return rep;
}

void save_operator(const std::filesystem::path& path, const BoundaryOperator& op) {
  nlohmann::json header;
  header["format"] = "fraclap-operator-v1";
  header["N"] = op.size();
  header["s"] = op.spec.order();
  header["mesh_hash"] = op.mesh->hash();
  header["byte_order"] = "little";
  header["layout"] = "row-major";
  header["correction"] = {{"scheme", op.correction.scheme},
                          {"patch_radius", op.correction.patch_radius},
                          {"radial_order", op.correction.radial_order},
                          {"angular_order", op.correction.angular_order},
                          {"interp_order", op.correction.interp_order},
                          {"corrected_entries", op.correction.corrected_entries}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << header.dump() << '\n';
  const Eigen::Index count = op.matrix.size();
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(op.matrix.data()),
              static_cast<std::streamsize>(count * sizeof(double)));
  } else {
    for (Eigen::Index k = 0; k < count; ++k) {
      auto bytes = std::bit_cast<std::array<char, 8>>(op.matrix.data()[k]);
      std::reverse(bytes.begin(), bytes.end());
      out.write(bytes.data(), 8);
    }
  }
  if (!out) throw Error("failed writing " + path.string());
}

BoundaryOperator load_operator(const std::filesystem::path& path, MeshPtr mesh) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  const nlohmann::json header = nlohmann::json::parse(line);
  const int n = header.at("N").get<int>();
  if (n != mesh->size() || header.at("mesh_hash").get<std::uint64_t>() != mesh->hash()) {
    throw MismatchError("operator file " + path.string() + " was assembled on a different mesh");
  }
  BoundaryOperator op{RowMatrix(n, n), KernelSpec(3, header.at("s").get<double>()), mesh, {}, {}};
  const auto& c = header.at("correction");
  op.correction = {c.at("scheme").get<std::string>(),      c.at("patch_radius").get<double>(),
                   c.at("radial_order").get<int>(),        c.at("angular_order").get<int>(),
                   c.at("interp_order").get<int>(),        c.at("corrected_entries").get<std::int64_t>()};
  in.read(reinterpret_cast<char*>(op.matrix.data()),
          static_cast<std::streamsize>(op.matrix.size() * sizeof(double)));
  if (!in) throw Error("operator file " + path.string() + " is truncated");
  if constexpr (std::endian::native != std::endian::little) {
    for (Eigen::Index k = 0; k < op.matrix.size(); ++k) {
      auto bytes = std::bit_cast<std::array<char, 8>>(op.matrix.data()[k]);
      std::reverse(bytes.begin(), bytes.end());
      op.matrix.data()[k] = std::bit_cast<double>(bytes);
    }
  }
  op.corrected.setOnes(n, n);
  return op;
}

}  // namespace fraclap
