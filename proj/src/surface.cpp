#include "fraclap/surface.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "fraclap/errors.hpp"
#include "fraclap/io.hpp"
#include "fraclap/quadrature.hpp"

namespace fraclap {

using std::numbers::pi;

std::string to_string(SurfaceKind kind) {
  return kind == SurfaceKind::Sphere ? "sphere" : "ellipsoid";
}

SurfaceKind surface_kind_from_string(const std::string& name) {
  if (name == "sphere") return SurfaceKind::Sphere;
  if (name == "ellipsoid") return SurfaceKind::Ellipsoid;
  throw DomainError("unknown surface type '" + name + "'");
}

SurfaceDescriptor SurfaceDescriptor::sphere(double radius, const Vec3& center) {
  if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
  return {SurfaceKind::Sphere, center, Vec3::Constant(radius)};
}

SurfaceDescriptor SurfaceDescriptor::ellipsoid(double a, double b, double c, const Vec3& center) {
  if (!(a > 0.0 && b > 0.0 && c > 0.0)) throw DomainError("ellipsoid semi-axes must be positive");
  return {SurfaceKind::Ellipsoid, center, Vec3(a, b, c)};
}

double SurfaceDescriptor::area_factor(const Vec3& u) const {
  return axes.prod() * u.cwiseQuotient(axes).norm();
}

Vec3 SurfaceDescriptor::normal(const Vec3& u) const {
  return u.cwiseQuotient(axes).normalized();
}

Vec3 SurfaceDescriptor::preimage(const Vec3& x) const {
  return (x - center).cwiseQuotient(axes).normalized();
}

void unit_params(const Vec3& u, double& theta, double& phi) {
  theta = std::atan2(std::hypot(u.x(), u.y()), u.z());
  phi = std::atan2(u.y(), u.x());
  if (phi < 0.0) phi += 2.0 * pi;
}

// ---------------------------------------------------------------------------

SurfaceMesh::SurfaceMesh(Parts parts)
    : descriptor_(parts.descriptor),
      nlat_(parts.nlat),
      nlon_(parts.nlon),
      nodes_(std::move(parts.nodes)),
      weights_(std::move(parts.weights)),
      normals_(std::move(parts.normals)),
      theta_(std::move(parts.theta)),
      phi_(std::move(parts.phi)) {
  const std::size_t n = static_cast<std::size_t>(nlat_) * nlon_;
  if (nlat_ < 4 || nlon_ < 8 || nlon_ % 2 != 0) {
    throw ResolutionError("mesh resolution must satisfy nlat >= 4, nlon >= 8, nlon even");
  }
  if (nodes_.size() != n || weights_.size() != n || normals_.size() != n || theta_.size() != n ||
      phi_.size() != n) {
    throw MismatchError("mesh node arrays do not match nlat * nlon");
  }
  finalize();
}

void SurfaceMesh::finalize() {
  const int n = size();
  weight_vec_ = Eigen::Map<const Eigen::VectorXd>(weights_.data(), n);
  unit_.resize(n);
  for (int j = 0; j < n; ++j) unit_[j] = unit_point(theta_[j], phi_[j]);

  const QuadratureRule gl = gauss_legendre(nlat_);
  ring_theta_.resize(nlat_);
  ring_gauss_w_.resize(nlat_);
  for (int i = 0; i < nlat_; ++i) {
    ring_theta_[i] = theta_[static_cast<std::size_t>(i) * nlon_];
    ring_gauss_w_[i] = gl.weights[nlat_ - 1 - i];
  }

  // Nearest neighbours on a product grid are among the adjacent grid cells,
  // plus the antipodal-longitude partner on the polar rings.
  auto at = [&](int ring, int col) { return ring * nlon_ + ((col % nlon_) + nlon_) % nlon_; };
  min_spacing_ = std::numeric_limits<double>::infinity();
  spacing_ = 0.0;
  for (int i = 0; i < nlat_; ++i) {
    for (int j = 0; j < nlon_; ++j) {
      const Vec3& p = nodes_[at(i, j)];
      double nearest = std::numeric_limits<double>::infinity();
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di;
          if (ii < 0 || ii >= nlat_) continue;
          nearest = std::min(nearest, (nodes_[at(ii, j + dj)] - p).norm());
        }
      }
      if (i == 0 || i == nlat_ - 1) {
        nearest = std::min(nearest, (nodes_[at(i, j + nlon_ / 2)] - p).norm());
      }
      min_spacing_ = std::min(min_spacing_, nearest);
      spacing_ = std::max(spacing_, nearest);
    }
  }

  const int res[2] = {nlat_, nlon_};
  hash_ = fnv1a_of(std::span<const int>(res));
  hash_ = fnv1a_of(std::span<const double>(nodes_.front().data(), 3 * nodes_.size()), hash_);
  hash_ = fnv1a_of(std::span<const double>(weights_), hash_);
}

double SurfaceMesh::area() const { return weight_vec_.sum(); }

Density::Density(MeshPtr m, Eigen::VectorXd v) : mesh(std::move(m)), values(std::move(v)) {
  if (!mesh) throw MismatchError("density needs a mesh");
  if (values.size() != mesh->size()) {
    throw MismatchError("density value count " + std::to_string(values.size()) +
                        " does not match node count " + std::to_string(mesh->size()));
  }
}

Density Density::constant(MeshPtr mesh, double value) {
  const int n = mesh->size();
  return {std::move(mesh), Eigen::VectorXd::Constant(n, value)};
}

MeshPtr make_mesh(const SurfaceDescriptor& d, int nlat, int nlon) {
  if (nlat < 4 || nlon < 8 || nlon % 2 != 0) {
    throw ResolutionError("mesh resolution must satisfy nlat >= 4, nlon >= 8, nlon even (got " +
                          std::to_string(nlat) + "x" + std::to_string(nlon) + ")");
  }
  const QuadratureRule gl = gauss_legendre(nlat);
  SurfaceMesh::Parts parts;
  parts.descriptor = d;
  parts.nlat = nlat;
  parts.nlon = nlon;
  const std::size_t n = static_cast<std::size_t>(nlat) * nlon;
  parts.nodes.reserve(n);
  parts.weights.reserve(n);
  parts.normals.reserve(n);
  parts.theta.reserve(n);
  parts.phi.reserve(n);
  const double dphi = 2.0 * pi / nlon;
  for (int i = 0; i < nlat; ++i) {
    // Rings ordered by increasing colatitude, i.e. decreasing cos(theta).
    const double t = gl.nodes[nlat - 1 - i];
    const double gw = gl.weights[nlat - 1 - i];
    const double theta = std::acos(t);
    for (int j = 0; j < nlon; ++j) {
      const double phi = j * dphi;
      const Vec3 u = unit_point(theta, phi);
      parts.nodes.push_back(d.map(u));
      parts.weights.push_back(gw * dphi * d.area_factor(u));
      parts.normals.push_back(d.normal(u));
      parts.theta.push_back(theta);
      parts.phi.push_back(phi);
    }
  }
  return std::make_shared<const SurfaceMesh>(std::move(parts));
}

MeshPtr make_sphere_mesh(double radius, const Vec3& center, int nlat, int nlon) {
  return make_mesh(SurfaceDescriptor::sphere(radius, center), nlat, nlon);
}

MeshPtr make_ellipsoid_mesh(double a, double b, double c, int nlat, int nlon) {
  return make_mesh(SurfaceDescriptor::ellipsoid(a, b, c), nlat, nlon);
}

MeshPtr refine(const SurfaceMesh& mesh, int factor) {
  if (factor < 2) throw DomainError("refine: factor must be >= 2");
  return make_mesh(mesh.descriptor(), mesh.nlat() * factor, mesh.nlon() * factor);
}

double surface_integral(const SurfaceMesh& mesh, std::span<const double> f) {
  if (static_cast<int>(f.size()) != mesh.size()) {
    throw MismatchError("surface_integral: sample count does not match node count");
  }
  double sum = 0.0;
  for (int j = 0; j < mesh.size(); ++j) sum += mesh.weights()[j] * f[j];
  return sum;
}

double surface_integral(const Density& f) {
  return surface_integral(*f.mesh, std::span<const double>(f.values.data(), f.values.size()));
}

bool same_mesh(const SurfaceMesh& a, const SurfaceMesh& b) {
  return &a == &b || (a.size() == b.size() && a.hash() == b.hash());
}

// ---------------------------------------------------------------------------

GridInterpolator::GridInterpolator(const SurfaceMesh& mesh, int order)
    : nlat_(mesh.nlat()), nlon_(mesh.nlon()), order_(order) {
  if (order < 2 || order > nlat_ || order > nlon_) {
    throw ResolutionError("interpolation order " + std::to_string(order) +
                          " incompatible with mesh resolution");
  }
  const auto& rings = mesh.ring_colatitudes();
  for (int e = -order_; e < nlat_ + order_; ++e) {
    if (e < 0) {
      ext_theta_.push_back(-rings[-e - 1]);
      ext_ring_.push_back(-e - 1);
      ext_shift_.push_back(nlon_ / 2);
    } else if (e >= nlat_) {
      const int ring = 2 * nlat_ - 1 - e;
      ext_theta_.push_back(2.0 * pi - rings[ring]);
      ext_ring_.push_back(ring);
      ext_shift_.push_back(nlon_ / 2);
    } else {
      ext_theta_.push_back(rings[e]);
      ext_ring_.push_back(e);
      ext_shift_.push_back(0);
    }
  }
}

void GridInterpolator::stencil(double theta, double phi, std::span<int> index,
                               std::span<double> weight) const {
  const int p = order_;
  const int lead = (p - 1) / 2;

  // Last extended ring with colatitude <= theta.
  const auto it = std::upper_bound(ext_theta_.begin(), ext_theta_.end(), theta);
  int e0 = static_cast<int>(it - ext_theta_.begin()) - 1;
  int e_start = std::clamp(e0 - lead, 0, static_cast<int>(ext_theta_.size()) - p);

  const double dphi = 2.0 * pi / nlon_;
  const int j0 = static_cast<int>(std::floor(phi / dphi));
  const int j_start = j0 - lead;

  double tnodes[32], pnodes[32], tw[32], pw[32];
  for (int a = 0; a < p; ++a) {
    tnodes[a] = ext_theta_[e_start + a];
    pnodes[a] = (j_start + a) * dphi;
  }
  lagrange_weights({tnodes, static_cast<std::size_t>(p)}, theta, {tw, static_cast<std::size_t>(p)});
  lagrange_weights({pnodes, static_cast<std::size_t>(p)}, phi, {pw, static_cast<std::size_t>(p)});

  int k = 0;
  for (int a = 0; a < p; ++a) {
    const int ring = ext_ring_[e_start + a];
    const int shift = ext_shift_[e_start + a];
    for (int b = 0; b < p; ++b, ++k) {
      const int col = (((j_start + b + shift) % nlon_) + nlon_) % nlon_;
      index[k] = ring * nlon_ + col;
      weight[k] = tw[a] * pw[b];
    }
  }
}

double GridInterpolator::evaluate(const Eigen::VectorXd& values, const Vec3& u) const {
  double theta = 0.0;
  double phi = 0.0;
  unit_params(u, theta, phi);
  int index[1024];
  double weight[1024];
  const std::size_t m = static_cast<std::size_t>(stencil_size());
  stencil(theta, phi, {index, m}, {weight, m});
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) sum += weight[k] * values(index[k]);
  return sum;
}

// ---------------------------------------------------------------------------

void write_mesh_csv(const std::filesystem::path& path, const SurfaceMesh& mesh,
                    const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& extra) {
  for (const auto& [name, column] : extra) {
    if (column == nullptr || column->size() != mesh.size()) {
      throw MismatchError("extra column '" + name + "' does not match node count");
    }
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "x,y,z,w,nx,ny,nz,theta,phi";
  for (const auto& [name, column] : extra) out << ',' << name;
  out << '\n';
  for (int j = 0; j < mesh.size(); ++j) {
    const Vec3& q = mesh.node(j);
    const Vec3& nrm = mesh.normals()[j];
    out << format_double(q.x()) << ',' << format_double(q.y()) << ',' << format_double(q.z())
        << ',' << format_double(mesh.weights()[j]) << ',' << format_double(nrm.x()) << ','
        << format_double(nrm.y()) << ',' << format_double(nrm.z()) << ','
        << format_double(mesh.theta()[j]) << ',' << format_double(mesh.phi()[j]);
    for (const auto& [name, column] : extra) out << ',' << format_double((*column)(j));
    out << '\n';
  }

  const SurfaceDescriptor& d = mesh.descriptor();
  nlohmann::json side;
  side["surface"] = to_string(d.kind);
  side["center"] = {d.center.x(), d.center.y(), d.center.z()};
  if (d.kind == SurfaceKind::Sphere) {
    side["radius"] = d.axes.x();
  } else {
    side["axes"] = {d.axes.x(), d.axes.y(), d.axes.z()};
  }
  side["nlat"] = mesh.nlat();
  side["nlon"] = mesh.nlon();
  side["nodes"] = mesh.size();
  side["hash"] = mesh.hash();
  std::filesystem::path sidecar = path;
  sidecar += ".json";
  std::ofstream js(sidecar);
  if (!js) throw Error("cannot write " + sidecar.string());
  js << side.dump(2) << '\n';
}

MeshFile read_mesh_csv(const std::filesystem::path& path) {
  std::filesystem::path sidecar = path;
  sidecar += ".json";
  std::ifstream js(sidecar);
  if (!js) throw Error("missing mesh sidecar " + sidecar.string());
  const nlohmann::json side = nlohmann::json::parse(js);

  SurfaceMesh::Parts parts;
  const auto center = side.at("center").get<std::vector<double>>();
  const Vec3 c(center.at(0), center.at(1), center.at(2));
  if (surface_kind_from_string(side.at("surface").get<std::string>()) == SurfaceKind::Sphere) {
    parts.descriptor = SurfaceDescriptor::sphere(side.at("radius").get<double>(), c);
  } else {
    const auto axes = side.at("axes").get<std::vector<double>>();
    parts.descriptor = SurfaceDescriptor::ellipsoid(axes.at(0), axes.at(1), axes.at(2), c);
  }
  parts.nlat = side.at("nlat").get<int>();
  parts.nlon = side.at("nlon").get<int>();

  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 9) throw Error("mesh CSV header has fewer than 9 columns");
  MeshFile file;
  file.extra_names.assign(header.begin() + 9, header.end());
  std::vector<std::vector<double>> extra(file.extra_names.size());

  std::vector<double> row;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    row.clear();
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t comma = std::min(line.find(',', start), line.size());
      row.push_back(parse_double(std::string_view(line).substr(start, comma - start)));
      start = comma + 1;
    }
    if (row.size() != header.size()) throw Error("mesh CSV row has wrong column count");
    parts.nodes.emplace_back(row[0], row[1], row[2]);
    parts.weights.push_back(row[3]);
    parts.normals.emplace_back(row[4], row[5], row[6]);
    parts.theta.push_back(row[7]);
    parts.phi.push_back(row[8]);
    for (std::size_t k = 0; k < extra.size(); ++k) extra[k].push_back(row[9 + k]);
  }
  file.mesh = std::make_shared<const SurfaceMesh>(std::move(parts));
  for (auto& column : extra) {
    file.extra_columns.emplace_back(Eigen::Map<Eigen::VectorXd>(column.data(), column.size()));
  }
  return file;
}

}  // namespace fraclap
