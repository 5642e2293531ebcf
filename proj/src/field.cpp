#include "fraclap/field.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include <fftw3.h>

#include "fraclap/errors.hpp"
#include "fraclap/io.hpp"
#include "fraclap/quadrature.hpp"
#include "potential_sum.hpp"

namespace fraclap {

using std::numbers::pi;

// ---------------------------------------------------------------------------
// Closest point

SurfaceProjection project_to_surface(const SurfaceDescriptor& surface, const Vec3& x) {
  const Vec3 y = x - surface.center;
  const Vec3& a = surface.axes;
  SurfaceProjection out;
  const double rho = y.cwiseQuotient(a).norm();
  out.inside = rho < 1.0;

  if (a.maxCoeff() - a.minCoeff() <= 1e-14 * a.maxCoeff()) {
    const double r = y.norm();
    const Vec3 dir = r > 0.0 ? Vec3(y / r) : Vec3::UnitZ();
    out.point = surface.center + a(0) * dir;
    out.dist = std::abs(r - a(0));
    return out;
  }
  if (rho == 1.0) {
    out.point = x;
    return out;
  }

  // Closest point p_i = a_i^2 y_i / (a_i^2 + lambda) where lambda is the
  // root of f(lambda) = sum (a_i y_i / (a_i^2 + lambda))^2 - 1, decreasing
  // on (-a_min^2, inf).
  const double amin2 = a.minCoeff() * a.minCoeff();
  auto f = [&](double lam) {
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double t = a(i) * y(i) / (a(i) * a(i) + lam);
      sum += t * t;
    }
    return sum - 1.0;
  };
  double lo = out.inside ? -amin2 : 0.0;
  double hi = out.inside ? 0.0 : a.maxCoeff() * y.norm();
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  const double lam = 0.5 * (lo + hi);
  Vec3 p;
  for (int i = 0; i < 3; ++i) p(i) = a(i) * a(i) * y(i) / (a(i) * a(i) + lam);

  if (!(std::abs(p.cwiseQuotient(a).norm() - 1.0) <= 1e-8)) {
    // No interior root: y has no component along the shortest axis and the
    // closest point lies on the focal ellipse with lambda = -a_min^2.
    double used = 0.0;
    int k = -1;
    for (int i = 0; i < 3; ++i) {
      if (a(i) * a(i) - amin2 <= 1e-14 * amin2) {
        if (k < 0) k = i;
        p(i) = 0.0;
      } else {
        p(i) = a(i) * a(i) * y(i) / (a(i) * a(i) - amin2);
        used += (p(i) / a(i)) * (p(i) / a(i));
      }
    }
    p(k) = a(k) * std::sqrt(std::max(0.0, 1.0 - used)) * (y(k) < 0.0 ? -1.0 : 1.0);
  }
  out.point = surface.center + p;
  out.dist = (y - p).norm();
  return out;
}

double surface_distance(const SurfaceDescriptor& surface, const Vec3& x) {
  return project_to_surface(surface, x).dist;
}

// ---------------------------------------------------------------------------
// Point evaluation

std::string to_string(QuadratureTag tag) {
  return tag == QuadratureTag::Base ? "base" : "upsampled";
}

struct FieldEvaluator::Charges {
  std::vector<double> x, y, z, q;
  double spacing = 0.0;

  Charges(const SurfaceMesh& mesh, const Eigen::VectorXd& phi, double c) : spacing(mesh.spacing()) {
    const int n = mesh.size();
    x.resize(n);
    y.resize(n);
    z.resize(n);
    q.resize(n);
    for (int j = 0; j < n; ++j) {
      x[j] = mesh.node(j).x();
      y[j] = mesh.node(j).y();
      z[j] = mesh.node(j).z();
      q[j] = c * phi(j) * mesh.weights()[j];
    }
  }

  detail::ChargeSet view() const { return {x.data(), y.data(), z.data(), q.data(), x.size()}; }
};

FieldEvaluator::FieldEvaluator(Density phi, double alpha, FieldOptions options)
    : phi_(std::move(phi)), alpha_(alpha), options_(options) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("field evaluation needs 0 < alpha <= 1");
  if (options_.upsample_factor < 2) throw DomainError("upsample factor must be >= 2");
  base_ = std::make_unique<Charges>(*phi_.mesh, phi_.values, riesz_constant(3, 2.0 * alpha));
}

FieldEvaluator::~FieldEvaluator() = default;
FieldEvaluator::FieldEvaluator(FieldEvaluator&&) noexcept = default;
FieldEvaluator& FieldEvaluator::operator=(FieldEvaluator&&) noexcept = default;

const FieldEvaluator::Charges& FieldEvaluator::upsampled() const {
  if (!fine_) {
    const MeshPtr fine = refine(*phi_.mesh, options_.upsample_factor);
    const GridInterpolator interp(*phi_.mesh, options_.interp_order);
    Eigen::VectorXd values(fine->size());
    for (int j = 0; j < fine->size(); ++j) values(j) = interp.evaluate(phi_.values, fine->unit_points()[j]);
    fine_ = std::make_unique<Charges>(*fine, values, riesz_constant(3, 2.0 * alpha_));
  }
  return *fine_;
}

double FieldEvaluator::base_spacing() const { return base_->spacing; }

double FieldEvaluator::upsampled_spacing() const { return upsampled().spacing; }

double FieldEvaluator::value(const Vec3& x, QuadratureTag quadrature) const {
  const Charges& c = quadrature == QuadratureTag::Base ? *base_ : upsampled();
  return detail::potential_sum(c.view(), x.x(), x.y(), x.z(), alpha_ - 1.5);
}

FieldSample FieldEvaluator::sample(const Vec3& x) const {
  FieldSample out;
  out.point = x;
  out.dist = surface_distance(phi_.mesh->descriptor(), x);
  if (out.dist >= options_.near_factor * base_spacing()) {
    out.quadrature = QuadratureTag::Base;
  } else {
    const double limit = options_.min_factor * upsampled_spacing();
    if (out.dist < limit) {
      throw SingularityError("point at distance " + format_double(out.dist) +
                             " from the surface is inside the excluded layer (" + format_double(limit) + ")");
    }
    out.quadrature = QuadratureTag::Upsampled;
  }
  out.value = value(x, out.quadrature);
  return out;
}

std::vector<FieldSample> FieldEvaluator::sample(const std::vector<Vec3>& points) const {
  std::vector<FieldSample> out;
  out.reserve(points.size());
  for (const Vec3& p : points) out.push_back(sample(p));
  return out;
}

std::vector<FieldSample> eval_potential(const Density& phi, double alpha, const std::vector<Vec3>& points,
                                        const FieldOptions& options) {
  return FieldEvaluator(phi, alpha, options).sample(points);
}

// ---------------------------------------------------------------------------
// Far field

DecayFit decay_fit(const Density& phi, double alpha, const std::vector<double>& radii, const Vec3& direction) {
  const SurfaceDescriptor& surface = phi.mesh->descriptor();
  if (radii.size() < 2) throw DomainError("decay_fit: need at least two radii");
  for (double r : radii) {
    if (!(r >= 5.0 * surface.diameter())) {
      throw DomainError("decay_fit: radius " + format_double(r) + " is below 5 surface diameters (" +
                        format_double(5.0 * surface.diameter()) + ")");
    }
  }
  const double mass = surface_integral(phi);
  const double scale = phi.values.cwiseAbs().dot(phi.mesh->weight_vector());
  if (!(std::abs(mass) > 1e-12 * scale)) {
    throw DomainError("decay_fit: the density has zero total mass, so the leading r^(2 alpha - 3) term vanishes");
  }

  DecayFit fit;
  fit.expected_exponent = 2.0 * alpha - 3.0;
  fit.expected_prefactor = riesz_constant(3, 2.0 * alpha) * mass;
  const FieldEvaluator eval(phi, alpha);
  const Vec3 dir = direction.normalized();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (double r : radii) {
    fit.samples.push_back(eval.sample(surface.center + r * dir));
    const double lx = std::log(r);
    const double ly = std::log(std::abs(fit.samples.back().value));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(radii.size());
  const double den = n * sxx - sx * sx;
  if (!(den > 0.0)) throw DomainError("decay_fit: radii must not all coincide");
  fit.exponent = (n * sxy - sx * sy) / den;
  fit.prefactor = std::exp((sy - fit.exponent * sx) / n);
  if (mass < 0.0) fit.prefactor = -fit.prefactor;
  return fit;
}

// ---------------------------------------------------------------------------
// Bump and its fractional Laplacian

double BumpSpec::operator()(const Vec3& x) const {
  const double t = (x - center).squaredNorm() / (radius * radius);
  return t < 1.0 ? std::exp(-1.0 / (1.0 - t)) : 0.0;
}

double BumpSpec::integral() const {
  const QuadratureRule rule = gauss_legendre(200, 0.0, 1.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double r = rule.nodes[k];
    sum += rule.weights[k] * r * r * std::exp(-1.0 / (1.0 - r * r));
  }
  return 4.0 * pi * sum * radius * radius * radius;
}

double frac_laplacian_constant(double alpha) {
  return std::pow(4.0, alpha) * std::tgamma(1.5 + alpha) / (std::pow(pi, 1.5) * std::abs(std::tgamma(-alpha)));
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("fractional Laplacian needs 0 < alpha < 1");
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : data(fftw_malloc(bytes)) {
    if (!data) throw Error("fftw_malloc failed");
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  void* data;
};

}  // namespace

GridFunction frac_laplacian_bump(const BumpSpec& bump, double alpha, const GridSpec& grid) {
  check_alpha(alpha);
  if (!(bump.radius > 0.0)) throw DomainError("bump radius must be positive");
  if (!(grid.box_factor >= 4.0)) {
    throw DomainError("grid box must span at least 4 bump radii (twice the support), got " +
                      format_double(grid.box_factor));
  }
  if (grid.n < 8 || grid.n % 2 != 0) throw DomainError("grid size must be even and >= 8");
  if (grid.oversample < 1) throw DomainError("oversampling factor must be >= 1");

  const int n = grid.n * grid.oversample;
  const double side = grid.box_factor * bump.radius;
  const double h = side / n;
  const Vec3 origin = bump.center - Vec3::Constant(0.5 * side);
  const std::size_t nr = static_cast<std::size_t>(n) * n * n;
  const int nh = n / 2 + 1;
  const std::size_t nc = static_cast<std::size_t>(n) * n * nh;

  FftwBuffer real(sizeof(double) * nr);
  FftwBuffer spec(sizeof(fftw_complex) * nc);
  auto* in = static_cast<double*>(real.data);
  auto* out = static_cast<fftw_complex*>(spec.data);
  fftw_plan forward = fftw_plan_dft_r2c_3d(n, n, n, in, out, FFTW_ESTIMATE);
  fftw_plan backward = fftw_plan_dft_c2r_3d(n, n, n, out, in, FFTW_ESTIMATE);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) in[(static_cast<std::size_t>(i) * n + j) * n + k] = bump(origin + h * Vec3(i, j, k));
  fftw_execute(forward);

  // Modes whose indices are all multiples of grid.n alias onto the mean of
  // the output grid; they are dropped with the mean itself so the returned
  // samples sum to zero.
  auto freq = [&](int k) { return (k <= n / 2 ? k : k - n) / side; };
  const double norm = 1.0 / static_cast<double>(nr);
  for (int i = 0; i < n; ++i) {
    const double fi = freq(i);
    for (int j = 0; j < n; ++j) {
      const double fj = freq(j);
      for (int k = 0; k < nh; ++k) {
        const double fk = k / side;
        const double xi[3] = {fi, fj, fk};
        const double m = (i % grid.n == 0 && j % grid.n == 0 && k % grid.n == 0) ? 0.0 : fractional_symbol(alpha, xi) * norm;
        fftw_complex& c = out[(static_cast<std::size_t>(i) * n + j) * nh + k];
        c[0] *= m;
        c[1] *= m;
      }
    }
  }
  fftw_execute(backward);
  fftw_destroy_plan(forward);
  fftw_destroy_plan(backward);

  GridFunction g;
  g.n = grid.n;
  g.spacing = h * grid.oversample;
  g.origin = origin;
  g.values.resize(static_cast<std::size_t>(g.n) * g.n * g.n);
  const int s = grid.oversample;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      for (int k = 0; k < g.n; ++k) {
        g.values[(static_cast<std::size_t>(i) * g.n + j) * g.n + k] =
            in[(static_cast<std::size_t>(i * s) * n + j * s) * n + k * s];
      }
  return g;
}

double frac_laplacian_bump_direct(const BumpSpec& bump, double alpha, const Vec3& x, int radial_order,
                                  int sphere_nlat) {
  check_alpha(alpha);
  if (radial_order < 1 || sphere_nlat < 2) throw DomainError("direct evaluation needs positive orders");
  const double f0 = bump(x);
  const double rho0 = (x - bump.center).norm() + bump.radius;
  const QuadratureRule radial = radial_power_rule(radial_order, 1.0 - 2.0 * alpha, rho0);

  // Sphere rule: Gauss-Legendre in cos(theta) times uniform longitude. The
  // rule is symmetric under w -> -w, so the two difference terms coincide.
  const QuadratureRule gl = gauss_legendre(sphere_nlat);
  const int nlon = 2 * sphere_nlat;
  std::vector<Vec3> dirs;
  std::vector<double> dw;
  for (int i = 0; i < sphere_nlat; ++i) {
    const double ct = gl.nodes[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int k = 0; k < nlon; ++k) {
      const double ph = 2.0 * pi * k / nlon;
      dirs.emplace_back(st * std::cos(ph), st * std::sin(ph), ct);
      dw.push_back(gl.weights[i] * 2.0 * pi / nlon);
    }
  }

  double sum = 0.0;
  for (std::size_t r = 0; r < radial.size(); ++r) {
    const double rho = radial.nodes[r];
    double g = 0.0;
    for (std::size_t d = 0; d < dirs.size(); ++d) g += dw[d] * (f0 - bump(x + rho * dirs[d]));
    sum += radial.weights[r] * 2.0 * g / (rho * rho);
  }
  const double tail = 4.0 * pi * 2.0 * f0 * std::pow(rho0, -2.0 * alpha) / (2.0 * alpha);
  return 0.5 * frac_laplacian_constant(alpha) * (sum + tail);
}

// ---------------------------------------------------------------------------
// Weak residual

namespace {

// int_{r0}^inf 4 pi r^2 U(r) D(r) dr for the tail outside the grid box.
template <class F>
double radial_tail(double r0, double split, F integrand) {
  double total = 0.0;
  const double m = std::max(r0, split);
  if (split > r0) {
    const QuadratureRule rule = gauss_legendre(64, r0, split);
    for (std::size_t k = 0; k < rule.size(); ++k) total += rule.weights[k] * integrand(rule.nodes[k]);
  }
  const QuadratureRule rule = gauss_legendre(128, 0.0, 1.0);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double t = rule.nodes[k];
    total += rule.weights[k] * integrand(m / t) * m / (t * t);
  }
  return total;
}

}  // namespace

WeakResidualReport weak_residual(const Density& phi, double alpha, const BumpSpec& bump, const GridSpec& grid,
                                 const FieldOptions& options) {
  check_alpha(alpha);
  const SurfaceDescriptor& surface = phi.mesh->descriptor();
  const double clearance = surface_distance(surface, bump.center);
  if (!(clearance > bump.radius)) {
    throw DomainError("weak_residual: bump support (radius " + format_double(bump.radius) +
                      ") meets the surface (centre at distance " + format_double(clearance) + ")");
  }

  const GridFunction lap = frac_laplacian_bump(bump, alpha, grid);
  const FieldEvaluator eval(phi, alpha, options);
  constexpr int tail_nlat = 24;
  constexpr int tail_radial = 32;
  const double near = options.near_factor * eval.base_spacing();
  const double floor_dist = options.min_factor * eval.upsampled_spacing() * (1.0 + 1e-9);
  const double amin = surface.axes.minCoeff();

  WeakResidualReport rep;
  rep.grid_n = grid.n;

  // u with the near-surface policy; points inside the excluded layer are
  // pushed out along the closest-point direction (u is continuous there).
  auto u_at = [&](const Vec3& x) {
    const double rho = (x - surface.center).cwiseQuotient(surface.axes).norm();
    if (amin * std::abs(rho - 1.0) >= near) return eval.value(x, QuadratureTag::Base);
    const SurfaceProjection p = project_to_surface(surface, x);
    if (p.dist >= near) return eval.value(x, QuadratureTag::Base);
    Vec3 y = x;
    if (p.dist < floor_dist) {
      Vec3 dir = x - p.point;
      if (p.dist > 0.0) {
        dir /= p.dist;
      } else {
        dir = surface.normal(surface.preimage(p.point)) * (p.inside ? -1.0 : 1.0);
      }
      y = p.point + floor_dist * dir;
      ++rep.shifted_points;
    }
    ++rep.upsampled_points;
    return eval.value(y, QuadratureTag::Upsampled);
  };

  const double cell = lap.spacing * lap.spacing * lap.spacing;
  for (int i = 0; i < lap.n; ++i)
    for (int j = 0; j < lap.n; ++j)
      for (int k = 0; k < lap.n; ++k) {
        const double f = lap.at(i, j, k);
        const double u = u_at(lap.point(i, j, k));
        rep.integral += u * f * cell;
        rep.max_u = std::max(rep.max_u, std::abs(u));
        rep.l1_norm += std::abs(f) * cell;
        rep.mean += f * cell;
      }

  // Outside the box (and so outside the support) the fractional Laplacian is
  // -C int psi(y) |x - y|^(-3 - 2 alpha) dy, a radial profile D(r) that we
  // tabulate exactly. The tail integral of u * (-D) is taken along rays from
  // the bump centre, each starting where it leaves the box.
  const double p = 3.0 + 2.0 * alpha;
  const double cfrac = frac_laplacian_constant(alpha);
  const QuadratureRule shell = gauss_legendre(200, 0.0, bump.radius);
  auto profile = [&](double r) {
    double sum = 0.0;
    for (std::size_t k = 0; k < shell.size(); ++k) {
      const double rho = shell.nodes[k];
      const double psi = bump(bump.center + Vec3(rho, 0.0, 0.0));
      const double sphere_mean =
          2.0 * pi * (std::pow(r - rho, 2.0 - p) - std::pow(r + rho, 2.0 - p)) / (r * rho * (p - 2.0));
      sum += shell.weights[k] * psi * rho * rho * sphere_mean;
    }
    return cfrac * sum;
  };

  const double half = 0.5 * grid.box_factor * bump.radius;
  const QuadratureRule gl_dir = gauss_legendre(tail_nlat);
  const QuadratureRule gl_t = gauss_legendre(tail_radial, 0.0, 1.0);
  const int nlon = 2 * tail_nlat;
  for (int a = 0; a < tail_nlat; ++a) {
    const double ct = gl_dir.nodes[a];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int b = 0; b < nlon; ++b) {
      const double ph = 2.0 * pi * (b + 0.5) / nlon;
      const Vec3 w(st * std::cos(ph), st * std::sin(ph), ct);
      const double r_exit = half / w.cwiseAbs().maxCoeff();
      const double dw = gl_dir.weights[a] * 2.0 * pi / nlon;
      for (std::size_t k = 0; k < gl_t.size(); ++k) {
        const double t = gl_t.nodes[k];
        const double r = r_exit / t;
        const double jac = r_exit / (t * t);
        rep.tail -= dw * gl_t.weights[k] * jac * r * r * profile(r) * u_at(bump.center + r * w);
      }
    }
  }

  // Cruder a-priori bound on the same tail: |u| <= C_u (r - d0)^(2 alpha - 3)
  // with d0 the farthest node from the bump centre, capped by the largest
  // |u| seen next to the surface, and |D(r)| <= C int psi (r - a)^(-3 - 2 alpha).
  const SurfaceMesh& mesh = *phi.mesh;
  double d0 = 0.0;
  double cu = 0.0;
  double u_cap = rep.max_u;
  const double c2a = riesz_constant(3, 2.0 * alpha);
  for (int j = 0; j < mesh.size(); ++j) {
    d0 = std::max(d0, (mesh.node(j) - bump.center).norm());
    cu += std::abs(phi.values(j)) * mesh.weights()[j] * c2a;
    const Vec3 out = mesh.node(j) + floor_dist * mesh.normals()[j];
    u_cap = std::max(u_cap, std::abs(eval.value(out, QuadratureTag::Upsampled)));
  }
  const double cprime = cfrac * bump.integral();
  rep.tail_bound = radial_tail(half, d0 + 1e-12, [&](double r) {
    const double u = r > d0 ? std::min(u_cap, cu * std::pow(r - d0, 2.0 * alpha - 3.0)) : u_cap;
    return 4.0 * pi * r * r * u * cprime * std::pow(r - bump.radius, -p);
  });

  const double denom = rep.max_u * rep.l1_norm;
  rep.residual = denom > 0.0 ? std::abs(rep.integral + rep.tail) / denom : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Output

nlohmann::json to_json(const DecayFit& fit) {
  nlohmann::json j;
  j["exponent"] = fit.exponent;
  j["prefactor"] = fit.prefactor;
  j["expected_exponent"] = fit.expected_exponent;
  j["expected_prefactor"] = fit.expected_prefactor;
  nlohmann::json samples = nlohmann::json::array();
  for (const FieldSample& s : fit.samples) samples.push_back({{"r", s.point.norm()}, {"u", s.value}});
  j["samples"] = samples;
  return j;
}

nlohmann::json to_json(const WeakResidualReport& report) {
  return {{"residual", report.residual},
          {"integral", report.integral},
          {"tail", report.tail},
          {"tail_bound", report.tail_bound},
          {"max_u", report.max_u},
          {"l1_norm", report.l1_norm},
          {"mean", report.mean},
          {"grid_n", report.grid_n},
          {"upsampled_points", report.upsampled_points},
          {"shifted_points", report.shifted_points}};
}

void write_field_csv(const std::filesystem::path& path, const std::vector<FieldSample>& samples) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "x,y,z,u,dist\n";
  for (const FieldSample& s : samples) {
    out << format_double(s.point.x()) << ',' << format_double(s.point.y()) << ',' << format_double(s.point.z())
        << ',' << format_double(s.value) << ',' << format_double(s.dist) << '\n';
  }
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace fraclap
