#include "fraclap/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <fftw3.h>

#include "fraclap/errors.hpp"
#include "fraclap/kernel.hpp"
#include "fraclap/quadrature.hpp"
#include "potential_sum.hpp"

namespace fraclap {

using std::numbers::pi;

namespace {

void check_composition_alpha(double alpha) {
  if (!(alpha > 0.5 && alpha < 1.0)) throw DomainError("composition diagnostics need 1/2 < alpha < 1");
}

// Riesz constant in the plane, c(2, s) = pi^(s-1) Gamma((2-s)/2) / Gamma(s/2).
double planar_constant(double s) {
  return std::pow(pi, s - 1.0) * std::tgamma(0.5 * (2.0 - s)) / std::tgamma(0.5 * s);
}

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]);
    const double ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

// ---------------------------------------------------------------------------
// Flat composition

double flat_composition_constant(double alpha) {
  check_composition_alpha(alpha);
  return riesz_constant(3, 2.0 * alpha) * riesz_constant(3, 3.0 - 2.0 * alpha) /
         (pi * planar_constant(2.0 * alpha - 1.0) * planar_constant(2.0 - 2.0 * alpha));
}

FlatSemigroupResult flat_semigroup_check(double alpha, const Vec2& xp, const Vec2& yp, const FlatQuadrature& q) {
  check_composition_alpha(alpha);
  const double d = (yp - xp).norm();
  if (!(d > 0.0)) throw DomainError("flat_semigroup_check: x' and y' coincide; the composition diverges there");

  const double c1 = riesz_constant(3, 2.0 * alpha);
  const double c2 = riesz_constant(3, 3.0 - 2.0 * alpha);
  auto k1 = [&](double r) { return c1 * std::pow(r, 2.0 * alpha - 3.0); };
  auto k2 = [&](double r) { return c2 * std::pow(r, -2.0 * alpha); };

  // Local frame along x' -> y'. Swapping x' and y' reflects every node set
  // through the midpoint, so the result is symmetric to rounding.
  const Vec2 e = (yp - xp) / d;
  const Vec2 ep(-e.y(), e.x());
  const Vec2 mid = 0.5 * (xp + yp);
  const double rs = q.cutoff_radius * d;
  auto chi = [&](const Vec2& z, const Vec2& c) { return cutoff((z - c).norm() / rs); };

  FlatSemigroupResult res;
  res.rhs = pi / d;
  res.normalization = flat_composition_constant(alpha);

  // Singular disks: polar coordinates with the power of r in the radial rule.
  auto disk = [&](const Vec2& centre, const Vec2& dir, double beta, auto&& smooth) {
    const QuadratureRule radial = radial_power_rule(q.radial_order, beta, rs);
    const Vec2 dir_p(-dir.y(), dir.x());
    double sum = 0.0;
    for (int a = 0; a < q.angular_order; ++a) {
      const double t = 2.0 * pi * (a + 0.5) / q.angular_order;
      const Vec2 w = std::cos(t) * dir + std::sin(t) * dir_p;
      for (std::size_t k = 0; k < radial.size(); ++k) {
        const Vec2 z = centre + radial.nodes[k] * w;
        sum += radial.weights[k] * smooth(z) * cutoff(radial.nodes[k] / rs);
      }
    }
    return sum * 2.0 * pi / q.angular_order;
  };
  const double part_x = disk(xp, e, 2.0 * alpha - 2.0, [&](const Vec2& z) { return c1 * k2((yp - z).norm()); });
  const double part_y = disk(yp, Vec2(-e), 1.0 - 2.0 * alpha, [&](const Vec2& z) { return c2 * k1((xp - z).norm()); });

  // Middle region: polar around the midpoint with the two disks blended out.
  const double panels[] = {0.0, 0.25, 0.4, 0.5, 0.6, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0};
  std::vector<double> edges(std::begin(panels), std::end(panels));
  edges.push_back(q.outer_radius);
  double middle = 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    if (edges[p + 1] > q.outer_radius) break;
    const QuadratureRule radial = gauss_legendre(q.middle_radial, edges[p] * d, edges[p + 1] * d);
    for (int a = 0; a < q.middle_angular; ++a) {
      const double t = 2.0 * pi * (a + 0.5) / q.middle_angular;
      const Vec2 w = std::cos(t) * e + std::sin(t) * ep;
      for (std::size_t k = 0; k < radial.size(); ++k) {
        const double r = radial.nodes[k];
        const Vec2 z = mid + r * w;
        const double blend = 1.0 - chi(z, xp) - chi(z, yp);
        if (blend <= 0.0) continue;
        middle += radial.weights[k] * r * blend * k1((z - xp).norm()) * k2((z - yp).norm());
      }
    }
  }
  middle *= 2.0 * pi / q.middle_angular;

  // Beyond R the angular mean of the integrand is
  //   c1 c2 r^-3 (1 + (a - b)^2 d^2 / (4 r^2) + O(r^-4)),  a - b = (4 alpha - 3) / 2.
  const double big_r = q.outer_radius * d;
  const double amb = 0.5 * (4.0 * alpha - 3.0);
  res.tail = 2.0 * pi * c1 * c2 * (1.0 / big_r + amb * amb * d * d / (12.0 * big_r * big_r * big_r));
  res.lhs = part_x + part_y + middle + res.tail;
  return res;
}

// ---------------------------------------------------------------------------
// Spectral diagnostics

CompositionReport composition_spectrum_report(double alpha, int lmax, int fit_from) {
  check_composition_alpha(alpha);
  if (lmax < 4) throw DomainError("composition report needs lmax >= 4");
  if (fit_from < 1 || fit_from >= lmax) throw DomainError("fit range must satisfy 1 <= fit_from < lmax");
  CompositionReport rep;
  rep.alpha = alpha;
  rep.fit_from = fit_from;
  rep.limit_ratio = flat_composition_constant(alpha);
  std::vector<double> ls, ref, diff, diff_norm;
  for (int l = 0; l <= lmax; ++l) {
    CompositionRow row;
    row.l = l;
    row.lambda_a = funk_hecke_eigenvalue(2.0 * alpha, l);
    row.lambda_b = funk_hecke_eigenvalue(3.0 - 2.0 * alpha, l);
    row.lambda_2 = funk_hecke_eigenvalue(2.0, l);
    row.ratio = row.lambda_a * row.lambda_b / row.lambda_2;
    rep.rows.push_back(row);
    if (l >= fit_from) {
      ls.push_back(l);
      ref.push_back(row.lambda_2);
      diff.push_back(std::abs(row.lambda_a * row.lambda_b - row.lambda_2));
      diff_norm.push_back(std::abs(row.lambda_a * row.lambda_b / rep.limit_ratio - row.lambda_2));
    }
  }
  rep.slope_reference = loglog_slope(ls, ref);
  rep.slope_difference = loglog_slope(ls, diff);
  rep.slope_gap = rep.slope_reference - rep.slope_difference;
  rep.slope_normalized = loglog_slope(ls, diff_norm);
  rep.normalized_gap = rep.slope_reference - rep.slope_normalized;
  return rep;
}

NormEquivalence norm_equivalence_profile(double alpha, int lmax) {
  check_composition_alpha(alpha);
  if (lmax < 0) throw DomainError("lmax must be non-negative");
  NormEquivalence out;
  out.alpha = alpha;
  for (int l = 0; l <= lmax; ++l) {
    out.values.push_back(funk_hecke_eigenvalue(2.0 * alpha, l) *
                         std::pow(1.0 + l * (l + 1.0), 0.5 * (2.0 * alpha - 1.0)));
  }
  out.lower = *std::min_element(out.values.begin(), out.values.end());
  out.upper = *std::max_element(out.values.begin(), out.values.end());
  return out;
}

// ---------------------------------------------------------------------------
// Besov seminorm

namespace {

// int over the square k + [-1/2, 1/2]^2 of |e_theta . w|^p |w|^(-2 - p s) dw,
// in polar coordinates about the origin; the radial part is exact.
double taylor_cell_integral(int k1, int k2, double theta, double p, double q) {
  const double lo[2] = {k1 - 0.5, k2 - 0.5};
  const double hi[2] = {k1 + 0.5, k2 + 0.5};
  std::vector<double> breaks = {0.0, 2.0 * pi};
  for (double bx : {lo[0], hi[0]})
    for (double by : {lo[1], hi[1]}) {
      double a = std::atan2(by, bx);
      if (a < 0.0) a += 2.0 * pi;
      breaks.push_back(a);
    }
  for (double off : {0.5 * pi, 1.5 * pi}) {
    double a = std::fmod(theta + off, 2.0 * pi);
    if (a < 0.0) a += 2.0 * pi;
    breaks.push_back(a);
  }
  std::sort(breaks.begin(), breaks.end());

  static const QuadratureRule gl = gauss_legendre(24);
  double total = 0.0;
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double a0 = breaks[b];
    const double a1 = breaks[b + 1];
    if (a1 - a0 < 1e-15) continue;
    for (std::size_t g = 0; g < gl.size(); ++g) {
      const double phi = 0.5 * (a0 + a1) + 0.5 * (a1 - a0) * gl.nodes[g];
      const double dir[2] = {std::cos(phi), std::sin(phi)};
      double t0 = 0.0;
      double t1 = INFINITY;
      for (int i = 0; i < 2; ++i) {
        if (std::abs(dir[i]) < 1e-300) {
          if (lo[i] > 0.0 || hi[i] < 0.0) t1 = -1.0;
          continue;
        }
        double ta = lo[i] / dir[i];
        double tb = hi[i] / dir[i];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
      }
      if (!(t1 > t0)) continue;
      const double radial = (std::pow(t1, q) - std::pow(t0, q)) / q;
      total += 0.5 * (a1 - a0) * gl.weights[g] * std::pow(std::abs(std::cos(phi - theta)), p) * radial;
    }
  }
  return total;
}

}  // namespace

double besov_seminorm_patch(const Eigen::MatrixXd& f, double side, double s, double p) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("Besov seminorm needs 0 < s < 1");
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("Besov seminorm needs 1 <= p < inf");
  if (f.rows() != f.cols() || f.rows() < 3) throw DomainError("Besov seminorm needs a square sample grid of size >= 3");
  if (!(side > 0.0)) throw DomainError("patch side must be positive");
  const int m = static_cast<int>(f.rows());
  const double h = side / m;
  const double q = p * (1.0 - s);
  const double decay = 2.0 + p * s;

  // Midpoint rule over all pairs of distinct cells, one offset at a time.
  double pairs = 0.0;
  for (int d1 = -(m - 1); d1 <= m - 1; ++d1)
    for (int d2 = 0; d2 <= m - 1; ++d2) {
      if (d2 == 0 && d1 <= 0) continue;  // each unordered pair once
      const double w = std::pow(h * std::hypot(d1, d2), -decay);
      double acc = 0.0;
      for (int i = std::max(0, -d1); i < std::min(m, m - d1); ++i)
        for (int j = 0; j < m - d2; ++j) acc += std::pow(std::abs(f(i, j) - f(i + d1, j + d2)), p);
      pairs += 2.0 * w * acc;
    }
  pairs *= h * h * h * h;

  // Near band: for offsets |k|_inf <= 1 the pair integral is replaced by the
  // exact integral of the local linear model f(x) - f(y) = grad f(x).(x - y).
  auto diff = [&](int i, int j, int axis) {
    const int di = axis == 0 ? 1 : 0;
    const int dj = axis == 1 ? 1 : 0;
    const int idx = axis == 0 ? i : j;
    // One-sided second order at the edges, written in differences so that
    // constant data gives exactly zero.
    if (idx == 0) return (4.0 * (f(i + di, j + dj) - f(i, j)) - (f(i + 2 * di, j + 2 * dj) - f(i, j))) / (2.0 * h);
    if (idx == m - 1) return (f(i - 2 * di, j - 2 * dj) - f(i, j) - 4.0 * (f(i - di, j - dj) - f(i, j))) / (2.0 * h);
    return (f(i + di, j + dj) - f(i - di, j - dj)) / (2.0 * h);
  };
  double band = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double g1 = diff(i, j, 0);
      const double g2 = diff(i, j, 1);
      const double gn = std::hypot(g1, g2);
      if (gn == 0.0) continue;
      const double theta = std::atan2(g2, g1);
      double corr = 0.0;
      for (int k1 = -1; k1 <= 1; ++k1)
        for (int k2 = -1; k2 <= 1; ++k2) {
          if (i + k1 < 0 || i + k1 >= m || j + k2 < 0 || j + k2 >= m) continue;
          corr += taylor_cell_integral(k1, k2, theta, p, q);
          if (k1 != 0 || k2 != 0) {
            const double kn = std::hypot(k1, k2);
            corr -= std::pow(std::abs(std::cos(theta) * k1 + std::sin(theta) * k2), p) * std::pow(kn, -decay);
          }
        }
      band += h * h * std::pow(h, q) * std::pow(gn, p) * corr;
    }
  return std::pow(std::max(0.0, pairs + band), 1.0 / p);
}

double besov_seminorm_reference(const std::function<double(const Vec2&)>& f, double side, double s, double p,
                                int panels, int order) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("Besov seminorm needs 0 < s < 1");
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("Besov seminorm needs 1 <= p < inf");
  if (!(side > 0.0)) throw DomainError("patch side must be positive");
  if (panels < 1 || order < 2) throw DomainError("reference quadrature needs panels >= 1 and order >= 2");
  const double q = p * (1.0 - s);

  std::vector<double> xs, xw;
  const double ph = side / panels;
  for (int k = 0; k < panels; ++k) {
    const QuadratureRule g = gauss_legendre(order, k * ph, (k + 1) * ph);
    xs.insert(xs.end(), g.nodes.begin(), g.nodes.end());
    xw.insert(xw.end(), g.weights.begin(), g.weights.end());
  }
  const QuadratureRule line = gauss_legendre(2 * order, 0.0, 1.0);
  const QuadratureRule radial = radial_power_rule(2 * order, q - 1.0, 1.0);

  // The inner integral over y splits into four triangles with apex x, one per
  // edge. With y = x + t (e - x), e on the edge at offset u from the foot of
  // the perpendicular, distance d to the edge and rho = |e - x|:
  //   dy / |x - y|^(2 + p s) |f(x) - f(y)|^p
  //     = (|f(x) - f(y)| / (t rho))^p t^(q-1) d rho^(q-2) dt du,
  // and u = d sinh(v) turns d rho^(q-2) du into d^q cosh(v)^(q-1) dv.
  double total = 0.0;
  for (std::size_t a = 0; a < xs.size(); ++a)
    for (std::size_t b = 0; b < xs.size(); ++b) {
      const Vec2 x(xs[a], xs[b]);
      const double fx = f(x);
      double inner = 0.0;
      for (int edge = 0; edge < 4; ++edge) {
        const int axis = edge / 2;  // coordinate fixed on the edge
        const double value = edge % 2 == 0 ? 0.0 : side;
        const int other = 1 - axis;
        const double d = std::abs(x(axis) - value);
        Vec2 foot = x;
        foot(axis) = value;
        Vec2 tangent = Vec2::Zero();
        tangent(other) = 1.0;
        const double dq = std::pow(d, q);
        const std::array<double, 3> cuts{std::asinh(-x(other) / d), 0.0, std::asinh((side - x(other)) / d)};
        for (int half = 0; half < 2; ++half) {
          const double v0 = cuts[half];
          const double dv = cuts[half + 1] - v0;
          for (std::size_t i = 0; i < line.size(); ++i) {
            const double v = v0 + dv * line.nodes[i];
            const Vec2 e = foot + d * std::sinh(v) * tangent;
            const double rho = d * std::cosh(v);
            double acc = 0.0;
            for (std::size_t k = 0; k < radial.size(); ++k) {
              const double t = radial.nodes[k];
              acc += radial.weights[k] * std::pow(std::abs(fx - f(x + t * (e - x))) / (t * rho), p);
            }
            inner += dv * line.weights[i] * dq * std::pow(std::cosh(v), q - 1.0) * acc;
          }
        }
      }
      total += xw[a] * xw[b] * inner;
    }
  return std::pow(total, 1.0 / p);
}

// ---------------------------------------------------------------------------
// Riesz potentials

GridFunction sample_grid(const std::function<double(const Vec3&)>& f, const Vec3& center, double side, int n) {
  if (n < 4) throw DomainError("grid needs at least 4 points per axis");
  if (!(side > 0.0)) throw DomainError("grid side must be positive");
  GridFunction g;
  g.n = n;
  g.spacing = side / (n - 1);
  g.origin = center - Vec3::Constant(0.5 * side);
  g.values.resize(static_cast<std::size_t>(n) * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) g.values[(static_cast<std::size_t>(i) * n + j) * n + k] = f(g.point(i, j, k));
  return g;
}

namespace {

void check_riesz_order(double s) {
  if (!(s > 0.0 && s < 3.0)) throw DomainError("Riesz potential needs 0 < s < 3");
}

// Polar rule for the ball |y - x| < rho: radial Gauss-Jacobi with the r^(s-1)
// weight times a Gauss-Legendre by uniform sphere rule. Each node carries
// c(3, s) chi(r / rho) and the quadrature weight.
struct PolarRule {
  std::vector<Vec3> offsets;
  std::vector<double> weights;
};

PolarRule polar_rule(double s, double rho, const RieszOptions& o) {
  const QuadratureRule radial = radial_power_rule(o.radial_order, s - 1.0, rho);
  const QuadratureRule gl = gauss_legendre(o.sphere_nlat);
  const int nlon = 2 * o.sphere_nlat;
  const double c = riesz_constant(3, s);
  PolarRule rule;
  for (int a = 0; a < o.sphere_nlat; ++a) {
    const double ct = gl.nodes[a];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int b = 0; b < nlon; ++b) {
      const double ph = 2.0 * pi * (b + 0.5) / nlon;
      const Vec3 w(st * std::cos(ph), st * std::sin(ph), ct);
      const double ww = gl.weights[a] * 2.0 * pi / nlon;
      for (std::size_t k = 0; k < radial.size(); ++k) {
        rule.offsets.push_back(radial.nodes[k] * w);
        rule.weights.push_back(c * ww * radial.weights[k] * cutoff(radial.nodes[k] / rho));
      }
    }
  }
  return rule;
}

// Tensor Lagrange stencil of the given order around grid coordinate t.
void axis_stencil(double t, int order, int& first, std::array<double, 16>& w) {
  first = static_cast<int>(std::floor(t)) - order / 2 + 1;
  std::array<double, 16> nodes{};
  for (int k = 0; k < order; ++k) nodes[k] = first + k;
  lagrange_weights({nodes.data(), static_cast<std::size_t>(order)}, t, {w.data(), static_cast<std::size_t>(order)});
}

double face_weight(int i, int n, bool trapezoid) {
  return trapezoid && (i == 0 || i == n - 1) ? 0.5 : 1.0;
}

}  // namespace

std::vector<double> riesz_potential_apply(const GridFunction& f, double s, const std::vector<Vec3>& points,
                                          const RieszOptions& o) {
  check_riesz_order(s);
  if (o.interp_order < 2 || o.interp_order > 16) throw DomainError("interpolation order must lie in [2, 16]");
  const int n = f.n;
  const double h = f.spacing;
  const double rho = o.near_cells * h;
  const double c = riesz_constant(3, s);
  const PolarRule polar = polar_rule(s, rho, o);

  // Charges of the nonzero cells.
  std::vector<double> cx, cy, cz, cq;
  const double cell = h * h * h;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double v = f.at(i, j, k);
        if (v == 0.0) continue;
        const Vec3 y = f.point(i, j, k);
        cx.push_back(y.x());
        cy.push_back(y.y());
        cz.push_back(y.z());
        cq.push_back(c * cell * v * face_weight(i, n, o.trapezoid_faces) * face_weight(j, n, o.trapezoid_faces) *
                     face_weight(k, n, o.trapezoid_faces));
      }
  const detail::ChargeSet charges{cx.data(), cy.data(), cz.data(), cq.data(), cx.size()};

  const Vec3 lo = f.origin;
  const Vec3 hi = f.origin + Vec3::Constant((n - 1) * h);
  auto interp = [&](const Vec3& y) {
    const Vec3 t = (y - f.origin) / h;
    int first[3];
    std::array<double, 16> w[3];
    for (int a = 0; a < 3; ++a) axis_stencil(t(a), o.interp_order, first[a], w[a]);
    double sum = 0.0;
    for (int a = 0; a < o.interp_order; ++a) {
      const int i = first[0] + a;
      if (i < 0 || i >= n) continue;
      for (int b = 0; b < o.interp_order; ++b) {
        const int j = first[1] + b;
        if (j < 0 || j >= n) continue;
        double row = 0.0;
        for (int e = 0; e < o.interp_order; ++e) {
          const int k = first[2] + e;
          if (k < 0 || k >= n) continue;
          row += w[2][e] * f.at(i, j, k);
        }
        sum += w[0][a] * w[1][b] * row;
      }
    }
    return sum;
  };

  std::vector<double> out;
  out.reserve(points.size());
  for (const Vec3& x : points) {
    const double gap = (lo - x).cwiseMax(x - hi).cwiseMax(0.0).norm();
    if (gap > rho + o.interp_order * h) {
      out.push_back(cx.empty() ? 0.0 : detail::potential_sum(charges, x.x(), x.y(), x.z(), 0.5 * (s - 3.0)));
      continue;
    }
    // Grid sum with the kernel damped by 1 - chi inside the polar ball, then
    // the chi part by polar quadrature on the interpolated data.
    double sum = 0.0;
    for (std::size_t m = 0; m < cx.size(); ++m) {
      const double r = std::sqrt((x.x() - cx[m]) * (x.x() - cx[m]) + (x.y() - cy[m]) * (x.y() - cy[m]) +
                                 (x.z() - cz[m]) * (x.z() - cz[m]));
      if (r == 0.0) continue;
      const double damp = r < rho ? 1.0 - cutoff(r / rho) : 1.0;
      sum += cq[m] * damp * std::pow(r, s - 3.0);
    }
    for (std::size_t m = 0; m < polar.offsets.size(); ++m) sum += polar.weights[m] * interp(x + polar.offsets[m]);
    out.push_back(sum);
  }
  return out;
}

GridFunction riesz_potential_grid(const GridFunction& f, double s, const RieszOptions& o) {
  check_riesz_order(s);
  const int n = f.n;
  const double h = f.spacing;
  const double rho = o.near_cells * h;
  const double c = riesz_constant(3, s);
  const int m = 2 * n;
  const int mh = m / 2 + 1;
  const std::size_t nr = static_cast<std::size_t>(m) * m * m;
  const std::size_t nc = static_cast<std::size_t>(m) * m * mh;

  // Convolution kernel on grid offsets: damped point kernel plus the polar
  // part distributed through the interpolation stencils.
  std::vector<double> kernel(nr, 0.0);
  auto wrap = [&](int d) { return d < 0 ? d + m : d; };
  auto kidx = [&](int a, int b, int e) {
    return (static_cast<std::size_t>(wrap(a)) * m + wrap(b)) * m + wrap(e);
  };
  const double cell = h * h * h;
  for (int a = -(n - 1); a <= n - 1; ++a)
    for (int b = -(n - 1); b <= n - 1; ++b)
      for (int e = -(n - 1); e <= n - 1; ++e) {
        if (a == 0 && b == 0 && e == 0) continue;
        const double r = h * std::sqrt(static_cast<double>(a * a + b * b + e * e));
        const double damp = r < rho ? 1.0 - cutoff(r / rho) : 1.0;
        kernel[kidx(a, b, e)] = c * cell * damp * std::pow(r, s - 3.0);
      }
  const PolarRule polar = polar_rule(s, rho, o);
  for (std::size_t p = 0; p < polar.offsets.size(); ++p) {
    // The polar node x + o reads f at x + j h with weight L_j(o / h); the
    // convolution sum_k K(k) f(x - k h) therefore receives it at k = -j.
    const Vec3 t = polar.offsets[p] / h;
    int first[3];
    std::array<double, 16> w[3];
    for (int a = 0; a < 3; ++a) axis_stencil(t(a), o.interp_order, first[a], w[a]);
    for (int a = 0; a < o.interp_order; ++a)
      for (int b = 0; b < o.interp_order; ++b)
        for (int e = 0; e < o.interp_order; ++e)
          kernel[kidx(-(first[0] + a), -(first[1] + b), -(first[2] + e))] += polar.weights[p] * w[0][a] * w[1][b] * w[2][e];
  }

  double* real = static_cast<double*>(fftw_malloc(sizeof(double) * nr));
  auto* fk = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nc));
  auto* kk = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nc));
  if (!real || !fk || !kk) {
    fftw_free(real);
    fftw_free(fk);
    fftw_free(kk);
    throw Error("fftw_malloc failed");
  }
  fftw_plan pk = fftw_plan_dft_r2c_3d(m, m, m, real, kk, FFTW_ESTIMATE);
  fftw_plan pf = fftw_plan_dft_r2c_3d(m, m, m, real, fk, FFTW_ESTIMATE);
  fftw_plan pb = fftw_plan_dft_c2r_3d(m, m, m, fk, real, FFTW_ESTIMATE);

  std::copy(kernel.begin(), kernel.end(), real);
  kernel.clear();
  kernel.shrink_to_fit();
  fftw_execute(pk);
  std::fill(real, real + nr, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) real[(static_cast<std::size_t>(i) * m + j) * m + k] = f.at(i, j, k);
  fftw_execute(pf);
  const double norm = 1.0 / static_cast<double>(nr);
  for (std::size_t t = 0; t < nc; ++t) {
    const double re = fk[t][0] * kk[t][0] - fk[t][1] * kk[t][1];
    const double im = fk[t][0] * kk[t][1] + fk[t][1] * kk[t][0];
    fk[t][0] = re * norm;
    fk[t][1] = im * norm;
  }
  fftw_execute(pb);

  GridFunction g;
  g.n = n;
  g.spacing = h;
  g.origin = f.origin;
  g.values.resize(static_cast<std::size_t>(n) * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        g.values[(static_cast<std::size_t>(i) * n + j) * n + k] = real[(static_cast<std::size_t>(i) * m + j) * m + k];

  fftw_destroy_plan(pk);
  fftw_destroy_plan(pf);
  fftw_destroy_plan(pb);
  fftw_free(real);
  fftw_free(fk);
  fftw_free(kk);
  return g;
}

RieszSemigroupReport riesz_semigroup_check(const BumpSpec& bump, double s1, double s2,
                                           const std::vector<Vec3>& points, int n, double box_factor,
                                           const RieszOptions& options) {
  check_riesz_order(s1);
  check_riesz_order(s2);
  check_riesz_order(s1 + s2);
  if (!(box_factor > 2.0)) throw DomainError("the grid box must contain the bump support");
  const double side = box_factor * bump.radius;
  const GridFunction f = sample_grid([&](const Vec3& x) { return bump(x); }, bump.center, side, n);
  const GridFunction g = riesz_potential_grid(f, s2, options);

  RieszOptions outer = options;
  outer.trapezoid_faces = true;
  const std::vector<double> inside = riesz_potential_apply(g, s1, points, outer);

  // Outside the box: rays from the bump centre, r = r_exit / t, with the
  // t^(2 - s1 - s2) behaviour of the integrand in the radial weight.
  constexpr int ray_nlat = 16;
  constexpr int ray_radial = 16;
  const double beta = 2.0 - s1 - s2;
  const QuadratureRule tr = radial_power_rule(ray_radial, beta, 1.0);
  const QuadratureRule gl = gauss_legendre(ray_nlat);
  const int nlon = 2 * ray_nlat;
  std::vector<Vec3> ray_points;
  std::vector<double> ray_weights;
  for (int a = 0; a < ray_nlat; ++a) {
    const double ct = gl.nodes[a];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int b = 0; b < nlon; ++b) {
      const double ph = 2.0 * pi * (b + 0.5) / nlon;
      const Vec3 w(st * std::cos(ph), st * std::sin(ph), ct);
      const double r_exit = 0.5 * side / w.cwiseAbs().maxCoeff();
      for (std::size_t k = 0; k < tr.size(); ++k) {
        const double t = tr.nodes[k];
        const double r = r_exit / t;
        ray_points.push_back(bump.center + r * w);
        ray_weights.push_back(gl.weights[a] * 2.0 * pi / nlon * tr.weights[k] * std::pow(t, -beta) * r * r *
                              r_exit / (t * t));
      }
    }
  }
  const std::vector<double> g_far = riesz_potential_apply(f, s2, ray_points, options);
  const double c1 = riesz_constant(3, s1);

  RieszSemigroupReport rep;
  rep.s1 = s1;
  rep.s2 = s2;
  rep.points = points;
  rep.direct = riesz_potential_apply(f, s1 + s2, points, options);
  for (std::size_t p = 0; p < points.size(); ++p) {
    double tail = 0.0;
    for (std::size_t k = 0; k < ray_points.size(); ++k) {
      tail += ray_weights[k] * g_far[k] * c1 * std::pow((points[p] - ray_points[k]).norm(), s1 - 3.0);
    }
    rep.composed.push_back(inside[p] + tail);
    rep.max_rel_error = std::max(rep.max_rel_error, std::abs(rep.composed[p] / rep.direct[p] - 1.0));
  }
  return rep;
}

double riesz_gaussian_reference(double s, double r) {
  check_riesz_order(s);
  if (r == 0.0) return 2.0 * std::pow(pi, 1.0 - 0.5 * (3.0 - s)) * std::tgamma(0.5 * (3.0 - s));
  // The Gaussian factor is below 1e-60 beyond rho = 7.
  const double rho_max = 7.0;
  const int panels = 14;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = rho_max * p / panels;
    const double b = rho_max * (p + 1) / panels;
    const QuadratureRule rule = p == 0 ? radial_power_rule(40, 2.0 - s, b) : gauss_legendre(40, a, b);
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const double rho = rule.nodes[k];
      const double arg = 2.0 * pi * rho * r;
      const double power = p == 0 ? 1.0 : std::pow(rho, 2.0 - s);
      sum += rule.weights[k] * power * std::exp(-pi * rho * rho) * std::sin(arg) / arg;
    }
  }
  return 4.0 * pi * sum;
}

// ---------------------------------------------------------------------------
// Output

nlohmann::json to_json(const FlatSemigroupResult& r) {
  return {{"lhs", r.lhs},
          {"rhs", r.rhs},
          {"ratio", r.lhs / r.rhs},
          {"normalization", r.normalization},
          {"normalized_ratio", r.lhs / (r.normalization * r.rhs)},
          {"tail", r.tail}};
}

nlohmann::json to_json(const CompositionReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const CompositionRow& r : rep.rows) {
    rows.push_back({{"l", r.l},
                    {"lambda_2a", r.lambda_a},
                    {"lambda_3m2a", r.lambda_b},
                    {"lambda_2", r.lambda_2},
                    {"ratio", r.ratio}});
  }
  return {{"alpha", rep.alpha},
          {"fit_from", rep.fit_from},
          {"slope_reference", rep.slope_reference},
          {"slope_difference", rep.slope_difference},
          {"slope_gap", rep.slope_gap},
          {"limit_ratio", rep.limit_ratio},
          {"slope_normalized", rep.slope_normalized},
          {"normalized_gap", rep.normalized_gap},
          {"rows", rows}};
}

nlohmann::json to_json(const NormEquivalence& p) {
  return {{"alpha", p.alpha}, {"lower", p.lower}, {"upper", p.upper}, {"values", p.values}};
}

nlohmann::json to_json(const RieszSemigroupReport& rep) {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t k = 0; k < rep.points.size(); ++k) {
    pts.push_back({{"x", {rep.points[k].x(), rep.points[k].y(), rep.points[k].z()}},
                   {"composed", rep.composed[k]},
                   {"direct", rep.direct[k]}});
  }
  return {{"s1", rep.s1}, {"s2", rep.s2}, {"max_rel_error", rep.max_rel_error}, {"points", pts}};
}

}  // namespace fraclap
