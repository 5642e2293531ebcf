#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "fraclap/analysis.hpp"
#include "fraclap/assembly.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/field.hpp"
#include "fraclap/io.hpp"
#include "fraclap/kernel.hpp"
#include "fraclap/linalg.hpp"
#include "fraclap/solve.hpp"
#include "fraclap/spectral.hpp"

namespace fraclap::cli {

using nlohmann::json;
using std::numbers::pi;

void Report::expect(bool ok, const std::string& what) {
  if (!ok) {
    pass = false;
    failures.push_back(what);
  }
}

json Report::to_json() const {
  json j;
  j["command"] = command;
  j["check"] = name;
  j["theorem"] = theorem;
  j["pass"] = pass;
  j["failures"] = failures;
  j["results"] = results;
  return j;
}

std::string theorem_tag(const std::string& name) {
  if (name == "closed-form" || name == "bvp" || name == "field" || name == "solve") return "1.3";
  if (name == "semigroup-flat" || name == "composition") return "4.1";
  if (name == "weak" || name == "riesz-semigroup" || name == "fourier-gaussian") return "6.1";
  return "1.1";
}

namespace {

Vec3 to_vec3(const json& v) { return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()}; }

std::vector<double> to_doubles(const json& v) { return v.get<std::vector<double>>(); }

double rel_err(double value, double reference) { return std::abs(value / reference - 1.0); }

// Uniform double in [0, 1) from the top 53 bits; portable across standard libraries.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

const SurfaceDescriptor& require_sphere(const ExperimentConfig& config, const std::string& what) {
  const SurfaceDescriptor& d = config.surface;
  if (d.kind != SurfaceKind::Sphere) throw ConfigError(what + " needs a spherical surface");
  return d;
}

Report start(const std::string& command, const std::string& name) {
  Report r;
  r.command = command;
  r.name = name;
  r.theorem = theorem_tag(name);
  return r;
}

MeshPtr mesh_at(const ExperimentConfig& config, int nlat) {
  return make_mesh(config.surface, nlat, 2 * nlat);
}

// Weighted Rayleigh quotient <y, M y>_W / <y, y>_W.
double rayleigh_quotient(const RowMatrix& m, const SurfaceMesh& mesh, const Eigen::VectorXd& y) {
  const Eigen::VectorXd& w = mesh.weight_vector();
  return y.dot(w.cwiseProduct(m * y)) / y.dot(w.cwiseProduct(y));
}

// Largest relative Rayleigh-quotient error over |m| <= l, per degree l.
template <class Eigenvalue>
std::vector<double> harmonic_errors(const RowMatrix& m, const SurfaceMesh& mesh, int lmax, Eigenvalue&& eig) {
  std::vector<double> out;
  for (int l = 0; l <= lmax; ++l) {
    double worst = 0.0;
    for (int k = -l; k <= l; ++k) {
      const double rq = rayleigh_quotient(m, mesh, sample_harmonic(mesh, l, k));
      worst = std::max(worst, rel_err(rq, eig(l)));
    }
    out.push_back(worst);
  }
  return out;
}

std::vector<double> rayleigh_errors(const ExperimentConfig& config, double alpha, int nlat, int lmax) {
  const double radius = require_sphere(config, "rayleigh").axes.x();
  const MeshPtr mesh = mesh_at(config, nlat);
  const double s = 2.0 * alpha;
  const BoundaryOperator op = assemble_single_layer(mesh, s, config.correction);
  const double scale = std::pow(radius, s - 1.0);
  return harmonic_errors(op.matrix, *mesh, lmax, [&](int l) { return scale * funk_hecke_eigenvalue(s, l); });
}

std::vector<double> composition_errors(const ExperimentConfig& config, double alpha, int nlat, int lmax) {
  const double radius = require_sphere(config, "composition").axes.x();
  const MeshPtr mesh = mesh_at(config, nlat);
  const double sa = 2.0 * alpha;
  const double sb = 3.0 - 2.0 * alpha;
  const BoundaryOperator a = assemble_single_layer(mesh, sa, config.correction);
  const BoundaryOperator b = assemble_single_layer(mesh, sb, config.correction);
  const RowMatrix c = compose(a, b);
  return harmonic_errors(c, *mesh, lmax, [&](int l) {
    return radius * funk_hecke_eigenvalue(sa, l) * funk_hecke_eigenvalue(sb, l);
  });
}

struct ClosedForm {
  std::vector<double> radii;
  std::vector<double> values;
  std::vector<double> reference;
  std::vector<double> errors;
  double trace_error = 0.0;  // max over nodes
  double trace_reference = 0.0;
  double spacing = 0.0;
};

ClosedForm closed_form(const ExperimentConfig& config, int nlat) {
  const SurfaceDescriptor& d = require_sphere(config, "closed-form");
  const json& sec = section(config, "closed-form");
  const double radius = d.axes.x();
  const double s = 2.0 * config.alpha;
  const MeshPtr mesh = mesh_at(config, nlat);
  const Density one = Density::constant(mesh, 1.0);

  ClosedForm out;
  out.spacing = mesh->spacing();
  const Vec3 dir = to_vec3(sec["direction"]).normalized();
  FieldEvaluator field(one, config.alpha);
  for (double r : to_doubles(sec["radii"])) {
    const FieldSample sample = field.sample(d.center + r * dir);
    const double ref = sphere_layer_potential(s, radius, r);
    out.radii.push_back(r);
    out.values.push_back(sample.value);
    out.reference.push_back(ref);
    out.errors.push_back(rel_err(sample.value, ref));
  }
  const BoundaryOperator op = assemble_single_layer(mesh, s, config.correction);
  const Eigen::VectorXd trace = op.matrix * one.values;
  out.trace_reference = sphere_layer_potential(s, radius, radius);
  for (Eigen::Index i = 0; i < trace.size(); ++i)
    out.trace_error = std::max(out.trace_error, rel_err(trace(i), out.trace_reference));
  return out;
}

// ---------------------------------------------------------------------------
// Checks

Report check_funk_hecke(const ExperimentConfig& config) {
  Report rep = start("check", "funk-hecke");
  const json& sec = section(config, "funk-hecke");
  const double s = sec["s"].get<double>();
  const int lmax = sec["lmax"].get<int>();
  const double tol = sec["tol"].get<double>();
  // At s = 2 the kernel is 1/|x - y| and lambda_l = 4 pi^2 / (2l + 1).
  const bool closed = s == 2.0;
  Table t{"funk-hecke", {"l", "lambda", "reference", "rel_error"}, {}};
  double worst = 0.0;
  for (int l = 0; l <= lmax; ++l) {
    const double lam = funk_hecke_eigenvalue(s, l);
    const double ref = closed ? 4.0 * pi * pi / (2.0 * l + 1.0) : lam;
    const double err = rel_err(lam, ref);
    worst = std::max(worst, err);
    t.rows.push_back({double(l), lam, ref, err});
  }
  rep.results = {{"s", s}, {"lmax", lmax}, {"max_rel_error", worst}, {"tol", tol}, {"closed_form", closed}};
  if (closed) rep.expect(worst < tol, "funk-hecke.tol");
  rep.tables.push_back(std::move(t));
  return rep;
}

Report check_rayleigh(const ExperimentConfig& config) {
  Report rep = start("check", "rayleigh");
  const json& sec = section(config, "rayleigh");
  const auto nlats = sec["nlats"].get<std::vector<int>>();
  const int lmax = sec["lmax"].get<int>();
  const double tol = sec["tol"].get<double>();
  const double min_ratio = sec["min_ratio"].get<double>();
  Table t{"rayleigh", {"alpha", "nlat", "l", "rel_error"}, {}};
  json per_alpha = json::array();
  for (double alpha : to_doubles(sec["alphas"])) {
    std::vector<double> worst;
    for (int nlat : nlats) {
      const std::vector<double> e = rayleigh_errors(config, alpha, nlat, lmax);
      for (int l = 0; l <= lmax; ++l) t.rows.push_back({alpha, double(nlat), double(l), e[l]});
      worst.push_back(*std::max_element(e.begin(), e.end()));
    }
    json a = {{"alpha", alpha}, {"nlats", nlats}, {"max_rel_error", worst}};
    rep.expect(worst.back() < tol, "rayleigh.tol (alpha " + format_double(alpha) + ")");
    if (worst.size() > 1) {
      const double ratio = worst.front() / worst.back();
      a["error_ratio"] = ratio;
      rep.expect(ratio >= min_ratio, "rayleigh.min_ratio (alpha " + format_double(alpha) + ")");
    }
    per_alpha.push_back(a);
  }
  rep.results = {{"lmax", lmax}, {"tol", tol}, {"min_ratio", min_ratio}, {"alphas", per_alpha}};
  rep.tables.push_back(std::move(t));
  return rep;
}

Report check_closed_form(const ExperimentConfig& config) {
  Report rep = start("check", "closed-form");
  const json& sec = section(config, "closed-form");
  const double tol = sec["tol"].get<double>();
  const double trace_tol = sec["trace_tol"].get<double>();
  const ClosedForm cf = closed_form(config, config.nlat);
  Table t{"closed-form", {"r", "u", "reference", "rel_error"}, {}};
  for (std::size_t i = 0; i < cf.radii.size(); ++i) {
    t.rows.push_back({cf.radii[i], cf.values[i], cf.reference[i], cf.errors[i]});
    rep.expect(cf.errors[i] < tol, "closed-form.tol (r " + format_double(cf.radii[i]) + ")");
  }
  rep.expect(cf.trace_error < trace_tol, "closed-form.trace_tol");
  rep.results = {{"alpha", config.alpha},        {"nlat", config.nlat},
                 {"field_errors", cf.errors},     {"trace_reference", cf.trace_reference},
                 {"trace_rel_error", cf.trace_error}, {"tol", tol},
                 {"trace_tol", trace_tol}};
  rep.tables.push_back(std::move(t));
  return rep;
}

Report check_conditioning(const ExperimentConfig& config) {
  Report rep = start("check", "conditioning");
  const json& sec = section(config, "conditioning");
  const auto nlats = sec["nlats"].get<std::vector<int>>();
  const double min_ratio = sec["min_sigma_ratio"].get<double>();
  const double factor = sec["growth_factor"].get<double>();
  const std::vector<double> growth_alphas = to_doubles(sec["growth_alphas"]);
  Table t{"conditioning", {"alpha", "nlat", "min_spacing", "sigma_min", "sigma_max", "cond", "min_eigenvalue"}, {}};
  json per_alpha = json::array();
  for (double alpha : to_doubles(sec["alphas"])) {
    std::vector<double> conds, spacing;
    for (int nlat : nlats) {
      const MeshPtr mesh = mesh_at(config, nlat);
      const BoundaryOperator op = assemble_single_layer(mesh, 2.0 * alpha, config.correction);
      const ConditionReport c = condition_report(op);
      const double min_eig = symmetric_eigenvalues(weighted_symmetrize(op))(0);
      t.rows.push_back({alpha, double(nlat), mesh->min_spacing(), c.sigma_min, c.sigma_max, c.cond, min_eig});
      const std::string tag = " (alpha " + format_double(alpha) + ", nlat " + std::to_string(nlat) + ")";
      rep.expect(c.sigma_min > min_ratio * c.sigma_max, "conditioning.min_sigma_ratio" + tag);
      rep.expect(min_eig > 0.0, "conditioning.positive_definite" + tag);
      conds.push_back(c.cond);
      spacing.push_back(mesh->min_spacing());
    }
    json a = {{"alpha", alpha}, {"nlats", nlats}, {"cond", conds}};
    if (nlats.size() > 1) {
      const double growth = conds.back() / conds.front();
      // Order 1 - 2 alpha: cond ~ h^(1 - 2 alpha) with h the resolved length
      // scale. Nominally h ~ 1/nlat; the finest scale of the product grid is
      // the polar spacing, which shrinks like 1/nlat^2.
      const double expected = std::pow(double(nlats.back()) / nlats.front(), 2.0 * alpha - 1.0);
      const double polar = std::pow(spacing.front() / spacing.back(), 2.0 * alpha - 1.0);
      a["growth"] = growth;
      a["expected_growth"] = expected;
      a["min_spacing_growth"] = polar;
      const bool asserted = std::find(growth_alphas.begin(), growth_alphas.end(), alpha) != growth_alphas.end();
      a["growth_asserted"] = asserted;
      if (asserted)
        rep.expect(growth <= factor * expected && growth >= expected / factor,
                   "conditioning.growth_factor (alpha " + format_double(alpha) + ")");
    }
    per_alpha.push_back(a);
  }
  rep.results = {{"min_sigma_ratio", min_ratio}, {"growth_factor", factor}, {"growth_alphas", growth_alphas},
                 {"alphas", per_alpha}};
  rep.tables.push_back(std::move(t));
  return rep;
}

json symmetry_json(const SymmetryReport& s) {
  return {{"far_asymmetry", s.far_asymmetry}, {"far_relative", s.far_relative}, {"near_asymmetry", s.near_asymmetry},
          {"far_pairs", s.far_pairs},         {"near_pairs", s.near_pairs}};
}

Report check_symmetry(const ExperimentConfig& config) {
  Report rep = start("check", "symmetry");
  const json& sec = section(config, "symmetry");
  const double far_tol = sec["far_tol"].get<double>();
  const double near_tol = sec["near_tol"].get<double>();
  const MeshPtr mesh = make_mesh(config.surface, config.nlat, config.nlon);
  const BoundaryOperator op = assemble_single_layer(mesh, 2.0 * config.alpha, config.correction);
  const SymmetryReport s = symmetry_report(op);
  rep.expect(s.far_asymmetry < far_tol, "symmetry.far_tol");
  rep.expect(s.near_asymmetry < near_tol, "symmetry.near_tol");
  rep.results = symmetry_json(s);
  rep.results["alpha"] = config.alpha;
  rep.results["nlat"] = config.nlat;
  rep.results["far_tol"] = far_tol;
  rep.results["near_tol"] = near_tol;
  return rep;
}

Report check_semigroup_flat(const ExperimentConfig& config) {
  Report rep = start("check", "semigroup-flat");
  const json& sec = section(config, "semigroup-flat");
  const double tol = sec["tol"].get<double>();
  const double rhs_tol = sec["rhs_tol"].get<double>();
  const bool literal = sec["normalization"].get<std::string>() == "literal";
  Table t{"semigroup-flat", {"alpha", "separation", "lhs", "rhs", "ratio", "normalized_ratio"}, {}};
  const Vec2 dir(0.6, 0.8);
  double worst = 0.0, worst_normalized = 0.0;
  for (double alpha : to_doubles(sec["alphas"]))
    for (double d : to_doubles(sec["separations"])) {
      const FlatSemigroupResult r = flat_semigroup_check(alpha, Vec2(0.25, -0.5), Vec2(0.25, -0.5) + d * dir);
      const double ratio = r.lhs / r.rhs;
      const double normalized = ratio / r.normalization;
      t.rows.push_back({alpha, d, r.lhs, r.rhs, ratio, normalized});
      worst = std::max(worst, std::abs(ratio - 1.0));
      worst_normalized = std::max(worst_normalized, std::abs(normalized - 1.0));
      if (d == 1.0) rep.expect(std::abs(r.rhs - pi) <= rhs_tol * pi, "semigroup-flat.rhs_tol");
    }
  rep.expect((literal ? worst : worst_normalized) < tol, "semigroup-flat.tol");
  json constants = json::object();
  for (double alpha : to_doubles(sec["alphas"])) constants[format_double(alpha)] = flat_composition_constant(alpha);
  rep.results = {{"normalization", sec["normalization"]},
                 {"max_abs_ratio_minus_one", worst},
                 {"max_abs_normalized_ratio_minus_one", worst_normalized},
                 {"composition_constants", constants},
                 {"tol", tol}};
  rep.tables.push_back(std::move(t));
  return rep;
}

Report check_composition(const ExperimentConfig& config) {
  Report rep = start("check", "composition");
  const json& sec = section(config, "composition");
  const int lmax = sec["lmax"].get<int>();
  const int fit_from = sec["fit_from"].get<int>();
  const double min_gap = sec["min_gap"].get<double>();
  const bool literal = sec["normalization"].get<std::string>() == "literal";
  const int matrix_lmax = sec["matrix_lmax"].get<int>();
  const int matrix_nlat = sec["matrix_nlat"].get<int>();
  const double matrix_tol = sec["matrix_tol"].get<double>();
  Table spectrum{"composition-spectrum", {"alpha", "l", "lambda_a", "lambda_b", "lambda_2", "ratio"}, {}};
  Table matrix{"composition-matrix", {"alpha", "l", "rel_error"}, {}};
  json per_alpha = json::array();
  for (double alpha : to_doubles(sec["alphas"])) {
    const CompositionReport c = composition_spectrum_report(alpha, lmax, fit_from);
    for (const CompositionRow& row : c.rows)
      spectrum.rows.push_back({alpha, double(row.l), row.lambda_a, row.lambda_b, row.lambda_2, row.ratio});
    const double gap = literal ? c.slope_gap : c.normalized_gap;
    rep.expect(gap >= min_gap, "composition.min_gap (alpha " + format_double(alpha) + ")");
    const std::vector<double> e = composition_errors(config, alpha, matrix_nlat, matrix_lmax);
    for (int l = 0; l <= matrix_lmax; ++l) matrix.rows.push_back({alpha, double(l), e[l]});
    const double worst = *std::max_element(e.begin(), e.end());
    rep.expect(worst < matrix_tol, "composition.matrix_tol (alpha " + format_double(alpha) + ")");
    json a = to_json(c);
    a.erase("rows");
    a["matrix_max_rel_error"] = worst;
    per_alpha.push_back(a);
  }
  rep.results = {{"normalization", sec["normalization"]}, {"min_gap", min_gap}, {"matrix_nlat", matrix_nlat},
                 {"matrix_tol", matrix_tol},              {"alphas", per_alpha}};
  rep.tables.push_back(std::move(spectrum));
  rep.tables.push_back(std::move(matrix));
  return rep;
}

Report check_weak(const ExperimentConfig& config) {
  Report rep = start("check", "weak");
  const json& sec = section(config, "weak");
  const double tol = sec["tol"].get<double>();
  const GridSpec grid{sec["grid_n"].get<int>(), sec["box_factor"].get<double>(), sec["oversample"].get<int>()};
  const Problem problem = make_problem(config);
  json bumps = json::array();
  Table t{"weak", {"center_x", "center_y", "center_z", "radius", "residual", "integral", "tail"}, {}};
  for (const json& b : sec["bumps"]) {
    BumpSpec bump;
    bump.center = to_vec3(b.value("center", json::array({0.0, 0.0, 0.0})));
    bump.radius = b.value("radius", 1.0);
    const WeakResidualReport w = weak_residual(problem.datum, config.alpha, bump, grid);
    t.rows.push_back({bump.center.x(), bump.center.y(), bump.center.z(), bump.radius, w.residual, w.integral, w.tail});
    json j = to_json(w);
    j["center"] = {bump.center.x(), bump.center.y(), bump.center.z()};
    j["radius"] = bump.radius;
    bumps.push_back(j);
    rep.expect(w.residual < tol, "weak.tol (bump " + std::to_string(bumps.size()) + ")");
  }
  rep.results = {{"alpha", config.alpha}, {"nlat", problem.mesh->nlat()}, {"tol", tol}, {"bumps", bumps}};
  rep.tables.push_back(std::move(t));
  return rep;
}

Report check_riesz_semigroup(const ExperimentConfig& config) {
  Report rep = start("check", "riesz-semigroup");
  const json& sec = section(config, "riesz-semigroup");
  const double tol = sec["tol"].get<double>();
  BumpSpec bump;
  bump.center = to_vec3(sec["bump_center"]);
  bump.radius = sec["bump_radius"].get<double>();
  std::mt19937_64 rng(config.seed);
  std::vector<Vec3> points;
  const double reach = sec["point_radius"].get<double>() * bump.radius;
  while (static_cast<int>(points.size()) < sec["points"].get<int>()) {
    const Vec3 u(2.0 * uniform01(rng) - 1.0, 2.0 * uniform01(rng) - 1.0, 2.0 * uniform01(rng) - 1.0);
    if (u.squaredNorm() <= 1.0) points.push_back(bump.center + reach * u);
  }
  const RieszSemigroupReport r = riesz_semigroup_check(bump, sec["s1"].get<double>(), sec["s2"].get<double>(), points,
                                                       sec["grid_n"].get<int>(), sec["box_factor"].get<double>());
  rep.expect(r.max_rel_error < tol, "riesz-semigroup.tol");
  rep.results = to_json(r);
  rep.results["tol"] = tol;
  rep.results["seed"] = config.seed;
  Table t{"riesz-semigroup", {"x", "y", "z", "composed", "direct"}, {}};
  for (std::size_t i = 0; i < points.size(); ++i)
    t.rows.push_back({points[i].x(), points[i].y(), points[i].z(), r.composed[i], r.direct[i]});
  rep.tables.push_back(std::move(t));
  return rep;
}

Report check_fourier_gaussian(const ExperimentConfig& config) {
  Report rep = start("check", "fourier-gaussian");
  const json& sec = section(config, "fourier-gaussian");
  const double tol = sec["tol"].get<double>();
  const Vec3 dir = to_vec3(sec["direction"]).normalized();
  const GridFunction g = sample_grid([](const Vec3& x) { return std::exp(-pi * x.squaredNorm()); }, Vec3::Zero(),
                                     sec["side"].get<double>(), sec["grid_n"].get<int>());
  std::vector<Vec3> points;
  const std::vector<double> radii = to_doubles(sec["radii"]);
  for (double r : radii) points.push_back(r * dir);
  Table t{"fourier-gaussian", {"s", "r", "grid", "reference", "rel_error"}, {}};
  double worst = 0.0;
  for (double s : to_doubles(sec["orders"])) {
    const std::vector<double> v = riesz_potential_apply(g, s, points);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double ref = riesz_gaussian_reference(s, radii[i]);
      const double err = rel_err(v[i], ref);
      worst = std::max(worst, err);
      t.rows.push_back({s, radii[i], v[i], ref, err});
    }
  }
  rep.expect(worst < tol, "fourier-gaussian.tol");
  rep.results = {{"max_rel_error", worst}, {"tol", tol}, {"grid_n", sec["grid_n"]}, {"side", sec["side"]}};
  rep.tables.push_back(std::move(t));
  return rep;
}

Report check_norm_equivalence(const ExperimentConfig& config) {
  Report rep = start("check", "norm-equivalence");
  const json& sec = section(config, "norm-equivalence");
  const int lmax = sec["lmax"].get<int>();
  const double tol = sec["tol"].get<double>();
  const std::vector<double> alphas = to_doubles(sec["alphas"]);
  Table t{"norm-equivalence", {"alpha", "l", "value"}, {}};
  json per_alpha = json::array();
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    const NormEquivalence n = norm_equivalence_profile(alphas[a], lmax);
    const double lo = sec["envelopes"][a][0].get<double>();
    const double hi = sec["envelopes"][a][1].get<double>();
    for (int l = 0; l <= lmax; ++l) t.rows.push_back({alphas[a], double(l), n.values[l]});
    rep.expect(n.lower >= lo * (1.0 - tol) && n.upper <= hi * (1.0 + tol),
               "norm-equivalence.envelope (alpha " + format_double(alphas[a]) + ")");
    per_alpha.push_back({{"alpha", alphas[a]}, {"lower", n.lower}, {"upper", n.upper}, {"envelope", {lo, hi}}});
  }
  rep.results = {{"lmax", lmax}, {"tol", tol}, {"alphas", per_alpha}};
  rep.tables.push_back(std::move(t));
  return rep;
}

Report check_besov(const ExperimentConfig& config) {
  Report rep = start("check", "besov");
  const json& sec = section(config, "besov");
  const double s = sec["s"].get<double>();
  const double p = sec["p"].get<double>();
  const int m = sec["m"].get<int>();
  const double side = sec["side"].get<double>();
  const double tol = sec["tol"].get<double>();
  const double htol = sec["homogeneity_tol"].get<double>();
  const int panels = sec["panels"].get<int>();
  const int order = sec["order"].get<int>();
  const bool product = sec["function"].get<std::string>() == "x1x2";
  auto f = [product](const Vec2& x) { return product ? x.x() * x.y() : x.x(); };

  const double h = side / m;
  Eigen::MatrixXd samples(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) samples(i, j) = f(Vec2((i + 0.5) * h, (j + 0.5) * h));
  const double value = besov_seminorm_patch(samples, side, s, p);
  const double doubled = besov_seminorm_patch(2.0 * samples, side, s, p);
  const double constant = besov_seminorm_patch(Eigen::MatrixXd::Constant(m, m, 1.7), side, s, p);
  const double coarse = besov_seminorm_reference(f, side, s, p, panels, order);
  const double refined = besov_seminorm_reference(f, side, s, p, 2 * panels, order);
  const double err = rel_err(value, refined);
  const double homogeneity = std::abs(doubled - 2.0 * value) / (2.0 * value);

  rep.expect(constant == 0.0, "besov.constant");
  rep.expect(err < tol, "besov.tol");
  rep.expect(homogeneity < htol, "besov.homogeneity_tol");
  rep.results = {{"function", sec["function"]}, {"s", s},
                 {"p", p},                       {"m", m},
                 {"seminorm", value},            {"reference", refined},
                 {"reference_coarse", coarse},   {"rel_error", err},
                 {"constant_seminorm", constant}, {"homogeneity_error", homogeneity},
                 {"tol", tol},                   {"homogeneity_tol", htol}};
  return rep;
}


}  // namespace

// ---------------------------------------------------------------------------

Problem make_problem(const ExperimentConfig& config) {
  const json& d = config.datum;
  const std::string type = d["type"].get<std::string>();
  if (type == "csv") {
    MeshFile file = read_mesh_csv(d["path"].get<std::string>());
    const std::string column = d["column"].get<std::string>();
    for (std::size_t i = 0; i < file.extra_names.size(); ++i)
      if (file.extra_names[i] == column) return {file.mesh, Density(file.mesh, file.extra_columns[i])};
    throw ConfigError("datum.column: mesh file has no column '" + column + "'");
  }
  const MeshPtr mesh = make_mesh(config.surface, config.nlat, config.nlon);
  if (type == "constant") return {mesh, Density::constant(mesh, d["value"].get<double>())};
  if (type == "harmonic") {
    return {mesh, Density(mesh, d["amplitude"].get<double>() * sample_harmonic(*mesh, d["l"].get<int>(), d["m"].get<int>()))};
  }
  // Random band-limited datum: coefficients uniform in [-1, 1] / (1 + l)^2.
  const int lmax = d["lmax"].get<int>();
  std::mt19937_64 rng(config.seed);
  Eigen::VectorXd coeffs(sh_count(lmax));
  for (int l = 0; l <= lmax; ++l)
    for (int m = -l; m <= l; ++m)
      coeffs(sh_index(l, m)) = d["amplitude"].get<double>() * (2.0 * uniform01(rng) - 1.0) / ((1.0 + l) * (1.0 + l));
  Eigen::VectorXd values(mesh->size());
  std::vector<double> y(sh_count(lmax));
  for (int j = 0; j < mesh->size(); ++j) {
    real_sph_harm(lmax, mesh->theta()[j], mesh->phi()[j], y);
    values(j) = Eigen::Map<const Eigen::VectorXd>(y.data(), y.size()).dot(coeffs);
  }
  return {mesh, Density(mesh, std::move(values))};
}

double sphere_layer_potential(double s, double radius, double r) {
  const double c = riesz_constant(3, s);
  if (r == 0.0) return 4.0 * pi * c * std::pow(radius, s - 1.0);
  return c * 2.0 * pi * radius / r * (std::pow(r + radius, s - 1.0) - std::pow(std::abs(r - radius), s - 1.0)) /
         (s - 1.0);
}

Report run_check(const std::string& name, const ExperimentConfig& config) {
  if (name == "funk-hecke") return check_funk_hecke(config);
  if (name == "rayleigh") return check_rayleigh(config);
  if (name == "closed-form") return check_closed_form(config);
  if (name == "conditioning") return check_conditioning(config);
  if (name == "symmetry") return check_symmetry(config);
  if (name == "semigroup-flat") return check_semigroup_flat(config);
  if (name == "composition") return check_composition(config);
  if (name == "weak") return check_weak(config);
  if (name == "riesz-semigroup") return check_riesz_semigroup(config);
  if (name == "fourier-gaussian") return check_fourier_gaussian(config);
  if (name == "norm-equivalence") return check_norm_equivalence(config);
  if (name == "besov") return check_besov(config);
  throw ConfigError("unknown check '" + name + "'");
}

Report run_convergence(const ExperimentConfig& config) {
  const json& sec = section(config, "convergence");
  const std::string check = sec["check"].get<std::string>();
  const json& params = section(config, check);
  Report rep = start("convergence", check);
  const auto nlats = sec["nlats"].get<std::vector<int>>();
  double tol = 0.0;
  Table t{"convergence-" + check, {"nlat", "nlon", "nodes", "h", "error", "order"}, {}};
  double prev_h = 0.0, prev_e = 0.0;
  for (int nlat : nlats) {
    const MeshPtr mesh = mesh_at(config, nlat);
    double e = 0.0;
    if (check == "rayleigh") {
      tol = params["tol"].get<double>();
      for (double alpha : to_doubles(params["alphas"])) {
        const std::vector<double> v = rayleigh_errors(config, alpha, nlat, params["lmax"].get<int>());
        e = std::max(e, *std::max_element(v.begin(), v.end()));
      }
    } else if (check == "closed-form") {
      tol = std::max(params["tol"].get<double>(), params["trace_tol"].get<double>());
      const ClosedForm cf = closed_form(config, nlat);
      e = std::max(cf.trace_error, *std::max_element(cf.errors.begin(), cf.errors.end()));
    } else if (check == "symmetry") {
      tol = params["near_tol"].get<double>();
      e = symmetry_report(assemble_single_layer(mesh, 2.0 * config.alpha, config.correction)).near_asymmetry;
    } else {
      tol = params["matrix_tol"].get<double>();
      for (double alpha : to_doubles(params["alphas"])) {
        const std::vector<double> v = composition_errors(config, alpha, nlat, params["matrix_lmax"].get<int>());
        e = std::max(e, *std::max_element(v.begin(), v.end()));
      }
    }
    const double h = mesh->spacing();
    const double order = prev_h > 0.0 ? std::log(prev_e / e) / std::log(prev_h / h) : NAN;
    t.rows.push_back({double(nlat), double(mesh->nlon()), double(mesh->size()), h, e, order});
    prev_h = h;
    prev_e = e;
  }
  rep.expect(prev_e < tol, check + " at nlat " + std::to_string(nlats.back()));
  rep.results = {{"check", check}, {"nlats", nlats}, {"final_error", prev_e}, {"tol", tol}};
  rep.tables.push_back(std::move(t));
  return rep;
}

Report run_bvp(const ExperimentConfig& config) {
  Report rep = start("bvp", "bvp");
  const json& sec = section(config, "bvp");
  const Problem problem = make_problem(config);
  const double s = 2.0 * config.alpha;
  const BoundaryOperator op = assemble_single_layer(problem.mesh, s, config.correction);
  SolveOptions opts = config.solver;
  const SolveReport solved = solve_density(op, problem.datum, opts);
  const Density& phi = solved.density;
  const SurfaceDescriptor& surf = problem.mesh->descriptor();

  // Reference solution for a constant datum on a sphere: phi is constant.
  const bool reference = surf.kind == SurfaceKind::Sphere && config.datum["type"] == "constant";
  const double radius = surf.axes.x();
  double phi_exact = 0.0;
  json res;
  res["alpha"] = config.alpha;
  res["nodes"] = problem.mesh->size();
  res["solve"] = to_json(solved);
  if (reference) {
    phi_exact = config.datum["value"].get<double>() / (std::pow(radius, s - 1.0) * funk_hecke_eigenvalue(s, 0));
    double err = 0.0;
    for (Eigen::Index i = 0; i < phi.values.size(); ++i) err = std::max(err, rel_err(phi.values(i), phi_exact));
    res["density_reference"] = phi_exact;
    res["density_rel_error"] = err;
    rep.expect(err < sec["density_tol"].get<double>(), "bvp.density_tol");
  }

  FieldEvaluator field(phi, config.alpha);
  std::vector<FieldSample> samples;
  Table t{"bvp-field", {"x", "y", "z", "u", "reference", "rel_error"}, {}};
  double field_err = 0.0;
  for (const json& p : sec["points"]) {
    const FieldSample fs = field.sample(to_vec3(p));
    samples.push_back(fs);
    double ref = NAN, err = NAN;
    if (reference) {
      ref = phi_exact * sphere_layer_potential(s, radius, (fs.point - surf.center).norm());
      err = rel_err(fs.value, ref);
      field_err = std::max(field_err, err);
    }
    t.rows.push_back({fs.point.x(), fs.point.y(), fs.point.z(), fs.value, ref, err});
  }
  if (reference) {
    res["field_rel_error"] = field_err;
    rep.expect(field_err < sec["field_tol"].get<double>(), "bvp.field_tol");
  }

  const DecayFit fit = decay_fit(phi, config.alpha, to_doubles(sec["decay_radii"]), to_vec3(sec["direction"]).normalized());
  res["decay"] = to_json(fit);
  rep.expect(std::abs(fit.exponent - fit.expected_exponent) < sec["exponent_tol"].get<double>(), "bvp.exponent_tol");
  res["tolerances"] = {{"density_tol", sec["density_tol"]},
                       {"field_tol", sec["field_tol"]},
                       {"exponent_tol", sec["exponent_tol"]}};
  rep.results = res;
  rep.tables.push_back(std::move(t));
  std::filesystem::create_directories(config.output);
  write_mesh_csv(config.output / "bvp-density.csv", *problem.mesh, {{"g", &problem.datum.values}, {"phi", &phi.values}});
  return rep;
}

Report run_mesh(const ExperimentConfig& config) {
  Report rep = start("mesh", "mesh");
  const Problem problem = make_problem(config);
  std::filesystem::create_directories(config.output);
  write_mesh_csv(config.output / "mesh.csv", *problem.mesh, {{"g", &problem.datum.values}});
  const SurfaceMesh& m = *problem.mesh;
  rep.results = {{"nodes", m.size()},   {"nlat", m.nlat()},         {"nlon", m.nlon()},
                 {"area", m.area()},    {"spacing", m.spacing()},   {"min_spacing", m.min_spacing()},
                 {"hash", std::to_string(m.hash())}, {"file", "mesh.csv"}};
  return rep;
}

Report run_assemble(const ExperimentConfig& config) {
  Report rep = start("assemble", "assemble");
  const Problem problem = make_problem(config);
  const BoundaryOperator op = assemble_single_layer(problem.mesh, 2.0 * config.alpha, config.correction);
  std::filesystem::create_directories(config.output);
  save_operator(config.output / "operator.bin", op);
  const CorrectionInfo& c = op.correction;
  rep.results = {{"nodes", op.size()},
                 {"s", op.spec.order()},
                 {"correction",
                  {{"scheme", c.scheme},
                   {"patch_radius", c.patch_radius},
                   {"radial_order", c.radial_order},
                   {"angular_order", c.angular_order},
                   {"interp_order", c.interp_order},
                   {"corrected_entries", c.corrected_entries}}},
                 {"condition", to_json(condition_report(op))},
                 {"symmetry", symmetry_json(symmetry_report(op))},
                 {"file", "operator.bin"}};
  return rep;
}

Report run_solve(const ExperimentConfig& config) {
  Report rep = start("solve", "solve");
  const Problem problem = make_problem(config);
  const BoundaryOperator op = assemble_single_layer(problem.mesh, 2.0 * config.alpha, config.correction);
  const SolveReport solved = solve_density(op, problem.datum, config.solver);
  std::filesystem::create_directories(config.output);
  write_mesh_csv(config.output / "density.csv", *problem.mesh,
                 {{"g", &problem.datum.values}, {"phi", &solved.density.values}});
  rep.results = to_json(solved);
  rep.results["datum"] = config.datum;
  rep.results["file"] = "density.csv";
  return rep;
}

Report run_field(const ExperimentConfig& config) {
  Report rep = start("field", "field");
  const json& sec = section(config, "field");
  const Problem problem = make_problem(config);
  Density phi = problem.datum;
  if (sec["source"] == "solve") {
    const BoundaryOperator op = assemble_single_layer(problem.mesh, 2.0 * config.alpha, config.correction);
    SolveOptions opts = config.solver;
    opts.with_condition = false;
    phi = solve_density(op, problem.datum, opts).density;
  }
  std::vector<Vec3> points;
  for (const json& p : sec["points"]) points.push_back(to_vec3(p));
  const Vec3 center = problem.mesh->descriptor().center;
  const Vec3 dir = to_vec3(sec["direction"]).normalized();
  for (double r : to_doubles(sec["radii"])) points.push_back(center + r * dir);
  const std::vector<FieldSample> samples = eval_potential(phi, config.alpha, points);
  std::filesystem::create_directories(config.output);
  write_field_csv(config.output / "field.csv", samples);
  int upsampled = 0;
  for (const FieldSample& s : samples) upsampled += s.quadrature == QuadratureTag::Upsampled;
  rep.results = {{"points", samples.size()}, {"upsampled", upsampled}, {"source", sec["source"]}, {"file", "field.csv"}};
  return rep;
}

std::filesystem::path write_report(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string stem = report.command == report.name ? report.command : report.command + "-" + report.name;
  const std::filesystem::path path = dir / (stem + ".json");
  std::ofstream(path) << report.to_json().dump(2) << "\n";
  for (const Table& t : report.tables) {
    std::ofstream out(dir / (t.name + ".csv"));
    for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
    out << "\n";
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
      out << "\n";
    }
  }
  return path;
}

}  // namespace fraclap::cli
