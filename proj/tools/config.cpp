#include "config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

namespace fraclap::cli {

using nlohmann::json;

namespace {

const json& all_defaults() {
  static const json defaults = [] {
    json d;
    d["funk-hecke"] = {{"s", 2.0}, {"lmax", 20}, {"tol", 1e-10}};
    d["rayleigh"] = {{"alphas", {0.6, 0.75, 0.9}}, {"lmax", 8}, {"nlats", {16, 32}}, {"tol", 1e-3},
                     {"min_ratio", 2.0}};
    d["closed-form"] = {{"radii", {0.0, 2.0}}, {"direction", {1.0, 1.0, 1.0}}, {"tol", 1e-4}, {"trace_tol", 1e-3}};
    d["conditioning"] = {{"alphas", {0.6, 0.75, 0.9}}, {"nlats", {16, 32}}, {"min_sigma_ratio", 1e-8},
                         {"growth_factor", 1.5}, {"growth_alphas", {0.75}}};
    d["symmetry"] = {{"far_tol", 1e-12}, {"near_tol", 1e-3}};
    d["semigroup-flat"] = {{"alphas", {0.6, 0.75, 0.9}}, {"separations", {1.0, 2.0}}, {"tol", 1e-4},
                           {"rhs_tol", 1e-14}, {"normalization", "literal"}};
    d["composition"] = {{"alphas", {0.6, 0.75, 0.9}}, {"lmax", 40}, {"fit_from", 4}, {"min_gap", 0.8},
                        {"normalization", "literal"}, {"matrix_lmax", 8}, {"matrix_nlat", 32},
                        {"matrix_tol", 5e-3}};
    d["weak"] = {{"bumps", json::array({{{"center", {0.0, 0.0, 0.0}}, {"radius", 0.5}},
                                        {{"center", {2.0, 0.0, 0.0}}, {"radius", 0.5}}})},
                 {"grid_n", 128},
                 {"box_factor", 8.0},
                 {"oversample", 2},
                 {"tol", 1e-2}};
    d["riesz-semigroup"] = {{"s1", 0.6},          {"s2", 0.8},          {"bump_center", {0.0, 0.0, 0.0}},
                            {"bump_radius", 1.0}, {"points", 5},        {"point_radius", 0.4},
                            {"grid_n", 128},      {"box_factor", 8.0},  {"tol", 1e-3}};
    d["fourier-gaussian"] = {{"orders", {0.8, 1.4}}, {"radii", {0.0, 0.5, 1.0}}, {"direction", {1.0, 2.0, 3.0}},
                             {"grid_n", 129},        {"side", 8.0},              {"tol", 1e-4}};
    d["norm-equivalence"] = {{"alphas", {0.6, 0.75, 0.9}},
                             {"lmax", 40},
                             {"envelopes", {{16.353795112226564, 18.369061898163924},
                                            {13.14642436224427, 17.771531752633464},
                                            {16.008882361139804, 26.864748063361564}}},
                             {"tol", 1e-9}};
    d["besov"] = {{"s", 0.5},     {"p", 2.0},    {"m", 64},         {"side", 1.0},     {"function", "x1"},
                  {"panels", 8},  {"order", 8},  {"tol", 1e-2},     {"homogeneity_tol", 1e-12}};
    d["bvp"] = {{"points", {{0.0, 0.0, 0.0}, {0.5, 0.0, 0.0}, {0.0, 0.0, 1.5}, {2.0, 0.0, 0.0}, {0.0, 3.0, 0.0}}},
                {"decay_radii", {10.0, 20.0, 40.0, 70.0, 100.0}},
                {"direction", {1.0, 1.0, 1.0}},
                {"density_tol", 1e-3},
                {"field_tol", 1e-3},
                {"exponent_tol", 0.02}};
    d["field"] = {{"points", {{0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}}},
                  {"radii", json::array()},
                  {"direction", {1.0, 1.0, 1.0}},
                  {"source", "solve"}};
    d["convergence"] = {{"check", "rayleigh"}, {"nlats", {16, 24, 32, 48}}};
    return d;
  }();
  return defaults;
}

const std::map<std::string, std::set<std::string>>& enumerations() {
  static const std::map<std::string, std::set<std::string>> e = {
      {"semigroup-flat.normalization", {"literal", "flat-constant"}},
      {"composition.normalization", {"literal", "flat-constant"}},
      {"besov.function", {"x1", "x1x2"}},
      {"field.source", {"solve", "datum"}},
      {"convergence.check", {"rayleigh", "closed-form", "symmetry", "composition"}},
  };
  return e;
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

std::string type_name(const json& v) {
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  return v.type_name();
}

// Structural match of `value` against the shape of `shape` (a default).
void match_shape(const json& value, const json& shape, const std::string& where) {
  if (shape.is_number_integer()) {
    if (!value.is_number_integer()) fail(where, "expected integer, got " + type_name(value));
  } else if (shape.is_number()) {
    if (!value.is_number()) fail(where, "expected number, got " + type_name(value));
  } else if (shape.is_string()) {
    if (!value.is_string()) fail(where, "expected string, got " + type_name(value));
  } else if (shape.is_boolean()) {
    if (!value.is_boolean()) fail(where, "expected boolean, got " + type_name(value));
  } else if (shape.is_array()) {
    if (!value.is_array()) fail(where, "expected array, got " + type_name(value));
    if (!shape.empty()) {
      for (std::size_t i = 0; i < value.size(); ++i) match_shape(value[i], shape[0], where + "[" + std::to_string(i) + "]");
    } else {
      for (std::size_t i = 0; i < value.size(); ++i)
        if (!value[i].is_number()) fail(where + "[" + std::to_string(i) + "]", "expected number");
    }
  } else if (shape.is_object()) {
    if (!value.is_object()) fail(where, "expected object, got " + type_name(value));
    for (const auto& [key, v] : value.items()) {
      if (!shape.contains(key)) fail(where, "unknown key '" + key + "'");
      match_shape(v, shape[key], where + "." + key);
    }
  }
}

double number(const json& obj, const char* key, double fallback) {
  return obj.contains(key) ? obj[key].get<double>() : fallback;
}

Vec3 vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) fail(where, "expected an array of 3 numbers");
  for (const auto& x : v)
    if (!x.is_number()) fail(where, "expected an array of 3 numbers");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

void require_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected object, got " + type_name(obj));
  for (const auto& [key, v] : obj.items())
    if (!allowed.count(key)) fail(where, "unknown key '" + key + "'");
}

void positive(const json& sec, const std::string& name, const std::string& key) {
  if (!(sec[key].get<double>() > 0.0)) fail(name + "." + key, "must be positive");
}

void alpha_list(const json& sec, const std::string& name) {
  if (sec["alphas"].empty()) fail(name + ".alphas", "must not be empty");
  for (const auto& a : sec["alphas"]) {
    const double v = a.get<double>();
    if (!(v > 0.5 && v < 1.0)) fail(name + ".alphas", "every alpha must lie in (1/2, 1)");
  }
}

void nlat_list(const json& sec, const std::string& name, const std::string& key) {
  if (sec[key].empty()) fail(name + "." + key, "must not be empty");
  for (const auto& n : sec[key])
    if (n.get<int>() < 8) fail(name + "." + key, "every nlat must be >= 8");
}

// Range checks that the shape alone does not express.
void validate_section(const std::string& name, const json& sec) {
  for (const auto& [key, v] : sec.items()) {
    if (key == "tol" || key.ends_with("_tol")) positive(sec, name, key);
    const auto e = enumerations().find(name + "." + key);
    if (e != enumerations().end() && !e->second.count(v.get<std::string>()))
      fail(name + "." + key, "unknown value '" + v.get<std::string>() + "'");
  }
  if (sec.contains("alphas")) alpha_list(sec, name);
  if (sec.contains("nlats")) nlat_list(sec, name, "nlats");
  if (name == "funk-hecke") {
    const double s = sec["s"].get<double>();
    if (!(s > 1.0 && s <= 2.0)) fail("funk-hecke.s", "must lie in (1, 2]");
    if (sec["lmax"].get<int>() < 0) fail("funk-hecke.lmax", "must be non-negative");
  } else if (name == "rayleigh") {
    if (sec["lmax"].get<int>() < 0) fail("rayleigh.lmax", "must be non-negative");
  } else if (name == "conditioning") {
    positive(sec, name, "min_sigma_ratio");
    if (!(sec["growth_factor"].get<double>() >= 1.0)) fail("conditioning.growth_factor", "must be >= 1");
    for (const auto& a : sec["growth_alphas"]) {
      bool listed = false;
      for (const auto& b : sec["alphas"]) listed = listed || a.get<double>() == b.get<double>();
      if (!listed) fail("conditioning.growth_alphas", "every entry must also appear in alphas");
    }
  } else if (name == "semigroup-flat") {
    if (sec["separations"].empty()) fail("semigroup-flat.separations", "must not be empty");
    for (const auto& d : sec["separations"])
      if (!(d.get<double>() > 0.0)) fail("semigroup-flat.separations", "must be positive");
  } else if (name == "composition") {
    const int lmax = sec["lmax"].get<int>();
    const int from = sec["fit_from"].get<int>();
    if (lmax < 4) fail("composition.lmax", "must be >= 4");
    if (from < 1 || from >= lmax) fail("composition.fit_from", "must satisfy 1 <= fit_from < lmax");
    if (sec["matrix_nlat"].get<int>() < 8) fail("composition.matrix_nlat", "must be >= 8");
    if (sec["matrix_lmax"].get<int>() < 0) fail("composition.matrix_lmax", "must be non-negative");
  } else if (name == "weak") {
    if (sec["bumps"].empty()) fail("weak.bumps", "must not be empty");
    for (const auto& b : sec["bumps"]) {
      vec3(b.value("center", json::array({0.0, 0.0, 0.0})), "weak.bumps.center");
      if (!(number(b, "radius", 1.0) > 0.0)) fail("weak.bumps.radius", "must be positive");
    }
    if (sec["grid_n"].get<int>() < 16) fail("weak.grid_n", "must be >= 16");
    if (!(sec["box_factor"].get<double>() >= 4.0)) fail("weak.box_factor", "must be >= 4");
    if (sec["oversample"].get<int>() < 1) fail("weak.oversample", "must be >= 1");
  } else if (name == "riesz-semigroup") {
    const double s1 = sec["s1"].get<double>();
    const double s2 = sec["s2"].get<double>();
    if (!(s1 > 0.0 && s2 > 0.0 && s1 + s2 < 3.0)) fail("riesz-semigroup", "orders need s1, s2 > 0 and s1 + s2 < 3");
    vec3(sec["bump_center"], "riesz-semigroup.bump_center");
    positive(sec, name, "bump_radius");
    if (sec["points"].get<int>() < 1) fail("riesz-semigroup.points", "must be >= 1");
    if (!(sec["point_radius"].get<double>() >= 0.0 && sec["point_radius"].get<double>() < 1.0))
      fail("riesz-semigroup.point_radius", "must lie in [0, 1)");
    if (sec["grid_n"].get<int>() < 16) fail("riesz-semigroup.grid_n", "must be >= 16");
    if (!(sec["box_factor"].get<double>() > 2.0)) fail("riesz-semigroup.box_factor", "must exceed 2");
  } else if (name == "fourier-gaussian") {
    if (sec["orders"].empty()) fail("fourier-gaussian.orders", "must not be empty");
    for (const auto& s : sec["orders"])
      if (!(s.get<double>() > 0.0 && s.get<double>() < 3.0)) fail("fourier-gaussian.orders", "must lie in (0, 3)");
    for (const auto& r : sec["radii"])
      if (!(r.get<double>() >= 0.0)) fail("fourier-gaussian.radii", "must be non-negative");
    vec3(sec["direction"], "fourier-gaussian.direction");
    if (sec["grid_n"].get<int>() < 16) fail("fourier-gaussian.grid_n", "must be >= 16");
    positive(sec, name, "side");
  } else if (name == "norm-equivalence") {
    if (sec["envelopes"].size() != sec["alphas"].size())
      fail("norm-equivalence.envelopes", "needs one [lower, upper] pair per alpha");
    for (const auto& e : sec["envelopes"])
      if (e.size() != 2 || !(e[0].get<double>() <= e[1].get<double>()))
        fail("norm-equivalence.envelopes", "each entry must be [lower, upper] with lower <= upper");
    if (sec["lmax"].get<int>() < 0) fail("norm-equivalence.lmax", "must be non-negative");
  } else if (name == "besov") {
    const double s = sec["s"].get<double>();
    const double p = sec["p"].get<double>();
    if (!(s > 0.0 && s < 1.0)) fail("besov.s", "must lie in (0, 1)");
    if (!(p >= 1.0)) fail("besov.p", "must be >= 1");
    if (sec["m"].get<int>() < 3) fail("besov.m", "must be >= 3");
    if (sec["panels"].get<int>() < 1 || sec["order"].get<int>() < 2) fail("besov", "needs panels >= 1 and order >= 2");
    positive(sec, name, "side");
  } else if (name == "bvp" || name == "field") {
    for (const auto& p : sec["points"]) vec3(p, name + ".points");
    vec3(sec["direction"], name + ".direction");
    if (vec3(sec["direction"], name + ".direction").norm() == 0.0) fail(name + ".direction", "must be nonzero");
    if (name == "bvp" && sec["decay_radii"].size() < 2) fail("bvp.decay_radii", "needs at least two radii");
  } else if (name == "convergence") {
    nlat_list(sec, name, "nlats");
  }
}

SurfaceDescriptor parse_surface(const json& s) {
  if (!s.is_object() || !s.contains("type") || !s["type"].is_string()) fail("surface", "needs a string 'type'");
  const std::string type = s["type"].get<std::string>();
  Vec3 center = Vec3::Zero();
  if (s.contains("center")) center = vec3(s["center"], "surface.center");
  if (type == "sphere") {
    require_keys(s, {"type", "radius", "center"}, "surface");
    if (s.contains("radius") && !s["radius"].is_number()) fail("surface.radius", "expected number");
    const double r = number(s, "radius", 1.0);
    if (!(r > 0.0)) fail("surface.radius", "must be positive");
    return SurfaceDescriptor::sphere(r, center);
  }
  if (type == "ellipsoid") {
    require_keys(s, {"type", "axes", "center"}, "surface");
    if (!s.contains("axes")) fail("surface", "ellipsoid needs 'axes'");
    const Vec3 a = vec3(s["axes"], "surface.axes");
    if (!(a.minCoeff() > 0.0)) fail("surface.axes", "must be positive");
    return SurfaceDescriptor::ellipsoid(a.x(), a.y(), a.z(), center);
  }
  fail("surface.type", "unknown surface '" + type + "' (sphere, ellipsoid)");
}

json parse_datum(const json& d) {
  if (!d.is_object() || !d.contains("type") || !d["type"].is_string()) fail("datum", "needs a string 'type'");
  const std::string type = d["type"].get<std::string>();
  json out = d;
  auto numeric = [&](const char* key, double fallback) {
    if (d.contains(key) && !d[key].is_number()) fail(std::string("datum.") + key, "expected number");
    out[key] = number(d, key, fallback);
  };
  auto integer = [&](const char* key, int fallback) {
    if (d.contains(key) && !d[key].is_number_integer()) fail(std::string("datum.") + key, "expected integer");
    out[key] = d.value(key, fallback);
  };
  if (type == "constant") {
    require_keys(d, {"type", "value"}, "datum");
    numeric("value", 1.0);
  } else if (type == "harmonic") {
    require_keys(d, {"type", "l", "m", "amplitude"}, "datum");
    integer("l", 0);
    integer("m", 0);
    numeric("amplitude", 1.0);
    const int l = out["l"].get<int>();
    const int m = out["m"].get<int>();
    if (l < 0 || std::abs(m) > l) fail("datum", "harmonic needs l >= 0 and |m| <= l");
  } else if (type == "random") {
    require_keys(d, {"type", "lmax", "amplitude"}, "datum");
    integer("lmax", 4);
    numeric("amplitude", 1.0);
    if (out["lmax"].get<int>() < 0) fail("datum.lmax", "must be non-negative");
  } else if (type == "csv") {
    require_keys(d, {"type", "path", "column"}, "datum");
    if (!d.contains("path") || !d["path"].is_string()) fail("datum.path", "expected string");
    if (d.contains("column") && !d["column"].is_string()) fail("datum.column", "expected string");
    out["column"] = d.value("column", "g");
  } else {
    fail("datum.type", "unknown datum '" + type + "' (constant, harmonic, random, csv)");
  }
  return out;
}

}  // namespace

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {
      "funk-hecke", "rayleigh",        "closed-form",      "conditioning",     "symmetry", "semigroup-flat",
      "composition", "weak",           "riesz-semigroup",  "fourier-gaussian", "norm-equivalence", "besov"};
  return names;
}

bool is_check(const std::string& name) {
  for (const auto& n : check_names())
    if (n == name) return true;
  return false;
}

json section_defaults(const std::string& name) {
  if (!all_defaults().contains(name)) throw ConfigError("no section named '" + name + "'");
  return all_defaults()[name];
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) fail("config", "top level must be an object");
  static const std::set<std::string> top = {"description", "alpha",  "surface", "resolution", "solver", "correction",
                                            "checks",      "output", "seed",    "datum"};
  for (const auto& [key, v] : doc.items())
    if (!top.count(key) && !all_defaults().contains(key)) fail("config", "unknown key '" + key + "'");

  ExperimentConfig c;
  if (doc.contains("description") && !doc["description"].is_string()) fail("description", "expected string");
  if (doc.contains("alpha")) {
    if (!doc["alpha"].is_number()) fail("alpha", "expected number");
    c.alpha = doc["alpha"].get<double>();
  }
  if (!(c.alpha > 0.5 && c.alpha < 1.0)) fail("alpha", "must lie in (1/2, 1)");

  if (doc.contains("surface")) c.surface = parse_surface(doc["surface"]);

  if (doc.contains("resolution")) {
    const json& r = doc["resolution"];
    require_keys(r, {"nlat", "nlon"}, "resolution");
    for (const char* key : {"nlat", "nlon"})
      if (r.contains(key) && !r[key].is_number_integer()) fail(std::string("resolution.") + key, "expected integer");
    c.nlat = r.value("nlat", c.nlat);
    c.nlon = r.value("nlon", 2 * c.nlat);
  }
  if (c.nlat < 8) fail("resolution.nlat", "must be >= 8");
  if (c.nlon < 8 || c.nlon % 2 != 0) fail("resolution.nlon", "must be even and >= 8");

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    require_keys(s, {"method", "tol", "max_iter"}, "solver");
    if (s.contains("method")) {
      if (!s["method"].is_string()) fail("solver.method", "expected string");
      const std::string m = s["method"].get<std::string>();
      if (m != "dense" && m != "iterative") fail("solver.method", "unknown method '" + m + "' (dense, iterative)");
      c.solver.method = solve_method_from_string(m);
    }
    if (s.contains("tol")) {
      if (!s["tol"].is_number() || !(s["tol"].get<double>() > 0.0)) fail("solver.tol", "must be a positive number");
      c.solver.tol = s["tol"].get<double>();
    }
    if (s.contains("max_iter")) {
      if (!s["max_iter"].is_number_integer() || s["max_iter"].get<int>() < 1)
        fail("solver.max_iter", "must be a positive integer");
      c.solver.max_iter = s["max_iter"].get<int>();
    }
  }

  if (doc.contains("correction")) {
    const json& k = doc["correction"];
    require_keys(k,
                 {"near_factor", "radial_order", "angular_order", "interp_order", "polar_filter", "filter_margin"},
                 "correction");
    auto num = [&](const char* key, double& out) {
      if (!k.contains(key)) return;
      if (!k[key].is_number() || !(k[key].get<double>() >= 0.0)) fail(std::string("correction.") + key, "must be a non-negative number");
      out = k[key].get<double>();
    };
    auto integer = [&](const char* key, int& out) {
      if (!k.contains(key)) return;
      if (!k[key].is_number_integer() || k[key].get<int>() < 0) fail(std::string("correction.") + key, "must be a non-negative integer");
      out = k[key].get<int>();
    };
    num("near_factor", c.correction.near_factor);
    num("polar_filter", c.correction.polar_filter);
    integer("radial_order", c.correction.radial_order);
    integer("angular_order", c.correction.angular_order);
    integer("interp_order", c.correction.interp_order);
    integer("filter_margin", c.correction.filter_margin);
  }

  if (doc.contains("checks")) {
    if (!doc["checks"].is_array()) fail("checks", "expected array of names");
    for (const auto& n : doc["checks"]) {
      if (!n.is_string()) fail("checks", "expected array of names");
      if (!is_check(n.get<std::string>())) fail("checks", "unknown check '" + n.get<std::string>() + "'");
      c.checks.push_back(n.get<std::string>());
    }
  }

  if (doc.contains("output")) {
    if (!doc["output"].is_string() || doc["output"].get<std::string>().empty())
      fail("output", "expected a non-empty path");
    c.output = doc["output"].get<std::string>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) fail("seed", "expected a non-negative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }

  c.datum = parse_datum(doc.value("datum", json{{"type", "constant"}, {"value", 1.0}}));

  for (const auto& [name, defaults] : all_defaults().items()) {
    json merged = defaults;
    if (doc.contains(name)) {
      match_shape(doc[name], defaults, name);
      for (const auto& [key, v] : doc[name].items()) merged[key] = v;
    }
    validate_section(name, merged);
    c.sections[name] = std::move(merged);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

const json& section(const ExperimentConfig& config, const std::string& name) {
  if (!config.sections.contains(name)) throw ConfigError("no section named '" + name + "'");
  return config.sections.at(name);
}

}  // namespace fraclap::cli
