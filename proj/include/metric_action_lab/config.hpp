#pragma once

// JSON experiment configs (schema 1). Parameters that may depend on h accept either a number
// or an expression string such as "1/h" or "pow(h, -1.5)".
//
//   space:      {"kind": "euclidean", "dim": n} | {"kind": "half_line"}
//               | {"kind": "tripod", "edges": [L0, L1, ...]} | {"kind": "quantile", "n": n}
//   functional: {"name": "zero" | "quadratic" | "box_quadratic" | "linear" | "example1" | "example2",
//                "center", "lambda", "lo", "hi", "c", "eps", "h", "scale", "scaled_lambda"}
//   family:     {"member": functional, "limit": functional}
//   point:      {"coords": [...]} or a bare array / number; entries may be expressions in h

#include <string>
#include <vector>

#include "metric_action_lab/expression.hpp"
#include "metric_action_lab/functionals.hpp"
#include "metric_action_lab/harness.hpp"
#include "metric_action_lab/io.hpp"

namespace mal {

inline void require_schema(const Json& j) {
  if (j.contains("schema") && j.at("schema").get<int>() != 1)
    throw ConfigError("unsupported config schema " + j.at("schema").dump());
}

/// Number or expression in h; `h` may be absent when the expression does not use it.
inline double param(const Json& j, const std::optional<double>& h) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const Expression e = Expression::parse(j.get<std::string>());
    Expression::Variables vars;
    if (h) vars["h"] = *h;
    return e(vars);
  }
  throw ConfigError("expected a number or expression, got " + j.dump());
}

inline double param_or(const Json& j, const char* key, double fallback, const std::optional<double>& h = {}) {
  return j.contains(key) ? param(j.at(key), h) : fallback;
}

inline std::vector<double> param_vector(const Json& j, const std::optional<double>& h) {
  std::vector<double> v;
  if (j.is_array()) {
    for (const Json& x : j) v.push_back(param(x, h));
  } else {
    v.push_back(param(j, h));
  }
  return v;
}

inline Space space_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  switch (space_kind_from_string(kind)) {
    case SpaceKind::Euclidean: return Space::euclidean(j.value("dim", std::size_t{1}));
    case SpaceKind::HalfLine: return Space::half_line();
    case SpaceKind::Tripod:
      if (j.contains("edges")) return Space::tripod(j.at("edges").get<std::vector<double>>());
      return Space::tripod(j.value("count", std::size_t{3}), j.value("length", 1.0));
    case SpaceKind::Quantile1D: return Space::quantile(j.at("n").get<std::size_t>());
  }
  throw ConfigError("unknown space kind " + kind);
}

inline Json space_to_json(const Space& s) {
  Json j;
  j["kind"] = to_string(s.kind());
  switch (s.kind()) {
    case SpaceKind::Euclidean: j["dim"] = s.dim(); break;
    case SpaceKind::HalfLine: break;
    case SpaceKind::Tripod: j["edges"] = s.edge_lengths(); break;
    case SpaceKind::Quantile1D: j["n"] = s.grid_size(); break;
  }
  return j;
}

inline Point point_from_config(const Space& space, const Json& j, const std::optional<double>& h = {}) {
  const Json& c = j.is_object() ? j.at("coords") : j;
  if (j.is_object() && j.contains("space") && j.at("space").get<std::string>() != to_string(space.kind()))
    throw TagError("point tagged '" + j.at("space").get<std::string>() + "' used in " + space.describe());
  Point p = point_from_coords(space, param_vector(c, h));
  space.validate(p);
  return p;
}

inline std::function<Point(double)> point_law(const Space& space, const Json& j) {
  return [space, j](double h) { return point_from_config(space, j, h); };
}

inline FunctionalSpec functional_from_json(const Space& space, const Json& j, const std::optional<double>& h = {}) {
  const std::string name = j.at("name").get<std::string>();
  FunctionalSpec f;
  if (name == "zero") {
    f = zero_functional();
  } else if (name == "quadratic" || name == "box_quadratic") {
    const Point c = j.contains("center") ? point_from_config(space, j.at("center"), h) : space.origin();
    const double lambda = param_or(j, "lambda", 1.0, h);
    f = name == "quadratic"
            ? quadratic_functional(space, c, lambda)
            : box_quadratic_functional(space, c, lambda, param(j.at("lo"), h), param(j.at("hi"), h));
  } else if (name == "linear") {
    f = linear_functional(space, param_vector(j.at("c"), h));
  } else if (name == "example1") {
    if (space.kind() != SpaceKind::HalfLine) throw ConfigError("example1 lives on the half-line");
    f = example1_functional(param_or(j, "eps", 1.0, h));
  } else if (name == "example2") {
    if (space.kind() != SpaceKind::HalfLine) throw ConfigError("example2 lives on the half-line");
    f = example2_functional(param(j.at("h"), h));
  } else {
    throw ConfigError("unknown functional '" + name + "'");
  }
  if (j.contains("scale")) {
    std::optional<double> lam;
    if (j.contains("scaled_lambda")) lam = param(j.at("scaled_lambda"), h);
    f = scaled(f, param(j.at("scale"), h), lam);
  }
  return f;
}

inline FunctionalFamily family_from_json(const Space& space, const Json& j) {
  FunctionalFamily fam;
  const Json member = j.contains("member") ? j.at("member") : j;
  fam.member = [space, member](double h) { return functional_from_json(space, member, h); };
  fam.limit = functional_from_json(space, j.contains("limit") ? j.at("limit") : member);
  fam.description = member.dump();
  return fam;
}

inline std::vector<double> h_list_from_json(const Json& j) {
  std::vector<double> h = j.get<std::vector<double>>();
  for (std::size_t k = 1; k < h.size(); ++k)
    if (!(h[k] > h[k - 1])) throw ConfigError("h_list must be increasing");
  return h;
}

inline Discretization discretization_from_json(const Json& j) {
  Discretization d;
  if (!j.is_object()) return d;
  d.curve_nodes = j.value("curve_nodes", d.curve_nodes);
  d.certificate_cells = j.value("certificate_cells", d.certificate_cells);
  d.minimize_nodes = j.value("minimize_nodes", d.minimize_nodes);
  d.minimize_max_iter = j.value("minimize_max_iter", d.minimize_max_iter);
  d.margin = j.value("margin", d.margin);
  d.d_inf_tol = j.value("d_inf_tol", d.d_inf_tol);
  d.monotone_from = j.value("monotone_from", d.monotone_from);
  d.diagonal_C = j.value("diagonal_C", d.diagonal_C);
  d.slope_rel_tol = j.value("slope_rel_tol", d.slope_rel_tol);
  d.endpoint_tol = j.value("endpoint_tol", d.endpoint_tol);
  d.sup_samples = j.value("sup_samples", d.sup_samples);
  return d;
}

/// Target curve: {"kind": "geodesic" | "minimize_action", "from", "to", "N", "max_iter"}
/// or {"kind": "csv", "path"} (relative paths resolve against `base`).
inline SampledCurve curve_from_config(const Space& space, const Json& j, const FunctionalSpec& f,
                                      const std::filesystem::path& base = {}) {
  const std::string kind = j.value("kind", std::string("geodesic"));
  if (kind == "csv") {
    std::filesystem::path p = j.at("path").get<std::string>();
    if (p.is_relative()) p = base / p;
    return curve_from_csv(space, read_file(p));
  }
  const Point a = point_from_config(space, j.at("from"));
  const Point b = point_from_config(space, j.at("to"));
  const std::size_t n = j.value("N", std::size_t{1024});
  SampledCurve init = SampledCurve::geodesic(space, a, b, n);
  if (kind == "geodesic") return init;
  if (kind == "minimize_action") {
    MinimizeActionOptions mo;
    mo.max_iter = j.value("max_iter", mo.max_iter);
    return minimize_action(f, space, a, b, n, init, mo).curve;
  }
  throw ConfigError("unknown curve kind '" + kind + "'");
}

/// Recovery settings shared by `recovery` and `gamma positive`.
inline RecoveryConfig recovery_from_json(const Space& space, const Json& j, SampledCurve gamma) {
  RecoveryConfig cfg(std::move(gamma));
  cfg.mode = recovery_mode_from_string(j.value("mode", std::string("resolvent")));
  if (j.contains("x0h")) cfg.x0h = point_law(space, j.at("x0h"));
  if (j.contains("x1h")) cfg.x1h = point_law(space, j.at("x1h"));
  if (j.contains("eps")) {
    const Json e = j.at("eps");
    cfg.eps = [e](double h) { return param(e, h); };
  }
  if (j.contains("tau")) {
    const Expression e = Expression::parse(j.at("tau").is_string() ? j.at("tau").get<std::string>()
                                                                    : format_number(j.at("tau").get<double>()),
                                           {"h", "d"});
    cfg.tau_schedule = [e](double h, double d) { return e({{"h", h}, {"d", d}}); };
  }
  cfg.ds = j.value("ds", cfg.ds);
  cfg.dt_min = j.value("dt_min", cfg.dt_min);
  cfg.slope_cap = j.value("slope_cap", cfg.slope_cap);
  cfg.endpoint_tol = j.value("endpoint_tol", cfg.endpoint_tol);
  cfg.action.endpoint_tol = cfg.endpoint_tol;
  return cfg;
}

}  // namespace mal
