#pragma once

// Randomized validation of the geometric, slope, resolvent and flow inequalities over a
// catalogue of functionals on each space. One row per (space, functional, check) carrying the
// worst residual over all samples.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "metric_action_lab/flow.hpp"
#include "metric_action_lab/io.hpp"
#include "metric_action_lab/parallel.hpp"
#include "metric_action_lab/proximal.hpp"
#include "metric_action_lab/sampling.hpp"

namespace mal {

struct ValidationRow {
  std::string space;
  std::string functional;
  std::string check;
  std::string params;  // sample attaining the worst residual
  double residual = -std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  bool pass = true;
  std::size_t samples = 0;
};

struct ValidationOptions {
  std::size_t samples = 100;
  std::size_t flow_samples = 4;
  std::uint64_t seed = 7;
  bool prox_only = false;
  double flow_dt = 1e-3;
  double flow_T = 1.0;
  double lipschitz_estimate = 10.0;
  double tol_closed = 1e-6;
  double tol_sup = 1e-3;
  double tol_tripod = 1e-4;
  double tol_exact = 1e-8;
  double tol_contraction = 1e-3;
  double tol_energy = 0.02;
};

struct CatalogueEntry {
  std::string name;
  FunctionalSpec f;
  /// Draws a sample point in the region where the checks apply.
  std::function<Point(Rng&)> sample;
};

inline std::vector<Space> default_validation_spaces() {
  return {Space::euclidean(2), Space::half_line(), Space::tripod({1.0, 1.5, 2.0}), Space::quantile(4)};
}

inline std::vector<CatalogueEntry> validation_catalogue(const Space& space) {
  std::vector<CatalogueEntry> out;
  auto box = [space](double scale) { return [space, scale](Rng& r) { return random_point(space, r, scale); }; };
  switch (space.kind()) {
    case SpaceKind::Euclidean:
      out.push_back({"quadratic", quadratic_functional(space, Point::euclidean({0.3, -0.2}), 1.0), box(2.0)});
      out.push_back({"quadratic_concave", quadratic_functional(space, space.origin(), -0.5), box(2.0)});
      out.push_back({"linear", linear_functional(space, {1.0, -2.0}), box(2.0)});
      break;
    case SpaceKind::HalfLine:
      out.push_back({"quadratic", quadratic_functional(space, Point::half_line(0.5), 2.0), box(2.0)});
      out.push_back({"linear", linear_functional(space, {1.0}), box(2.0)});
      out.push_back({"example1", example1_functional(0.1), [](Rng& r) {
                       return Point::half_line(std::uniform_real_distribution<double>(0.5, 2.0)(r));
                     }});
      break;
    case SpaceKind::Tripod:
      out.push_back({"quadratic", quadratic_functional(space, Point::tripod(1, 0.5), 1.0), box(1.0)});
      out.push_back({"quadratic_branch", quadratic_functional(space, Point::tripod(0, 0.0), 2.0), box(1.0)});
      break;
    case SpaceKind::Quantile1D:
      out.push_back({"quadratic", quadratic_functional(space, Point::quantile({-1.0, 0.0, 0.5, 1.0}), 1.0), box(2.0)});
      break;
  }
  return out;
}

namespace detail {

struct RowBuilder {
  ValidationRow row;
  void record(double r, const std::string& where) {
    ++row.samples;
    if (r > row.residual || std::isnan(r)) {
      row.residual = r;
      row.params = where;
    }
  }
  ValidationRow done() {
    row.pass = !std::isnan(row.residual) && row.residual <= row.tolerance;
    return row;
  }
};

inline std::string fmt_point(const Point& p) { return p.str(); }

inline double draw_tau(const FunctionalSpec& f, Rng& rng) {
  const double cap = std::min(1.0, 0.9 * max_resolvent_tau(f));
  return std::uniform_real_distribution<double>(0.01 * cap, cap)(rng);
}

inline std::vector<ValidationRow> validate_entry(const Space& space, const CatalogueEntry& e,
                                                 const ValidationOptions& opt, std::uint64_t seed) {
  Rng rng(seed);
  const std::string sname = space.describe();
  auto builder = [&](const std::string& check, double tol) {
    RowBuilder b;
    b.row.space = sname;
    b.row.functional = e.name;
    b.row.check = check;
    b.row.tolerance = tol;
    return b;
  };
  const bool tripod = space.kind() == SpaceKind::Tripod;
  const double tol_geom = tripod ? opt.tol_tripod : opt.tol_closed;
  ResolventOptions numeric;
  numeric.use_closed_form = false;
  const SlopeMethod closed = e.f.closed_form_slope ? SlopeMethod::closed_form() : SlopeMethod::best();
  const SlopeMethod sup = SlopeMethod::sup_formula(1.0, 4096);
  std::vector<ValidationRow> rows;

  if (!opt.prox_only) {
    RowBuilder conv = builder("lambda_convexity", 1e-9);
    RowBuilder low = builder("quadratic_lower_bound", 1e-9);
    const std::vector<double> tg{0.1, 0.25, 0.5, 0.75, 0.9};
    for (std::size_t k = 0; k < opt.samples; ++k) {
      const Point a = e.sample(rng);
      const Point b = e.sample(rng);
      const auto rep = check_lambda_convexity(e.f, space, {{a, b}}, tg, 1e-9);
      conv.record(rep.max_residual, fmt_point(a) + " " + fmt_point(b));
    }
    std::vector<Point> pts;
    for (std::size_t k = 0; k < opt.samples; ++k) pts.push_back(e.sample(rng));
    const auto lb = check_quadratic_lower_bound(e.f, space, e.sample(rng), pts, 1e-9, 1000, seed);
    low.record(lb.residual.max_residual, lb.residual.worst_case);
    rows.push_back(conv.done());
    rows.push_back(low.done());
  }

  RowBuilder chain_c = builder("bound_chain_closed_slope", opt.tol_closed);
  RowBuilder chain_s = builder("bound_chain_sup_slope", opt.tol_sup);
  RowBuilder exact = builder("resolvent_vs_closed_form", opt.tol_exact);
  RowBuilder lip = builder("resolvent_lipschitz", tol_geom);
  RowBuilder ltau = builder("resolvent_tau_continuity", tol_geom);
  RowBuilder ident = builder("resolvent_identity", tol_geom);
  for (std::size_t k = 0; k < opt.samples; ++k) {
    const Point x = e.sample(rng);
    const Point y = e.sample(rng);
    const double tau = draw_tau(e.f, rng);
    const double nu = tau * std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    if (slope(e.f, space, x, closed).is_infinite()) continue;
    const std::string where = "tau=" + format_number(tau) + " x=" + fmt_point(x);
    chain_c.record(check_bound_chain(e.f, space, tau, x, closed, numeric).max_residual(), where);
    chain_s.record(check_bound_chain(e.f, space, tau, x, sup, numeric).max_residual(), where);
    if (e.f.closed_form_prox)
      exact.record(distance(space, resolvent_point(e.f, space, tau, x, numeric), e.f.closed_form_prox(tau, x)), where);
    lip.record(check_resolvent_lipschitz(e.f, space, tau, x, y, numeric), where + " y=" + fmt_point(y));
    ltau.record(check_tau_continuity(e.f, space, nu, tau, x, closed, numeric), where + " nu=" + format_number(nu));
    ident.record(check_resolvent_identity(e.f, space, nu, tau, x, numeric), where + " nu=" + format_number(nu));
  }
  rows.push_back(chain_c.done());
  rows.push_back(chain_s.done());
  if (e.f.closed_form_prox) rows.push_back(exact.done());
  rows.push_back(lip.done());
  rows.push_back(ltau.done());
  rows.push_back(ident.done());

  if (!opt.prox_only) {
    const auto n = static_cast<std::size_t>(std::llround(opt.flow_T / opt.flow_dt));
    const double slack = flow_slack(opt.flow_dt, opt.lipschitz_estimate);
    RowBuilder evi = builder("evi", slack);
    RowBuilder contr = builder("contraction", opt.tol_contraction);
    RowBuilder bounds = builder("flow_slope_bounds", slack);
    RowBuilder mono = builder("flow_slope_monotonicity", slack);
    RowBuilder energy = builder("energy_identity", opt.tol_energy);
    for (std::size_t k = 0; k < opt.flow_samples; ++k) {
      const Point x = e.sample(rng);
      const Point x1 = e.sample(rng);
      const Point v = e.sample(rng);
      const std::string where = "x=" + fmt_point(x);
      const FlowTrajectory traj = flow(e.f, space, x, opt.flow_T, n);
      evi.record(check_evi(traj, e.f, e.f.lambda, v, slack).max_residual, where + " v=" + fmt_point(v));
      contr.record(check_contraction(e.f, space, x, x1, opt.flow_T, n, opt.tol_contraction).max_residual,
                   where + " x1=" + fmt_point(x1));
      const SlopeBounds sb = check_slope_bounds_along_flow(e.f, space, x, opt.flow_T, n, opt.lipschitz_estimate, closed);
      bounds.record(std::max(sb.lower_residual, sb.upper_residual), where);
      mono.record(slope_monotonicity_residual(traj, e.f, closed), where);
      const EnergyReport er = check_energy_identity(traj, e.f, closed);
      if (er.energy_drop > 1e-3) energy.record(er.relative_error, where);
    }
    rows.push_back(evi.done());
    rows.push_back(contr.done());
    rows.push_back(bounds.done());
    rows.push_back(mono.done());
    if (energy.row.samples > 0) rows.push_back(energy.done());
  }
  return rows;
}

inline ValidationRow validate_cat0(const Space& space, const ValidationOptions& opt, std::uint64_t seed) {
  Rng rng(seed);
  RowBuilder b;
  b.row.space = space.describe();
  b.row.functional = "-";
  b.row.check = "cat0";
  b.row.tolerance = 1e-9;
  const std::vector<double> tg{0.1, 0.25, 0.5, 0.75, 0.9};
  for (std::size_t k = 0; k < opt.samples; ++k) {
    const Point y = random_point(space, rng, 2.0);
    const Point a = random_point(space, rng, 2.0);
    const Point c = random_point(space, rng, 2.0);
    b.record(check_cat0(space, y, a, c, tg, 1e-9).max_residual, y.str() + " " + a.str() + " " + c.str());
  }
  return b.done();
}

}  // namespace detail

inline std::vector<ValidationRow> run_validation(const std::vector<Space>& spaces, const ValidationOptions& opt,
                                                 std::size_t threads = 1) {
  struct Task {
    Space space;
    std::optional<CatalogueEntry> entry;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  std::uint64_t s = opt.seed;
  for (const Space& sp : spaces) {
    if (!opt.prox_only) tasks.push_back({sp, std::nullopt, s++});
    for (const CatalogueEntry& e : validation_catalogue(sp)) tasks.push_back({sp, e, s++});
  }
  const auto parts = parallel_map<std::vector<ValidationRow>>(
      tasks.size(),
      [&](std::size_t i) {
        const Task& t = tasks[i];
        if (!t.entry) return std::vector<ValidationRow>{detail::validate_cat0(t.space, opt, t.seed)};
        std::vector<ValidationRow> rows;
        try {
          rows = detail::validate_entry(t.space, *t.entry, opt, t.seed);
        } catch (const std::exception& ex) {
          ValidationRow r;
          r.space = t.space.describe();
          r.functional = t.entry->name;
          r.check = "error";
          r.params = ex.what();
          r.pass = false;
          rows.push_back(r);
        }
        return rows;
      },
      threads);
  std::vector<ValidationRow> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

/// CSV columns: space, functional, check, params, residual, tolerance, samples, pass.
inline std::string validation_csv(const std::vector<ValidationRow>& rows) {
  std::string out = "space,functional,check,params,residual,tolerance,samples,pass\n";
  auto clean = [](std::string s) {
    for (char& c : s)
      if (c == ',' || c == '\n') c = ';';
    return s;
  };
  for (const ValidationRow& r : rows)
    out += clean(r.space) + "," + clean(r.functional) + "," + r.check + "," + clean(r.params) + "," +
           format_number(r.residual) + "," + format_number(r.tolerance) + "," + std::to_string(r.samples) + "," +
           (r.pass ? "true" : "false") + "\n";
  return out;
}

}  // namespace mal
