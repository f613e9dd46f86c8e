#pragma once

// Subcommand implementations behind the command-line tool. Each reads a parsed JSON config,
// writes its artifacts into `out`, and returns the list of asserted invariants.

#include <filesystem>
#include <string>
#include <vector>

#include "metric_action_lab/config.hpp"
#include "metric_action_lab/validate.hpp"

namespace mal {

struct CommandResult {
  std::vector<Check> checks;
  std::string summary;  // one line for the terminal
  std::vector<std::filesystem::path> files;

  bool ok() const {
    for (const Check& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

namespace detail {

inline Json checks_json(const std::vector<Check>& checks) {
  Json a = Json::array();
  for (const Check& c : checks) a.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return a;
}

inline Json command_summary(const std::string& command, const CommandResult& r, const Json& config) {
  Json j;
  j["schema"] = kReportSchema;
  j["version"] = kVersion;
  j["command"] = command;
  j["checks"] = checks_json(r.checks);
  j["all_checks_passed"] = r.ok();
  j["config"] = config;
  return j;
}

inline std::string h_tag(double h) {
  std::string s = format_number(h);
  for (char& c : s)
    if (c == '.') c = 'p';
  return s;
}

inline std::filesystem::path config_base(const Json& cfg) {
  return cfg.contains("_base") ? std::filesystem::path(cfg.at("_base").get<std::string>()) : std::filesystem::path{};
}

/// The config as echoed into reports, without CLI-injected keys.
inline Json config_echo(Json cfg) {
  cfg.erase("_base");
  return cfg;
}

inline void expect_verdict(const Json& cfg, ExperimentReport& rep) {
  if (!cfg.contains("expect_verdict")) return;
  const std::string want = cfg.at("expect_verdict").get<std::string>();
  rep.check("expected_verdict", want == to_string(rep.verdict), "expected " + want + ", got " + to_string(rep.verdict));
}

inline CommandResult finish_experiment(ExperimentReport& rep, const Json& cfg, const std::filesystem::path& out) {
  rep.config = config_echo(cfg);
  rep.seed = cfg.value("seed", std::uint64_t{0});
  expect_verdict(cfg, rep);
  emit_report(rep, out, rep.experiment);
  CommandResult r;
  r.checks = rep.checks;
  r.summary = rep.experiment + ": " + to_string(rep.verdict) + " (" + std::to_string(rep.rows.size()) + " rows)";
  r.files = {out / (rep.experiment + ".csv"), out / (rep.experiment + ".json")};
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------

/// Config: samples, flow_samples, seed, flow_dt, flow_T, lipschitz_estimate, tol_* and an
/// optional "spaces" array. Writes validation.csv (or prox.csv) and a JSON summary.
inline CommandResult cmd_validate(const Json& cfg, const std::filesystem::path& out, bool prox_only,
                                  std::size_t threads) {
  require_schema(cfg);
  ValidationOptions opt;
  opt.prox_only = prox_only;
  opt.samples = cfg.value("samples", opt.samples);
  opt.flow_samples = cfg.value("flow_samples", opt.flow_samples);
  opt.seed = cfg.value("seed", opt.seed);
  opt.flow_dt = cfg.value("flow_dt", opt.flow_dt);
  opt.flow_T = cfg.value("flow_T", opt.flow_T);
  opt.lipschitz_estimate = cfg.value("lipschitz_estimate", opt.lipschitz_estimate);
  opt.tol_closed = cfg.value("tol_closed", opt.tol_closed);
  opt.tol_sup = cfg.value("tol_sup", opt.tol_sup);
  opt.tol_tripod = cfg.value("tol_tripod", opt.tol_tripod);
  opt.tol_exact = cfg.value("tol_exact", opt.tol_exact);
  opt.tol_contraction = cfg.value("tol_contraction", opt.tol_contraction);
  opt.tol_energy = cfg.value("tol_energy", opt.tol_energy);
  std::vector<Space> spaces;
  if (cfg.contains("spaces")) {
    for (const Json& s : cfg.at("spaces")) spaces.push_back(space_from_json(s));
  } else {
    spaces = default_validation_spaces();
  }
  const std::vector<ValidationRow> rows = run_validation(spaces, opt, threads);
  CommandResult r;
  std::size_t failed = 0;
  for (const ValidationRow& row : rows) {
    if (!row.pass) ++failed;
    r.checks.push_back({row.space + "/" + row.functional + "/" + row.check, row.pass,
                        "residual " + format_number(row.residual) + " tolerance " + format_number(row.tolerance)});
  }
  const std::string stem = prox_only ? "prox" : "validation";
  write_file(out / (stem + ".csv"), validation_csv(rows));
  write_json(out / (stem + ".json"), detail::command_summary(prox_only ? "validate prox" : "validate", r,
                                                             detail::config_echo(cfg)));
  r.files = {out / (stem + ".csv"), out / (stem + ".json")};
  r.summary = stem + ": " + std::to_string(rows.size() - failed) + "/" + std::to_string(rows.size()) + " rows pass";
  return r;
}

/// Config: space, functional, x0, T, n_steps, optional x1 (contraction partner) and
/// evi_points (reference points; default x0 and the final point). Writes trajectory.csv with
/// columns t, point fields, f_value, speed, slope; speed is d(x_{k-1},x_k)/Δt and nan at t=0.
inline CommandResult cmd_flow(const Json& cfg, const std::filesystem::path& out) {
  require_schema(cfg);
  const Space space = space_from_json(cfg.at("space"));
  const FunctionalSpec f = functional_from_json(space, cfg.at("functional"));
  const Point x0 = point_from_config(space, cfg.at("x0"));
  const double T = param_or(cfg, "T", 1.0);
  const std::size_t n = cfg.value("n_steps", std::size_t{1000});
  const double lip = cfg.value("lipschitz_estimate", 10.0);
  const double tol_energy = cfg.value("tol_energy", 0.02);
  const double tol_contraction = cfg.value("tol_contraction", 1e-3);
  const FlowTrajectory traj = flow(f, space, x0, T, n);
  const double slack = flow_slack(traj.step, lip);

  std::string csv = curve_csv_header(space) + ",f_value,speed,slope\n";
  const auto speeds = trajectory_speeds(traj);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double v = k == 0 ? std::numeric_limits<double>::quiet_NaN() : speeds[k - 1];
    csv += format_number(traj.times[k]) + "," + point_csv_fields(traj.points[k]) + "," +
           format_number(traj.f_values[k]) + "," + format_number(v) + "," +
           format_number(slope(f, space, traj.points[k]).value()) + "\n";
  }
  write_file(out / "trajectory.csv", csv);

  CommandResult r;
  std::vector<Point> refs;
  if (cfg.contains("evi_points")) {
    for (const Json& p : cfg.at("evi_points")) refs.push_back(point_from_config(space, p));
  } else {
    refs = {x0, traj.back()};
  }
  ResidualReport evi;
  evi.tolerance = slack;
  for (const Point& v : refs) evi.merge(check_evi(traj, f, f.lambda, v, slack));
  r.checks.push_back({"evi", evi.passed(), "residual " + format_number(evi.max_residual) + " slack " +
                                               format_number(slack)});
  const double mono = slope_monotonicity_residual(traj, f);
  r.checks.push_back({"slope_monotonicity", mono <= slack, "residual " + format_number(mono)});
  Json summary_extra = Json::object();
  if (std::isfinite(traj.f_values.front())) {
    const EnergyReport er = check_energy_identity(traj, f);
    r.checks.push_back({"energy_identity", er.relative_error <= tol_energy,
                        "relative error " + format_number(er.relative_error)});
    summary_extra["energy_drop"] = json_number(er.energy_drop);
    summary_extra["kinetic_integral"] = json_number(er.kinetic_integral);
  }
  if (cfg.contains("x1")) {
    const Point x1 = point_from_config(space, cfg.at("x1"));
    const ResidualReport c = check_contraction(f, space, x0, x1, T, n, tol_contraction);
    r.checks.push_back({"contraction", c.passed(), "residual " + format_number(c.max_residual)});
  }
  Json j = detail::command_summary("flow", r, detail::config_echo(cfg));
  j["final_point"] = point_to_json(traj.back());
  j["step"] = json_number(traj.step);
  for (auto it = summary_extra.begin(); it != summary_extra.end(); ++it) j[it.key()] = it.value();
  write_json(out / "flow.json", j);
  r.files = {out / "trajectory.csv", out / "flow.json"};
  r.summary = "flow: " + std::to_string(traj.size()) + " nodes, final " + traj.back().str();
  return r;
}

/// Config: space, functional, curve (see curve_from_config), optional include_endpoint_slopes
/// and expect_total / expect_tol. Writes curve.csv and action.json.
inline CommandResult cmd_action(const Json& cfg, const std::filesystem::path& out) {
  require_schema(cfg);
  const Space space = space_from_json(cfg.at("space"));
  const FunctionalSpec f = functional_from_json(space, cfg.at("functional"));
  const SampledCurve c = curve_from_config(space, cfg.at("curve"), f, detail::config_base(cfg));
  ActionOptions ao;
  ao.include_endpoint_slopes = cfg.value("include_endpoint_slopes", ao.include_endpoint_slopes);
  ao.endpoint_tol = cfg.value("endpoint_tol", ao.endpoint_tol);
  const ActionValue a = action(c, f, c.front(), c.back(), ao);
  const ExtendedReal amgm = discrete_amgm_bound(c, f, ao.slope);
  CommandResult r;
  r.checks.push_back({"amgm_below_action", amgm <= a.total,
                      "amgm " + format_number(amgm.value()) + " action " + format_number(a.total.value())});
  r.checks.push_back({"kinetic_at_least_length_squared", length(c) * length(c) <= a.kinetic * (1.0 + 1e-12),
                      "length " + format_number(length(c))});
  if (cfg.contains("expect_total")) {
    const double want = param(cfg.at("expect_total"), {});
    const double tol = cfg.value("expect_tol", 1e-6);
    r.checks.push_back({"expected_total", std::abs(a.total.value() - want) <= tol,
                        "expected " + format_number(want) + " within " + format_number(tol)});
  }
  write_file(out / "curve.csv", curve_to_csv(c));
  Json j = detail::command_summary("action", r, detail::config_echo(cfg));
  j["total"] = json_number(a.total);
  j["kinetic"] = json_number(a.kinetic);
  j["potential"] = json_number(a.potential);
  j["length"] = json_number(length(c));
  j["discrete_amgm"] = json_number(amgm);
  j["nodes"] = c.size();
  write_json(out / "action.json", j);
  r.files = {out / "curve.csv", out / "action.json"};
  r.summary = "action: total " + format_number(a.total.value());
  return r;
}

namespace detail {

struct ExperimentInputs {
  Space space = Space::half_line();
  FunctionalFamily family;
  SampledCurve gamma;
  std::vector<double> h_list;
  Discretization disc;
};

inline ExperimentInputs experiment_inputs(const Json& cfg) {
  const Space space = space_from_json(cfg.at("space"));
  FunctionalFamily family = family_from_json(space, cfg.at("family"));
  SampledCurve gamma = curve_from_config(space, cfg.at("gamma"), family.limit, config_base(cfg));
  return {space, std::move(family), std::move(gamma), h_list_from_json(cfg.at("h_list")),
          discretization_from_json(cfg.value("discretization", Json::object()))};
}

}  // namespace detail

/// Config: space, family, gamma, recovery, h_list and an optional diagonal block
/// {"tau": [...], "eps": [...], "C"}. Writes recovery_h<h>.csv per h and recovery.json.
inline CommandResult cmd_recovery(const Json& cfg, const std::filesystem::path& out, std::size_t threads) {
  require_schema(cfg);
  const detail::ExperimentInputs in = detail::experiment_inputs(cfg);
  const RecoveryConfig rc = recovery_from_json(in.space, cfg.value("recovery", Json::object()), in.gamma);
  struct Built {
    std::optional<RecoveryOutput> out;
    std::string error;
  };
  const auto built = parallel_map<Built>(
      in.h_list.size(),
      [&](std::size_t i) {
        try {
          return Built{build_recovery(in.family.member(in.h_list[i]), rc, in.h_list[i]), {}};
        } catch (const std::exception& e) {
          return Built{std::nullopt, e.what()};
        }
      },
      threads);

  CommandResult r;
  Json rows = Json::array();
  bool endpoints = true;
  bool decomposition = true;
  bool all_built = true;
  for (std::size_t i = 0; i < built.size(); ++i) {
    Json row;
    row["h"] = json_number(in.h_list[i]);
    if (!built[i].out) {
      all_built = false;
      row["error"] = built[i].error;
      rows.push_back(row);
      continue;
    }
    const RecoveryOutput& o = *built[i].out;
    const std::string file = "recovery_h" + detail::h_tag(o.h) + ".csv";
    write_file(out / file, curve_to_csv(o.curve));
    r.files.push_back(out / file);
    const double end_err = std::max(distance(in.space, o.curve.front(), o.x0h), distance(in.space, o.curve.back(), o.x1h));
    endpoints = endpoints && end_err <= rc.endpoint_tol;
    ExtendedReal sum(0.0);
    Json pieces = Json::array();
    for (const RecoveryPiece& p : o.pieces) {
      sum += p.contribution;
      pieces.push_back({{"name", p.name},
                        {"duration", json_number(p.duration)},
                        {"length", json_number(length(p.curve))},
                        {"own_action", json_number(p.own_action.total)},
                        {"contribution", json_number(p.contribution)}});
    }
    const bool dec = o.action.total.is_infinite()
                         ? sum.is_infinite()
                         : std::abs(sum.value() - o.action.total.value()) <= 1e-9 * std::max(1.0, o.action.total.value());
    decomposition = decomposition && dec;
    row["tau"] = json_number(o.tau);
    row["total_duration"] = json_number(o.total_duration);
    row["action"] = json_number(o.action.total);
    row["d_inf"] = json_number(uniform_distance(o.curve, in.gamma));
    row["endpoint_error"] = json_number(end_err);
    if (o.t0_start) row["t0_start"] = json_number(*o.t0_start);
    if (o.t0_end) row["t0_end"] = json_number(*o.t0_end);
    row["curve"] = file;
    row["pieces"] = pieces;
    rows.push_back(row);
  }
  r.checks.push_back({"recovery_endpoints_exact", endpoints, ""});
  r.checks.push_back({"piece_decomposition", decomposition, ""});
  r.checks.push_back({"all_builders_succeeded", all_built, ""});

  Json diagonal = nullptr;
  if (cfg.contains("diagonal")) {
    const Json& d = cfg.at("diagonal");
    const std::vector<double> taus = d.at("tau").get<std::vector<double>>();
    std::vector<double> eps;
    if (d.contains("eps")) {
      eps = d.at("eps").get<std::vector<double>>();
    } else {
      for (std::size_t n = 0; n < taus.size(); ++n) eps.push_back(1.0 / static_cast<double>(n + 1));
    }
    const double C = d.value("C", in.disc.diagonal_C);
    const FunctionalSpec target_f = rc.mode == RecoveryMode::Vanishing ? zero_functional() : in.family.limit;
    const ExtendedReal target = action(in.gamma, target_f, in.gamma.front(), in.gamma.back(), rc.action).total;
    const std::size_t nh = in.h_list.size();
    const auto flat = parallel_map<DiagonalCell>(
        taus.size() * nh,
        [&](std::size_t k) {
          const std::size_t n = k / nh;
          const double h = in.h_list[k % nh];
          try {
            const RecoveryOutput o = build_recovery(in.family.member(h), rc, h, taus[n]);
            return DiagonalCell{o.action.total, uniform_distance(o.curve, in.gamma)};
          } catch (const std::exception&) {
            return DiagonalCell{ExtendedReal::infinity(), std::numeric_limits<double>::infinity()};
          }
        },
        threads);
    std::vector<std::vector<DiagonalCell>> cells(taus.size());
    for (std::size_t k = 0; k < flat.size(); ++k) cells[k / nh].push_back(flat[k]);
    const DiagonalSelection sel = diagonal_select(cells, taus, eps, target, C);
    Json choice = Json::array();
    for (const auto& c : sel.choice) choice.push_back(c ? Json(*c) : Json(nullptr));
    Json thresholds = Json::array();
    for (const auto& t : sel.thresholds) thresholds.push_back(t ? Json(*t) : Json(nullptr));
    Json grid = Json::array();
    for (const auto& row : cells) {
      Json g = Json::array();
      for (const DiagonalCell& c : row) g.push_back({{"action", json_number(c.action)}, {"d_inf", json_number(c.d_inf)}});
      grid.push_back(g);
    }
    diagonal = {{"target", json_number(target)}, {"C", json_number(C)},  {"choice", choice},
                {"thresholds", thresholds},     {"inconclusive", sel.inconclusive}, {"grid", grid}};
    if (d.contains("expect_inconclusive")) {
      const bool want = d.at("expect_inconclusive").get<bool>();
      r.checks.push_back({"diagonal_expected_outcome", want == sel.inconclusive,
                          std::string("inconclusive=") + (sel.inconclusive ? "true" : "false")});
    }
  }

  Json j = detail::command_summary("recovery", r, detail::config_echo(cfg));
  j["mode"] = to_string(rc.mode);
  j["rows"] = rows;
  j["diagonal"] = diagonal;
  j["notes"] = Json::array({"endpoint repair pieces are geodesic"});
  write_json(out / "recovery.json", j);
  r.files.push_back(out / "recovery.json");
  r.summary = "recovery: " + std::to_string(rows.size()) + " values of h";
  return r;
}

/// Config: space, family, gamma, recovery, h_list, discretization, expect_verdict.
inline CommandResult cmd_gamma_positive(const Json& cfg, const std::filesystem::path& out, std::size_t threads) {
  require_schema(cfg);
  const detail::ExperimentInputs in = detail::experiment_inputs(cfg);
  PositiveSetup s{in.family, recovery_from_json(in.space, cfg.value("recovery", Json::object()), in.gamma), in.h_list};
  ExperimentReport rep = run_positive(s, in.disc, threads);
  return detail::finish_experiment(rep, cfg, out);
}

/// Config: h_list, eps (expression in h, default "1/h"), discretization, expect_verdict.
inline CommandResult cmd_gamma_example1(const Json& cfg, const std::filesystem::path& out, std::size_t threads) {
  require_schema(cfg);
  const Expression eps = Expression::parse(cfg.value("eps", std::string("1/h")));
  ExperimentReport rep = run_example1(h_list_from_json(cfg.at("h_list")),
                                      discretization_from_json(cfg.value("discretization", Json::object())), eps,
                                      threads);
  return detail::finish_experiment(rep, cfg, out);
}

/// Config: h_list, discretization, expect_verdict.
inline CommandResult cmd_gamma_example2(const Json& cfg, const std::filesystem::path& out, std::size_t threads) {
  require_schema(cfg);
  ExperimentReport rep = run_example2(h_list_from_json(cfg.at("h_list")),
                                      discretization_from_json(cfg.value("discretization", Json::object())), threads);
  return detail::finish_experiment(rep, cfg, out);
}

/// Config: space, family, gamma, h_list, sequence and expect_verdict. The sequence is
/// {"kind": "constant"} (γ itself), {"kind": "resolvent", "tau": expr, "functional": "limit"|"member"}
/// (J_τ applied nodewise) or {"kind": "flow", ...} (G_τ nodewise).
inline CommandResult cmd_gamma_liminf(const Json& cfg, const std::filesystem::path& out, std::size_t threads) {
  require_schema(cfg);
  const detail::ExperimentInputs in = detail::experiment_inputs(cfg);
  const Json seq = cfg.value("sequence", Json{{"kind", "constant"}});
  const std::string kind = seq.value("kind", std::string("constant"));
  if (kind != "constant" && kind != "resolvent" && kind != "flow")
    throw ConfigError("unknown liminf sequence kind '" + kind + "'");
  const bool use_member = seq.value("functional", std::string("limit")) == "member";
  const Json tau_j = seq.value("tau", Json("1/h"));
  const std::size_t steps = seq.value("flow_steps", std::size_t{100});
  const FunctionalFamily fam = in.family;
  const SampledCurve gamma = in.gamma;
  auto curves = [=](double h) {
    if (kind == "constant") return gamma;
    const FunctionalSpec f = use_member ? fam.member(h) : fam.limit;
    const double tau = param(tau_j, h);
    return gamma.map([&](const Point& p) {
      return kind == "resolvent" ? resolvent_point(f, gamma.space(), tau, p) : flow(f, gamma.space(), p, tau, steps).back();
    });
  };
  const LiminfSetup s{in.family, in.gamma, curves, in.h_list, {}};
  ExperimentReport rep = liminf_probe(s, in.disc, threads);
  return detail::finish_experiment(rep, cfg, out);
}

}  // namespace mal
