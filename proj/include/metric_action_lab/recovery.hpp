#pragma once

// Recovery sequences Φ^h for Θ^{f^h}_{x0^h,x1^h} -> Θ^f_{x0,x1} around a target curve γ.
//
// Resolvent and flow modes concatenate five pieces of durations (τ, d0, 1, d1, τ):
//   φ0(s) = R_s x0^h,  ψ0 = R_τ(x0^h -> x0),  γ^h = R_τ∘γ,  ψ1 = R_τ(x1 -> x1^h),  φ1(s) = R_{τ-s} x1^h,
// with R = J (resolvent) or G (flow), and rescale linearly onto [0,1]. Pieces of zero metric
// length get zero duration. The vanishing-potential mode first moves each endpoint along the
// flow of the unscaled f until ε_h|∂f| is below a cap, then joins with the flow construction
// for ε_h f.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "metric_action_lab/curves.hpp"
#include "metric_action_lab/flow.hpp"
#include "metric_action_lab/proximal.hpp"

namespace mal {

enum class RecoveryMode { Resolvent, Flow, Vanishing };

inline const char* to_string(RecoveryMode m) {
  switch (m) {
    case RecoveryMode::Resolvent: return "resolvent";
    case RecoveryMode::Flow: return "flow";
    case RecoveryMode::Vanishing: return "vanishing";
  }
  return "?";
}

inline RecoveryMode recovery_mode_from_string(const std::string& s) {
  if (s == "resolvent") return RecoveryMode::Resolvent;
  if (s == "flow") return RecoveryMode::Flow;
  if (s == "vanishing") return RecoveryMode::Vanishing;
  throw ConfigError("unknown recovery mode '" + s + "'");
}

/// Upper limit for τ: min{1/(4λ⁻), 1/2}.
inline double recovery_tau_limit(double lambda) {
  const double lm = std::max(-lambda, 0.0);
  return lm > 0.0 ? std::min(1.0 / (4.0 * lm), 0.5) : 0.5;
}

/// τ_h = max(h^{-3/2}, (d0+d1)^{3/2}) capped at half the admissible limit.
inline double default_tau_schedule(double h, double d_sum, double lambda) {
  const double tau = std::max(std::pow(h, -1.5), std::pow(d_sum, 1.5));
  return std::min(tau, 0.5 * recovery_tau_limit(lambda));
}

struct RecoveryConfig {
  explicit RecoveryConfig(SampledCurve target) : gamma(std::move(target)) {}

  RecoveryMode mode = RecoveryMode::Resolvent;
  SampledCurve gamma;
  std::function<Point(double h)> x0h;  // empty: γ(0)
  std::function<Point(double h)> x1h;  // empty: γ(1)
  /// τ as a function of (h, d0 + d1); empty: default_tau_schedule.
  std::function<double(double h, double d_sum)> tau_schedule;
  std::function<double(double h)> eps;  // vanishing mode
  double ds = 1e-2;                     // ψ arclength step
  double dt_min = 1e-3;                 // φ sampling and flow step
  double slope_cap = 10.0;
  double endpoint_tol = 1e-9;
  ResolventOptions resolvent;
  ActionOptions action;
};

struct RecoveryPiece {
  std::string name;
  SampledCurve curve;
  double duration = 0.0;
  ActionValue own_action;    // on the piece's own [0,1] parametrization
  ExtendedReal contribution;  // share of the rescaled total
};

struct RecoveryOutput {
  double h = 0.0;
  double tau = 0.0;
  double total_duration = 0.0;
  SampledCurve curve;
  std::vector<RecoveryPiece> pieces;
  ActionValue action;  // Θ^{f_h}_{x0^h,x1^h}(Φ^h)
  Point x0h;
  Point x1h;
  std::optional<double> t0_start;  // vanishing mode
  std::optional<double> t0_end;
};

namespace detail {

/// s-grid on [0,τ]: geometric near 0 with max(8, ⌈τ/Δt_min⌉) nodes, then every step refined to ≤ Δt_min.
inline std::vector<double> phi_grid(double tau, double dt_min) {
  const std::size_t n = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(tau / dt_min)));
  const double ratio = std::pow(1.0 / (static_cast<double>(n) * static_cast<double>(n)), 1.0 / (n - 1.0));
  std::vector<double> geo(n + 1, 0.0);
  for (std::size_t j = 1; j <= n; ++j) geo[j] = tau * std::pow(ratio, static_cast<double>(n - j));
  geo[n] = tau;
  std::vector<double> out{0.0};
  for (std::size_t j = 1; j <= n; ++j) {
    const double a = geo[j - 1];
    const double b = geo[j];
    if (!(b > a)) continue;
    const auto m = static_cast<std::size_t>(std::ceil((b - a) / dt_min));
    for (std::size_t i = 1; i <= m; ++i) out.push_back(i == m ? b : a + (b - a) * static_cast<double>(i) / m);
  }
  return out;
}

/// Regularizing map R_τ and the path s -> R_s x on a fixed s-grid.
struct Regularizer {
  const FunctionalSpec& f;
  const Space& space;
  RecoveryMode mode;
  std::vector<double> grid;  // s-grid on [0, τ]
  ResolventOptions opt;

  double tau() const { return grid.back(); }

  Point apply(const Point& x) const {
    if (mode == RecoveryMode::Resolvent) return resolvent_point(f, space, tau(), x, opt);
    return flow_on_grid(f, space, x, grid, opt).back();
  }

  std::vector<Point> path(const Point& x) const {
    if (mode == RecoveryMode::Resolvent) {
      std::vector<Point> p{x};
      for (std::size_t j = 1; j < grid.size(); ++j) p.push_back(resolvent_point(f, space, grid[j], x, opt));
      return p;
    }
    return flow_on_grid(f, space, x, grid, opt).points;
  }
};

inline SampledCurve phi_curve(const Space& space, const std::vector<double>& grid, std::vector<Point> points) {
  std::vector<double> t(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) t[j] = grid[j] / grid.back();
  t.back() = 1.0;
  return SampledCurve(space, std::move(t), std::move(points));
}

inline std::size_t psi_intervals(double d, double ds) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(d / ds)));
}

inline RecoveryOutput assemble(const FunctionalSpec& f, std::vector<RecoveryPiece> pieces, const Point& x0h,
                               const Point& x1h, double h, double tau, const RecoveryConfig& cfg) {
  for (RecoveryPiece& p : pieces)
    if (length(p.curve) <= cfg.endpoint_tol) p.duration = 0.0;
  std::vector<Segment> segs;
  double total = 0.0;
  for (const RecoveryPiece& p : pieces) {
    segs.push_back({p.curve, p.duration, p.name});
    total += p.duration;
  }
  RecoveryOutput out{h, tau, total, concatenate_rescale(segs, cfg.endpoint_tol), {}, {}, x0h, x1h, {}, {}};
  for (RecoveryPiece& p : pieces) {
    p.own_action = action(p.curve, f, p.curve.front(), p.curve.back(), cfg.action);
    p.contribution = rescaled_contribution(p.own_action, p.duration, total);
  }
  out.pieces = std::move(pieces);
  out.action = action(out.curve, f, x0h, x1h, cfg.action);
  return out;
}

inline void require_finite_endpoint_slopes(const FunctionalSpec& f, const Space& space, const Point& a,
                                           const Point& b, const SlopeMethod& method) {
  for (const Point* p : {&a, &b})
    if (slope(f, space, *p, method).is_infinite())
      throw PreconditionError("endpoint " + p->str() + " has infinite slope for " + f.id +
                              "; the construction requires limsup_h |∂f^h|(x_0^h) < +∞");
}

inline RecoveryOutput build_regularized(const FunctionalSpec& f, const RecoveryConfig& cfg, double h,
                                        RecoveryMode mode, const Point& x0h, const Point& x1h,
                                        std::optional<double> tau_override = std::nullopt) {
  const SampledCurve& gamma = cfg.gamma;
  const Space& space = gamma.space();
  const Point& x0 = gamma.front();
  const Point& x1 = gamma.back();
  space.validate(x0h);
  space.validate(x1h);
  require_finite_endpoint_slopes(f, space, x0h, x1h, cfg.action.slope);
  const double d0 = distance(space, x0h, x0);
  const double d1 = distance(space, x1h, x1);
  const double tau = tau_override ? *tau_override
                     : cfg.tau_schedule ? cfg.tau_schedule(h, d0 + d1)
                                        : default_tau_schedule(h, d0 + d1, f.lambda);
  if (!(tau > 0.0) || !(tau < recovery_tau_limit(f.lambda)))
    throw ScheduleError("tau=" + std::to_string(tau) + " outside (0, min{1/(4λ⁻), 1/2})");
  const Regularizer R{f, space, mode, phi_grid(tau, cfg.dt_min), cfg.resolvent};

  std::vector<RecoveryPiece> pieces;
  auto piece = [](std::string name, SampledCurve c, double duration) {
    return RecoveryPiece{std::move(name), std::move(c), duration, {}, {}};
  };
  pieces.push_back(piece("phi0", phi_curve(space, R.grid, R.path(x0h)), tau));
  pieces.push_back(piece("psi0", SampledCurve::geodesic(space, x0h, x0, psi_intervals(d0, cfg.ds)).map(
                                     [&R](const Point& p) { return R.apply(p); }),
                         d0));
  pieces.push_back(piece("gamma", gamma.map([&R](const Point& p) { return R.apply(p); }), 1.0));
  pieces.push_back(piece("psi1", SampledCurve::geodesic(space, x1, x1h, psi_intervals(d1, cfg.ds)).map(
                                     [&R](const Point& p) { return R.apply(p); }),
                         d1));
  pieces.push_back(piece("phi1", phi_curve(space, R.grid, R.path(x1h)).reversed(), tau));
  return assemble(f, std::move(pieces), x0h, x1h, h, tau, cfg);
}

inline Point endpoint(const std::function<Point(double)>& law, const Point& fallback, double h) {
  return law ? law(h) : fallback;
}

struct EndpointRepair {
  SampledCurve piece;  // t -> G_t^f x on [0, t0], parametrized by t/t0
  double t0 = 0.0;
};

/// Flow of f from x on (0, ε) until ε|∂f|(x_t) <= cap at a positive grid time. Steps start at
/// ε²/64 and double up to min(ε/64, Δt_min, (Δs/10)/|∂f|), so t0/ε -> 0 and no single movement
/// exceeds Δs/10 to first order.
inline EndpointRepair repair_endpoint(const FunctionalSpec& f, const Space& space, const Point& x, double eps,
                                      const RecoveryConfig& cfg) {
  space.validate(x);
  const double move = 0.1 * cfg.ds;
  std::vector<double> times{0.0};
  std::vector<Point> points{x};
  for (std::size_t k = 0; k < 1000000; ++k) {
    const ExtendedReal s = slope(f, space, points.back(), cfg.action.slope);
    if (k > 0 && s.is_finite() && eps * s.value() <= cfg.slope_cap) {
      std::vector<double> t = times;
      for (double& v : t) v /= times.back();
      t.back() = 1.0;
      return {SampledCurve(space, std::move(t), std::move(points)), times.back()};
    }
    double dt = std::min({eps * eps / 64.0 * std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(k, 60))),
                          eps / 64.0, cfg.dt_min});
    if (s.is_finite() && s.value() > 0.0) dt = std::min(dt, move / s.value());
    if (s.is_infinite()) break;
    if (!(times.back() + dt < eps)) break;
    dt = std::min(dt, 0.5 * max_resolvent_tau(f));
    points.push_back(resolvent_point(f, space, dt, points.back(), cfg.resolvent));
    times.push_back(times.back() + dt);
  }
  throw ScheduleError("no grid time in (0, " + std::to_string(eps) + ") brings eps·|∂f| below " +
                      std::to_string(cfg.slope_cap) + " from " + x.str() + "; refine the flow step");
}

}  // namespace detail

/// Resolvent-based recovery curve for f_h (τ from the schedule unless given).
inline RecoveryOutput build_recovery_resolvent(const FunctionalSpec& f_h, const RecoveryConfig& cfg, double h,
                                               std::optional<double> tau = std::nullopt) {
  return detail::build_regularized(f_h, cfg, h, RecoveryMode::Resolvent,
                                   detail::endpoint(cfg.x0h, cfg.gamma.front(), h),
                                   detail::endpoint(cfg.x1h, cfg.gamma.back(), h), tau);
}

/// Flow-based recovery curve: G_τ in place of J_τ.
inline RecoveryOutput build_recovery_flow(const FunctionalSpec& f_h, const RecoveryConfig& cfg, double h,
                                          std::optional<double> tau = std::nullopt) {
  return detail::build_regularized(f_h, cfg, h, RecoveryMode::Flow, detail::endpoint(cfg.x0h, cfg.gamma.front(), h),
                                   detail::endpoint(cfg.x1h, cfg.gamma.back(), h), tau);
}

/// Vanishing-potential recovery for ε_h f. The endpoint flow pieces of the unscaled f over
/// [0, t0] are run as flows of ε_h f over [0, t0/ε_h].
inline RecoveryOutput build_recovery_vanishing(const FunctionalSpec& f, const RecoveryConfig& cfg, double h,
                                               std::optional<double> tau = std::nullopt) {
  if (!cfg.eps) throw ConfigError("vanishing mode needs an eps law");
  const double eps = cfg.eps(h);
  if (!(eps > 0.0)) throw DomainError("eps_h must be positive");
  const Space& space = cfg.gamma.space();
  const Point x0h = detail::endpoint(cfg.x0h, cfg.gamma.front(), h);
  const Point x1h = detail::endpoint(cfg.x1h, cfg.gamma.back(), h);
  for (const Point* p : {&x0h, &x1h})
    if (evaluate(f, *p).is_infinite())
      throw PreconditionError("endpoint " + p->str() + " lies outside D(f); the construction requires "
                              "limsup_h f(x_0^h) <= f(x_0) < +∞");
  const FunctionalSpec fe = scaled(f, eps);
  const detail::EndpointRepair r0 = detail::repair_endpoint(f, space, x0h, eps, cfg);
  const detail::EndpointRepair r1 = detail::repair_endpoint(f, space, x1h, eps, cfg);
  RecoveryOutput mid = detail::build_regularized(fe, cfg, h, RecoveryMode::Flow, r0.piece.back(),
                                                 r1.piece.back(), tau);
  std::vector<RecoveryPiece> pieces;
  pieces.push_back({"flow0", r0.piece, r0.t0 / eps, {}, {}});
  for (RecoveryPiece& p : mid.pieces) pieces.push_back(std::move(p));
  pieces.push_back({"flow1", r1.piece.reversed(), r1.t0 / eps, {}, {}});
  RecoveryOutput out = detail::assemble(fe, std::move(pieces), x0h, x1h, h, mid.tau, cfg);
  out.t0_start = r0.t0;
  out.t0_end = r1.t0;
  return out;
}

inline RecoveryOutput build_recovery(const FunctionalSpec& f, const RecoveryConfig& cfg, double h,
                                     std::optional<double> tau = std::nullopt) {
  switch (cfg.mode) {
    case RecoveryMode::Resolvent: return build_recovery_resolvent(f, cfg, h, tau);
    case RecoveryMode::Flow: return build_recovery_flow(f, cfg, h, tau);
    case RecoveryMode::Vanishing: return build_recovery_vanishing(f, cfg, h, tau);
  }
  throw ConfigError("unknown recovery mode");
}

// ---------------------------------------------------------------------------------------------
// Diagonal selection

struct DiagonalCell {
  ExtendedReal action;
  double d_inf = 0.0;
};

struct DiagonalSelection {
  std::vector<std::optional<std::size_t>> choice;      // per h index: selected n
  std::vector<std::optional<std::size_t>> thresholds;  // per n: first h index H_n
  bool inconclusive = false;
};

/// cells[n][j] is the recovery built with τ_n at the j-th h. Row n is admissible from h index H
/// on if Θ^h <= (1+Cτ_n)^C Θ(γ) + Cτ_n and d_∞ < ε_n for all later h; thresholds are made
/// strictly increasing and each h takes the largest n whose threshold it has passed.
inline DiagonalSelection diagonal_select(const std::vector<std::vector<DiagonalCell>>& cells,
                                         const std::vector<double>& tau, const std::vector<double>& eps,
                                         const ExtendedReal& target, double C = 4.0) {
  if (cells.size() != tau.size() || tau.size() != eps.size())
    throw DomainError("diagonal grid, tau list and eps list differ in length");
  DiagonalSelection sel;
  const std::size_t nh = cells.empty() ? 0 : cells.front().size();
  sel.choice.assign(nh, std::nullopt);
  sel.thresholds.assign(cells.size(), std::nullopt);
  std::optional<std::size_t> prev;
  for (std::size_t n = 0; n < cells.size(); ++n) {
    if (cells[n].size() != nh) throw DomainError("ragged diagonal grid");
    if (!(tau[n] < eps[n])) throw DomainError("diagonal selection needs tau_n < eps_n");
    const ExtendedReal bound = std::pow(1.0 + C * tau[n], C) * target + ExtendedReal(C * tau[n]);
    std::optional<std::size_t> first;
    for (std::size_t j = nh; j-- > 0;) {
      const DiagonalCell& c = cells[n][j];
      if (!(c.action <= bound) || !(c.d_inf < eps[n])) break;
      first = j;
    }
    if (first && prev && *first <= *prev) first = *prev + 1 < nh ? std::optional<std::size_t>(*prev + 1) : std::nullopt;
    if (!first) {
      sel.inconclusive = true;
      break;
    }
    sel.thresholds[n] = first;
    prev = first;
  }
  for (std::size_t j = 0; j < nh; ++j)
    for (std::size_t n = 0; n < cells.size(); ++n)
      if (sel.thresholds[n] && *sel.thresholds[n] <= j) sel.choice[j] = n;
  return sel;
}

}  // namespace mal
