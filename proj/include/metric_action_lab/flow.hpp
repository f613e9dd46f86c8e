#pragma once

// EVI_λ gradient flows approximated by minimizing movements x_{k+1} = J_{Δt} x_k, and
// validators for the EVI inequality, contraction, the energy identity and the slope chain.

#include <cmath>
#include <string>
#include <vector>

#include "metric_action_lab/functionals.hpp"
#include "metric_action_lab/proximal.hpp"
#include "metric_action_lab/residual.hpp"

namespace mal {

struct FlowTrajectory {
  Space space = Space::half_line();
  std::vector<double> times;
  std::vector<Point> points;
  double step = 0.0;  // nominal Δt (uniform grids) or largest step
  std::vector<double> f_values;

  std::size_t size() const { return times.size(); }
  const Point& back() const { return points.back(); }
};

class FlowError : public Error {
 public:
  FlowError(const std::string& what, FlowTrajectory partial) : Error(what), partial_(std::move(partial)) {}
  const FlowTrajectory& partial() const { return partial_; }

 private:
  FlowTrajectory partial_;
};

/// Minimizing movements on an arbitrary increasing time grid starting at 0.
inline FlowTrajectory flow_on_grid(const FunctionalSpec& f, const Space& space, const Point& x,
                                   const std::vector<double>& times, const ResolventOptions& opt = {}) {
  if (times.empty() || times.front() != 0.0) throw DomainError("flow grid must start at t=0");
  space.validate(x);
  FlowTrajectory traj;
  traj.space = space;
  traj.times.push_back(0.0);
  traj.points.push_back(x);
  traj.f_values.push_back(evaluate(f, x).value());
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double dt = times[k] - times[k - 1];
    if (!(dt > 0.0)) throw DomainError("flow grid must be strictly increasing");
    if (!(dt < max_resolvent_tau(f))) throw DomainError("flow step exceeds 1/(2λ⁻)");
    traj.step = std::max(traj.step, dt);
    try {
      const Point next = resolvent_point(f, space, dt, traj.points.back(), opt);
      traj.times.push_back(times[k]);
      traj.points.push_back(next);
      traj.f_values.push_back(evaluate(f, next).value());
    } catch (const Error& e) {
      throw FlowError("flow of " + f.id + " failed at step " + std::to_string(k) + ": " + e.what(), traj);
    }
  }
  if (!std::isfinite(traj.f_values.back()))
    throw FlowError("flow of " + f.id + " left D(f); start point not in the closure of the domain", traj);
  return traj;
}

/// `n_steps` minimizing movements of size T/n_steps from x.
inline FlowTrajectory flow(const FunctionalSpec& f, const Space& space, const Point& x, double T,
                           std::size_t n_steps, const ResolventOptions& opt = {}) {
  if (!(T > 0.0) || n_steps == 0) throw DomainError("flow needs T > 0 and n_steps >= 1");
  std::vector<double> times(n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k) times[k] = T * static_cast<double>(k) / static_cast<double>(n_steps);
  FlowTrajectory traj = flow_on_grid(f, space, x, times, opt);
  traj.step = T / static_cast<double>(n_steps);
  return traj;
}

/// Discrete metric speed on each step, d(x_k, x_{k+1}) / (t_{k+1} - t_k).
inline std::vector<double> trajectory_speeds(const FlowTrajectory& traj) {
  std::vector<double> v;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k)
    v.push_back(distance(traj.space, traj.points[k], traj.points[k + 1]) / (traj.times[k + 1] - traj.times[k]));
  return v;
}

/// Slack term 5·L·Δt carried by derivative-based validators.
inline double flow_slack(double dt, double lipschitz_estimate = 10.0) { return 5.0 * lipschitz_estimate * dt; }

/// max over interior nodes of ½ d/dt d(x_t,v)² + (λ/2) d(x_t,v)² - f(v) + f(x_t), with a
/// central difference for the derivative. `tolerance` absorbs the O(Δt) slack.
inline ResidualReport check_evi(const FlowTrajectory& traj, const FunctionalSpec& f, double lambda, const Point& v,
                                double tolerance) {
  const ExtendedReal fv = evaluate(f, v);
  if (fv.is_infinite()) throw PreconditionError("EVI reference point must lie in D(f)");
  ResidualReport rep;
  rep.tolerance = tolerance;
  std::vector<double> d2(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) d2[k] = std::pow(distance(traj.space, traj.points[k], v), 2);
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    const double deriv = 0.5 * (d2[k + 1] - d2[k - 1]) / (traj.times[k + 1] - traj.times[k - 1]);
    rep.record(deriv + 0.5 * lambda * d2[k] - fv.value() + traj.f_values[k], "t=" + std::to_string(traj.times[k]));
  }
  return rep;
}

/// max over nodes of d(G_t x0, G_t x1) - e^{-λt} d(x0,x1).
inline ResidualReport check_contraction(const FunctionalSpec& f, const Space& space, const Point& x0,
                                        const Point& x1, double T, std::size_t n_steps, double tolerance,
                                        const ResolventOptions& opt = {}) {
  const FlowTrajectory a = flow(f, space, x0, T, n_steps, opt);
  const FlowTrajectory b = flow(f, space, x1, T, n_steps, opt);
  const double d0 = distance(space, x0, x1);
  ResidualReport rep;
  rep.tolerance = tolerance;
  for (std::size_t k = 0; k < a.size(); ++k)
    rep.record(distance(space, a.points[k], b.points[k]) - std::exp(-f.lambda * a.times[k]) * d0,
               "t=" + std::to_string(a.times[k]));
  return rep;
}

struct EnergyReport {
  double energy_drop = 0.0;       // f(x_0) - f(x_T)
  double kinetic_integral = 0.0;  // ∫ |x'|² dt
  double relative_error = 0.0;    // |drop - ∫|/max(1, drop)
  double max_speed_slope_gap = 0.0;
};

/// Energy identity -d/dt f(x_t) = |x'|² = |∂f|²(x_t) integrated over the trajectory.
inline EnergyReport check_energy_identity(const FlowTrajectory& traj, const FunctionalSpec& f,
                                          SlopeMethod slope_method = SlopeMethod::best()) {
  if (!std::isfinite(traj.f_values.front()) || !std::isfinite(traj.f_values.back()))
    throw PreconditionError("energy identity needs finite f along the trajectory");
  EnergyReport rep;
  rep.energy_drop = traj.f_values.front() - traj.f_values.back();
  const auto speeds = trajectory_speeds(traj);
  for (std::size_t k = 0; k < speeds.size(); ++k) {
    rep.kinetic_integral += speeds[k] * speeds[k] * (traj.times[k + 1] - traj.times[k]);
    const double s = slope(f, traj.space, traj.points[k + 1], slope_method).value();
    rep.max_speed_slope_gap = std::max(rep.max_speed_slope_gap, std::abs(speeds[k] - s));
  }
  rep.relative_error = std::abs(rep.energy_drop - rep.kinetic_integral) / std::max(1.0, rep.energy_drop);
  return rep;
}

struct SlopeBounds {
  double lower_residual = 0.0;  // c(λ,t)|∂f|(G_t x) - d(G_t x, x)/t
  double upper_residual = 0.0;  // d(G_t x, x)/t - e^{λ⁻t}|∂f|(x)
  double slack = 0.0;
  bool passed(double tol = 0.0) const {
    return lower_residual <= tol + slack && upper_residual <= tol + slack;
  }
};

/// (e^{λt}-1)/(λt) · |∂f|(G_t x) <= d(G_t x, x)/t <= e^{λ⁻t} |∂f|(x); the prefactor is 1 for λ = 0.
inline SlopeBounds check_slope_bounds_along_flow(const FunctionalSpec& f, const Space& space, const Point& x,
                                                 double t, std::size_t n_steps, double lipschitz_estimate = 10.0,
                                                 SlopeMethod slope_method = SlopeMethod::best(),
                                                 const ResolventOptions& opt = {}) {
  if (!(t > 0.0)) throw DomainError("slope bounds need t > 0");
  const ExtendedReal sx = slope(f, space, x, slope_method);
  if (sx.is_infinite()) throw PreconditionError("slope bounds need |∂f|(x) < +∞");
  const FlowTrajectory traj = flow(f, space, x, t, n_steps, opt);
  const double lt = f.lambda * t;
  const double factor = std::abs(lt) < 1e-12 ? 1.0 : std::expm1(lt) / lt;
  const double ratio = distance(space, traj.back(), x) / t;
  SlopeBounds b;
  b.lower_residual = factor * slope(f, space, traj.back(), slope_method).value() - ratio;
  b.upper_residual = ratio - std::exp(f.lambda_minus() * t) * sx.value();
  b.slack = flow_slack(traj.step, lipschitz_estimate);
  return b;
}

/// max_k of e^{λ t_{k+1}}|∂f|(x_{k+1}) - e^{λ t_k}|∂f|(x_k); nonpositive for exact flows.
inline double slope_monotonicity_residual(const FlowTrajectory& traj, const FunctionalSpec& f,
                                          SlopeMethod slope_method = SlopeMethod::best()) {
  double worst = -std::numeric_limits<double>::infinity();
  double prev = std::exp(f.lambda * traj.times[0]) * slope(f, traj.space, traj.points[0], slope_method).value();
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double cur = std::exp(f.lambda * traj.times[k]) * slope(f, traj.space, traj.points[k], slope_method).value();
    worst = std::max(worst, cur - prev);
    prev = cur;
  }
  return worst;
}

}  // namespace mal
