#pragma once

// Resolvent (proximal) map J_τ x = argmin f(·) + d(·,x)^2/(2τ) and validators for the resolvent
// inequalities: the slope bound chain, Lipschitz continuity in x, continuity in τ, the resolvent
// identity, and convergence J_τ^{f^h} x -> J_τ^f x along a family.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "metric_action_lab/chart.hpp"
#include "metric_action_lab/errors.hpp"
#include "metric_action_lab/functionals.hpp"
#include "metric_action_lab/minimize1d.hpp"
#include "metric_action_lab/spaces.hpp"

namespace mal {

struct ResolventOptions {
  bool use_closed_form = true;
  double objective_tol = 1e-10;
  double point_tol = 1e-8;
  std::size_t max_iter = 20000;
};

struct ResolventResult {
  Point point;
  double value = 0.0;  // f(u) + d(u,x)^2/(2τ)
  double tau = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;  // optimality estimate in distance units
  bool tie = false;       // tripod: two edges gave minima within 1e-12
  std::string method;
};

/// Raised when the solver exhausts its iteration budget; carries the best iterate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, ResolventResult best) : Error(what), best_(std::move(best)) {}
  const ResolventResult& best() const { return best_; }

 private:
  ResolventResult best_;
};

/// Largest admissible step: τ must lie in (0, 1/(2λ⁻)).
inline double max_resolvent_tau(const FunctionalSpec& f) {
  return f.lambda_minus() > 0.0 ? 1.0 / (2.0 * f.lambda_minus()) : std::numeric_limits<double>::infinity();
}

inline void require_tau(const FunctionalSpec& f, double tau) {
  if (!(tau > 0.0) || !(tau < max_resolvent_tau(f)))
    throw DomainError("tau=" + std::to_string(tau) + " outside (0, 1/(2λ⁻)) for " + f.id);
}

inline double moreau_objective(const FunctionalSpec& f, const Space& space, double tau, const Point& x,
                               const Point& y) {
  const double d = distance(space, y, x);
  return evaluate(f, y).value() + d * d / (2.0 * tau);
}

namespace detail {

// Minimizes over one edge (Tripod) or the half-line; `edge` < 0 means the half-line.
inline ResolventResult resolvent_on_piece(const FunctionalSpec& f, const Space& space, double tau, const Point& x,
                                          int edge) {
  const bool tripod = edge >= 0;
  auto make = [&](double s) { return tripod ? Point::tripod(edge, s) : Point::half_line(s); };
  auto objective = [&](double s) { return moreau_objective(f, space, tau, x, make(s)); };
  // Signed offset of x seen from this piece: distance from make(s) to x is |s - xs| on x's own
  // edge or on the half-line, and s + x_offset otherwise.
  const bool same = !tripod || x.edge == edge || x.at_branch();
  const double xs = same ? x.coords[0] : -x.coords[0];

  double lo = 0.0;
  double hi;
  if (tripod) {
    hi = space.edge_length(edge);
  } else {
    double step = std::max(1.0, std::abs(xs));
    hi = std::max(xs, 0.0) + step;
    for (int k = 0; k < 200; ++k) {
      const double mid = 0.5 * (std::max(xs, 0.0) + hi);
      if (f.gradient) {
        const double g = f.gradient(make(hi))[0] + (hi - xs) / tau;
        if (g >= 0.0) break;
      } else if (objective(hi) >= objective(mid)) {
        break;
      }
      step *= 2.0;
      hi = std::max(xs, 0.0) + step;
    }
  }
  ResolventResult r;
  r.tau = tau;
  if (f.gradient) {
    auto g = [&](double s) {
      const double gf = f.gradient(make(s))[0];
      return gf + (s - xs) / tau;
    };
    const Minimum1D m = bisect_monotone(g, lo, hi);
    r.point = make(m.x);
    r.iterations = m.iterations;
    r.residual = m.bracket;
    r.method = "bisection";
  } else {
    const Minimum1D m = golden_section(objective, lo, hi);
    r.point = make(m.x);
    r.iterations = m.iterations;
    r.residual = m.bracket;
    r.method = "golden_section";
  }
  r.value = objective(r.point.coords[0]);
  return r;
}

inline std::vector<double> project_domain(const FunctionalSpec& f, const LinearChart& chart, std::vector<double> z) {
  chart.project(z);
  if (f.domain_projection) z = f.domain_projection(chart.point(z)).coords;
  return z;
}

inline ResolventResult resolvent_vector(const FunctionalSpec& f, const Space& space, double tau, const Point& x,
                                        const ResolventOptions& opt) {
  const LinearChart chart(space);
  const double w = chart.weight();
  const std::vector<double> zx = chart.coords(x);
  const std::size_t n = zx.size();
  auto F = [&](const std::vector<double>& z) { return moreau_objective(f, space, tau, x, chart.point(z)); };
  auto wnorm = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(w * s);
  };

  std::vector<double> z = project_domain(f, chart, zx);
  double Fz = F(z);
  ResolventResult r;
  r.tau = tau;
  std::size_t it = 0;

  if (f.gradient && std::isfinite(Fz)) {
    r.method = "projected_gradient";
    // Distance to the minimizer is at most τ|G|/(1+λτ), G the gradient mapping with step τ.
    auto stationarity = [&](const std::vector<double>& at) {
      std::vector<double> g = f.gradient(chart.point(at));
      std::vector<double> probe(n);
      for (std::size_t i = 0; i < n; ++i) probe[i] = at[i] - tau * (g[i] + (at[i] - zx[i]) / tau);
      probe = project_domain(f, chart, probe);
      return wnorm(probe, at) / (1.0 + std::min(f.lambda, 0.0) * tau);
    };
    double step = tau;
    double res = stationarity(z);
    while (it < opt.max_iter && res > 0.0) {
      ++it;
      std::vector<double> g = f.gradient(chart.point(z));
      for (std::size_t i = 0; i < n; ++i) g[i] += (z[i] - zx[i]) / tau;
      std::vector<double> trial(n);
      double Ft = 0.0;
      const double step_before = step;
      for (int bt = 0; bt < 80; ++bt) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = z[i] - step * g[i];
        trial = project_domain(f, chart, trial);
        Ft = F(trial);
        double lin = 0.0;
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          lin += g[i] * (trial[i] - z[i]);
          sq += (trial[i] - z[i]) * (trial[i] - z[i]);
        }
        if (Ft <= Fz + w * lin + w * sq / (2.0 * step) + 1e-15 * std::abs(Fz)) break;
        step *= 0.5;
      }
      double res_trial = stationarity(trial);
      if (!(Ft < Fz)) {
        // Near the minimizer F stops resolving progress; retry the unshrunk step and judge it by stationarity.
        step = step_before;
        for (int bt = 0; bt < 40; ++bt, step *= 0.5) {
          for (std::size_t i = 0; i < n; ++i) trial[i] = z[i] - step * g[i];
          trial = project_domain(f, chart, trial);
          res_trial = stationarity(trial);
          if (res_trial < res) break;
        }
        if (!(res_trial < res)) break;
        Ft = F(trial);
      }
      z = trial;
      Fz = std::min(Fz, Ft);
      res = res_trial;
      if (res <= 1e-3 * opt.point_tol) break;
      step = std::min(step * 1.5, 4.0 * tau);
    }
    r.residual = res;
  } else {
    r.method = "coordinate_descent";
    double R = 1.0;
    for (double c : zx) R = std::max(R, std::abs(c));
    double last_gain = 0.0;
    while (it < opt.max_iter && R > 1e-13) {
      ++it;
      const double before = Fz;
      for (std::size_t i = 0; i < n; ++i) {
        auto along = [&](double c) {
          std::vector<double> t = z;
          t[i] = c;
          return F(project_domain(f, chart, t));
        };
        const Minimum1D m = golden_section(along, z[i] - R, z[i] + R, 1e-14, 16);
        if (m.value < Fz) {
          z[i] = m.x;
          z = project_domain(f, chart, z);
          Fz = F(z);
        }
      }
      last_gain = before - Fz;
      if (last_gain <= opt.objective_tol * 1e-3) R *= 0.5;
    }
    r.residual = R;
  }
  r.point = chart.point(z);
  r.value = Fz;
  r.iterations = it;
  if (!(r.residual <= opt.point_tol))
    throw ConvergenceError("resolvent of " + f.id + " did not converge at " + x.str(), r);
  return r;
}

}  // namespace detail

/// J_τ^f x. Uses the closed-form prox when the functional supplies one and options allow it.
inline ResolventResult resolvent(const FunctionalSpec& f, const Space& space, double tau, const Point& x,
                                 const ResolventOptions& opt = {}) {
  require_tau(f, tau);
  space.validate(x);
  if (opt.use_closed_form && f.closed_form_prox) {
    ResolventResult r;
    r.point = f.closed_form_prox(tau, x);
    r.tau = tau;
    r.value = moreau_objective(f, space, tau, x, r.point);
    r.method = "closed_form";
    return r;
  }
  switch (space.kind()) {
    case SpaceKind::HalfLine: return detail::resolvent_on_piece(f, space, tau, x, -1);
    case SpaceKind::Tripod: {
      ResolventResult best;
      best.value = std::numeric_limits<double>::infinity();
      bool have = false;
      for (int e = 0; e < static_cast<int>(space.edge_count()); ++e) {
        ResolventResult r = detail::resolvent_on_piece(f, space, tau, x, e);
        if (!have || r.value < best.value) {
          const bool tie = have && best.value - r.value < 1e-12 && distance(space, r.point, best.point) > 1e-12;
          best = r;
          best.tie = tie;
          have = true;
        } else if (r.value - best.value < 1e-12 && distance(space, r.point, best.point) > 1e-12) {
          best.tie = true;  // first edge wins
        }
      }
      return best;
    }
    case SpaceKind::Euclidean:
    case SpaceKind::Quantile1D: return detail::resolvent_vector(f, space, tau, x, opt);
  }
  throw DomainError("unsupported space");
}

inline Point resolvent_point(const FunctionalSpec& f, const Space& space, double tau, const Point& x,
                             const ResolventOptions& opt = {}) {
  return resolvent(f, space, tau, x, opt).point;
}

// ---------------------------------------------------------------------------------------------
// Validators

/// |∂f|(u) <= d(u,x)/τ <= |∂f|(x)/(1+λτ) for u = J_τ x.
struct BoundChain {
  double slope_at_resolvent = 0.0;
  double displacement_ratio = 0.0;  // d(u,x)/τ
  double slope_bound = 0.0;         // |∂f|(x)/(1+λτ)
  double residual_lower = 0.0;      // slope_at_resolvent - displacement_ratio
  double residual_upper = 0.0;      // displacement_ratio - slope_bound
  double max_residual() const { return std::max(residual_lower, residual_upper); }
};

inline BoundChain check_bound_chain(const FunctionalSpec& f, const Space& space, double tau, const Point& x,
                                    SlopeMethod slope_method = SlopeMethod::best(),
                                    const ResolventOptions& opt = {}) {
  const Point u = resolvent_point(f, space, tau, x, opt);
  BoundChain c;
  c.slope_at_resolvent = slope(f, space, u, slope_method).value();
  c.displacement_ratio = distance(space, u, x) / tau;
  c.slope_bound = slope(f, space, x, slope_method).value() / (1.0 + f.lambda * tau);
  c.residual_lower = c.slope_at_resolvent - c.displacement_ratio;
  c.residual_upper = c.displacement_ratio - c.slope_bound;
  if (std::isinf(c.slope_bound)) c.residual_upper = -std::numeric_limits<double>::infinity();
  return c;
}

/// d(J_τ x, J_τ y) - d(x,y)/sqrt(1 - 2λ⁻τ).
inline double check_resolvent_lipschitz(const FunctionalSpec& f, const Space& space, double tau, const Point& x,
                                        const Point& y, const ResolventOptions& opt = {}) {
  const Point jx = resolvent_point(f, space, tau, x, opt);
  const Point jy = resolvent_point(f, space, tau, y, opt);
  return distance(space, jx, jy) - distance(space, x, y) / std::sqrt(1.0 - 2.0 * f.lambda_minus() * tau);
}

/// d(J_ν x, J_μ x) - (μ-ν)|∂f|(x) / ((1+λμ) sqrt(1 - 2λ⁻ν)) for 0 < ν < μ < 1/(2λ⁻).
inline double check_tau_continuity(const FunctionalSpec& f, const Space& space, double nu, double mu,
                                   const Point& x, SlopeMethod slope_method = SlopeMethod::best(),
                                   const ResolventOptions& opt = {}) {
  if (!(nu > 0.0 && nu <= mu)) throw DomainError("tau continuity needs 0 < nu <= mu");
  require_tau(f, mu);
  const ExtendedReal sx = slope(f, space, x, slope_method);
  if (sx.is_infinite()) throw PreconditionError("tau continuity needs |∂f|(x) < +∞");
  const double lhs =
      distance(space, resolvent_point(f, space, nu, x, opt), resolvent_point(f, space, mu, x, opt));
  const double rhs = (mu - nu) * sx.value() / ((1.0 + f.lambda * mu) * std::sqrt(1.0 - 2.0 * f.lambda_minus() * nu));
  return lhs - rhs;
}

/// d(J_μ x, J_ν(γ(ν/μ))) with γ the geodesic from J_μ x to x.
inline double check_resolvent_identity(const FunctionalSpec& f, const Space& space, double nu, double mu,
                                       const Point& x, const ResolventOptions& opt = {}) {
  if (!(nu > 0.0 && nu <= mu)) throw DomainError("resolvent identity needs 0 < nu <= mu");
  require_tau(f, mu);
  const Point jmu = resolvent_point(f, space, mu, x, opt);
  const Point mid = geodesic_point(space, jmu, x, nu / mu);
  return distance(space, jmu, resolvent_point(f, space, nu, mid, opt));
}

/// d(J_τ^{f^h} x, J_τ^f x) for each h.
inline std::vector<double> resolvent_convergence_probe(const FunctionalFamily& family, const Space& space, double tau,
                                                       const Point& x, const std::vector<double>& h_list,
                                                       const ResolventOptions& opt = {}) {
  const Point limit = resolvent_point(family.limit, space, tau, x, opt);
  std::vector<double> out;
  out.reserve(h_list.size());
  for (double h : h_list) out.push_back(distance(space, resolvent_point(family.member(h), space, tau, x, opt), limit));
  return out;
}

}  // namespace mal
