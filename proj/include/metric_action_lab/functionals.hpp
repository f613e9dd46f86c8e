#pragma once

// λ-convex functionals f: X -> R ∪ {+∞}, their descending slopes, and sample-based checks of
// λ-convexity and of the quadratic lower bound around a domain point.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metric_action_lab/extended_real.hpp"
#include "metric_action_lab/residual.hpp"
#include "metric_action_lab/sampling.hpp"
#include "metric_action_lab/spaces.hpp"

namespace mal {

struct FunctionalSpec {
  std::string id;
  std::function<ExtendedReal(const Point&)> evaluate;
  /// Modulus of convexity. Inputs, never inferred.
  double lambda = 0.0;
  std::function<ExtendedReal(const Point&)> closed_form_slope;
  std::function<Point(double tau, const Point&)> closed_form_prox;
  /// Membership in D(f); when empty, D(f) is where `evaluate` is finite.
  std::function<bool(const Point&)> domain_indicator;
  /// Metric gradient in the point's own coordinates (Tripod: outward derivative along the point's
  /// edge). Present only for functionals that are differentiable on D(f), up to kinks where a
  /// monotone one-sided choice is returned.
  std::function<std::vector<double>(const Point&)> gradient;
  /// Projection onto the closure of D(f) for coordinate spaces, if D(f) is a proper convex subset.
  std::function<Point(const Point&)> domain_projection;
  double scale = 1.0;

  double lambda_plus() const { return std::max(lambda, 0.0); }
  double lambda_minus() const { return std::max(-lambda, 0.0); }

  bool in_domain(const Point& x) const {
    if (domain_indicator) return domain_indicator(x);
    return evaluate(x).is_finite();
  }
};

/// A sequence f^h together with its limit f.
struct FunctionalFamily {
  std::function<FunctionalSpec(double h)> member;
  FunctionalSpec limit;
  std::string description;
};

inline ExtendedReal evaluate(const FunctionalSpec& f, const Point& x) {
  if (f.domain_indicator && !f.domain_indicator(x)) return ExtendedReal::infinity();
  return f.evaluate(x);
}

// ---------------------------------------------------------------------------------------------
// Catalogue

inline FunctionalSpec zero_functional() {
  FunctionalSpec f;
  f.id = "zero";
  f.evaluate = [](const Point&) { return ExtendedReal(0.0); };
  f.closed_form_slope = [](const Point&) { return ExtendedReal(0.0); };
  f.closed_form_prox = [](double, const Point& x) { return x; };
  f.gradient = [](const Point& x) { return std::vector<double>(x.coords.size(), 0.0); };
  return f;
}

/// (λ/2) d(·, center)^2. λ >= 0 on every space; λ < 0 only on Euclidean space.
inline FunctionalSpec quadratic_functional(const Space& space, Point center, double lambda) {
  space.validate(center);
  if (lambda < 0.0 && space.kind() != SpaceKind::Euclidean)
    throw DomainError("concave quadratic is λ-convex only on Euclidean space");
  FunctionalSpec f;
  f.id = "quadratic(" + center.str() + ", " + std::to_string(lambda) + ")";
  f.lambda = lambda;
  f.evaluate = [space, center, lambda](const Point& x) {
    const double d = distance(space, x, center);
    return ExtendedReal(0.5 * lambda * d * d);
  };
  f.closed_form_slope = [space, center, lambda](const Point& x) {
    return ExtendedReal(std::abs(lambda) * distance(space, x, center));
  };
  f.closed_form_prox = [space, center, lambda](double tau, const Point& x) {
    if (lambda >= 0.0) return geodesic_point(space, x, center, lambda * tau / (1.0 + lambda * tau));
    Point u = x;
    for (std::size_t i = 0; i < u.coords.size(); ++i)
      u.coords[i] = (x.coords[i] + lambda * tau * center.coords[i]) / (1.0 + lambda * tau);
    return u;
  };
  f.gradient = [space, center, lambda](const Point& x) {
    if (space.kind() == SpaceKind::Tripod) {
      const double s = x.offset();
      const bool same = center.at_branch() || center.edge == x.edge;
      return std::vector<double>{same ? lambda * (s - center.offset()) : lambda * (s + center.offset())};
    }
    std::vector<double> g(x.coords.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = lambda * (x.coords[i] - center.coords[i]);
    return g;
  };
  return f;
}

/// (λ/2)|x - center|^2 restricted to the box [lo, hi]^n of Euclidean space, +∞ outside.
inline FunctionalSpec box_quadratic_functional(const Space& space, Point center, double lambda, double lo,
                                               double hi) {
  if (space.kind() != SpaceKind::Euclidean) throw DomainError("box quadratic is defined on Euclidean space");
  space.validate(center);
  FunctionalSpec f;
  f.id = "quadratic_box(" + center.str() + ", " + std::to_string(lambda) + ", [" + std::to_string(lo) + "," +
         std::to_string(hi) + "])";
  f.lambda = lambda;
  auto inside = [lo, hi](const Point& x) {
    return std::all_of(x.coords.begin(), x.coords.end(), [&](double c) { return c >= lo && c <= hi; });
  };
  f.domain_indicator = inside;
  f.evaluate = [space, center, lambda, inside](const Point& x) {
    if (!inside(x)) return ExtendedReal::infinity();
    const double d = distance(space, x, center);
    return ExtendedReal(0.5 * lambda * d * d);
  };
  f.gradient = [center, lambda](const Point& x) {
    std::vector<double> g(x.coords.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = lambda * (x.coords[i] - center.coords[i]);
    return g;
  };
  f.domain_projection = [lo, hi](const Point& x) {
    Point p = x;
    for (double& c : p.coords) c = std::clamp(c, lo, hi);
    return p;
  };
  return f;
}

/// <c, x> on Euclidean space, c·x on the half-line. Convex (λ = 0).
inline FunctionalSpec linear_functional(const Space& space, std::vector<double> c) {
  if (space.kind() != SpaceKind::Euclidean && space.kind() != SpaceKind::HalfLine)
    throw DomainError("linear functional is defined on Euclidean space and the half-line");
  if (c.size() == 1 && space.coord_count() > 1) c.assign(space.coord_count(), c[0]);
  if (c.size() != space.coord_count()) throw ConfigError("linear functional coefficient has wrong dimension");
  FunctionalSpec f;
  std::string id = "linear(";
  for (std::size_t i = 0; i < c.size(); ++i) id += (i ? "," : "") + std::to_string(c[i]);
  f.id = id + ")";
  f.lambda = 0.0;
  const bool half = space.kind() == SpaceKind::HalfLine;
  f.evaluate = [c](const Point& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * x.coords[i];
    return ExtendedReal(s);
  };
  double norm = 0.0;
  for (double ci : c) norm += ci * ci;
  norm = std::sqrt(norm);
  f.closed_form_slope = [c, norm, half](const Point& x) {
    if (half && x.x() == 0.0) return ExtendedReal(std::max(-c[0], 0.0));
    return ExtendedReal(norm);
  };
  f.closed_form_prox = [c, half](double tau, const Point& x) {
    Point u = x;
    for (std::size_t i = 0; i < c.size(); ++i) u.coords[i] -= tau * c[i];
    if (half) u.coords[0] = std::max(u.coords[0], 0.0);
    return u;
  };
  f.gradient = [c](const Point&) { return c; };
  return f;
}

/// eps / x^2 on the half-line, +∞ at 0.
inline FunctionalSpec example1_functional(double eps) {
  FunctionalSpec f;
  f.id = "example1(" + std::to_string(eps) + ")";
  f.lambda = 0.0;
  f.scale = eps;
  f.domain_indicator = [](const Point& x) { return x.x() > 0.0; };
  f.evaluate = [eps](const Point& x) {
    const double v = x.x();
    if (v <= 0.0) return ExtendedReal::infinity();
    return ExtendedReal(eps / (v * v));
  };
  f.closed_form_slope = [eps](const Point& x) {
    const double v = x.x();
    if (v <= 0.0) return ExtendedReal::infinity();
    return ExtendedReal(2.0 * eps / (v * v * v));
  };
  f.gradient = [eps](const Point& x) {
    const double v = x.x();
    if (v <= 0.0) return std::vector<double>{-std::numeric_limits<double>::infinity()};
    return std::vector<double>{-2.0 * eps / (v * v * v)};
  };
  return f;
}

/// 1 - h x on [0, 1/h], 0 beyond: convex, bounded by 1, with slope h on the ramp.
inline FunctionalSpec example2_functional(double h) {
  if (!(h > 0.0)) throw DomainError("example2 needs h > 0");
  FunctionalSpec f;
  f.id = "example2(" + std::to_string(h) + ")";
  f.lambda = 0.0;
  const double end = 1.0 / h;
  f.evaluate = [h, end](const Point& x) { return ExtendedReal(x.x() <= end ? 1.0 - h * x.x() : 0.0); };
  f.closed_form_slope = [h, end](const Point& x) { return ExtendedReal(x.x() < end ? h : 0.0); };
  f.closed_form_prox = [h, end](double tau, const Point& x) {
    if (x.x() >= end) return x;
    return Point::half_line(std::min(x.x() + h * tau, end));
  };
  f.gradient = [h, end](const Point& x) { return std::vector<double>{x.x() < end ? -h : 0.0}; };
  return f;
}

/// c·f with its convexity modulus. Without an explicit `lambda`, the modulus is c·λ(f).
inline FunctionalSpec scaled(const FunctionalSpec& base, double c, std::optional<double> lambda = std::nullopt) {
  if (!(c > 0.0)) throw DomainError("scaling factor must be positive");
  FunctionalSpec f = base;
  f.id = std::to_string(c) + "*" + base.id;
  f.lambda = lambda.value_or(c * base.lambda);
  f.scale = c * base.scale;
  f.evaluate = [base, c](const Point& x) { return c * base.evaluate(x); };
  if (base.closed_form_slope)
    f.closed_form_slope = [base, c](const Point& x) { return c * base.closed_form_slope(x); };
  f.closed_form_prox = {};  // J_τ^{cf} = J_{cτ}^f
  if (base.closed_form_prox)
    f.closed_form_prox = [base, c](double tau, const Point& x) { return base.closed_form_prox(c * tau, x); };
  if (base.gradient)
    f.gradient = [base, c](const Point& x) {
      auto g = base.gradient(x);
      for (double& v : g) v *= c;
      return g;
    };
  return f;
}

// ---------------------------------------------------------------------------------------------
// Slopes

struct SlopeMethod {
  enum class Kind { ClosedForm, SupFormula, Best };
  Kind kind = Kind::Best;
  double radius = 1.0;
  std::size_t n_samples = 4096;

  static SlopeMethod closed_form() { return {Kind::ClosedForm, 0.0, 0}; }
  static SlopeMethod sup_formula(double radius = 1.0, std::size_t n = 4096) { return {Kind::SupFormula, radius, n}; }
  static SlopeMethod best() { return {}; }
};

inline const char* to_string(SlopeMethod::Kind k) {
  switch (k) {
    case SlopeMethod::Kind::ClosedForm: return "closed_form";
    case SlopeMethod::Kind::SupFormula: return "sup_formula";
    case SlopeMethod::Kind::Best: return "best";
  }
  return "?";
}

/// A slope value together with the method that produced it.
struct SlopeEstimate {
  ExtendedReal value;
  SlopeMethod::Kind method = SlopeMethod::Kind::ClosedForm;
};

namespace detail {

inline double sup_ratio(const FunctionalSpec& f, const Space& space, const Point& x, double fx, const Point& y) {
  const double d = distance(space, x, y);
  if (!(d > 0.0)) return 0.0;
  const ExtendedReal fy = evaluate(f, y);
  if (fy.is_infinite()) return 0.0;
  const double a = fy.value() - fx - 0.5 * f.lambda * d * d;
  return a < 0.0 ? -a / d : 0.0;
}

/// Radii from `radius` down to radius·1e-7, geometrically spaced.
inline std::vector<double> shell_radii(double radius, std::size_t shells) {
  std::vector<double> r(shells);
  const double ratio = shells > 1 ? std::pow(1e-7, 1.0 / static_cast<double>(shells - 1)) : 1.0;
  double cur = radius;
  for (std::size_t k = 0; k < shells; ++k, cur *= ratio) r[k] = cur;
  return r;
}

}  // namespace detail

/// sup_{y≠x} (f(y) - f(x) - (λ/2)d(y,x)^2)^- / d(y,x) estimated on concentric shells around x.
/// Directions come from a Halton sequence (vector spaces) or the finitely many edge directions
/// (HalfLine, Tripod); the best vector direction is then refined by a shrinking pattern search.
inline double sup_formula_slope(const FunctionalSpec& f, const Space& space, const Point& x, double radius,
                                std::size_t n_samples) {
  if (n_samples == 0) throw ConfigError("sup-formula slope needs n_samples > 0");
  if (!(radius > 0.0)) throw ConfigError("sup-formula slope needs a positive radius");
  const double fx = evaluate(f, x).value();
  double best = 0.0;
  if (space.kind() == SpaceKind::HalfLine || space.kind() == SpaceKind::Tripod) {
    const std::size_t dirs = discrete_direction_count(space);
    const std::size_t shells = std::clamp<std::size_t>(n_samples / dirs, 1, 64);
    for (double r : detail::shell_radii(radius, shells))
      for (std::size_t d = 0; d < dirs; ++d)
        best = std::max(best, detail::sup_ratio(f, space, x, fx, move_discrete(space, x, d, r)));
    return best;
  }
  const std::size_t n = space.dim();
  const std::size_t shells = std::clamp<std::size_t>(n_samples / std::max<std::size_t>(2 * n, 8), 1, 24);
  const std::size_t per_shell = std::max<std::size_t>(1, n_samples / shells);
  const auto radii = detail::shell_radii(radius, shells);
  std::vector<double> best_dir(n, 0.0);
  double best_r = radii.front();
  std::uint64_t index = 0;
  for (double r : radii) {
    for (std::size_t j = 0; j < per_shell; ++j, ++index) {
      std::vector<double> dir;
      if (j < 2 * n && index < 2 * n * shells) {
        dir.assign(n, 0.0);
        dir[j / 2] = (j % 2 == 0) ? 1.0 : -1.0;
      } else {
        dir = halton_direction(index, n);
      }
      const double v = detail::sup_ratio(f, space, x, fx, move_vector(space, x, dir, r));
      if (v > best) {
        best = v;
        best_dir = dir;
        best_r = r;
      }
    }
  }
  if (best == 0.0 || n == 1) return best;
  // Alternate a pattern search over directions at the best radius with a rescan of the radii
  // along the best direction, until neither improves.
  for (int round = 0; round < 4; ++round) {
    for (double step = 0.25; step > 1e-9; step *= 0.5) {
      bool improved = true;
      while (improved) {
        improved = false;
        for (std::size_t i = 0; i < n; ++i) {
          for (double sgn : {1.0, -1.0}) {
            std::vector<double> dir = best_dir;
            dir[i] += sgn * step;
            double norm = 0.0;
            for (double c : dir) norm += c * c;
            norm = std::sqrt(norm);
            if (norm == 0.0) continue;
            for (double& c : dir) c /= norm;
            const double v = detail::sup_ratio(f, space, x, fx, move_vector(space, x, dir, best_r));
            if (v > best * (1.0 + 1e-15)) {
              best = v;
              best_dir = dir;
              improved = true;
            }
          }
        }
      }
    }
    bool moved = false;
    for (double r : radii) {
      const double v = detail::sup_ratio(f, space, x, fx, move_vector(space, x, best_dir, r));
      if (v > best * (1.0 + 1e-15)) {
        best = v;
        best_r = r;
        moved = true;
      }
    }
    if (!moved) break;
  }
  return best;
}

/// Descending slope |∂f|(x). +∞ outside D(f).
inline SlopeEstimate descending_slope(const FunctionalSpec& f, const Space& space, const Point& x,
                                      SlopeMethod method = SlopeMethod::best()) {
  space.check_tag(x);
  using K = SlopeMethod::Kind;
  K kind = method.kind;
  if (kind == K::Best) kind = f.closed_form_slope ? K::ClosedForm : K::SupFormula;
  if (kind == K::SupFormula && method.n_samples == 0) throw ConfigError("sup-formula slope needs n_samples > 0");
  if (!f.in_domain(x) || evaluate(f, x).is_infinite()) return {ExtendedReal::infinity(), kind};
  if (kind == K::ClosedForm) {
    if (!f.closed_form_slope) throw ConfigError("functional " + f.id + " has no closed-form slope");
    return {f.closed_form_slope(x), kind};
  }
  const double radius = method.radius > 0.0 ? method.radius : 1.0;
  const std::size_t n = method.n_samples > 0 ? method.n_samples : 4096;
  return {ExtendedReal(sup_formula_slope(f, space, x, radius, n)), K::SupFormula};
}

inline ExtendedReal slope(const FunctionalSpec& f, const Space& space, const Point& x,
                          SlopeMethod method = SlopeMethod::best()) {
  return descending_slope(f, space, x, method).value;
}

// ---------------------------------------------------------------------------------------------
// Checks

/// Worst residual of f(x_t) <= (1-t)f(x0) + t f(x1) - (λ/2) t(1-t) d(x0,x1)^2 along geodesics.
inline ResidualReport check_lambda_convexity(const FunctionalSpec& f, const Space& space,
                                             const std::vector<std::pair<Point, Point>>& pairs,
                                             std::span<const double> t_grid, double tolerance = 1e-9,
                                             std::optional<double> lambda = std::nullopt) {
  const double lam = lambda.value_or(f.lambda);
  ResidualReport rep;
  rep.tolerance = tolerance;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& [x0, x1] = pairs[k];
    const ExtendedReal f0 = evaluate(f, x0);
    const ExtendedReal f1 = evaluate(f, x1);
    if (f0.is_infinite() || f1.is_infinite())
      throw PreconditionError("λ-convexity check needs endpoints in D(f); pair " + std::to_string(k));
    const double d = distance(space, x0, x1);
    for (double t : t_grid) {
      const ExtendedReal ft = evaluate(f, geodesic_point(space, x0, x1, t));
      const double rhs = (1.0 - t) * f0.value() + t * f1.value() - 0.5 * lam * t * (1.0 - t) * d * d;
      rep.record(ft.value() - rhs, "pair " + std::to_string(k) + " t=" + std::to_string(t));
    }
  }
  return rep;
}

struct LowerBoundReport {
  ResidualReport residual;  // worst of RHS - f(y), so passed() means the bound holds
  double m = 0.0;           // sampled inf of f over the closed unit ball (an over-estimate)
  double f_center = 0.0;
};

/// Checks f(y) >= (λ/2)d^2 + (m - f(x̄) - λ⁺/2) d + m with d = d(y, x̄) on the given samples.
inline LowerBoundReport check_quadratic_lower_bound(const FunctionalSpec& f, const Space& space, const Point& xbar,
                                                    const std::vector<Point>& samples, double tolerance = 1e-9,
                                                    std::size_t ball_samples = 1000, std::uint64_t seed = 7) {
  const ExtendedReal fc = evaluate(f, xbar);
  if (fc.is_infinite()) throw PreconditionError("lower-bound check needs f(x̄) < +∞");
  Rng rng(seed);
  double m = fc.value();
  for (std::size_t i = 0; i < ball_samples; ++i) m = std::min(m, evaluate(f, random_point_in_ball(space, xbar, 1.0, rng)).value());
  LowerBoundReport out;
  out.m = m;
  out.f_center = fc.value();
  out.residual.tolerance = tolerance;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double d = distance(space, samples[k], xbar);
    const double rhs = 0.5 * f.lambda * d * d + (m - fc.value() - 0.5 * f.lambda_plus()) * d + m;
    out.residual.record(rhs - evaluate(f, samples[k]).value(), "sample " + std::to_string(k));
  }
  return out;
}

}  // namespace mal
