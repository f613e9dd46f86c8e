#pragma once

// Sampled curves on [0,1], their metric speed and the action
//   Θ^f_{x0,x1}(γ) = ∫_0^1 |γ'|² + |∂f|²(γ) dt   (+∞ unless γ(0)=x0, γ(1)=x1),
// concatenation with linear time rescaling, and the uniform distance between curves.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "metric_action_lab/errors.hpp"
#include "metric_action_lab/extended_real.hpp"
#include "metric_action_lab/functionals.hpp"
#include "metric_action_lab/spaces.hpp"

namespace mal {

/// Strictly increasing time grid on [0,1] with one point per node; piecewise-geodesic in between.
class SampledCurve {
 public:
  SampledCurve(Space space, std::vector<double> times, std::vector<Point> points)
      : space_(std::move(space)), times_(std::move(times)), points_(std::move(points)) {
    if (times_.size() < 2) throw DomainError("a sampled curve needs at least two nodes");
    if (times_.size() != points_.size()) throw DomainError("curve times and points differ in length");
    if (times_.front() != 0.0 || times_.back() != 1.0) throw DomainError("curve time grid must run from 0 to 1");
    for (std::size_t k = 1; k < times_.size(); ++k)
      if (!(times_[k] > times_[k - 1])) throw DomainError("curve time grid must be strictly increasing");
    for (const Point& p : points_) space_.check_tag(p);
  }

  /// Uniform grid with n intervals, γ(t) supplied by `fn`.
  static SampledCurve sample(const Space& space, std::size_t n, const std::function<Point(double)>& fn) {
    if (n < 1) throw DomainError("a sampled curve needs at least one interval");
    std::vector<double> t(n + 1);
    std::vector<Point> p;
    p.reserve(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      t[k] = k == n ? 1.0 : static_cast<double>(k) / static_cast<double>(n);
      p.push_back(fn(t[k]));
    }
    return SampledCurve(space, std::move(t), std::move(p));
  }

  /// Constant-speed geodesic from p to q with n uniform intervals.
  static SampledCurve geodesic(const Space& space, const Point& p, const Point& q, std::size_t n) {
    return sample(space, n, [&](double t) { return geodesic_point(space, p, q, t); });
  }

  const Space& space() const { return space_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Point>& points() const { return points_; }
  std::size_t size() const { return times_.size(); }
  std::size_t intervals() const { return times_.size() - 1; }
  const Point& front() const { return points_.front(); }
  const Point& back() const { return points_.back(); }

  /// Geodesic interpolation between nodes.
  Point at(double t) const {
    if (t <= 0.0) return points_.front();
    if (t >= 1.0) return points_.back();
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
    const double s = (t - times_[k]) / (times_[k + 1] - times_[k]);
    return geodesic_point(space_, points_[k], points_[k + 1], std::clamp(s, 0.0, 1.0));
  }

  /// t -> 1 - t.
  SampledCurve reversed() const {
    std::vector<double> t(times_.size());
    std::vector<Point> p(points_.rbegin(), points_.rend());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = 1.0 - times_[times_.size() - 1 - k];
    t.front() = 0.0;
    t.back() = 1.0;
    return SampledCurve(space_, std::move(t), std::move(p));
  }

  /// Node-wise image under a map X -> X (same time grid).
  SampledCurve map(const std::function<Point(const Point&)>& fn) const {
    std::vector<Point> p;
    p.reserve(points_.size());
    for (const Point& q : points_) p.push_back(fn(q));
    return SampledCurve(space_, times_, std::move(p));
  }

  /// Resampled on a uniform grid with n intervals.
  SampledCurve resampled(std::size_t n) const {
    return sample(space_, n, [this](double t) { return at(t); });
  }

 private:
  Space space_;
  std::vector<double> times_;
  std::vector<Point> points_;
};

/// Speeds on each interval, d(p_k, p_{k+1}) / (t_{k+1} - t_k).
inline std::vector<double> metric_speed(const SampledCurve& c) {
  std::vector<double> v(c.intervals());
  for (std::size_t k = 0; k < v.size(); ++k)
    v[k] = distance(c.space(), c.points()[k], c.points()[k + 1]) / (c.times()[k + 1] - c.times()[k]);
  return v;
}

inline double length(const SampledCurve& c) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < c.size(); ++k) s += distance(c.space(), c.points()[k], c.points()[k + 1]);
  return s;
}

struct ActionValue {
  ExtendedReal total;
  double kinetic = 0.0;     // ∫ |γ'|²
  ExtendedReal potential;   // ∫ |∂f|²(γ)
  bool endpoint_ok = true;
};

struct ActionOptions {
  double endpoint_tol = 1e-9;
  /// When false, infinite slopes at the two end nodes (zero-measure) are ignored.
  bool include_endpoint_slopes = true;
  SlopeMethod slope = SlopeMethod::best();
};

/// Squared slopes at every node (+∞ allowed).
inline std::vector<ExtendedReal> squared_slopes(const SampledCurve& c, const FunctionalSpec& f,
                                                SlopeMethod method = SlopeMethod::best()) {
  std::vector<ExtendedReal> g;
  g.reserve(c.size());
  for (const Point& p : c.points()) {
    const ExtendedReal s = slope(f, c.space(), p, method);
    g.push_back(s.is_infinite() ? ExtendedReal::infinity() : ExtendedReal(s.value() * s.value()));
  }
  return g;
}

/// Kinetic term exactly for the piecewise-geodesic curve, potential by the trapezoid rule.
inline ActionValue action(const SampledCurve& c, const FunctionalSpec& f, const Point& x0, const Point& x1,
                          const ActionOptions& opt = {}) {
  ActionValue a;
  const auto& t = c.times();
  const auto& p = c.points();
  for (std::size_t k = 0; k + 1 < c.size(); ++k) {
    const double d = distance(c.space(), p[k], p[k + 1]);
    a.kinetic += d * d / (t[k + 1] - t[k]);
  }
  const auto g = squared_slopes(c, f, opt.slope);
  ExtendedReal pot(0.0);
  for (std::size_t k = 0; k + 1 < c.size(); ++k) {
    const double dt = t[k + 1] - t[k];
    ExtendedReal gl = g[k];
    ExtendedReal gr = g[k + 1];
    if (!opt.include_endpoint_slopes) {
      if (k == 0 && gl.is_infinite()) gl = gr;
      if (k + 2 == c.size() && gr.is_infinite()) gr = gl;
    }
    if (gl.is_infinite() || gr.is_infinite()) {
      pot = ExtendedReal::infinity();
      break;
    }
    pot += ExtendedReal(0.5 * dt * (gl.value() + gr.value()));
  }
  a.potential = pot;
  a.endpoint_ok = distance(c.space(), c.front(), x0) <= opt.endpoint_tol &&
                  distance(c.space(), c.back(), x1) <= opt.endpoint_tol;
  a.total = a.endpoint_ok ? ExtendedReal(a.kinetic) + a.potential : ExtendedReal::infinity();
  return a;
}

/// 2 Σ_k sqrt(ḡ_k) d(p_k, p_{k+1}) with ḡ_k the trapezoid average of |∂f|² on interval k.
/// By a² + b² >= 2ab on each interval this never exceeds the discrete action.
inline ExtendedReal discrete_amgm_bound(const SampledCurve& c, const FunctionalSpec& f,
                                        SlopeMethod method = SlopeMethod::best()) {
  const auto g = squared_slopes(c, f, method);
  ExtendedReal s(0.0);
  for (std::size_t k = 0; k + 1 < c.size(); ++k) {
    const ExtendedReal avg = 0.5 * (g[k] + g[k + 1]);
    const double d = distance(c.space(), c.points()[k], c.points()[k + 1]);
    if (avg.is_infinite()) {
      if (d > 0.0) return ExtendedReal::infinity();
      continue;
    }
    s += ExtendedReal(2.0 * std::sqrt(avg.value()) * d);
  }
  return s;
}

/// A curve piece parametrized on [0,1] that occupies `duration` units of time in a concatenation.
struct Segment {
  SampledCurve curve;
  double duration = 1.0;
  std::string name;
};

/// Concatenates the segments in time and rescales linearly onto [0,1]. Segments of zero
/// duration are dropped; they must be constant within `endpoint_tol`.
inline SampledCurve concatenate_rescale(const std::vector<Segment>& segments, double endpoint_tol = 1e-9) {
  if (segments.empty()) throw ConcatenationError(0, "no segments");
  const Space& space = segments.front().curve.space();
  double total = 0.0;
  for (const Segment& s : segments) {
    if (!(s.duration >= 0.0)) throw DomainError("segment duration must be nonnegative");
    if (!(s.curve.space() == space)) throw TagError("segments live in different spaces");
    total += s.duration;
  }
  if (!(total > 0.0)) throw DomainError("total duration must be positive");
  for (std::size_t j = 1; j < segments.size(); ++j) {
    const double gap = distance(space, segments[j - 1].curve.back(), segments[j].curve.front());
    if (gap > endpoint_tol)
      throw ConcatenationError(j, "'" + segments[j - 1].name + "' ends " + std::to_string(gap) + " away from '" +
                                      segments[j].name + "'");
  }
  std::vector<double> times;
  std::vector<Point> points;
  double offset = 0.0;
  for (const Segment& s : segments) {
    if (s.duration == 0.0) {
      if (length(s.curve) > endpoint_tol) throw DomainError("zero-duration segment '" + s.name + "' is not constant");
      continue;
    }
    const auto& lt = s.curve.times();
    for (std::size_t k = 0; k < lt.size(); ++k) {
      if (!times.empty() && k == 0) continue;  // junction node already present
      times.push_back((offset + s.duration * lt[k]) / total);
      points.push_back(s.curve.points()[k]);
    }
    offset += s.duration;
  }
  times.front() = 0.0;
  times.back() = 1.0;
  // Guard against rounding collapsing adjacent nodes at junctions.
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw DomainError("concatenation produced a degenerate time grid");
  return SampledCurve(space, std::move(times), std::move(points));
}

/// Contribution of one segment to the action of the rescaled concatenation of total duration L:
/// (L/ρ)·K + (ρ/L)·P with K, P the kinetic and potential integrals of the segment on [0,1].
inline ExtendedReal rescaled_contribution(const ActionValue& segment_action, double duration, double total) {
  if (duration == 0.0) return ExtendedReal(0.0);
  return ExtendedReal(total / duration * segment_action.kinetic) + (duration / total) * segment_action.potential;
}

/// sup_t d(a(t), b(t)) over the merged time grid with geodesic interpolation.
inline double uniform_distance(const SampledCurve& a, const SampledCurve& b) {
  if (!(a.space() == b.space())) throw TagError("uniform distance between curves in different spaces");
  std::vector<double> grid;
  grid.reserve(a.size() + b.size());
  std::merge(a.times().begin(), a.times().end(), b.times().begin(), b.times().end(), std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double worst = 0.0;
  for (double t : grid) worst = std::max(worst, distance(a.space(), a.at(t), b.at(t)));
  return worst;
}

}  // namespace mal
