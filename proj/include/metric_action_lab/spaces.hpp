#pragma once

// Concrete metric spaces: Euclidean R^n, the half-line [0,∞), a finite star tree ("tripod"),
// and the 1-D Wasserstein space P_2(R) embedded as nondecreasing quantile vectors.
// All four are CAT(0) with unique geodesics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "metric_action_lab/errors.hpp"
#include "metric_action_lab/residual.hpp"

namespace mal {

enum class SpaceKind { Euclidean, HalfLine, Tripod, Quantile1D };

inline const char* to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::Euclidean: return "euclidean";
    case SpaceKind::HalfLine: return "half_line";
    case SpaceKind::Tripod: return "tripod";
    case SpaceKind::Quantile1D: return "quantile";
  }
  return "?";
}

inline SpaceKind space_kind_from_string(const std::string& s) {
  if (s == "euclidean") return SpaceKind::Euclidean;
  if (s == "half_line") return SpaceKind::HalfLine;
  if (s == "tripod") return SpaceKind::Tripod;
  if (s == "quantile") return SpaceKind::Quantile1D;
  throw ConfigError("unknown space kind '" + s + "'");
}

/// A point of one of the concrete spaces.
///
/// Euclidean and Quantile1D carry a coordinate vector, HalfLine a single nonnegative
/// coordinate, Tripod an (edge, offset) pair with the offset measured from the branch point.
/// Offset 0 is the branch point regardless of `edge`.
struct Point {
  SpaceKind kind = SpaceKind::Euclidean;
  std::vector<double> coords;
  int edge = 0;

  static Point euclidean(std::vector<double> x) { return {SpaceKind::Euclidean, std::move(x), 0}; }
  static Point half_line(double x) { return {SpaceKind::HalfLine, {x}, 0}; }
  static Point tripod(int edge, double offset) { return {SpaceKind::Tripod, {offset}, edge}; }
  static Point quantile(std::vector<double> q) { return {SpaceKind::Quantile1D, std::move(q), 0}; }

  double x() const { return coords.at(0); }
  double offset() const { return coords.at(0); }
  bool at_branch() const { return kind == SpaceKind::Tripod && coords.at(0) == 0.0; }

  friend bool operator==(const Point& a, const Point& b) {
    if (a.kind != b.kind || a.coords != b.coords) return false;
    return a.kind != SpaceKind::Tripod || a.edge == b.edge || a.coords.at(0) == 0.0;
  }

  std::string str() const {
    std::ostringstream os;
    os.precision(12);
    os << to_string(kind) << "(";
    if (kind == SpaceKind::Tripod) os << "edge " << edge << ", ";
    for (std::size_t i = 0; i < coords.size(); ++i) os << (i ? ", " : "") << coords[i];
    os << ")";
    return os.str();
  }
};

/// Nondecreasing least-squares projection (pool adjacent violators, uniform weights).
inline std::vector<double> isotonic_projection(std::span<const double> v) {
  std::vector<double> level;
  std::vector<std::size_t> count;
  level.reserve(v.size());
  count.reserve(v.size());
  for (double x : v) {
    level.push_back(x);
    count.push_back(1);
    while (level.size() > 1 && level[level.size() - 2] > level.back()) {
      const std::size_t n = count.back() + count[count.size() - 2];
      const double merged = (level.back() * count.back() + level[level.size() - 2] * count[count.size() - 2]) / n;
      level.pop_back();
      count.pop_back();
      level.back() = merged;
      count.back() = n;
    }
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t b = 0; b < level.size(); ++b) out.insert(out.end(), count[b], level[b]);
  return out;
}

/// Handle to a concrete metric space. Immutable value type.
class Space {
 public:
  static Space euclidean(std::size_t dim) {
    if (dim < 1) throw DomainError("euclidean space needs dim >= 1");
    return Space(SpaceKind::Euclidean, dim, {});
  }
  static Space half_line() { return Space(SpaceKind::HalfLine, 1, {}); }
  static Space tripod(std::vector<double> edge_lengths) {
    if (edge_lengths.empty()) throw DomainError("tripod needs at least one edge");
    for (double l : edge_lengths)
      if (!(l > 0.0)) throw DomainError("tripod edge lengths must be positive");
    const std::size_t n = edge_lengths.size();
    return Space(SpaceKind::Tripod, n, std::move(edge_lengths));
  }
  /// Star with `edge_count` edges of equal length.
  static Space tripod(std::size_t edge_count, double length) {
    return tripod(std::vector<double>(edge_count, length));
  }
  static Space quantile(std::size_t grid_size) {
    if (grid_size < 2) throw DomainError("quantile space needs grid_size >= 2");
    return Space(SpaceKind::Quantile1D, grid_size, {});
  }

  SpaceKind kind() const { return kind_; }
  /// Coordinate dimension for Euclidean/Quantile1D, 1 for HalfLine, edge count for Tripod.
  std::size_t dim() const { return dim_; }
  std::size_t grid_size() const { return dim_; }
  std::size_t edge_count() const { return edge_lengths_.size(); }
  const std::vector<double>& edge_lengths() const { return edge_lengths_; }
  double edge_length(int e) const { return edge_lengths_.at(static_cast<std::size_t>(e)); }

  /// Number of coordinates a point of this space carries.
  std::size_t coord_count() const {
    return (kind_ == SpaceKind::Euclidean || kind_ == SpaceKind::Quantile1D) ? dim_ : 1;
  }

  std::string describe() const {
    std::ostringstream os;
    os << to_string(kind_);
    switch (kind_) {
      case SpaceKind::Euclidean:
      case SpaceKind::Quantile1D: os << "(" << dim_ << ")"; break;
      case SpaceKind::HalfLine: break;
      case SpaceKind::Tripod:
        os << "(";
        for (std::size_t i = 0; i < edge_lengths_.size(); ++i) os << (i ? "," : "") << edge_lengths_[i];
        os << ")";
        break;
    }
    return os.str();
  }

  /// Throws TagError when `p` is not shaped for this space.
  void check_tag(const Point& p) const {
    if (p.kind != kind_)
      throw TagError(std::string("point of kind ") + to_string(p.kind) + " used in space " + describe());
    if (p.coords.size() != coord_count())
      throw TagError("point has " + std::to_string(p.coords.size()) + " coordinates, space " + describe() +
                     " expects " + std::to_string(coord_count()));
    if (kind_ == SpaceKind::Tripod && (p.edge < 0 || static_cast<std::size_t>(p.edge) >= edge_count()))
      throw TagError("tripod edge index " + std::to_string(p.edge) + " out of range");
  }

  /// Whether `p` satisfies the coordinate constraints of the space, within `tol`.
  bool contains(const Point& p, double tol = 1e-12) const {
    if (p.kind != kind_ || p.coords.size() != coord_count()) return false;
    for (double c : p.coords)
      if (!std::isfinite(c)) return false;
    switch (kind_) {
      case SpaceKind::Euclidean: return true;
      case SpaceKind::HalfLine: return p.coords[0] >= -tol;
      case SpaceKind::Tripod:
        return p.edge >= 0 && static_cast<std::size_t>(p.edge) < edge_count() && p.coords[0] >= -tol &&
               p.coords[0] <= edge_length(p.edge) + tol;
      case SpaceKind::Quantile1D:
        for (std::size_t i = 1; i < p.coords.size(); ++i)
          if (p.coords[i] < p.coords[i - 1] - tol) return false;
        return true;
    }
    return false;
  }

  /// Throws TagError / DomainError unless `p` is a valid point.
  void validate(const Point& p) const {
    check_tag(p);
    if (!contains(p)) throw DomainError("point " + p.str() + " is not in " + describe());
  }

  /// Nearest point of the space to a possibly invalid coordinate payload of the right shape.
  Point project(Point p) const {
    check_tag(p);
    switch (kind_) {
      case SpaceKind::Euclidean: break;
      case SpaceKind::HalfLine: p.coords[0] = std::max(p.coords[0], 0.0); break;
      case SpaceKind::Tripod: p.coords[0] = std::clamp(p.coords[0], 0.0, edge_length(p.edge)); break;
      case SpaceKind::Quantile1D: p.coords = isotonic_projection(p.coords); break;
    }
    return p;
  }

  /// The branch point (Tripod) or coordinate origin.
  Point origin() const {
    switch (kind_) {
      case SpaceKind::Euclidean: return Point::euclidean(std::vector<double>(dim_, 0.0));
      case SpaceKind::HalfLine: return Point::half_line(0.0);
      case SpaceKind::Tripod: return Point::tripod(0, 0.0);
      case SpaceKind::Quantile1D: return Point::quantile(std::vector<double>(dim_, 0.0));
    }
    return {};
  }

  friend bool operator==(const Space& a, const Space& b) {
    return a.kind_ == b.kind_ && a.dim_ == b.dim_ && a.edge_lengths_ == b.edge_lengths_;
  }

 private:
  Space(SpaceKind kind, std::size_t dim, std::vector<double> edges)
      : kind_(kind), dim_(dim), edge_lengths_(std::move(edges)) {}

  SpaceKind kind_;
  std::size_t dim_;
  std::vector<double> edge_lengths_;
};

inline double distance(const Space& space, const Point& p, const Point& q) {
  space.check_tag(p);
  space.check_tag(q);
  switch (space.kind()) {
    case SpaceKind::HalfLine: return std::abs(p.coords[0] - q.coords[0]);
    case SpaceKind::Tripod:
      if (p.edge == q.edge) return std::abs(p.coords[0] - q.coords[0]);
      return p.coords[0] + q.coords[0];
    case SpaceKind::Euclidean:
    case SpaceKind::Quantile1D: {
      double s = 0.0;
      for (std::size_t i = 0; i < p.coords.size(); ++i) {
        const double d = p.coords[i] - q.coords[i];
        s += d * d;
      }
      if (space.kind() == SpaceKind::Quantile1D) s /= static_cast<double>(p.coords.size());
      return std::sqrt(s);
    }
  }
  return 0.0;
}

/// Point at fraction t of the constant-speed geodesic from p to q.
inline Point geodesic_point(const Space& space, const Point& p, const Point& q, double t) {
  space.check_tag(p);
  space.check_tag(q);
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("geodesic parameter t=" + std::to_string(t) + " outside [0,1]");
  if (space.kind() == SpaceKind::Tripod) {
    const double a = p.coords[0];
    const double b = q.coords[0];
    if (p.edge == q.edge) return Point::tripod(p.edge, (1.0 - t) * a + t * b);
    // Path through the branch point, parametrized by arclength.
    const double s = t * (a + b);
    if (s <= a) return Point::tripod(p.edge, a - s);
    return Point::tripod(q.edge, std::min(s - a, b));
  }
  Point r = p;
  for (std::size_t i = 0; i < r.coords.size(); ++i) r.coords[i] = (1.0 - t) * p.coords[i] + t * q.coords[i];
  return r;
}

/// Worst residual of the CAT(0) comparison inequality
///   d(y,x_t)^2 <= (1-t) d(y,x0)^2 + t d(y,x1)^2 - t(1-t) d(x0,x1)^2
/// over the supplied t values.
inline ResidualReport check_cat0(const Space& space, const Point& y, const Point& x0, const Point& x1,
                                 std::span<const double> t_grid, double tolerance = 1e-9) {
  ResidualReport rep;
  rep.tolerance = tolerance;
  const double dy0 = distance(space, y, x0);
  const double dy1 = distance(space, y, x1);
  const double d01 = distance(space, x0, x1);
  for (double t : t_grid) {
    const Point xt = geodesic_point(space, x0, x1, t);
    const double lhs = std::pow(distance(space, y, xt), 2);
    const double rhs = (1.0 - t) * dy0 * dy0 + t * dy1 * dy1 - t * (1.0 - t) * d01 * d01;
    rep.record(lhs - rhs, "t=" + std::to_string(t));
  }
  return rep;
}

}  // namespace mal
