#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "metric_action_lab/spaces.hpp"

namespace mal {

/// Isometric linear chart of a geodesically convex piece of a space into (R^m, w·|·|^2).
///
/// Euclidean, HalfLine and Quantile1D are charted by their coordinates (weight 1/n for
/// quantile vectors). A Tripod is charted one line at a time: the union of two edges is
/// the interval [-L_neg, L_pos] with the branch point at 0.
class LinearChart {
 public:
  explicit LinearChart(const Space& space) : space_(space) {
    if (space.kind() == SpaceKind::Tripod) throw DomainError("tripod needs an explicit edge pair for a chart");
  }

  LinearChart(const Space& space, int neg_edge, int pos_edge)
      : space_(space), neg_edge_(neg_edge), pos_edge_(pos_edge) {
    if (space.kind() != SpaceKind::Tripod) throw DomainError("edge-pair charts are tripod-only");
    if (neg_edge == pos_edge) throw DomainError("edge-pair chart needs two distinct edges");
    (void)space.edge_length(neg_edge);
    (void)space.edge_length(pos_edge);
  }

  /// Chart of the tripod line through the edges of p and q (any second edge if they share one).
  static LinearChart tripod_line_through(const Space& space, const Point& p, const Point& q) {
    int a = p.edge;
    int b = q.edge;
    if (p.at_branch()) a = -1;
    if (q.at_branch()) b = -1;
    if (a == b || a < 0 || b < 0) {
      const int known = a >= 0 ? a : (b >= 0 ? b : 0);
      const int other = (known + 1) % static_cast<int>(space.edge_count());
      if (space.edge_count() < 2) throw DomainError("tripod with one edge has no line chart");
      return LinearChart(space, other, known);
    }
    return LinearChart(space, a, b);
  }

  const Space& space() const { return space_; }
  std::size_t dim() const { return space_.coord_count(); }
  double weight() const {
    return space_.kind() == SpaceKind::Quantile1D ? 1.0 / static_cast<double>(space_.dim()) : 1.0;
  }

  bool covers(const Point& p) const {
    if (space_.kind() != SpaceKind::Tripod) return p.kind == space_.kind();
    return p.at_branch() || p.edge == neg_edge_ || p.edge == pos_edge_;
  }

  std::vector<double> coords(const Point& p) const {
    space_.check_tag(p);
    if (space_.kind() != SpaceKind::Tripod) return p.coords;
    if (p.at_branch()) return {0.0};
    if (p.edge == pos_edge_) return {p.offset()};
    if (p.edge == neg_edge_) return {-p.offset()};
    throw DomainError("point " + p.str() + " is not on the charted tripod line");
  }

  Point point(std::span<const double> z) const {
    Point p = space_.origin();
    if (space_.kind() == SpaceKind::Tripod) {
      return z[0] >= 0.0 ? Point::tripod(pos_edge_, z[0]) : Point::tripod(neg_edge_, -z[0]);
    }
    p.coords.assign(z.begin(), z.end());
    return p;
  }

  /// Clamp chart coordinates onto the image of the space.
  void project(std::vector<double>& z) const {
    switch (space_.kind()) {
      case SpaceKind::Euclidean: break;
      case SpaceKind::HalfLine: z[0] = std::max(z[0], 0.0); break;
      case SpaceKind::Tripod:
        z[0] = std::clamp(z[0], -space_.edge_length(neg_edge_), space_.edge_length(pos_edge_));
        break;
      case SpaceKind::Quantile1D: z = isotonic_projection(z); break;
    }
  }

  /// Chart image of the metric gradient returned by a functional at p (tripod gradients are
  /// outward derivatives along p's own edge).
  std::vector<double> gradient_coords(const Point& p, std::vector<double> g) const {
    if (space_.kind() == SpaceKind::Tripod && !p.at_branch() && p.edge == neg_edge_) g[0] = -g[0];
    return g;
  }

 private:
  Space space_;
  int neg_edge_ = -1;
  int pos_edge_ = -1;
};

}  // namespace mal
