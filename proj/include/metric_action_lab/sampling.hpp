#pragma once

// Deterministic sample generation: Halton directions for shell sampling around a point,
// and seeded random points / ball samples for property checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "metric_action_lab/spaces.hpp"

namespace mal {

using Rng = std::mt19937_64;

inline double radical_inverse(std::uint64_t index, std::uint32_t base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

inline constexpr std::uint32_t kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                                            59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113};

/// Unit vector of R^n from the Halton point with the given index (Box-Muller on paired coordinates).
inline std::vector<double> halton_direction(std::uint64_t index, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = (index % 2 == 0) ? 1.0 : -1.0;
    return v;
  }
  const std::size_t pairs = (n + 1) / 2;
  for (std::size_t k = 0; k < pairs; ++k) {
    const std::size_t b1 = (2 * k) % std::size(kPrimes);
    const std::size_t b2 = (2 * k + 1) % std::size(kPrimes);
    double u1 = radical_inverse(index + 1, kPrimes[b1]);
    const double u2 = radical_inverse(index + 1, kPrimes[b2]);
    u1 = std::max(u1, 1e-300);
    const double r = std::sqrt(-2.0 * std::log(u1));
    v[2 * k] = r * std::cos(2.0 * std::numbers::pi * u2);
    if (2 * k + 1 < n) v[2 * k + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
  }
  double norm = 0.0;
  for (double c : v) norm += c * c;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    v.assign(n, 0.0);
    v[0] = 1.0;
    return v;
  }
  for (double& c : v) c /= norm;
  return v;
}

/// Number of discrete directions out of a point in a 1-D-like space (HalfLine, Tripod).
inline std::size_t discrete_direction_count(const Space& space) {
  return space.kind() == SpaceKind::Tripod ? space.edge_count() : 2;
}

/// Move from `x` by distance `rho` in one of the discrete directions of a HalfLine or Tripod.
/// HalfLine: 0 = right, 1 = left. Tripod: 0 = away from the branch point along x's edge,
/// j >= 1 = toward the branch point and then out along the j-th other edge.
/// The move stops at the boundary of the space.
inline Point move_discrete(const Space& space, const Point& x, std::size_t direction, double rho) {
  if (space.kind() == SpaceKind::HalfLine) {
    return Point::half_line(direction == 0 ? x.x() + rho : std::max(0.0, x.x() - rho));
  }
  const double a = x.offset();
  if (direction == 0) return Point::tripod(x.edge, std::min(a + rho, space.edge_length(x.edge)));
  if (rho <= a) return Point::tripod(x.edge, a - rho);
  int target = 0;
  std::size_t seen = 0;
  for (int e = 0; e < static_cast<int>(space.edge_count()); ++e) {
    if (e == x.edge) continue;
    if (++seen == direction) {
      target = e;
      break;
    }
  }
  if (seen != direction) return Point::tripod(x.edge, 0.0);  // single-edge star: stop at the branch point
  return Point::tripod(target, std::min(rho - a, space.edge_length(target)));
}

/// Move from `x` along the unit vector `dir` (of the chart's Euclidean norm) so that the
/// metric displacement is `rho`, then project back into the space.
inline Point move_vector(const Space& space, const Point& x, std::span<const double> dir, double rho) {
  Point y = x;
  const double scale = space.kind() == SpaceKind::Quantile1D ? std::sqrt(static_cast<double>(space.dim())) : 1.0;
  for (std::size_t i = 0; i < y.coords.size(); ++i) y.coords[i] += rho * scale * dir[i];
  return space.project(std::move(y));
}

/// Uniform-ish random point: coordinates in [-scale, scale] (nonneg for HalfLine, sorted for
/// Quantile1D, uniform edge and offset for Tripod).
inline Point random_point(const Space& space, Rng& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  switch (space.kind()) {
    case SpaceKind::Euclidean: {
      std::vector<double> v(space.dim());
      for (double& c : v) c = u(rng);
      return Point::euclidean(std::move(v));
    }
    case SpaceKind::HalfLine: return Point::half_line(std::abs(u(rng)));
    case SpaceKind::Tripod: {
      std::uniform_int_distribution<int> e(0, static_cast<int>(space.edge_count()) - 1);
      const int edge = e(rng);
      std::uniform_real_distribution<double> off(0.0, space.edge_length(edge));
      return Point::tripod(edge, off(rng));
    }
    case SpaceKind::Quantile1D: {
      std::vector<double> v(space.dim());
      for (double& c : v) c = u(rng);
      std::sort(v.begin(), v.end());
      return Point::quantile(std::move(v));
    }
  }
  return space.origin();
}

/// Random point of the closed ball of radius r around `center`.
inline Point random_point_in_ball(const Space& space, const Point& center, double r, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  switch (space.kind()) {
    case SpaceKind::HalfLine:
    case SpaceKind::Tripod: {
      std::uniform_int_distribution<std::size_t> d(0, discrete_direction_count(space) - 1);
      return move_discrete(space, center, d(rng), r * u01(rng));
    }
    case SpaceKind::Euclidean:
    case SpaceKind::Quantile1D: {
      std::normal_distribution<double> g;
      std::vector<double> dir(space.dim());
      double norm = 0.0;
      for (double& c : dir) {
        c = g(rng);
        norm += c * c;
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) return center;
      for (double& c : dir) c /= norm;
      const double rho = r * std::pow(u01(rng), 1.0 / static_cast<double>(space.dim()));
      // Projection onto the monotone cone is 1-Lipschitz, so the result stays in the ball.
      return move_vector(space, center, dir, rho);
    }
  }
  return center;
}

}  // namespace mal
