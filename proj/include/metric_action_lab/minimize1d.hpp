#pragma once

// One-dimensional minimization of convex (possibly extended-valued) objectives on an interval.

#include <cmath>
#include <cstddef>
#include <limits>

namespace mal {

struct Minimum1D {
  double x = 0.0;
  double value = std::numeric_limits<double>::infinity();
  double bracket = 0.0;  // width of the final uncertainty interval
  std::size_t iterations = 0;
};

/// Golden-section search on [a, b]. Preceded by a coarse scan so that an objective that is +∞
/// on part of the interval still gets a finite starting bracket.
template <class F>
Minimum1D golden_section(F&& objective, double a, double b, double xtol = 1e-13, std::size_t scan = 64,
                         std::size_t max_iter = 400) {
  Minimum1D best;
  if (b < a) return best;
  if (b == a) {
    best.x = a;
    best.value = objective(a);
    return best;
  }
  const double h = (b - a) / static_cast<double>(scan);
  std::size_t k_best = 0;
  for (std::size_t k = 0; k <= scan; ++k) {
    const double x = k == scan ? b : a + h * static_cast<double>(k);
    const double v = objective(x);
    if (v < best.value) {
      best.value = v;
      best.x = x;
      k_best = k;
    }
  }
  if (!std::isfinite(best.value)) return best;
  double lo = k_best == 0 ? a : a + h * static_cast<double>(k_best - 1);
  double hi = k_best == scan ? b : a + h * static_cast<double>(k_best + 1);
  constexpr double kInvPhi = 0.6180339887498949;
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = objective(c);
  double fd = objective(d);
  std::size_t it = 0;
  while (hi - lo > xtol * (1.0 + std::abs(lo) + std::abs(hi)) && it < max_iter) {
    ++it;
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = objective(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = objective(d);
    }
  }
  const double x = fc <= fd ? c : d;
  const double v = std::min(fc, fd);
  if (v <= best.value) {
    best.x = x;
    best.value = v;
  }
  best.bracket = hi - lo;
  best.iterations = it;
  return best;
}

/// Root of a nondecreasing function g on [a, b] in the sense of a sign change: returns the point
/// where g changes from negative to nonnegative, or an endpoint when g has constant sign.
/// Used on derivatives of strongly convex objectives, where it is the minimizer.
template <class G>
Minimum1D bisect_monotone(G&& g, double a, double b, std::size_t max_iter = 300) {
  Minimum1D out;
  if (g(a) >= 0.0) {
    out.x = a;
    return out;
  }
  if (g(b) < 0.0) {
    out.x = b;
    return out;
  }
  double lo = a;
  double hi = b;
  std::size_t it = 0;
  while (it < max_iter) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    ++it;
    if (g(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  out.x = 0.5 * (lo + hi);
  out.bracket = hi - lo;
  out.iterations = it;
  return out;
}

}  // namespace mal
