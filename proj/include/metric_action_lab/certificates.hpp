#pragma once

// Certified lower bounds for inf Θ^f_{x0,x1} over all curves on the half-line.
//
// Any curve from x0 to x1 > x0 sweeps [x0, s] before it first reaches s, so by a² + b² >= 2ab
// its action on that time span is at least 2∫_{x0}^{s} |∂f|. The rest of the curve joins s to
// x1 in time at most 1, costing at least max(2∫_s^{x1} |∂f|, (x1 - s)²).
// Integrals use midpoint slope values minus the oscillation against the cell endpoints; the
// result is a true lower bound when |∂f| is monotone on every cell.

#include <algorithm>
#include <cmath>

#include "metric_action_lab/functionals.hpp"

namespace mal {

struct CertifiedIntegral {
  double value = 0.0;     // lower estimate of ∫_a^b |∂f|
  double midpoint = 0.0;  // plain midpoint sum
  double slack = 0.0;     // midpoint - value
};

/// Lower estimate of ∫_a^b |∂f|(x) dx over n cells.
inline CertifiedIntegral certified_slope_integral(const FunctionalSpec& f, const Space& space, double a, double b,
                                                  std::size_t n, SlopeMethod method = SlopeMethod::best()) {
  if (space.kind() != SpaceKind::HalfLine) throw DomainError("slope integral certificates are half-line only");
  if (!(b >= a) || n == 0) throw DomainError("certificate needs a <= b and n >= 1");
  CertifiedIntegral out;
  const double dx = (b - a) / static_cast<double>(n);
  if (dx == 0.0) return out;
  auto g = [&](double x) { return slope(f, space, Point::half_line(x), method).value(); };
  double left = g(a);
  for (std::size_t k = 0; k < n; ++k) {
    const double xl = a + dx * static_cast<double>(k);
    const double xr = k + 1 == n ? b : xl + dx;
    const double mid = g(0.5 * (xl + xr));
    const double right = g(xr);
    const double w = xr - xl;
    double osc = std::max(std::abs(mid - left), std::abs(mid - right));
    if (std::isinf(left) || std::isinf(right)) osc = mid;
    out.midpoint += mid * w;
    out.value += std::max(0.0, mid - osc) * w;
    left = right;
  }
  out.slack = out.midpoint - out.value;
  return out;
}

struct HalfLineCertificate {
  double first = 0.0;           // 2∫_{x0}^{s} |∂f|
  double second_amgm = 0.0;     // 2∫_{s}^{x1} |∂f|
  double second_kinetic = 0.0;  // (x1 - s)²
  double value = 0.0;           // first + max(second_amgm, second_kinetic)
  double slack = 0.0;           // total discretization allowance already subtracted
};

inline HalfLineCertificate halfline_action_lower_bound(const FunctionalSpec& f, double x0, double split, double x1,
                                                       std::size_t n, SlopeMethod method = SlopeMethod::best()) {
  if (!(x0 <= split && split <= x1)) throw DomainError("certificate needs x0 <= split <= x1");
  const Space space = Space::half_line();
  const CertifiedIntegral a = certified_slope_integral(f, space, x0, split, n, method);
  const CertifiedIntegral b = certified_slope_integral(f, space, split, x1, n, method);
  HalfLineCertificate c;
  c.first = 2.0 * a.value;
  c.second_amgm = 2.0 * b.value;
  c.second_kinetic = (x1 - split) * (x1 - split);
  c.value = c.first + std::max(c.second_amgm, c.second_kinetic);
  c.slack = 2.0 * (a.slack + b.slack);
  return c;
}

}  // namespace mal
