#pragma once

// Independent reference computations used by the tests: brute-force grids and ODE integrators
// that share no code with the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

namespace oracle {

/// argmin of g over a uniform grid on [a, b], refined around the best node a few times without
/// leaving [a, b]. Flat minima limit the resolution to about sqrt(machine epsilon).
inline double grid_argmin(const std::function<double(double)>& g, double a, double b, int n = 20001, int rounds = 4) {
  const double lo = a, hi = b;
  double best = a;
  for (int r = 0; r < rounds; ++r) {
    double bv = g(a);
    best = a;
    for (int i = 1; i <= n; ++i) {
      const double x = a + (b - a) * i / n;
      const double v = g(x);
      if (v < bv) {
        bv = v;
        best = x;
      }
    }
    const double w = (b - a) / n;
    a = std::max(lo, best - 2 * w);
    b = std::min(hi, best + 2 * w);
  }
  return best;
}

/// RK4 for y'' = y from (y0, v0) over [0, 1] with the energy E' = y'^2 + y^2 carried as a third
/// state; returns (y(1), E(1)).
inline std::pair<double, double> rk4_linear(double y0, double v0, int n) {
  const double h = 1.0 / n;
  double y = y0, v = v0, e = 0.0;
  for (int k = 0; k < n; ++k) {
    auto rhs = [](double yy, double vv, double (&out)[3]) {
      out[0] = vv;
      out[1] = yy;
      out[2] = vv * vv + yy * yy;
    };
    double k1[3], k2[3], k3[3], k4[3];
    rhs(y, v, k1);
    rhs(y + 0.5 * h * k1[0], v + 0.5 * h * k1[1], k2);
    rhs(y + 0.5 * h * k2[0], v + 0.5 * h * k2[1], k3);
    rhs(y + h * k3[0], v + h * k3[1], k4);
    y += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    v += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    e += h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
  }
  return {y, e};
}

/// Shooting for y'' = y, y(0) = 0, y(1) = 1: bisection on the initial slope.
inline std::pair<double, double> shoot_two_point(int n = 4000) {
  double lo = 0.0, hi = 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rk4_linear(0.0, mid, n).first < 1.0 ? lo : hi) = mid;
  }
  const double s = 0.5 * (lo + hi);
  return {s, rk4_linear(0.0, s, n).second};
}

/// RK4 for a scalar autonomous ODE x' = F(x) over [0, T].
inline double rk4_scalar(const std::function<double(double)>& F, double x, double T, int n) {
  const double h = T / n;
  for (int k = 0; k < n; ++k) {
    const double k1 = F(x), k2 = F(x + 0.5 * h * k1), k3 = F(x + 0.5 * h * k2), k4 = F(x + h * k3);
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return x;
}

/// Composite Simpson on [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& g, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double s = g(a) + g(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
  return s * h / 3.0;
}

}  // namespace oracle
