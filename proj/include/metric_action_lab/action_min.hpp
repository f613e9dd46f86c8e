#pragma once

// Upper bounds for inf Θ: minimization of the discrete action over curves on a uniform grid.
//
// The curve is written in a linear chart (for a Tripod, the line through the two edges the
// initial curve uses). Each level runs projected gradient descent preconditioned by the
// kinetic Hessian (2w/Δt)·tridiag(-1,2,-1); nonsmooth potentials are then polished by
// Gauss–Seidel sweeps of golden-section searches along the segment joining each node's
// neighbours. Coarser levels supply the starting guess.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "metric_action_lab/chart.hpp"
#include "metric_action_lab/curves.hpp"
#include "metric_action_lab/minimize1d.hpp"

namespace mal {

class InitializationError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

struct MinimizeActionOptions {
  std::size_t max_iter = 2000;  // gradient iterations per level
  double grad_tol = 1e-6;       // on the projected Euler–Lagrange residual
  std::size_t coarse_size = 32;
  std::size_t polish_sweeps = 20;
  double fd_step = 1e-7;
  ActionOptions action;
};

struct MinimizeActionResult {
  SampledCurve curve;
  ActionValue value;
  std::size_t iterations = 0;
  double stationarity = std::numeric_limits<double>::infinity();
  bool converged = false;
};

namespace detail {

inline LinearChart chart_for_curve(const Space& space, const Point& x0, const Point& x1, const SampledCurve& init) {
  if (space.kind() != SpaceKind::Tripod) return LinearChart(space);
  std::vector<int> order;
  auto note = [&order](const Point& p) {
    if (!p.at_branch() && std::find(order.begin(), order.end(), p.edge) == order.end()) order.push_back(p.edge);
  };
  note(x0);
  for (const Point& p : init.points()) note(p);
  note(x1);
  if (order.size() > 2)
    throw DomainError("tripod curve visits more than two edges; only single edge paths are optimized");
  if (order.size() == 2) return LinearChart(space, order[0], order[1]);
  const int known = order.empty() ? 0 : order[0];
  if (space.edge_count() < 2) throw DomainError("tripod with one edge has no line chart");
  return LinearChart(space, (known + 1) % static_cast<int>(space.edge_count()), known);
}

using Nodes = std::vector<std::vector<double>>;

class DiscreteAction {
 public:
  DiscreteAction(const FunctionalSpec& f, const LinearChart& chart, std::size_t n, const ActionOptions& opt)
      : f_(f), chart_(chart), n_(n), dt_(1.0 / static_cast<double>(n)), w_(chart.weight()), opt_(opt) {}

  double dt() const { return dt_; }
  double w() const { return w_; }
  const LinearChart& chart() const { return chart_; }

  double g(const std::vector<double>& z) const {
    const ExtendedReal s = slope(f_, chart_.space(), chart_.point(z), opt_.slope);
    return s.is_infinite() ? std::numeric_limits<double>::infinity() : s.value() * s.value();
  }

  /// Trapezoid weights for node potentials; endpoint nodes with infinite slope hand their
  /// weight to the neighbour when endpoint slopes are excluded.
  void prepare(const Nodes& z) {
    weight_.assign(n_ + 1, dt_);
    weight_[0] = weight_[n_] = 0.5 * dt_;
    g0_ = g(z.front());
    gN_ = g(z.back());
    if (!opt_.include_endpoint_slopes) {
      if (std::isinf(g0_)) {
        weight_[1] += 0.5 * dt_;
        weight_[0] = 0.0;
        g0_ = 0.0;
      }
      if (std::isinf(gN_)) {
        weight_[n_ - 1] += 0.5 * dt_;
        weight_[n_] = 0.0;
        gN_ = 0.0;
      }
    }
  }

  double kinetic(const std::vector<double>& a, const std::vector<double>& b) const {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (b[i] - a[i]) * (b[i] - a[i]);
    return w_ * s / dt_;
  }

  double node_weight(std::size_t k) const { return weight_[k]; }

  double value(const Nodes& z) const {
    double total = weight_[0] * g0_ + weight_[n_] * gN_;
    for (std::size_t k = 0; k < n_; ++k) total += kinetic(z[k], z[k + 1]);
    for (std::size_t k = 1; k < n_; ++k) {
      const double gk = g(z[k]);
      if (std::isinf(gk)) return std::numeric_limits<double>::infinity();
      total += weight_[k] * gk;
    }
    return total;
  }

  /// Gradient with respect to interior nodes (rows 1..n-1); endpoint rows are zero.
  Nodes gradient(const Nodes& z, double fd_step) const {
    const std::size_t m = z[0].size();
    Nodes grad(n_ + 1, std::vector<double>(m, 0.0));
    for (std::size_t k = 1; k < n_; ++k) {
      for (std::size_t i = 0; i < m; ++i) grad[k][i] = 2.0 * w_ * (2.0 * z[k][i] - z[k - 1][i] - z[k + 1][i]) / dt_;
      const double gk = g(z[k]);
      for (std::size_t i = 0; i < m; ++i) {
        const double h = fd_step * (1.0 + std::abs(z[k][i]));
        std::vector<double> zp = z[k];
        std::vector<double> zm = z[k];
        zp[i] += h;
        zm[i] -= h;
        chart_.project(zp);
        chart_.project(zm);
        const double gp = g(zp);
        const double gm = g(zm);
        double d = 0.0;
        const double span = zp[i] - zm[i];
        if (std::isfinite(gp) && std::isfinite(gm) && span > 0.0)
          d = (gp - gm) / span;
        else if (std::isfinite(gp) && std::isfinite(gk) && zp[i] > z[k][i])
          d = (gp - gk) / (zp[i] - z[k][i]);
        else if (std::isfinite(gm) && std::isfinite(gk) && z[k][i] > zm[i])
          d = (gk - gm) / (z[k][i] - zm[i]);
        grad[k][i] += weight_[k] * d;
      }
    }
    return grad;
  }

  /// max_k |P(z_k - εG_k) - z_k| / (ε Δt) with ε = Δt/(4w): the projected residual per unit time.
  double stationarity(const Nodes& z, const Nodes& grad) const {
    const double eps = dt_ / (4.0 * w_);
    double worst = 0.0;
    for (std::size_t k = 1; k < n_; ++k) {
      std::vector<double> y = z[k];
      for (std::size_t i = 0; i < y.size(); ++i) y[i] -= eps * grad[k][i];
      chart_.project(y);
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - z[k][i]) * (y[i] - z[k][i]);
      worst = std::max(worst, std::sqrt(s) / (eps * dt_));
    }
    return worst;
  }

 private:
  const FunctionalSpec& f_;
  LinearChart chart_;
  std::size_t n_;
  double dt_;
  double w_;
  ActionOptions opt_;
  std::vector<double> weight_;
  double g0_ = 0.0;
  double gN_ = 0.0;
};

/// Solves tridiag(-1, 2, -1)·x = b in place (Thomas algorithm).
inline void solve_laplacian(std::vector<double>& b) {
  const std::size_t n = b.size();
  if (n == 0) return;
  std::vector<double> c(n);
  double denom = 2.0;
  c[0] = -1.0 / denom;
  b[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = 2.0 + c[i - 1];
    c[i] = -1.0 / denom;
    b[i] = (b[i] + b[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) b[i] -= c[i] * b[i + 1];
}

struct LevelResult {
  Nodes z;
  double value = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  double stationarity = std::numeric_limits<double>::infinity();
};

inline LevelResult minimize_level(DiscreteAction& A, Nodes z, const MinimizeActionOptions& opt) {
  const std::size_t n = z.size() - 1;
  const std::size_t m = z[0].size();
  A.prepare(z);
  LevelResult out;
  double val = A.value(z);
  std::size_t stall = 0;
  Nodes grad = A.gradient(z, opt.fd_step);
  double stat = A.stationarity(z, grad);
  std::size_t it = 0;
  for (; it < opt.max_iter && stat > opt.grad_tol && n > 1; ++it) {
    Nodes dir(n + 1, std::vector<double>(m, 0.0));
    const double scale = A.dt() / (2.0 * A.w());
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> b(n - 1);
      for (std::size_t k = 1; k < n; ++k) b[k - 1] = grad[k][i];
      solve_laplacian(b);
      for (std::size_t k = 1; k < n; ++k) dir[k][i] = scale * b[k - 1];
    }
    double alpha = 1.0;
    bool accepted = false;
    Nodes trial = z;
    double tval = val;
    for (int bt = 0; bt < 50; ++bt, alpha *= 0.5) {
      double predicted = 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        for (std::size_t i = 0; i < m; ++i) trial[k][i] = z[k][i] - alpha * dir[k][i];
        A.chart().project(trial[k]);
        for (std::size_t i = 0; i < m; ++i) predicted += grad[k][i] * (z[k][i] - trial[k][i]);
      }
      tval = A.value(trial);
      if (tval < val && tval <= val - 1e-4 * predicted) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double drop = val - tval;
    z = std::move(trial);
    stall = drop <= 1e-15 * std::max(1.0, std::abs(val)) ? stall + 1 : 0;
    val = tval;
    grad = A.gradient(z, opt.fd_step);
    stat = A.stationarity(z, grad);
    if (stall >= 5) break;
  }
  if (stat > opt.grad_tol && n > 1) {
    for (std::size_t sweep = 0; sweep < opt.polish_sweeps; ++sweep) {
      const double before = val;
      for (std::size_t k = 1; k < n; ++k) {
        const std::vector<double>& a = z[k - 1];
        const std::vector<double>& b = z[k + 1];
        const double wk = A.node_weight(k);
        auto point_at = [&](double s) {
          std::vector<double> y(m);
          for (std::size_t i = 0; i < m; ++i) y[i] = a[i] + s * (b[i] - a[i]);
          return y;
        };
        auto local = [&](double s) {
          const std::vector<double> y = point_at(s);
          const double gy = A.g(y);
          if (std::isinf(gy)) return std::numeric_limits<double>::infinity();
          return A.kinetic(a, y) + A.kinetic(y, b) + wk * gy;
        };
        const double current = A.kinetic(a, z[k]) + A.kinetic(z[k], b) + wk * A.g(z[k]);
        const Minimum1D best = golden_section(local, 0.0, 1.0, 1e-12, 32);
        if (best.value < current) z[k] = point_at(best.x);
      }
      val = A.value(z);
      ++it;
      if (!(before - val > 1e-14 * std::max(1.0, std::abs(val)))) break;
    }
    grad = A.gradient(z, opt.fd_step);
    stat = A.stationarity(z, grad);
  }
  out.z = std::move(z);
  out.value = val;
  out.iterations = it;
  out.stationarity = stat;
  return out;
}

inline Nodes chart_nodes(const LinearChart& chart, const SampledCurve& curve, std::size_t n, const Point& x0,
                         const Point& x1) {
  Nodes z(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = k == n ? 1.0 : static_cast<double>(k) / static_cast<double>(n);
    z[k] = chart.coords(curve.at(t));
  }
  z.front() = chart.coords(x0);
  z.back() = chart.coords(x1);
  return z;
}

inline SampledCurve nodes_curve(const LinearChart& chart, const Nodes& z) {
  const std::size_t n = z.size() - 1;
  return SampledCurve::sample(chart.space(), n, [&](double t) {
    const auto k = static_cast<std::size_t>(std::llround(t * static_cast<double>(n)));
    return chart.point(z[k]);
  });
}

}  // namespace detail

/// Minimizes the discrete action over curves with N uniform intervals, starting from `init`.
/// The returned value never exceeds the action of `init`.
inline MinimizeActionResult minimize_action(const FunctionalSpec& f, const Space& space, const Point& x0,
                                            const Point& x1, std::size_t n, const SampledCurve& init,
                                            const MinimizeActionOptions& opt = {}) {
  if (n < 1) throw DomainError("minimize_action needs N >= 1");
  space.validate(x0);
  space.validate(x1);
  const ActionValue init_value = action(init, f, x0, x1, opt.action);
  if (init_value.total.is_infinite()) throw InitializationError("initial curve has infinite action");
  const LinearChart chart = detail::chart_for_curve(space, x0, x1, init);
  for (const Point& p : init.points())
    if (!chart.covers(p)) throw DomainError("initial curve leaves the charted edge pair");

  std::vector<std::size_t> levels{n};
  while (levels.back() > opt.coarse_size && levels.back() % 2 == 0 && levels.back() / 2 >= opt.coarse_size)
    levels.push_back(levels.back() / 2);
  std::reverse(levels.begin(), levels.end());

  std::size_t total_iter = 0;
  detail::LevelResult res;
  std::optional<SampledCurve> guess;
  for (std::size_t lvl : levels) {
    detail::DiscreteAction A(f, chart, lvl, opt.action);
    detail::Nodes start = detail::chart_nodes(chart, init, lvl, x0, x1);
    A.prepare(start);
    if (guess) {
      detail::Nodes coarse = detail::chart_nodes(chart, *guess, lvl, x0, x1);
      if (A.value(coarse) < A.value(start)) start = std::move(coarse);
    }
    res = detail::minimize_level(A, std::move(start), opt);
    total_iter += res.iterations;
    guess = detail::nodes_curve(chart, res.z);
  }

  MinimizeActionResult out{*guess, action(*guess, f, x0, x1, opt.action), total_iter, res.stationarity, false};
  out.converged = out.stationarity <= opt.grad_tol;
  if (!(out.value.total <= init_value.total)) {
    out.curve = init;
    out.value = init_value;
    out.converged = false;
  }
  return out;
}

}  // namespace mal
