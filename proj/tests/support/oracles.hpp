// Independent numerical oracles used by the unit and acceptance suites.
// Everything here is deliberately brute force and shares no code with the
// library paths it cross-checks.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "logopt/model.hpp"

namespace logopt::testing {

// Brute-force 1-d minimizer: coarse grid scan followed by golden-section
// refinement of the best bracket.
inline double grid_min_1d(const std::function<double(double)>& f, double lo, double hi,
                          int n_grid = 200001, int refine_iters = 200) {
  double best_x = lo, best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_grid; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / (n_grid - 1);
    const double v = f(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  const double h = (hi - lo) / (n_grid - 1);
  double a = best_x - h, b = best_x + h;
  const double gr = 0.6180339887498949;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < refine_iters; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

// Bisection root finder on a sign change.
inline double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                          int iters = 200) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0) throw std::invalid_argument("bisect_root: no sign change");
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (flo * fm < 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

// Central finite differences.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double base_step = 1e-5) {
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd g(d);
  for (int j = 0; j < d; ++j) {
    const double h = base_step * std::max(1.0, std::abs(x[j]));
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline Eigen::MatrixXd fd_hessian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    const Eigen::VectorXd& x, double base_step = 1e-5) {
  const int d = static_cast<int>(x.size());
  Eigen::MatrixXd h(d, d);
  for (int j = 0; j < d; ++j) {
    const double step = base_step * std::max(1.0, std::abs(x[j]));
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    h.col(j) = (grad(xp) - grad(xm)) / (2.0 * step);
  }
  return h;
}

// Scalar inequality oracles from the dual-bound proofs. The first two hold
// for every y > -1 (y >= -1 for entropy_growth_bound) and delta in (0, 1).

// (1+y)ln(1+y) - y >= ((1-delta)/2) y^2/(1+y) on |y| <= delta,
//                     (delta/(2(1+delta))) |y|  on |y| >  delta.
inline bool entropy_growth_bound(double y, double delta, double slack = 1e-12) {
  const double lhs = y <= -1.0 ? 1.0 : (1.0 + y) * std::log1p(y) - y;
  const double rhs = std::abs(y) <= delta
                         ? 0.5 * (1.0 - delta) * y * y / (1.0 + y)
                         : (delta / (2.0 * (1.0 + delta))) * std::abs(y);
  return lhs >= rhs - slack;
}

// y - ln(1+y) >= (delta/(2(1+delta))) |y| on |y| > delta,
//                y^2 / (2(1+delta))     on |y| <= delta.
inline bool jump_compensation_bound(double y, double delta, double slack = 1e-12) {
  const double lhs = y - std::log1p(y);
  const double rhs = std::abs(y) <= delta
                         ? y * y / (2.0 * (1.0 + delta))
                         : (delta / (2.0 * (1.0 + delta))) * std::abs(y);
  return lhs >= rhs - slack;
}

// Sandwich for the smoothing kernel on small jumps (|x| <= 1):
//   -delta |l|^2 |x|^2 <= f_delta <= max(1/(2(1-delta)^2), -delta - ln(1-delta)) |l|^2 |x|^2,
// and on large jumps (|x| > 1):
//   -delta |l| |x| <= f_delta <= -ln(1-delta).
inline bool smoothing_sandwich(double f_delta, double l_norm, double x_norm,
                               double delta, double slack = 1e-12) {
  if (x_norm <= 1.0) {
    const double scale = l_norm * l_norm * x_norm * x_norm;
    const double lo = -delta * scale;
    const double hi =
        std::max(0.5 / ((1.0 - delta) * (1.0 - delta)), -delta - std::log1p(-delta)) *
        scale;
    return f_delta >= lo - slack && f_delta <= hi + slack;
  }
  const double lo = -delta * l_norm * x_norm;
  const double hi = -std::log1p(-delta);
  return f_delta >= lo - slack && f_delta <= hi + slack;
}

// Canonical fixture models, built inline so tests do not depend on the
// parsing path.
inline MarketModel merton_model() {
  Eigen::VectorXd b(1);
  b << 0.08;
  Eigen::MatrixXd c(1, 1);
  c << 0.04;
  return MarketModel(b, c, JumpMeasure{}, 1.0);
}

inline MarketModel one_atom_model() {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(1);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, 1);
  Eigen::VectorXd x(1);
  x << -0.5;
  return MarketModel(b, c, JumpMeasure({{x, 1.0}}), 1.0);
}

inline MarketModel two_atom_model() {
  Eigen::VectorXd b(1);
  b << 0.1;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, 1);
  Eigen::VectorXd up(1), down(1);
  up << 0.5;
  down << -0.5;
  return MarketModel(b, c, JumpMeasure({{up, 1.0}, {down, 1.0}}), 1.0);
}

inline MarketModel free_lunch_model() {
  Eigen::VectorXd b(1);
  b << 1.0;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, 1);
  Eigen::VectorXd x(1);
  x << 0.5;
  return MarketModel(b, c, JumpMeasure({{x, 1.0}}), 1.0);
}

// A 2-d model mixing diffusion and three atoms; exercises the vector paths.
inline MarketModel mixed_2d_model() {
  Eigen::VectorXd b(2);
  b << 0.05, -0.02;
  Eigen::MatrixXd c(2, 2);
  c << 0.04, 0.01, 0.01, 0.09;
  Eigen::VectorXd x1(2), x2(2), x3(2);
  x1 << 0.3, -0.1;
  x2 << -0.4, 0.2;
  x3 << 0.1, 0.5;
  return MarketModel(b, c, JumpMeasure({{x1, 0.7}, {x2, 0.5}, {x3, 0.3}}), 1.0);
}

// Two-segment variant: Merton-like first half, jump model second half.
inline MarketModel two_segment_model() {
  Segment s0;
  s0.t_start = 0.0;
  s0.drift = Eigen::VectorXd::Constant(1, 0.08);
  s0.covariance = Eigen::MatrixXd::Constant(1, 1, 0.04);
  Segment s1;
  s1.t_start = 1.0;
  s1.drift = Eigen::VectorXd::Constant(1, 0.1);
  s1.covariance = Eigen::MatrixXd::Zero(1, 1);
  Eigen::VectorXd up(1), down(1);
  up << 0.5;
  down << -0.5;
  s1.jumps = JumpMeasure({{up, 1.0}, {down, 1.0}});
  return MarketModel(1, 2.0, {s0, s1});
}

}  // namespace logopt::testing
