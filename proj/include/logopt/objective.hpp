#pragma once

#include <cstdint>
#include <optional>

#include "logopt/model.hpp"

namespace logopt {

/// Value / gradient / Hessian of the growth objective at one point. The value
/// is an extended real: +infinity outside the admissible domain, in which
/// case derivatives are absent and finite is false.
struct ObjectiveEval {
  double value = 0.0;
  bool finite = true;
  std::optional<Eigen::VectorXd> gradient;
  std::optional<Eigen::MatrixXd> hessian;
};

/// Negative expected log-growth rate of the constant fraction lambda:
///
///   L(lambda) = -lambda'b + (1/2) lambda'c lambda
///             + sum_i w_i (lambda'h(x_i) - ln(1 + lambda'x_i)),
///
/// with L = +infinity as soon as some 1 + lambda'x_i <= 0. Minimizing L over
/// the admissible domain yields the growth-optimal fraction; the minimal
/// expected log wealth rate equals -L at the minimizer. L is convex, L(0) = 0.
ObjectiveEval eval_objective(const Segment& seg, const Eigen::VectorXd& lambda,
                             bool want_gradient = true, bool want_hessian = true);

/// Smoothed companion of eval_objective, finite on all of R^d:
///
///   L_delta(lambda) = -lambda'b + (1/2) lambda'c lambda
///                   + sum_i w_i f_delta(lambda, x_i),
///   f_delta(lambda, x) = delta lambda'h(x) - ln(1 - delta + delta(1 + lambda'x)^+).
///
/// For 0 < delta < 1 this is everywhere finite and increases pointwise to
/// L(lambda) as delta -> 1 on the closure of the domain (used as a numerical
/// continuation ladder by the solver). Derivatives are reported absent when
/// some 1 + lambda'x_i = 0 (the kink of the positive part). Throws
/// std::invalid_argument unless delta is in (0, 1).
ObjectiveEval eval_smoothed_objective(const Segment& seg, const Eigen::VectorXd& lambda,
                                      double delta, bool want_gradient = true,
                                      bool want_hessian = true);

/// The smoothing kernel f_delta itself; u = lambda'x, h_part = lambda'h(x).
double smoothing_kernel(double u, double h_part, double delta);

/// Samples n_samples feasible pairs plus deliberately infeasible ones and
/// asserts midpoint convexity L(mid) <= (L(a) + L(b))/2 + tol under
/// extended-real conventions. Returns the number of violations (0 = pass).
struct ConvexitySampleReport {
  int n_checked = 0;
  int n_violations = 0;
  int n_infinite = 0;      // pairs with an endpoint outside the domain
  double worst_gap = 0.0;  // max of L(mid) - (L(a)+L(b))/2 over finite cases
  bool pass() const { return n_violations == 0; }
};
ConvexitySampleReport check_convexity_sample(const Segment& seg, std::uint64_t seed,
                                             int n_samples);

}  // namespace logopt
