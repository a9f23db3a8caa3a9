#include "logopt/objective.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "logopt/rng.hpp"

namespace logopt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ObjectiveEval eval_objective(const Segment& seg, const Eigen::VectorXd& lambda,
                             bool want_gradient, bool want_hessian) {
  ObjectiveEval out;

  // Domain check first: any 1 + lambda'x_i <= 0 sends the value to +infinity
  // (the ln(0+) = -infinity convention inside the integral).
  for (const auto& a : seg.jumps.atoms()) {
    if (a.intensity == 0.0) continue;
    if (1.0 + lambda.dot(a.x) <= 0.0) {
      out.value = kInf;
      out.finite = false;
      return out;
    }
  }

  double value = -lambda.dot(seg.drift) + 0.5 * lambda.dot(seg.covariance * lambda);
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  if (want_gradient) grad = -seg.drift + seg.covariance * lambda;
  if (want_hessian) hess = seg.covariance;

  for (const auto& a : seg.jumps.atoms()) {
    const double w = a.intensity;
    if (w == 0.0) continue;
    const double u = lambda.dot(a.x);
    const Eigen::VectorXd h = truncate_jump(a.x);
    value += w * (lambda.dot(h) - std::log1p(u));
    if (want_gradient) grad += w * (h - a.x / (1.0 + u));
    if (want_hessian) hess += (w / ((1.0 + u) * (1.0 + u))) * (a.x * a.x.transpose());
  }

  out.value = value;
  out.finite = true;
  if (want_gradient) out.gradient = std::move(grad);
  if (want_hessian) out.hessian = std::move(hess);
  return out;
}

double smoothing_kernel(double u, double h_part, double delta) {
  const double plus = u > -1.0 ? 1.0 + u : 0.0;
  return delta * h_part - std::log(1.0 - delta + delta * plus);
}

ObjectiveEval eval_smoothed_objective(const Segment& seg, const Eigen::VectorXd& lambda,
                                      double delta, bool want_gradient,
                                      bool want_hessian) {
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("delta must lie in (0, 1)");

  ObjectiveEval out;
  double value = -lambda.dot(seg.drift) + 0.5 * lambda.dot(seg.covariance * lambda);
  Eigen::VectorXd grad = -seg.drift + seg.covariance * lambda;
  Eigen::MatrixXd hess = seg.covariance;
  bool smooth_point = true;

  for (const auto& a : seg.jumps.atoms()) {
    const double w = a.intensity;
    if (w == 0.0) continue;
    const double u = lambda.dot(a.x);
    const Eigen::VectorXd h = truncate_jump(a.x);
    value += w * smoothing_kernel(u, lambda.dot(h), delta);
    if (u == -1.0) smooth_point = false;  // kink of (1 + u)^+
    if (u > -1.0) {
      const double denom = 1.0 + delta * u;  // = 1 - delta + delta(1 + u)
      grad += w * (delta * h - (delta / denom) * a.x);
      hess += (w * delta * delta / (denom * denom)) * (a.x * a.x.transpose());
    } else {
      grad += w * delta * h;  // the log term is flat left of the kink
    }
  }

  out.value = value;
  out.finite = true;
  if (smooth_point) {
    if (want_gradient) out.gradient = std::move(grad);
    if (want_hessian) out.hessian = std::move(hess);
  }
  return out;
}

ConvexitySampleReport check_convexity_sample(const Segment& seg, std::uint64_t seed,
                                             int n_samples) {
  const int d = seg.dim();
  CounterRng rng(seed, CounterRng::kProbeStreamBase + 17);
  ConvexitySampleReport report;

  const auto sample_point = [&]() -> Eigen::VectorXd {
    Eigen::VectorXd dir(d);
    for (int i = 0; i < d; ++i) dir[i] = rng.normal();
    if (dir.norm() == 0.0) dir.setOnes();
    dir.normalize();
    // Radius occasionally overshoots the domain so the extended-real branch
    // is exercised too.
    const double zero_margin =
        max_feasible_step(seg, Eigen::VectorXd::Zero(d), dir, 0.0);
    const double cap = std::min(zero_margin * 1.2, 8.0);
    return (rng.uniform() * cap) * dir;
  };

  for (int k = 0; k < n_samples; ++k) {
    const Eigen::VectorXd a = sample_point();
    const Eigen::VectorXd b = sample_point();
    const Eigen::VectorXd mid = 0.5 * (a + b);
    const double la = eval_objective(seg, a, false, false).value;
    const double lb = eval_objective(seg, b, false, false).value;
    const double lm = eval_objective(seg, mid, false, false).value;
    ++report.n_checked;

    if (std::isinf(la) || std::isinf(lb)) {
      ++report.n_infinite;  // RHS is +infinity, the inequality holds trivially
      continue;
    }
    const double rhs = 0.5 * (la + lb);
    const double tol = 1e-12 * (1.0 + std::abs(la) + std::abs(lb));
    const double gap = lm - rhs;
    if (std::isfinite(lm)) report.worst_gap = std::max(report.worst_gap, gap);
    if (!(lm <= rhs + tol)) ++report.n_violations;
  }
  return report;
}

}  // namespace logopt
