#include "logopt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "logopt/objective.hpp"
#include "logopt/rng.hpp"

namespace logopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd constancy_projector(const std::vector<Eigen::VectorXd>& rc_basis, int d) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(d, d);
  for (const auto& n : rc_basis) p -= n * n.transpose();
  return p;
}

struct NewtonResult {
  Eigen::VectorXd point;
  double grad_norm = kInf;
  int iterations = 0;
  bool converged = false;
};

// Damped Newton with Armijo backtracking. The fraction-to-boundary rule keeps
// every step inside min_i(1 + lambda'x_i) >= 0.1 * (previous margin), so the
// iterates never collapse onto the admissibility boundary. `projector`
// restricts steps to the complement of the constancy directions.
template <typename Eval>
NewtonResult damped_newton(const Segment& seg, const Eval& eval,
                           const Eigen::MatrixXd& projector, Eigen::VectorXd lambda,
                           double tol, int max_iter, bool boundary_rule = true) {
  const int d = seg.dim();
  NewtonResult res;

  for (int it = 0; it < max_iter; ++it) {
    ObjectiveEval e = eval(lambda, true, true);
    if (!e.finite || !e.gradient) break;
    Eigen::VectorXd g = projector * (*e.gradient);
    res.point = lambda;
    res.grad_norm = g.norm();
    res.iterations = it;
    if (res.grad_norm <= tol) {
      res.converged = true;
      return res;
    }

    // Solve (H + mu I) step = -g, escalating mu until a descent direction
    // comes out (H is singular along flat directions).
    Eigen::VectorXd step;
    double mu = 0.0;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXd h = *e.hessian + mu * Eigen::MatrixXd::Identity(d, d);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      bool ok = ldlt.info() == Eigen::Success;
      if (ok) {
        step = projector * ldlt.solve(-g).eval();
        ok = step.allFinite() && g.dot(step) < 0.0;
      }
      if (ok) break;
      mu = mu == 0.0 ? 1e-12 * std::max(1.0, e.hessian->cwiseAbs().maxCoeff()) : mu * 100.0;
      step.resize(0);
    }
    if (step.size() == 0) break;

    double alpha = 1.0;
    if (boundary_rule) {
      const double margin = domain_margin(seg, lambda);
      if (std::isfinite(margin))
        alpha = std::min(1.0, max_feasible_step(seg, lambda, step, 0.1 * margin));
      if (!(alpha > 0.0)) break;
    }

    const double slope = g.dot(step);
    bool moved = false;
    if (std::abs(slope) <= 1e-12 * (1.0 + std::abs(e.value))) {
      // The predicted decrease is below objective round-off, so Armijo can
      // only churn on rounding ties. Polish on the gradient norm instead:
      // accept the full step iff it strictly shrinks the gradient without
      // measurably raising the value, else the floor is reached.
      const Eigen::VectorXd trial = lambda + alpha * step;
      ObjectiveEval te = eval(trial, true, false);
      if (te.finite && te.gradient &&
          (projector * (*te.gradient)).norm() < res.grad_norm &&
          te.value <= e.value + 1e-14 * (1.0 + std::abs(e.value))) {
        lambda = trial;
        moved = true;
      }
    } else {
      for (int bt = 0; bt < 60; ++bt) {
        const Eigen::VectorXd trial = lambda + alpha * step;
        const double fv = eval(trial, false, false).value;
        if (std::isfinite(fv) && fv <= e.value + 1e-4 * alpha * slope) {
          lambda = trial;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
    }
    if (!moved) break;
  }

  // Report the state at the last iterate.
  ObjectiveEval e = eval(lambda, true, false);
  res.point = lambda;
  res.grad_norm = e.gradient ? (projector * (*e.gradient)).norm() : kInf;
  res.converged = res.grad_norm <= tol;
  return res;
}

Eigen::VectorXd pull_into_domain(const Segment& seg, Eigen::VectorXd lambda) {
  // Shrink toward the (always feasible) origin until strictly admissible.
  double shrink = 1.0;
  for (int it = 0; it < 200 && !(domain_margin(seg, (shrink * lambda).eval()) > 1e-12);
       ++it)
    shrink *= 0.9;
  return shrink * lambda;
}

}  // namespace

Eigen::VectorXd minimize_smoothed(const Segment& seg, double delta,
                                  const Eigen::VectorXd& start, double tol, int max_iter,
                                  int* iterations) {
  const auto eval = [&](const Eigen::VectorXd& l, bool g, bool h) {
    return eval_smoothed_objective(seg, l, delta, g, h);
  };
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(seg.dim(), seg.dim());
  NewtonResult r = damped_newton(seg, eval, id, start, tol, max_iter,
                                 /*boundary_rule=*/false);
  if (iterations) *iterations = r.iterations;
  return r.point;
}

double dual_drift_rate_signed(const Segment& seg, const Eigen::VectorXd& phi) {
  double rate = phi.dot(seg.drift - seg.covariance * phi);
  for (const auto& a : seg.jumps.atoms()) {
    if (a.intensity == 0.0) continue;
    const double u = phi.dot(a.x);
    rate += a.intensity * (u / (1.0 + u) - phi.dot(truncate_jump(a.x)));
  }
  return rate;
}

double dual_bound_rate(const Segment& seg, const Eigen::VectorXd& phi) {
  double rate = std::abs(dual_drift_rate_signed(seg, phi)) +
                0.5 * phi.dot(seg.covariance * phi);
  for (const auto& a : seg.jumps.atoms()) {
    if (a.intensity == 0.0) continue;
    const double u = phi.dot(a.x);
    rate += a.intensity * (std::log1p(u) - u / (1.0 + u));
  }
  return rate;
}

double evaluate_dual_bound(const MarketModel& m, const std::vector<Eigen::VectorXd>& phi) {
  if (phi.size() != m.n_segments())
    throw std::invalid_argument("one fraction vector per segment required");
  double total = 0.0;
  for (std::size_t s = 0; s < m.n_segments(); ++s) {
    if (!is_feasible(m.segments()[s], phi[s]))
      throw std::invalid_argument("fraction outside the admissible domain");
    total += m.segment_duration(s) * dual_bound_rate(m.segments()[s], phi[s]);
  }
  return total;
}

double verify_first_order(const Segment& seg, const Eigen::VectorXd& phi, int n_probes,
                          std::uint64_t seed) {
  if (!is_feasible(seg, phi))
    throw std::invalid_argument("fraction outside the admissible domain");
  const int d = seg.dim();

  // The first-order form is linear in (probe - phi).
  Eigen::VectorXd direction_form = seg.drift - seg.covariance * phi;
  for (const auto& a : seg.jumps.atoms()) {
    if (a.intensity == 0.0) continue;
    const double u = phi.dot(a.x);
    direction_form += a.intensity * (a.x / (1.0 + u) - truncate_jump(a.x));
  }

  const double reach = 10.0 * (1.0 + phi.norm());
  std::vector<Eigen::VectorXd> probes;
  probes.push_back(Eigen::VectorXd::Zero(d));
  if (phi.norm() > 0.0) {
    // Doubled fraction, pulled back into the domain when it pokes outside.
    const double t = std::min(1.0, 0.9 * max_feasible_step(seg, phi, phi));
    probes.push_back(phi + t * phi);
  }
  CounterRng rng(seed, CounterRng::kProbeStreamBase + 1);
  for (int k = 0; k < n_probes; ++k) {
    Eigen::VectorXd u(d);
    for (int i = 0; i < d; ++i) u[i] = rng.normal();
    if (u.norm() == 0.0) continue;
    u.normalize();
    const double t = std::min(0.9 * max_feasible_step(seg, phi, u), reach) * rng.uniform();
    probes.push_back(phi + t * u);
  }

  double residual = -kInf;
  for (const auto& probe : probes)
    residual = std::max(residual, (probe - phi).dot(direction_form));
  return residual;
}

SegmentSolution solve_segment(const Segment& seg, const SolveOptions& opts,
                              std::size_t segment_index) {
  const int d = seg.dim();
  SegmentSolution sol;
  sol.certificate = attainment_certificate(seg, opts.n_recession_dirs, opts.seed);
  if (!sol.certificate.attained) {
    std::ostringstream os;
    os << "segment " << segment_index << ": minimum not attained ("
       << (sol.certificate.witness_inconclusive ? "flat direction with rising reverse"
                                                : "unbounded descent direction")
       << ")";
    throw NonAttainmentError(os.str(), *sol.certificate.witness_direction,
                             sol.certificate.witness_value,
                             sol.certificate.witness_inconclusive, segment_index);
  }

  const Eigen::MatrixXd projector = constancy_projector(sol.certificate.rc_basis, d);
  const auto eval = [&](const Eigen::VectorXd& l, bool g, bool h) {
    return eval_objective(seg, l, g, h);
  };
  Eigen::VectorXd start = Eigen::VectorXd::Zero(d);
  if (opts.start) {
    if (opts.start->size() != d)
      throw std::invalid_argument("start point has the wrong dimension");
    start = pull_into_domain(seg, (projector * (*opts.start)).eval());
  }

  // Aim well below the certification tolerance: Newton is quadratic here and
  // the dual-drift identities are only as clean as the final gradient.
  const double deep_tol = std::max(opts.tol * 1e-4, 1e-16);
  NewtonResult best;
  int total_iterations = 0;
  if (!opts.force_continuation) {
    best = damped_newton(seg, eval, projector, start, deep_tol, opts.max_newton);
    best.converged = best.grad_norm <= opts.tol;
    total_iterations += best.iterations;
  }

  const bool near_boundary = [&] {
    const double m = domain_margin(seg, best.point.size() ? best.point
                                                          : Eigen::VectorXd::Zero(d));
    return std::isfinite(m) && m < opts.boundary_threshold;
  }();

  if (opts.force_continuation || (!best.converged && !near_boundary)) {
    // Smoothing ladder: each stage is finite everywhere, so the iterate can
    // travel around the admissibility boundary and warm-start the next stage.
    Eigen::VectorXd warm = start;
    for (double delta : {0.5, 0.9, 0.99, 0.999}) {
      LadderStage stage;
      stage.delta = delta;
      warm = minimize_smoothed(seg, delta, warm, std::max(opts.tol, 1e-11),
                               opts.max_newton, &stage.iterations);
      warm = projector * warm;
      stage.minimizer = warm;
      sol.ladder.push_back(stage);
      total_iterations += stage.iterations;
    }
    warm = pull_into_domain(seg, warm);
    NewtonResult exact = damped_newton(seg, eval, projector, warm, deep_tol,
                                       opts.max_newton);
    exact.converged = exact.grad_norm <= opts.tol;
    total_iterations += exact.iterations;
    if (exact.converged || exact.grad_norm < best.grad_norm || best.point.size() == 0)
      best = exact;
  }

  sol.phi = projector * best.point;
  sol.margin = domain_margin(seg, sol.phi);
  sol.boundary_mode = std::isfinite(sol.margin) && sol.margin < opts.boundary_threshold;
  sol.grad_norm = best.grad_norm;
  sol.iterations = total_iterations;
  sol.kkt_residual = verify_first_order(seg, sol.phi, opts.n_probes, opts.seed);

  const bool interior_ok = best.converged;
  const bool boundary_ok = sol.boundary_mode && sol.kkt_residual <= opts.tol;
  if (!interior_ok && !boundary_ok) {
    std::ostringstream os;
    os << "segment " << segment_index << ": Newton failed to certify the optimum"
       << " (grad " << best.grad_norm << ", residual " << sol.kkt_residual << ")";
    throw SolveFailure(os.str(), best.point, best.grad_norm);
  }

  sol.value = eval_objective(seg, sol.phi, false, false).value;
  // At a certified optimum the signed drift is nonnegative (first-order
  // condition probed at zero); a tiny negative value is solver round-off, and
  // clamping it keeps the dual-bound identity (-T times the optimal value) exact.
  sol.v_drift = std::max(dual_drift_rate_signed(seg, sol.phi), 0.0);
  sol.dual_bound_rate = sol.v_drift + 0.5 * sol.phi.dot(seg.covariance * sol.phi);
  for (const auto& a : seg.jumps.atoms()) {
    if (a.intensity == 0.0) continue;
    const double u = sol.phi.dot(a.x);
    sol.dual_bound_rate += a.intensity * (std::log1p(u) - u / (1.0 + u));
  }
  return sol;
}

SolveReport solve(const MarketModel& m, const SolveOptions& opts) {
  SolveReport report;
  for (std::size_t s = 0; s < m.n_segments(); ++s) {
    SegmentSolution sol = solve_segment(m.segments()[s], opts, s);
    const double dt = m.segment_duration(s);
    report.segment_durations.push_back(dt);
    report.total_value += dt * sol.value;
    report.dual_log_value += dt * sol.dual_bound_rate;
    report.max_grad_norm = std::max(report.max_grad_norm, sol.grad_norm);
    report.max_kkt_residual = std::max(report.max_kkt_residual, sol.kkt_residual);
    report.segments.push_back(std::move(sol));
  }
  report.optimal_log_wealth = -report.total_value;
  report.certified = true;
  return report;
}

PortfolioPair fraction_to_holdings(std::vector<Eigen::VectorXd> phi) {
  PortfolioPair pair;
  pair.phi = std::move(phi);
  return pair;
}

}  // namespace logopt
