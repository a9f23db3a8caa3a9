#include "logopt/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "logopt/objective.hpp"
#include "logopt/rng.hpp"

namespace logopt {

namespace {

FractionProcess optimal_fraction(const SolveReport& report) {
  FractionProcess phi;
  for (const auto& s : report.segments) phi.push_back(s.phi);
  return phi;
}

FractionProcess perturbed_fraction(const MarketModel& m, const SolveReport& report,
                                   std::uint64_t seed, std::uint64_t index) {
  const int d = m.dim();
  CounterRng rng(seed, CounterRng::kProbeStreamBase + 1000 + index);
  FractionProcess out;
  for (std::size_t s = 0; s < m.n_segments(); ++s) {
    const Segment& seg = m.segments()[s];
    const Eigen::VectorXd& phi = report.segments[s].phi;
    Eigen::VectorXd dir(d);
    for (int j = 0; j < d; ++j) dir[j] = rng.normal();
    if (dir.norm() == 0.0) dir = Eigen::VectorXd::Unit(d, 0);
    dir.normalize();
    const double eps = 0.1 * (1.0 + phi.norm());
    const double t = std::min(eps, 0.9 * max_feasible_step(seg, phi, dir));
    out.push_back(phi + t * dir);
  }
  return out;
}

}  // namespace

DualityReport verify_duality(const MarketModel& m, const SolveReport& report,
                             std::size_t n_paths, std::uint64_t seed, int workers,
                             int n_steps) {
  if (!report.certified)
    throw std::invalid_argument("verify_duality requires a certified solve report");
  DualityReport out;
  const DeflatorParam deflator = build_deflator(m, report);
  const FractionProcess phi_opt = optimal_fraction(report);

  // (i) pathwise product identity on audit paths (streaming max).
  {
    SimOptions audit;
    audit.n_paths = std::min<std::size_t>(n_paths, 1000);
    audit.seed = seed;
    audit.workers = workers;
    audit.n_steps = n_steps;
    SimSummary s = simulate_summary(m, phi_opt, &deflator, audit);
    out.max_pathwise_error = s.max_product_error;
    out.pathwise_ok = s.max_product_error <= 1e-9;
  }

  // (ii) Monte Carlo expected log wealth vs the deterministic optimum.
  SimOptions opts;
  opts.n_paths = n_paths;
  opts.seed = seed;
  opts.workers = workers;
  opts.n_steps = n_steps;
  {
    SimSummary s = simulate_summary(m, phi_opt, nullptr, opts);
    out.mc_mean = s.log_wealth_T.mean;
    out.mc_se = s.log_wealth_T.se;
    out.analytic = report.optimal_log_wealth;
    out.analytic_ok = std::abs(out.mc_mean - out.analytic) <= 3.0 * out.mc_se;
  }

  // (iii) perturbed primal candidates: mean log wealth <= optimum + 3 SE.
  out.primal_ok = true;
  for (std::uint64_t k = 0; k < 10; ++k) {
    FractionProcess phi = perturbed_fraction(m, report, seed, k);
    SimOptions popts = opts;
    popts.n_paths = std::max<std::size_t>(n_paths / 10, 1000);
    SimSummary s = simulate_summary(m, phi, nullptr, popts);
    DualityReport::PrimalProbe probe;
    probe.mean = s.log_wealth_T.mean;
    probe.se = s.log_wealth_T.se;
    probe.ok = probe.mean <= report.optimal_log_wealth + 3.0 * probe.se;
    out.primal_ok = out.primal_ok && probe.ok;
    out.primal.push_back(probe);
  }

  // (iv) perturbed valid deflators: log value >= optimum - tolerance.
  out.dual_ok = true;
  for (std::uint64_t k = 0; k < 10; ++k) {
    FractionProcess phi = perturbed_fraction(m, report, seed, 100 + k);
    DeflatorParam p;
    for (std::size_t s = 0; s < m.n_segments(); ++s) {
      const Segment& seg = m.segments()[s];
      p.beta.push_back(-phi[s]);
      std::vector<double> f;
      for (const auto& a : seg.jumps.atoms()) f.push_back(1.0 / (1.0 + phi[s].dot(a.x)));
      p.f_values.push_back(std::move(f));
    }
    // Smallest drift rate that dominates the battery (anchored at the
    // optimum, which is what the dual bound needs).
    auto battery = make_probe_battery(m, 32, seed, &phi_opt);
    for (std::size_t s = 0; s < m.n_segments(); ++s) {
      const Segment& seg = m.segments()[s];
      Eigen::VectorXd form = seg.drift + seg.covariance * p.beta[s];
      const auto& atoms = seg.jumps.atoms();
      for (std::size_t i = 0; i < atoms.size(); ++i)
        form += atoms[i].intensity *
                (p.f_values[s][i] * atoms[i].x - truncate_jump(atoms[i].x));
      double v = 0.0;
      for (const auto& theta : battery[s]) v = std::max(v, theta.dot(form));
      p.v_drift.push_back(v);
    }
    DeflatorValidation val = validate_deflator(m, p, battery);
    DualityReport::DualProbe probe;
    probe.log_value = val.log_value;
    probe.ok = val.valid && val.log_value >= report.optimal_log_wealth - 1e-9;
    out.dual_ok = out.dual_ok && probe.ok;
    out.dual.push_back(probe);
  }

  return out;
}

std::vector<FractionProcess> random_feasible_fractions(const MarketModel& m, int count,
                                                       std::uint64_t seed) {
  const int d = m.dim();
  std::vector<FractionProcess> out;
  for (int k = 0; k < count; ++k) {
    CounterRng rng(seed, CounterRng::kProbeStreamBase + 5000 + static_cast<std::uint64_t>(k));
    FractionProcess phi;
    for (std::size_t s = 0; s < m.n_segments(); ++s) {
      const Segment& seg = m.segments()[s];
      Eigen::VectorXd dir(d);
      for (int j = 0; j < d; ++j) dir[j] = rng.normal();
      if (dir.norm() == 0.0) dir = Eigen::VectorXd::Unit(d, 0);
      dir.normalize();
      const double reach =
          std::min(0.9 * max_feasible_step(seg, Eigen::VectorXd::Zero(d), dir), 4.0);
      phi.push_back((rng.uniform() * reach) * dir);
    }
    out.push_back(std::move(phi));
  }
  return out;
}

SupermartingaleReport check_supermartingale(const MarketModel& m, const SolveReport& report,
                                            const std::vector<FractionProcess>& test_phis,
                                            std::size_t n_paths, int n_checkpoints,
                                            std::uint64_t seed, int workers, int n_steps) {
  if (!report.certified)
    throw std::invalid_argument("check_supermartingale requires a certified solve report");
  SupermartingaleReport out;
  const DeflatorParam deflator = build_deflator(m, report);
  const FractionProcess phi_opt = optimal_fraction(report);

  SimOptions opts;
  opts.n_paths = n_paths;
  opts.seed = seed;
  opts.workers = workers;
  opts.n_steps = n_steps;

  // The optimal fraction deflates to the constant 1, pathwise.
  {
    SimOptions audit = opts;
    audit.n_paths = std::min<std::size_t>(n_paths, 2000);
    SimSummary s = simulate_summary(m, phi_opt, &deflator, audit);
    out.optimal_max_error = s.max_product_error;
    out.optimal_ok = s.max_product_error <= 1e-9;
  }

  const std::vector<double> grid = simulation_grid(m, opts.n_steps);
  std::vector<std::size_t> checkpoints;
  n_checkpoints = std::max(2, n_checkpoints);
  for (int k = 0; k < n_checkpoints; ++k) {
    const std::size_t idx =
        static_cast<std::size_t>(std::llround(static_cast<double>(k) *
                                              static_cast<double>(grid.size() - 1) /
                                              static_cast<double>(n_checkpoints - 1)));
    if (checkpoints.empty() || idx != checkpoints.back()) checkpoints.push_back(idx);
  }

  for (const auto& phi : test_phis) {
    SimSummary s = simulate_summary(m, phi, &deflator, opts, checkpoints);
    SupermartingaleReport::Case c;
    c.phi = phi.front();
    c.ok = true;
    c.worst_slack = -std::numeric_limits<double>::infinity();
    for (const auto& step : s.product_step) {
      // Non-increasing means up to Monte Carlo noise: per-path increments
      // between checkpoints must not be significantly positive.
      const double slack = step.mean - 3.0 * step.se;
      if (slack > c.worst_slack) {
        c.worst_slack = slack;
        c.worst_step = step.mean;
      }
      if (slack > 0.0) c.ok = false;
    }
    out.cases.push_back(std::move(c));
  }
  return out;
}

SplitBound qv_triangle_bound(double qv_cont, std::span<const double> jumps, double delta) {
  SplitBound b;
  double sum_sq = qv_cont;
  double small_sq = 0.0;
  double large_abs = 0.0;
  for (double j : jumps) {
    sum_sq += j * j;
    if (std::abs(j) > delta)
      large_abs += std::abs(j);
    else
      small_sq += j * j;
  }
  b.lhs = std::sqrt(sum_sq);
  b.rhs = std::sqrt(qv_cont) + large_abs + std::sqrt(small_sq);
  return b;
}

SplitBound l2_split_bound(std::span<const double> z, std::span<const double> u,
                          double delta) {
  SplitBound b;
  double sum_sq = 0.0, small_sq = 0.0, large_abs = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    sum_sq += z[i] * z[i];
    if (std::abs(u[i]) > delta)
      large_abs += std::abs(z[i]);
    else
      small_sq += z[i] * z[i];
  }
  b.lhs = std::sqrt(sum_sq);
  b.rhs = std::sqrt(small_sq) + large_abs;
  return b;
}

PathInequalityReport jump_variation_oracle(const MarketModel& m, const SolveReport& report,
                                     std::size_t n_cases, std::uint64_t seed) {
  if (!report.certified)
    throw std::invalid_argument("jump_variation_oracle requires a certified solve report");
  PathInequalityReport out;
  const FractionProcess phi = optimal_fraction(report);
  constexpr double delta = 0.5;

  // The continuous quadratic variation of the dual martingale is
  // deterministic: time integral of phi'c phi.
  double qv_cont = 0.0;
  for (std::size_t s = 0; s < m.n_segments(); ++s)
    qv_cont += m.segment_duration(s) *
               report.segments[s].phi.dot(m.segments()[s].covariance *
                                          report.segments[s].phi);

  SimOptions opts;
  opts.n_paths = n_cases;
  opts.seed = seed;
  opts.n_steps = 16;  // jump times are exact; the grid is irrelevant here
  PathBundle paths = simulate(m, phi, nullptr, opts);

  out.n_paths = n_cases;
  for (std::size_t p = 0; p < n_cases; ++p) {
    std::vector<double> dk, u;
    for (const auto& ev : paths.jumps[p]) {
      const Segment& seg = m.segments()[ev.segment];
      const double ui = report.segments[ev.segment].phi.dot(seg.jumps.atoms()[ev.atom].x);
      u.push_back(ui);
      dk.push_back(-ui / (1.0 + ui));
    }
    const SplitBound b1 = qv_triangle_bound(qv_cont, dk, delta);
    const SplitBound b2 = l2_split_bound(dk, u, delta);
    if (!b1.holds() || !b2.holds()) ++out.n_violations;
    out.worst_gap = std::max({out.worst_gap, b1.lhs - b1.rhs, b2.lhs - b2.rhs});
  }
  return out;
}

}  // namespace logopt
