#include <doctest.h>

#include <cmath>
#include <cstring>

#include "logopt/objective.hpp"
#include "logopt/rng.hpp"
#include "logopt/solver.hpp"
#include "support/oracles.hpp"

using namespace logopt;
namespace oracle = logopt::testing;

namespace {
double eval_at(const Segment& seg, double l) {
  Eigen::VectorXd x(1);
  x << l;
  return eval_objective(seg, x, false, false).value;
}
}  // namespace

TEST_CASE("quadratic model solves to the closed form") {
  const MarketModel m = oracle::merton_model();
  const SolveReport r = solve(m);
  REQUIRE(r.certified);
  // phi = c^{-1} b = 2, value = -b^2/(2c) = -0.08, cross-checked by grid search
  const Segment& seg = m.segments()[0];
  const double grid_phi =
      oracle::grid_min_1d([&](double l) { return eval_at(seg, l); }, -10.0, 10.0);
  CHECK(std::abs(grid_phi - 2.0) < 1e-7);
  CHECK(std::abs(r.phi()(0) - 2.0) < 1e-10);
  CHECK(std::abs(r.segments[0].value + 0.08) < 1e-12);
  CHECK(r.optimal_log_wealth == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(r.segments[0].grad_norm <= 1e-10);
  CHECK(r.segments[0].v_drift == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.segments[0].value <= 0.0);
}

TEST_CASE("pure-jump single atom solves to zero") {
  const MarketModel m = oracle::one_atom_model();
  const SolveReport r = solve(m);
  const Segment& seg = m.segments()[0];
  const double grid_phi =
      oracle::grid_min_1d([&](double l) { return eval_at(seg, l); }, -10.0, 1.99);
  CHECK(std::abs(grid_phi) < 1e-7);
  CHECK(std::abs(r.phi()(0)) < 1e-10);
  CHECK(std::abs(r.segments[0].value) < 1e-12);
}

TEST_CASE("two-atom model matches the scalar root oracle") {
  const MarketModel m = oracle::two_atom_model();
  const SolveReport r = solve(m);
  // independent oracle: the optimality condition reduces to u/(1-u^2) = 0.1
  // with u = phi/2; solve it by bisection
  const double u = oracle::bisect_root(
      [](double v) { return v / (1.0 - v * v) - 0.1; }, 0.0, 0.5);
  const double phi_oracle = 2.0 * u;
  CHECK(std::abs(phi_oracle - 0.19803902718556966) < 1e-12);  // frozen closed form
  CHECK(std::abs(r.phi()(0) - phi_oracle) < 1e-9);
  CHECK(r.segments[0].kkt_residual <= 1e-8);
  // grid-search cross check on the objective itself
  const Segment& seg = m.segments()[0];
  const double grid_phi =
      oracle::grid_min_1d([&](double l) { return eval_at(seg, l); }, -1.99, 1.99);
  CHECK(std::abs(grid_phi - phi_oracle) < 1e-7);
}

TEST_CASE("non-attainment raises a structured error") {
  const MarketModel m = oracle::free_lunch_model();
  CHECK_THROWS_AS((void)solve(m), NonAttainmentError);
  try {
    (void)solve(m);
  } catch (const NonAttainmentError& e) {
    CHECK(e.witness()(0) == doctest::Approx(1.0));
    CHECK(e.recession_value() == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK_FALSE(e.inconclusive());
  }
}

TEST_CASE("first-order verification") {
  const MarketModel seg_m = oracle::merton_model();
  const Segment& seg = seg_m.segments()[0];
  Eigen::VectorXd opt(1), off(1);
  opt << 2.0;
  off << 1.0;
  // at the optimum b - c phi = 0, the form vanishes for every probe
  CHECK(verify_first_order(seg, opt, 64, 7) <= 1e-12);
  // away from it some probe exposes a positive directional improvement
  CHECK(verify_first_order(seg, off, 64, 7) > 0.01);

  const MarketModel two = oracle::two_atom_model();
  const SolveReport r = solve(two);
  CHECK(verify_first_order(two.segments()[0], r.phi(), 64, 7) <= 1e-8);

  Eigen::VectorXd bad(1);
  bad << 5.0;
  CHECK_THROWS_AS(verify_first_order(two.segments()[0], bad, 8, 7),
                  std::invalid_argument);
}

TEST_CASE("dual drift and the deterministic dual bound") {
  SUBCASE("quadratic model by hand") {
    const MarketModel m = oracle::merton_model();
    const SolveReport r = solve(m);
    CHECK(r.dual_log_value == doctest::Approx(0.08).epsilon(1e-12));
    CHECK(evaluate_dual_bound(m, {r.phi()}) == doctest::Approx(0.08).epsilon(1e-12));
  }
  SUBCASE("zero model gives zero") {
    MarketModel zero(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1), JumpMeasure{},
                     1.0);
    const SolveReport r = solve(zero);
    CHECK(r.dual_log_value == 0.0);
  }
  SUBCASE("dual bound equals minus the integrated objective at the optimum") {
    for (const auto& m : {oracle::merton_model(), oracle::one_atom_model(),
                          oracle::two_atom_model(), oracle::mixed_2d_model(),
                          oracle::two_segment_model()}) {
      const SolveReport r = solve(m);
      CHECK(r.dual_log_value ==
            doctest::Approx(-r.total_value).epsilon(1e-12));
      const bool sign_consistent =
          r.dual_log_value > 0.0 ? r.total_value < 0.0 : r.total_value == 0.0;
      CHECK(sign_consistent);
    }
  }
  SUBCASE("nonnegativity of the optimal drift split") {
    for (const auto& m : {oracle::merton_model(), oracle::two_atom_model(),
                          oracle::mixed_2d_model()}) {
      const SolveReport r = solve(m);
      const Segment& seg = m.segments()[0];
      CHECK(dual_drift_rate_signed(seg, r.phi()) >= -1e-10);
      CHECK(-r.segments[0].value >= -1e-10);  // value <= 0
    }
  }
}

TEST_CASE("solver determinism is bit exact") {
  const MarketModel m = oracle::mixed_2d_model();
  const SolveReport a = solve(m);
  const SolveReport b = solve(m);
  REQUIRE(a.segments.size() == b.segments.size());
  CHECK(std::memcmp(a.phi().data(), b.phi().data(), sizeof(double) * 2) == 0);
  CHECK(a.total_value == b.total_value);
  CHECK(a.dual_log_value == b.dual_log_value);
  CHECK(a.segments[0].kkt_residual == b.segments[0].kkt_residual);
}

TEST_CASE("scaling (b, c, w) jointly leaves the optimum in place") {
  const MarketModel base = oracle::two_atom_model();
  const SolveReport r0 = solve(base);
  for (double kappa : {0.5, 3.0, 10.0}) {
    std::vector<JumpAtom> atoms;
    for (const auto& a : base.segments()[0].jumps.atoms())
      atoms.push_back({a.x, kappa * a.intensity});
    MarketModel scaled(kappa * base.segments()[0].drift,
                       kappa * base.segments()[0].covariance, JumpMeasure(atoms), 1.0);
    const SolveReport r = solve(scaled);
    CHECK(std::abs(r.phi()(0) - r0.phi()(0)) < 1e-9);
    CHECK(r.total_value == doctest::Approx(kappa * r0.total_value).epsilon(1e-9));
    CHECK(r.dual_log_value == doctest::Approx(kappa * r0.dual_log_value).epsilon(1e-9));
  }
}

TEST_CASE("smoothing continuation reaches the exact optimum") {
  for (const auto& m : {oracle::merton_model(), oracle::one_atom_model(),
                        oracle::two_atom_model(), oracle::mixed_2d_model()}) {
    const Segment& seg = m.segments()[0];
    const SolveReport r = solve(m);
    // minimizers of the smoothed objective converge to the exact one
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(seg.dim());
    for (int k = 1; k <= 6; ++k) {
      warm = minimize_smoothed(seg, 1.0 - std::pow(10.0, -k), warm);
    }
    CHECK((warm - r.phi()).norm() < 1e-4);

    // the forced ladder lands on the same optimum
    SolveOptions opts;
    opts.force_continuation = true;
    const SegmentSolution ladder_sol = solve_segment(seg, opts);
    CHECK((ladder_sol.phi - r.phi()).norm() < 1e-8);
    CHECK_FALSE(ladder_sol.ladder.empty());
  }
}

TEST_CASE("near-boundary optimum raises the boundary-proximity flag") {
  // unit drift against a faint negative atom: the optimum sits at margin
  // 0.5 w / (b + 0.5 w) ~ 8e-8, inside the boundary-proximity band. Gradient
  // evaluations near such a margin carry ~3e-9 of cancellation noise, so the
  // certification tolerance is loosened accordingly.
  Eigen::VectorXd b(1), x(1);
  b << 1.0;
  x << -0.5;
  MarketModel m(b, Eigen::MatrixXd::Zero(1, 1), JumpMeasure({{x, 1.6e-7}}), 1.0);
  SolveOptions opts;
  opts.tol = 1e-6;
  const SegmentSolution sol = solve_segment(m.segments()[0], opts);
  CHECK(sol.boundary_mode);
  CHECK(sol.margin < 1e-7);
  CHECK(sol.margin > 0.0);
  CHECK(std::abs(sol.phi(0) - 2.0) < 1e-6);  // phi* = 2 (1 - margin)
  CHECK(sol.kkt_residual <= 1e-6);
}

TEST_CASE("multi-segment solve handles each segment separately") {
  const MarketModel m = oracle::two_segment_model();
  const SolveReport r = solve(m);
  REQUIRE(r.segments.size() == 2);
  CHECK(std::abs(r.phi(0)(0) - 2.0) < 1e-9);
  CHECK(std::abs(r.phi(1)(0) - 0.19803902718556966) < 1e-8);
  CHECK(r.segment_durations[0] == doctest::Approx(1.0));
  CHECK(r.segment_durations[1] == doctest::Approx(1.0));
}

TEST_CASE("holdings conversion round trip") {
  Eigen::VectorXd phi(2);
  phi << 0.4, -0.2;
  const PortfolioPair pair = fraction_to_holdings({phi});
  // at t = 0 wealth is 1, so holdings equal the fraction
  CHECK((PortfolioPair::holdings(phi, 1.0) - phi).norm() == 0.0);
  // after a deterministic step to wealth 1.05
  const Eigen::VectorXd theta = PortfolioPair::holdings(pair.phi[0], 1.05);
  CHECK(theta(0) == doctest::Approx(0.42));
  CHECK((PortfolioPair::fraction(theta, 1.05) - phi).norm() < 1e-15);
}

TEST_CASE("five starting points land on the same optimum") {
  // attainment certified implies a unique canonical minimizer; the start of
  // the iteration must not matter
  for (const auto& m : {oracle::merton_model(), oracle::two_atom_model(),
                        oracle::mixed_2d_model()}) {
    const Segment& seg = m.segments()[0];
    const int d = seg.dim();
    CounterRng rng(77, 0);
    double ref_value = 0.0;
    Eigen::VectorXd ref_phi;
    for (int k = 0; k < 5; ++k) {
      SolveOptions opts;
      Eigen::VectorXd start(d);
      for (int j = 0; j < d; ++j) start[j] = 3.0 * (rng.uniform() - 0.5);
      opts.start = start;
      const SegmentSolution sol = solve_segment(seg, opts);
      CHECK(sol.margin > 0.0);
      if (k == 0) {
        ref_value = sol.value;
        ref_phi = sol.phi;
      } else {
        CHECK(std::abs(sol.value - ref_value) <= 1e-8);
        CHECK((sol.phi - ref_phi).norm() <= 1e-7);
      }
    }
  }
}

TEST_CASE("exhausted iteration budget raises a failure with the trace") {
  const MarketModel m = oracle::two_atom_model();
  SolveOptions opts;
  opts.max_newton = 1;  // one step cannot reach the optimum of this model
  CHECK_THROWS_AS((void)solve_segment(m.segments()[0], opts), SolveFailure);
  try {
    (void)solve_segment(m.segments()[0], opts);
  } catch (const SolveFailure& e) {
    CHECK(e.last_point().size() == 1);
    CHECK(e.last_grad_norm() > 0.0);
    CHECK(std::string(e.what()).find("segment 0") != std::string::npos);
  }
}
