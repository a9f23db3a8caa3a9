#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "logopt/simulate.hpp"

namespace logopt {

/// Duality verification of a certified optimum: pathwise reciprocal identity
/// between deflator and wealth, Monte Carlo match of the expected log wealth
/// against the deterministic value, and the primal/dual gaps on perturbed
/// candidates.
struct DualityReport {
  // (i) pathwise: deflator * wealth = 1 on audit paths
  double max_pathwise_error = 0.0;
  bool pathwise_ok = false;
  // (ii) E[ln W_T] vs the deterministic optimum, 3 standard errors
  double mc_mean = 0.0;
  double mc_se = 0.0;
  double analytic = 0.0;
  bool analytic_ok = false;
  // (iii) perturbed primal candidates must not beat the optimum
  struct PrimalProbe {
    double mean = 0.0;
    double se = 0.0;
    bool ok = false;
  };
  std::vector<PrimalProbe> primal;
  bool primal_ok = false;
  // (iv) perturbed valid deflators must not undercut the optimum
  struct DualProbe {
    double log_value = 0.0;
    bool ok = false;
  };
  std::vector<DualProbe> dual;
  bool dual_ok = false;

  bool all_ok() const { return pathwise_ok && analytic_ok && primal_ok && dual_ok; }
};

DualityReport verify_duality(const MarketModel& m, const SolveReport& report,
                             std::size_t n_paths, std::uint64_t seed, int workers = 0,
                             int n_steps = 0);

/// Deflated-wealth supermartingale battery: for each test fraction the grid
/// means of deflator * wealth must be non-increasing up to 3-SE slack; the
/// optimal fraction itself gives the constant 1 pathwise.
struct SupermartingaleReport {
  struct Case {
    Eigen::VectorXd phi;  // first-segment value of the test fraction
    double worst_step = 0.0;
    double worst_slack = 0.0;  // worst (step mean - 3 se); <= 0 passes
    bool ok = false;
  };
  std::vector<Case> cases;
  double optimal_max_error = 0.0;  // max |Z W - 1| for the optimal fraction
  bool optimal_ok = false;
  bool all_ok() const {
    if (!optimal_ok) return false;
    for (const auto& c : cases)
      if (!c.ok) return false;
    return true;
  }
};

SupermartingaleReport check_supermartingale(const MarketModel& m, const SolveReport& report,
                                            const std::vector<FractionProcess>& test_phis,
                                            std::size_t n_paths, int n_checkpoints,
                                            std::uint64_t seed, int workers = 0,
                                            int n_steps = 0);

/// Seeded feasible test fractions for the battery above.
std::vector<FractionProcess> random_feasible_fractions(const MarketModel& m, int count,
                                                       std::uint64_t seed);

/// Triangle split of the square-root quadratic variation:
///   sqrt(qv_cont + sum jump^2)
///     <= sqrt(qv_cont) + sum_{|jump|>delta} |jump| + sqrt(sum_{|jump|<=delta} jump^2).
struct SplitBound {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs <= rhs * (1.0 + 1e-12) + 1e-12; }
};
SplitBound qv_triangle_bound(double qv_cont, std::span<const double> jumps, double delta);

/// l2-l1 split of the jump sizes z_i = u_i / (1 + u_i), indicator on |u_i|:
///   sqrt(sum z^2) <= sqrt(sum_{|u|<=delta} z^2) + sum_{|u|>delta} |z|.
SplitBound l2_split_bound(std::span<const double> z, std::span<const double> u,
                          double delta);

/// Checks both split bounds on the jump part of the optimal dual martingale
/// over simulated paths (delta = 0.5).
struct PathInequalityReport {
  std::size_t n_paths = 0;
  std::size_t n_violations = 0;
  double worst_gap = 0.0;  // max lhs - rhs observed
  bool ok() const { return n_violations == 0; }
};
PathInequalityReport jump_variation_oracle(const MarketModel& m, const SolveReport& report,
                                     std::size_t n_cases, std::uint64_t seed);

}  // namespace logopt
