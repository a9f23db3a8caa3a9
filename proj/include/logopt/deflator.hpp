#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "logopt/model.hpp"
#include "logopt/solver.hpp"

namespace logopt {

/// Deflator parametrization Z = E(beta.Xc + (f-1)*(mu-nu)) exp(-V): per
/// segment a loading beta on the continuous part, a positive jump multiplier
/// per atom, and a nonnegative drift rate v (V_t integrates v over time).
struct DeflatorParam {
  std::vector<Eigen::VectorXd> beta;            // per segment
  std::vector<std::vector<double>> f_values;    // per segment, per atom (> 0)
  std::vector<double> v_drift;                  // per segment (>= 0)
  bool valid = false;
  double log_value = 0.0;  // E[-ln Z_T], deterministic for this model class
};

/// Deterministic E[-ln Z_T] of the parametrized deflator:
///   sum_s dt_s (v_s + (1/2) beta'c beta + sum_i w_i (f_i - 1 - ln f_i)).
double deflator_log_value(const MarketModel& m, const DeflatorParam& p);

/// Optimal deflator from a certified solve: beta = -phi, f_i = 1/(1 + phi'x_i),
/// v from the report. Its reciprocal is the optimal wealth, pathwise. Throws
/// std::invalid_argument on an uncertified report.
DeflatorParam build_deflator(const MarketModel& m, const SolveReport& report);

struct ProbeCheck {
  std::size_t segment = 0;
  std::size_t probe = 0;
  double drift = 0.0;       // theta'b + theta'c beta + sum w (f theta'x - theta'h)
  double abs_integral = 0.0;  // sum w |f theta'x - theta'h|, must be finite
  bool passed = false;
};

struct DeflatorValidation {
  bool valid = false;
  double log_value = 0.0;
  double worst_slack = 0.0;  // max over probes of drift - v
  std::vector<ProbeCheck> failures;
  std::size_t n_probes = 0;
};

/// Check the supermartingale drift conditions against a battery of bounded
/// admissible probes, one battery entry per segment. Throws on non-positive
/// f values. `tol` is the acceptance slack on the drift inequality.
DeflatorValidation validate_deflator(const MarketModel& m, const DeflatorParam& p,
                                     const std::vector<std::vector<Eigen::VectorXd>>& probes,
                                     double tol = 1e-8);

/// Battery of bounded probes per segment: zero, +/- unit vectors pulled into
/// the domain, the anchor fraction (when given), and seeded random feasible
/// points.
std::vector<std::vector<Eigen::VectorXd>> make_probe_battery(
    const MarketModel& m, int n_random, std::uint64_t seed,
    const std::vector<Eigen::VectorXd>* anchor = nullptr);

}  // namespace logopt
