#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "logopt/deflator.hpp"
#include "logopt/model.hpp"

namespace logopt {

struct SimOptions {
  std::size_t n_paths = 100000;
  int n_steps = 0;  // grid steps over [0, T]; 0 means 250 per unit time
  std::uint64_t seed = 42;
  int workers = 0;  // 0 means all hardware threads
};

struct JumpEvent {
  double time = 0.0;
  std::size_t segment = 0;
  std::size_t atom = 0;
};

/// Full per-path record (audit scale). Wealth is the stochastic exponential
/// of the fraction process against X; the deflator follows the parametrized
/// rule on the same driving noise. Both stay strictly positive.
struct PathBundle {
  std::vector<double> grid;  // 0 = t_0 < ... < t_N = T
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;

  std::vector<double> wealth;        // n_paths x grid.size()
  std::vector<double> deflator;      // same shape; empty without a deflator rule
  std::vector<double> log_wealth_T;  // per path
  // Interval-level decomposition of X: Brownian part and deterministic part
  // (drift plus small-jump compensator), n_paths x (grid.size()-1) x dim.
  std::vector<double> x_cont;
  std::vector<double> x_drift;
  std::vector<std::vector<JumpEvent>> jumps;  // per path

  double wealth_at(std::size_t path, std::size_t k) const {
    return wealth[path * grid.size() + k];
  }
  double deflator_at(std::size_t path, std::size_t k) const {
    return deflator[path * grid.size() + k];
  }
  Eigen::Map<const Eigen::VectorXd> x_cont_at(std::size_t path, std::size_t k, int dim) const {
    return {x_cont.data() + (path * (grid.size() - 1) + k) * dim, dim};
  }
  Eigen::Map<const Eigen::VectorXd> x_drift_at(std::size_t path, std::size_t k, int dim) const {
    return {x_drift.data() + (path * (grid.size() - 1) + k) * dim, dim};
  }
};

struct GridStat {
  double mean = 0.0;
  double se = 0.0;
};

/// Streaming Monte Carlo summary; no per-path storage, deterministic for any
/// worker count (fixed-size path blocks reduced in block order).
struct SimSummary {
  std::vector<double> grid;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;

  std::vector<GridStat> wealth;
  std::vector<GridStat> deflator;          // empty without a deflator rule
  std::vector<GridStat> product;           // deflator * wealth
  std::vector<std::size_t> checkpoints;    // grid indices of the step stats
  std::vector<GridStat> product_step;      // product increments between checkpoints
  GridStat log_wealth_T;
  double max_product_error = 0.0;  // max |deflator * wealth - 1| anywhere
};

/// Per-segment constant fraction process. Throws std::invalid_argument if a
/// fraction is outside the closed admissible domain of its segment.
using FractionProcess = std::vector<Eigen::VectorXd>;

FractionProcess constant_fraction(const MarketModel& m, const Eigen::VectorXd& phi);

/// Simulate paths of X, the wealth E(phi.X) and optionally the deflator,
/// storing everything (use at audit scale).
PathBundle simulate(const MarketModel& m, const FractionProcess& phi,
                    const DeflatorParam* deflator, const SimOptions& opts);

/// Streaming variant; `checkpoints` selects the grid indices for the
/// product-increment statistics (empty means every grid point).
SimSummary simulate_summary(const MarketModel& m, const FractionProcess& phi,
                            const DeflatorParam* deflator, const SimOptions& opts,
                            std::vector<std::size_t> checkpoints = {});

/// The simulation grid: uniform steps plus every segment break.
std::vector<double> simulation_grid(const MarketModel& m, int n_steps);

}  // namespace logopt
