#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "logopt/geometry.hpp"
#include "logopt/model.hpp"

namespace logopt {

struct SolveOptions {
  double tol = 1e-10;          // gradient-norm target at interior optima
  int max_newton = 200;        // per Newton stage
  int n_probes = 64;           // first-order verification probes
  std::uint64_t seed = 42;
  double boundary_threshold = 1e-7;  // admissibility margin that switches to
                                     // the directional certificate
  int n_recession_dirs = 512;
  bool force_continuation = false;  // always run the smoothing ladder
  std::optional<Eigen::VectorXd> start;  // iteration start (default: origin)
};

struct LadderStage {
  double delta = 0.0;
  int iterations = 0;
  Eigen::VectorXd minimizer;
};

/// Per-segment optimum and its certificates.
struct SegmentSolution {
  Eigen::VectorXd phi;        // optimal fraction
  double value = 0.0;         // objective at phi (always <= 0)
  double grad_norm = 0.0;
  double kkt_residual = 0.0;  // max first-order violation over probes
  double v_drift = 0.0;       // nonnegative drift rate of the dual process
  double dual_bound_rate = 0.0;  // v_drift + (1/2)phi'c phi + sum w (ln(1+u) - u/(1+u))
  double margin = 0.0;        // min_i (1 + phi'x_i)
  bool boundary_mode = false;
  int iterations = 0;
  std::vector<LadderStage> ladder;
  RecessionReport certificate;
};

struct SolveReport {
  std::vector<SegmentSolution> segments;
  std::vector<double> segment_durations;
  double total_value = 0.0;         // time-integrated objective
  double dual_log_value = 0.0;       // deterministic value of the dual bound
  double optimal_log_wealth = 0.0;  // expected terminal log wealth = -total_value
  double max_grad_norm = 0.0;
  double max_kkt_residual = 0.0;
  bool certified = false;

  const Eigen::VectorXd& phi(std::size_t segment = 0) const {
    return segments.at(segment).phi;
  }
};

/// Raised when the attainment certificate reports an unbounded-descent (or
/// inconclusive flat) direction; carries the witness.
class NonAttainmentError : public std::runtime_error {
 public:
  NonAttainmentError(std::string what, Eigen::VectorXd witness, double recession_value,
                     bool inconclusive, std::size_t segment)
      : std::runtime_error(std::move(what)),
        witness_(std::move(witness)),
        recession_value_(recession_value),
        inconclusive_(inconclusive),
        segment_(segment) {}

  const Eigen::VectorXd& witness() const { return witness_; }
  double recession_value() const { return recession_value_; }
  bool inconclusive() const { return inconclusive_; }
  std::size_t segment() const { return segment_; }

 private:
  Eigen::VectorXd witness_;
  double recession_value_;
  bool inconclusive_;
  std::size_t segment_;
};

/// Raised when the Newton iteration exhausts its budget; carries the trace.
class SolveFailure : public std::runtime_error {
 public:
  SolveFailure(std::string what, Eigen::VectorXd last_point, double last_grad_norm)
      : std::runtime_error(std::move(what)),
        last_point_(std::move(last_point)),
        last_grad_norm_(last_grad_norm) {}
  const Eigen::VectorXd& last_point() const { return last_point_; }
  double last_grad_norm() const { return last_grad_norm_; }

 private:
  Eigen::VectorXd last_point_;
  double last_grad_norm_;
};

/// Minimize the growth objective on one segment. Runs the attainment
/// certificate first (throws NonAttainmentError on failure), then damped
/// Newton from 0 with a fraction-to-boundary line search; on stall, a
/// smoothing continuation ladder (delta = 0.5, 0.9, 0.99, 0.999, then the
/// exact objective) restarts the iteration. The minimizer is canonicalized by
/// removing its component along the constancy directions.
SegmentSolution solve_segment(const Segment& seg, const SolveOptions& opts = {},
                              std::size_t segment_index = 0);

/// Solve every segment and assemble the time-integrated report.
SolveReport solve(const MarketModel& m, const SolveOptions& opts = {});

/// Minimizer of the smoothed objective at fixed delta (used by the
/// continuation ladder and by consistency tests).
Eigen::VectorXd minimize_smoothed(const Segment& seg, double delta,
                                  const Eigen::VectorXd& start, double tol = 1e-10,
                                  int max_iter = 200, int* iterations = nullptr);

/// Max over probe fractions of the first-order inequality
///   (probe - phi)'(b - c phi)
///    + sum_i w_i ((probe - phi)'x_i / (1 + phi'x_i) - (probe - phi)'h(x_i)),
/// which is <= 0 at the minimizer for every admissible probe. Probes: 0, the
/// doubled fraction pulled into the domain, and n_probes seeded random
/// feasible points.
double verify_first_order(const Segment& seg, const Eigen::VectorXd& phi, int n_probes,
                          std::uint64_t seed);

/// Signed drift rate phi'(b - c phi) + sum_i w_i (u_i/(1+u_i) - phi'h(x_i));
/// nonnegative at the optimum, and its absolute value is the dual drift.
double dual_drift_rate_signed(const Segment& seg, const Eigen::VectorXd& phi);

/// Rate of the deterministic dual bound on one segment:
///   |drift| + (1/2) phi'c phi + sum_i w_i (ln(1+u_i) - u_i/(1+u_i)).
double dual_bound_rate(const Segment& seg, const Eigen::VectorXd& phi);

/// Time-integrated dual bound over all segments (phi constant per segment).
/// Equals -T * L(phi) at any optimum.
double evaluate_dual_bound(const MarketModel& m, const std::vector<Eigen::VectorXd>& phi);

/// Fraction process together with the pathwise conversion rule to holdings:
/// theta_t = phi_t * W_{t-} and back phi_t = theta_t / (1 + (theta.X)_{t-}).
struct PortfolioPair {
  std::vector<Eigen::VectorXd> phi;  // per segment

  static Eigen::VectorXd holdings(const Eigen::VectorXd& phi, double wealth_before) {
    return phi * wealth_before;
  }
  static Eigen::VectorXd fraction(const Eigen::VectorXd& theta, double wealth_before) {
    return theta / wealth_before;
  }
};

PortfolioPair fraction_to_holdings(std::vector<Eigen::VectorXd> phi);

}  // namespace logopt
