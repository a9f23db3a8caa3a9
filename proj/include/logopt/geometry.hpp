#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "logopt/model.hpp"

namespace logopt {

/// Asymptotic slope of the growth objective along the unit direction y:
///
///   +infinity                          if y'cy > 0 or some atom with w > 0
///                                      has y'x < 0,
///   -y'b + sum_{y'x_i > 0} w_i y'h(x_i) otherwise.
///
/// A strictly negative value certifies unbounded descent (no minimizer).
/// Throws std::invalid_argument on a zero vector; non-unit input is
/// normalized.
double recession_value(const Segment& seg, const Eigen::VectorXd& y);

struct DirectionDiagnostic {
  Eigen::VectorXd direction;
  double value = 0.0;          // asymptotic slope along +direction
  double reverse_value = 0.0;  // along -direction
  double quad_form = 0.0;      // y'cy
  double mass_minus = 0.0;     // F{x : y'x < 0}
  double mass_plus = 0.0;      // F{x : y'x > 0}
  double linear_part = 0.0;    // -y'b + sum_{y'x>0} w y'h
};

/// Outcome of the minimum-attainment analysis for one segment.
struct RecessionReport {
  bool attained = false;
  /// Present when attained is false: either a strict descent direction or a
  /// flat-but-not-constant direction (inconclusive tie, flagged below).
  std::optional<Eigen::VectorXd> witness_direction;
  double witness_value = 0.0;
  bool witness_inconclusive = false;
  /// Values of the objective along the witness ray at increasing scales;
  /// strictly decreasing for a strict descent witness.
  std::vector<double> witness_ray_values;
  /// Orthonormal basis of { y : cy = 0, y'b = 0, y'x_i = 0 for all atoms };
  /// the objective is constant along these directions.
  std::vector<Eigen::VectorXd> rc_basis;
  std::vector<DirectionDiagnostic> diagnostics;
  int n_directions_checked = 0;
  double tol = 0.0;
};

/// Absolute tolerance for recession-slope decisions. Ties within the band are
/// resolved conservatively (attained = false, flagged inconclusive) unless
/// both +y and -y are flat.
inline constexpr double kRecessionTol = 1e-9;

/// Certify attainment of the minimum by direction search: low-discrepancy
/// sphere samples, null-space candidates of the stacked constraints, and
/// seeded local descent refinement of near-flat directions. Desk scale only
/// (dim <= 4; larger models are rejected).
RecessionReport attainment_certificate(const Segment& seg, int n_dirs, std::uint64_t seed);

}  // namespace logopt
