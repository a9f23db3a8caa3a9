#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace logopt {

/// One jump atom: relative jump size x (dimensionless) arriving with
/// intensity w (events per unit time).
struct JumpAtom {
  Eigen::VectorXd x;
  double intensity = 0.0;
};

/// Finite-atom jump measure F(dx) = sum_i w_i * delta_{x_i}(dx).
class JumpMeasure {
 public:
  JumpMeasure() = default;
  explicit JumpMeasure(std::vector<JumpAtom> atoms) : atoms_(std::move(atoms)) {}

  const std::vector<JumpAtom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  double total_intensity() const;

 private:
  std::vector<JumpAtom> atoms_;
};

/// Truncation h(x) = x * 1{|x| <= 1}, applied per atom via the Euclidean norm.
inline bool is_small_jump(const Eigen::VectorXd& x) { return x.norm() <= 1.0; }
inline Eigen::VectorXd truncate_jump(const Eigen::VectorXd& x) {
  return is_small_jump(x) ? x : Eigen::VectorXd::Zero(x.size()).eval();
}

/// Characteristics active on one time interval: drift b, diffusion covariance
/// c (both per unit time) and the jump measure.
struct Segment {
  double t_start = 0.0;
  Eigen::VectorXd drift;       // b
  Eigen::MatrixXd covariance;  // c, symmetric PSD
  JumpMeasure jumps;

  int dim() const { return static_cast<int>(drift.size()); }
};

/// Market model: piecewise-constant characteristics on [0, T], identity clock.
/// Immutable after construction.
class MarketModel {
 public:
  MarketModel(int dim, double horizon, std::vector<Segment> segments);

  /// Constant-characteristics convenience constructor.
  MarketModel(Eigen::VectorXd b, Eigen::MatrixXd c, JumpMeasure jumps, double horizon);

  int dim() const { return dim_; }
  double horizon() const { return horizon_; }

  const std::vector<Segment>& segments() const { return segments_; }
  std::size_t n_segments() const { return segments_.size(); }

  /// Segment active at time t (right-continuous at the breaks). Throws
  /// std::out_of_range unless 0 <= t <= horizon.
  const Segment& segment_at(double t) const;
  std::size_t segment_index_at(double t) const;

  /// End of segment s (start of the next one, or the horizon).
  double segment_end(std::size_t s) const;
  double segment_duration(std::size_t s) const {
    return segment_end(s) - segments_[s].t_start;
  }

 private:
  int dim_;
  double horizon_;
  std::vector<Segment> segments_;
};

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool usable() const;
  std::string summary() const;
};

/// Run all structural checks (PSD covariance, large-jump integrability, atom
/// sanity, horizon, segment layout). Collects failures instead of throwing.
ValidationReport validate_model(const MarketModel& m);

/// Relative PSD tolerance used by validate_model.
inline constexpr double kPsdTolerance = 1e-10;

/// One strict half space { lambda : 1 + lambda'x > 0 } contributed by an atom.
struct HalfSpace {
  Eigen::VectorXd atom;  // x_i
  std::size_t atom_index = 0;
};

/// The open domain on which the growth objective is finite: one half space
/// per atom; no atoms means all of R^d.
struct DomainDescription {
  int dim = 0;
  std::vector<HalfSpace> constraints;
  bool unconstrained() const { return constraints.empty(); }
};

DomainDescription admissible_domain(const Segment& seg);
std::vector<DomainDescription> admissible_domain(const MarketModel& m);

/// min_i (1 + lambda'x_i); +infinity when the segment has no atoms.
double domain_margin(const Segment& seg, const Eigen::VectorXd& lambda);

/// True iff lambda lies strictly inside the admissible domain.
bool is_feasible(const Segment& seg, const Eigen::VectorXd& lambda);

/// Largest t >= 0 such that domain_margin(lambda + t*dir) >= floor; +infinity
/// when no atom constrains the ray.
double max_feasible_step(const Segment& seg, const Eigen::VectorXd& lambda,
                         const Eigen::VectorXd& dir, double floor = 0.0);

/// Symmetric PSD square root factor A with A*A' = c (eigendecomposition,
/// negative round-off eigenvalues clamped to zero).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& c);

}  // namespace logopt
