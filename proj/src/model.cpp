#include "logopt/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace logopt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double JumpMeasure::total_intensity() const {
  double total = 0.0;
  for (const auto& a : atoms_) total += a.intensity;
  return total;
}

MarketModel::MarketModel(int dim, double horizon, std::vector<Segment> segments)
    : dim_(dim), horizon_(horizon), segments_(std::move(segments)) {
  if (segments_.empty()) throw std::invalid_argument("model needs at least one segment");
}

MarketModel::MarketModel(Eigen::VectorXd b, Eigen::MatrixXd c, JumpMeasure jumps,
                         double horizon)
    : dim_(static_cast<int>(b.size())), horizon_(horizon) {
  Segment seg;
  seg.t_start = 0.0;
  seg.drift = std::move(b);
  seg.covariance = std::move(c);
  seg.jumps = std::move(jumps);
  segments_.push_back(std::move(seg));
}

std::size_t MarketModel::segment_index_at(double t) const {
  if (!(t >= 0.0) || !(t <= horizon_)) {
    std::ostringstream os;
    os << "time " << t << " outside [0, " << horizon_ << "]";
    throw std::out_of_range(os.str());
  }
  // Right-continuous: at a break the later segment is active.
  std::size_t s = 0;
  while (s + 1 < segments_.size() && t >= segments_[s + 1].t_start) ++s;
  return s;
}

const Segment& MarketModel::segment_at(double t) const {
  return segments_[segment_index_at(t)];
}

double MarketModel::segment_end(std::size_t s) const {
  return s + 1 < segments_.size() ? segments_[s + 1].t_start : horizon_;
}

bool ValidationReport::usable() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks)
    os << (c.passed ? "[pass] " : "[FAIL] ") << c.name
       << (c.message.empty() ? "" : ": " + c.message) << "\n";
  return os.str();
}

namespace {

void check_segment(const Segment& seg, int dim, std::size_t index,
                   std::vector<ValidationCheck>& out) {
  const std::string tag = "segment " + std::to_string(index) + ": ";

  {
    ValidationCheck c{tag + "shapes", true, ""};
    if (seg.drift.size() != dim || seg.covariance.rows() != dim ||
        seg.covariance.cols() != dim) {
      c.passed = false;
      c.message = "b or c has wrong dimension";
    }
    for (const auto& a : seg.jumps.atoms())
      if (a.x.size() != dim) {
        c.passed = false;
        c.message = "atom dimension mismatch";
      }
    out.push_back(c);
    if (!c.passed) return;  // remaining checks assume consistent shapes
  }

  {
    ValidationCheck c{tag + "finite entries", true, ""};
    if (!seg.drift.allFinite() || !seg.covariance.allFinite()) {
      c.passed = false;
      c.message = "non-finite b or c entry";
    }
    for (const auto& a : seg.jumps.atoms())
      if (!a.x.allFinite() || !std::isfinite(a.intensity)) {
        c.passed = false;
        c.message = "non-finite atom";
      }
    out.push_back(c);
    if (!c.passed) return;
  }

  {
    ValidationCheck c{tag + "c symmetric", true, ""};
    const double asym = (seg.covariance - seg.covariance.transpose()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, seg.covariance.cwiseAbs().maxCoeff());
    if (asym > 1e-12 * scale) {
      c.passed = false;
      std::ostringstream os;
      os << "max asymmetry " << asym;
      c.message = os.str();
    }
    out.push_back(c);
  }

  {
    ValidationCheck c{tag + "c positive semidefinite", true, ""};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(seg.covariance);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo < -kPsdTolerance * std::max(hi, 0.0)) {
      c.passed = false;
      std::ostringstream os;
      os << "eigenvalue " << lo;
      c.message = os.str();
    }
    out.push_back(c);
  }

  {
    ValidationCheck c{tag + "atoms nonzero (F({0}) = 0)", true, ""};
    for (const auto& a : seg.jumps.atoms())
      if (a.x.norm() == 0.0) {
        c.passed = false;
        c.message = "F({0})=0 violated";
      }
    out.push_back(c);
  }

  {
    ValidationCheck c{tag + "intensities nonnegative", true, ""};
    for (const auto& a : seg.jumps.atoms())
      if (a.intensity < 0.0) {
        c.passed = false;
        c.message = "negative intensity";
      }
    out.push_back(c);
  }

  {
    ValidationCheck c{tag + "atoms pairwise distinct", true, ""};
    const auto& atoms = seg.jumps.atoms();
    for (std::size_t i = 0; i < atoms.size() && c.passed; ++i)
      for (std::size_t j = i + 1; j < atoms.size(); ++j)
        if ((atoms[i].x - atoms[j].x).norm() == 0.0) {
          c.passed = false;
          c.message = "duplicate atoms (merge their intensities)";
          break;
        }
    out.push_back(c);
  }

  {
    // Large-jump integrability: sum of w|x| over |x| > 1 must be finite.
    // Always finite for a finite atom list; computed and recorded anyway.
    ValidationCheck c{tag + "large jumps integrable", true, ""};
    double s = 0.0;
    for (const auto& a : seg.jumps.atoms()) {
      const double nx = a.x.norm();
      if (nx > 1.0) s += a.intensity * nx;
    }
    std::ostringstream os;
    os << "sum w|x| over |x|>1 = " << s;
    c.message = os.str();
    c.passed = std::isfinite(s);
    out.push_back(c);
  }

  {
    ValidationCheck c{tag + "total intensity finite", true, ""};
    c.passed = std::isfinite(seg.jumps.total_intensity());
    out.push_back(c);
  }
}

}  // namespace

ValidationReport validate_model(const MarketModel& m) {
  ValidationReport report;

  {
    ValidationCheck c{"horizon positive and finite", true, ""};
    if (!(m.horizon() > 0.0) || !std::isfinite(m.horizon())) {
      c.passed = false;
      c.message = "horizon must satisfy 0 < T < infinity";
    }
    report.checks.push_back(c);
  }

  {
    ValidationCheck c{"segment layout", true, ""};
    const auto& segs = m.segments();
    if (segs.front().t_start != 0.0) {
      c.passed = false;
      c.message = "first segment must start at t = 0";
    }
    for (std::size_t s = 0; s + 1 < segs.size(); ++s)
      if (!(segs[s].t_start < segs[s + 1].t_start)) {
        c.passed = false;
        c.message = "segment breaks must be strictly increasing";
      }
    if (segs.back().t_start >= m.horizon()) {
      c.passed = false;
      c.message = "segment break at or after the horizon";
    }
    report.checks.push_back(c);
  }

  for (std::size_t s = 0; s < m.n_segments(); ++s)
    check_segment(m.segments()[s], m.dim(), s, report.checks);

  return report;
}

DomainDescription admissible_domain(const Segment& seg) {
  DomainDescription d;
  d.dim = seg.dim();
  const auto& atoms = seg.jumps.atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i)
    d.constraints.push_back(HalfSpace{atoms[i].x, i});
  return d;
}

std::vector<DomainDescription> admissible_domain(const MarketModel& m) {
  std::vector<DomainDescription> out;
  out.reserve(m.n_segments());
  for (const auto& seg : m.segments()) out.push_back(admissible_domain(seg));
  return out;
}

double domain_margin(const Segment& seg, const Eigen::VectorXd& lambda) {
  double margin = kInf;
  for (const auto& a : seg.jumps.atoms())
    margin = std::min(margin, 1.0 + lambda.dot(a.x));
  return margin;
}

bool is_feasible(const Segment& seg, const Eigen::VectorXd& lambda) {
  return domain_margin(seg, lambda) > 0.0;
}

double max_feasible_step(const Segment& seg, const Eigen::VectorXd& lambda,
                         const Eigen::VectorXd& dir, double floor) {
  double t_max = kInf;
  for (const auto& a : seg.jumps.atoms()) {
    const double slope = dir.dot(a.x);
    if (slope < 0.0) {
      const double room = 1.0 + lambda.dot(a.x) - floor;
      t_max = std::min(t_max, room / (-slope));
    }
  }
  return std::max(t_max, 0.0);
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace logopt
