#include "logopt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "logopt/objective.hpp"
#include "logopt/rng.hpp"

namespace logopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kClassifyTol = 1e-12;

struct SlopeBreakdown {
  double quad_form = 0.0;
  double mass_minus = 0.0;
  double mass_plus = 0.0;
  double linear_part = 0.0;
  double value = 0.0;
};

SlopeBreakdown slope_breakdown(const Segment& seg, const Eigen::VectorXd& y) {
  SlopeBreakdown b;
  b.quad_form = y.dot(seg.covariance * y);
  b.linear_part = -y.dot(seg.drift);
  for (const auto& a : seg.jumps.atoms()) {
    if (a.intensity == 0.0) continue;
    const double u = y.dot(a.x);
    const double tol = kClassifyTol * a.x.norm();
    if (u < -tol) {
      b.mass_minus += a.intensity;
    } else if (u > tol) {
      b.mass_plus += a.intensity;
      b.linear_part += a.intensity * y.dot(truncate_jump(a.x));
    }
  }
  const double ctol = kClassifyTol * std::max(1.0, seg.covariance.cwiseAbs().maxCoeff());
  if (b.quad_form > ctol || b.mass_minus > 0.0) {
    b.value = kInf;
  } else {
    b.value = b.linear_part;
  }
  return b;
}

// Halton points mapped through the inverse normal CDF and normalized: a
// deterministic low-discrepancy covering of the unit sphere.
double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

std::vector<Eigen::VectorXd> sphere_samples(int dim, int n) {
  static const std::uint64_t bases[] = {2, 3, 5, 7};
  std::vector<Eigen::VectorXd> out;
  if (dim == 1) {
    out.push_back(Eigen::VectorXd::Constant(1, 1.0));
    out.push_back(Eigen::VectorXd::Constant(1, -1.0));
    return out;
  }
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd y(dim);
    for (int j = 0; j < dim; ++j) {
      double u = halton(static_cast<std::uint64_t>(k) + 1, bases[j]);
      u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
      y[j] = inverse_normal_cdf(u);
    }
    if (y.norm() < 1e-12) continue;
    out.push_back(y.normalized());
  }
  return out;
}

// Orthonormal basis of the null space of the stacked rows.
std::vector<Eigen::VectorXd> null_space(const Eigen::MatrixXd& rows, int dim) {
  if (rows.rows() == 0) {
    std::vector<Eigen::VectorXd> full;
    for (int j = 0; j < dim; ++j) full.push_back(Eigen::VectorXd::Unit(dim, j));
    return full;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullV);
  const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  const double tol = std::max(1e-13 * smax, 1e-300);
  std::vector<Eigen::VectorXd> basis;
  for (int j = 0; j < dim; ++j) {
    const double sv = j < svd.singularValues().size() ? svd.singularValues()(j) : 0.0;
    if (sv <= tol) basis.push_back(svd.matrixV().col(j));
  }
  return basis;
}

Eigen::MatrixXd stack_rows(const Segment& seg, bool with_drift) {
  const int d = seg.dim();
  std::vector<Eigen::VectorXd> rows;
  for (int i = 0; i < d; ++i) rows.push_back(seg.covariance.row(i).transpose());
  for (const auto& a : seg.jumps.atoms())
    if (a.intensity > 0.0) rows.push_back(a.x);
  if (with_drift) rows.push_back(seg.drift);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t r = 0; r < rows.size(); ++r) m.row(static_cast<Eigen::Index>(r)) = rows[r];
  return m;
}

Eigen::VectorXd project_onto(const std::vector<Eigen::VectorXd>& basis,
                             const Eigen::VectorXd& v) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(v.size());
  for (const auto& n : basis) p += n.dot(v) * n;
  return p;
}

}  // namespace

double recession_value(const Segment& seg, const Eigen::VectorXd& y) {
  const double norm = y.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("recession direction must be nonzero");
  return slope_breakdown(seg, y / norm).value;
}

RecessionReport attainment_certificate(const Segment& seg, int n_dirs, std::uint64_t seed) {
  const int d = seg.dim();
  if (d > 4)
    throw std::invalid_argument("attainment certificate supports dim <= 4 only");
  if (n_dirs < 2) n_dirs = 2;

  RecessionReport report;
  report.tol = kRecessionTol;

  // Candidate directions: low-discrepancy sphere cover plus the structured
  // candidates where the case formula can flip sign (null spaces of the
  // stacked constraints with and without the drift row, atoms, drift).
  std::vector<Eigen::VectorXd> candidates = sphere_samples(d, n_dirs);
  const auto add_pm = [&](const Eigen::VectorXd& v) {
    const double n = v.norm();
    if (n < 1e-14) return;
    candidates.push_back(v / n);
    candidates.push_back(-v / n);
  };

  const auto rc_candidates = null_space(stack_rows(seg, true), d);
  for (const auto& v : rc_candidates) add_pm(v);

  const auto flat_jump_dirs = null_space(stack_rows(seg, false), d);
  for (const auto& v : flat_jump_dirs) add_pm(v);
  // Steepest drift descent inside the jump-flat subspace: a guaranteed strict
  // witness whenever the drift does not vanish there.
  add_pm(project_onto(flat_jump_dirs, seg.drift));

  for (const auto& a : seg.jumps.atoms()) add_pm(a.x);
  add_pm(seg.drift);

  // Local descent refinement on the sphere, seeded and deterministic.
  const auto refine = [&](Eigen::VectorXd y, double value, std::uint64_t k) {
    CounterRng rng(seed, CounterRng::kDescentStreamBase + k);
    double step = 0.5;
    for (int it = 0; it < 240; ++it) {
      Eigen::VectorXd g(d);
      for (int j = 0; j < d; ++j) g[j] = rng.normal();
      Eigen::VectorXd trial = y + step * g;
      const double n = trial.norm();
      if (n < 1e-14) continue;
      trial /= n;
      const double tv = slope_breakdown(seg, trial).value;
      if (tv < value) {
        y = trial;
        value = tv;
      } else {
        step *= 0.97;
      }
    }
    return std::make_pair(y, value);
  };

  std::vector<std::pair<Eigen::VectorXd, double>> descent;  // slope < -tol
  std::vector<std::pair<Eigen::VectorXd, double>> flat;     // |slope| <= tol

  std::uint64_t refine_key = 0;
  for (const auto& y0 : candidates) {
    SlopeBreakdown b = slope_breakdown(seg, y0);
    ++report.n_directions_checked;

    Eigen::VectorXd y = y0;
    double value = b.value;
    if (std::isfinite(value)) {
      std::tie(y, value) = refine(y, value, refine_key++);
      b = slope_breakdown(seg, y);
    }

    DirectionDiagnostic diag;
    diag.direction = y;
    diag.value = value;
    diag.reverse_value = slope_breakdown(seg, -y).value;
    diag.quad_form = b.quad_form;
    diag.mass_minus = b.mass_minus;
    diag.mass_plus = b.mass_plus;
    diag.linear_part = b.linear_part;
    if (std::isfinite(value)) report.diagnostics.push_back(diag);

    if (value < -kRecessionTol) descent.emplace_back(y, value);
    if (std::abs(value) <= kRecessionTol) flat.emplace_back(y, diag.reverse_value);
  }

  report.rc_basis = rc_candidates;

  // Audited values of the objective along a candidate ray; a genuine witness
  // must keep the objective falling at least linearly.
  const auto ray_values = [&](const Eigen::VectorXd& y) {
    std::vector<double> vals;
    for (double alpha : {1e2, 1e4, 1e6})
      vals.push_back(eval_objective(seg, (alpha * y).eval(), false, false).value);
    return vals;
  };
  const auto ray_confirms = [&](const std::vector<double>& vals, double slope) {
    if (!std::isfinite(vals[0]) || !std::isfinite(vals[1]) || !std::isfinite(vals[2]))
      return false;
    if (!(vals[2] < vals[1] && vals[1] < vals[0])) return false;
    const double tail_slope = (vals[2] - vals[1]) / (1e6 - 1e4);
    return tail_slope <= 0.25 * slope;  // slope < 0 here
  };

  std::stable_sort(descent.begin(), descent.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  for (const auto& [y, value] : descent) {
    auto vals = ray_values(y);
    if (ray_confirms(vals, value)) {
      report.attained = false;
      report.witness_direction = y;
      report.witness_value = value;
      report.witness_ray_values = std::move(vals);
      return report;
    }
  }

  for (const auto& [y, reverse] : flat) {
    if (!(reverse <= kRecessionTol)) {
      // Flat one way, rising or infinite the other: cannot certify a
      // constancy direction, so fail conservatively.
      report.attained = false;
      report.witness_direction = y;
      report.witness_value = slope_breakdown(seg, y).value;
      report.witness_inconclusive = true;
      return report;
    }
  }

  report.attained = true;
  return report;
}

}  // namespace logopt
