#include "logopt/deflator.hpp"

#include <cmath>
#include <stdexcept>

#include "logopt/rng.hpp"

namespace logopt {

double deflator_log_value(const MarketModel& m, const DeflatorParam& p) {
  double total = 0.0;
  for (std::size_t s = 0; s < m.n_segments(); ++s) {
    const Segment& seg = m.segments()[s];
    double rate = p.v_drift[s] + 0.5 * p.beta[s].dot(seg.covariance * p.beta[s]);
    const auto& atoms = seg.jumps.atoms();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const double f = p.f_values[s][i];
      rate += atoms[i].intensity * (f - 1.0 - std::log(f));
    }
    total += m.segment_duration(s) * rate;
  }
  return total;
}

DeflatorParam build_deflator(const MarketModel& m, const SolveReport& report) {
  if (!report.certified)
    throw std::invalid_argument("build_deflator requires a certified solve report");
  if (report.segments.size() != m.n_segments())
    throw std::invalid_argument("solve report does not match the model");

  DeflatorParam p;
  for (std::size_t s = 0; s < m.n_segments(); ++s) {
    const Segment& seg = m.segments()[s];
    const Eigen::VectorXd& phi = report.segments[s].phi;
    p.beta.push_back(-phi);
    std::vector<double> f;
    for (const auto& a : seg.jumps.atoms()) f.push_back(1.0 / (1.0 + phi.dot(a.x)));
    p.f_values.push_back(std::move(f));
    p.v_drift.push_back(report.segments[s].v_drift);
  }
  p.log_value = deflator_log_value(m, p);
  auto battery = make_probe_battery(m, 32, 42, nullptr);
  // Anchor the battery with the optimal fraction itself.
  for (std::size_t s = 0; s < m.n_segments(); ++s)
    battery[s].push_back(report.segments[s].phi);
  p.valid = validate_deflator(m, p, battery).valid;
  return p;
}

DeflatorValidation validate_deflator(const MarketModel& m, const DeflatorParam& p,
                                     const std::vector<std::vector<Eigen::VectorXd>>& probes,
                                     double tol) {
  if (p.beta.size() != m.n_segments() || p.f_values.size() != m.n_segments() ||
      p.v_drift.size() != m.n_segments())
    throw std::invalid_argument("deflator parametrization does not match the model");
  for (std::size_t s = 0; s < m.n_segments(); ++s) {
    if (p.f_values[s].size() != m.segments()[s].jumps.size())
      throw std::invalid_argument("one f value per atom required");
    for (double f : p.f_values[s])
      if (!(f > 0.0)) throw std::invalid_argument("f values must be positive");
  }

  DeflatorValidation out;
  out.log_value = deflator_log_value(m, p);
  out.valid = true;

  for (std::size_t s = 0; s < m.n_segments(); ++s) {
    const Segment& seg = m.segments()[s];
    const auto& atoms = seg.jumps.atoms();
    // Drift form is linear in theta.
    Eigen::VectorXd form = seg.drift + seg.covariance * p.beta[s];
    for (std::size_t i = 0; i < atoms.size(); ++i)
      form += atoms[i].intensity *
              (p.f_values[s][i] * atoms[i].x - truncate_jump(atoms[i].x));

    for (std::size_t k = 0; k < probes[s].size(); ++k) {
      const Eigen::VectorXd& theta = probes[s][k];
      ProbeCheck chk;
      chk.segment = s;
      chk.probe = k;
      chk.drift = theta.dot(form);
      chk.abs_integral = 0.0;
      for (std::size_t i = 0; i < atoms.size(); ++i)
        chk.abs_integral += atoms[i].intensity *
                            std::abs(p.f_values[s][i] * theta.dot(atoms[i].x) -
                                     theta.dot(truncate_jump(atoms[i].x)));
      chk.passed = std::isfinite(chk.abs_integral) &&
                   chk.drift <= p.v_drift[s] + tol;
      out.worst_slack = std::max(out.worst_slack, chk.drift - p.v_drift[s]);
      ++out.n_probes;
      if (!chk.passed) {
        out.valid = false;
        out.failures.push_back(chk);
      }
    }
  }
  return out;
}

std::vector<std::vector<Eigen::VectorXd>> make_probe_battery(
    const MarketModel& m, int n_random, std::uint64_t seed,
    const std::vector<Eigen::VectorXd>* anchor) {
  const int d = m.dim();
  std::vector<std::vector<Eigen::VectorXd>> battery(m.n_segments());

  for (std::size_t s = 0; s < m.n_segments(); ++s) {
    const Segment& seg = m.segments()[s];
    auto& probes = battery[s];
    probes.push_back(Eigen::VectorXd::Zero(d));

    const auto push_clipped = [&](Eigen::VectorXd v) {
      if (v.norm() == 0.0) return;
      const Eigen::VectorXd origin = Eigen::VectorXd::Zero(d);
      const Eigen::VectorXd dir = v.normalized();
      const double t = std::min(v.norm(), 0.9 * max_feasible_step(seg, origin, dir));
      probes.push_back(t * dir);
    };

    for (int j = 0; j < d; ++j) {
      push_clipped(Eigen::VectorXd::Unit(d, j));
      push_clipped(-Eigen::VectorXd::Unit(d, j));
    }
    if (anchor) probes.push_back((*anchor)[s]);

    CounterRng rng(seed, CounterRng::kProbeStreamBase + 100 + s);
    for (int k = 0; k < n_random; ++k) {
      Eigen::VectorXd u(d);
      for (int j = 0; j < d; ++j) u[j] = rng.normal();
      if (u.norm() == 0.0) continue;
      u.normalize();
      const double reach = std::min(0.9 * max_feasible_step(seg, Eigen::VectorXd::Zero(d), u), 4.0);
      probes.push_back((rng.uniform() * reach) * u);
    }
  }
  return battery;
}

}  // namespace logopt
