#include "logopt/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "logopt/rng.hpp"

namespace logopt {

namespace {

constexpr std::size_t kBlock = 1024;  // paths per reduction block

struct SegmentPlan {
  double t_start = 0.0;
  double t_end = 0.0;
  Eigen::MatrixXd vol;            // PSD square root of c
  Eigen::VectorXd drift_eff;      // b - sum_{|x|<=1} w x (small-jump compensator)
  double total_intensity = 0.0;
  std::vector<double> weights;    // atom intensities
  // wealth side
  Eigen::RowVectorXd w_vol;       // phi' vol
  double w_drift = 0.0;           // phi'drift_eff - (1/2) phi'c phi
  std::vector<double> w_jump;     // 1 + phi'x_i
  // deflator side
  Eigen::RowVectorXd z_vol;       // beta' vol
  double z_drift = 0.0;           // -(1/2) beta'c beta - sum w (f-1) - v
  std::vector<double> z_jump;     // f_i
};

struct Plan {
  std::vector<SegmentPlan> segments;
  std::vector<double> grid;
  std::vector<std::size_t> grid_segment;  // segment of interval [t_k, t_{k+1})
  int dim = 0;
  bool with_deflator = false;
};

Plan make_plan(const MarketModel& m, const FractionProcess& phi,
               const DeflatorParam* deflator, int n_steps) {
  if (phi.size() != m.n_segments())
    throw std::invalid_argument("one fraction vector per segment required");
  Plan plan;
  plan.dim = m.dim();
  plan.with_deflator = deflator != nullptr;
  plan.grid = simulation_grid(m, n_steps);

  for (std::size_t s = 0; s < m.n_segments(); ++s) {
    const Segment& seg = m.segments()[s];
    SegmentPlan p;
    p.t_start = seg.t_start;
    p.t_end = m.segment_end(s);
    p.vol = psd_sqrt(seg.covariance);
    p.drift_eff = seg.drift;
    for (const auto& a : seg.jumps.atoms())
      if (is_small_jump(a.x)) p.drift_eff -= a.intensity * a.x;
    p.total_intensity = seg.jumps.total_intensity();
    for (const auto& a : seg.jumps.atoms()) p.weights.push_back(a.intensity);

    const Eigen::VectorXd& f = phi[s];
    if (!(domain_margin(seg, f) > 0.0))
      throw std::invalid_argument("fraction outside the admissible domain");
    p.w_vol = f.transpose() * p.vol;
    p.w_drift = f.dot(p.drift_eff) - 0.5 * f.dot(seg.covariance * f);
    for (const auto& a : seg.jumps.atoms()) p.w_jump.push_back(1.0 + f.dot(a.x));

    if (deflator) {
      const Eigen::VectorXd& beta = deflator->beta[s];
      p.z_vol = beta.transpose() * p.vol;
      double sum_f = 0.0;
      const auto& atoms = seg.jumps.atoms();
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        sum_f += atoms[i].intensity * (deflator->f_values[s][i] - 1.0);
        p.z_jump.push_back(deflator->f_values[s][i]);
      }
      p.z_drift = -0.5 * beta.dot(seg.covariance * beta) - sum_f - deflator->v_drift[s];
    }
    plan.segments.push_back(std::move(p));
  }

  plan.grid_segment.resize(plan.grid.size() - 1);
  for (std::size_t k = 0; k + 1 < plan.grid.size(); ++k)
    plan.grid_segment[k] = m.segment_index_at(plan.grid[k]);
  return plan;
}

struct PathSink {
  // Called once per path with grid-sampled values; wealth/deflator have grid
  // size, cont/drift have (grid-1)*dim entries.
  virtual void consume(std::size_t path, const std::vector<double>& wealth,
                       const std::vector<double>& deflator,
                       const std::vector<double>& x_cont,
                       const std::vector<double>& x_drift,
                       const std::vector<JumpEvent>& jumps, double log_wealth) = 0;
  virtual ~PathSink() = default;
};

void run_one_path(const Plan& plan, std::uint64_t seed, std::size_t path,
                  bool store_x, std::vector<double>& wealth_buf,
                  std::vector<double>& deflator_buf, std::vector<double>& cont_buf,
                  std::vector<double>& drift_buf, std::vector<JumpEvent>& jumps_buf) {
  const int d = plan.dim;
  const std::size_t G = plan.grid.size();
  CounterRng rng(seed, path);

  // Jump times first (exact compound-Poisson clock per segment), so the
  // number of normals consumed later is a deterministic function of them.
  jumps_buf.clear();
  for (std::size_t s = 0; s < plan.segments.size(); ++s) {
    const SegmentPlan& sp = plan.segments[s];
    if (!(sp.total_intensity > 0.0)) continue;
    double t = sp.t_start;
    for (;;) {
      t += rng.exponential(sp.total_intensity);
      if (!(t < sp.t_end)) break;
      JumpEvent ev;
      ev.time = t;
      ev.segment = s;
      ev.atom = rng.categorical(sp.weights);
      jumps_buf.push_back(ev);
    }
  }

  wealth_buf.assign(G, 0.0);
  if (plan.with_deflator) deflator_buf.assign(G, 0.0);
  if (store_x) {
    cont_buf.assign((G - 1) * d, 0.0);
    drift_buf.assign((G - 1) * d, 0.0);
  }

  double w = 1.0, z = 1.0;
  wealth_buf[0] = w;
  if (plan.with_deflator) deflator_buf[0] = z;

  std::size_t next_jump = 0;
  Eigen::VectorXd xi(d);

  for (std::size_t k = 0; k + 1 < G; ++k) {
    const SegmentPlan& sp = plan.segments[plan.grid_segment[k]];
    double t = plan.grid[k];
    const double t_next = plan.grid[k + 1];

    const auto diffuse = [&](double dt) {
      if (!(dt > 0.0)) return;
      for (int j = 0; j < d; ++j) xi[j] = rng.normal();
      const double sq = std::sqrt(dt);
      w *= std::exp(sp.w_vol.dot(xi) * sq + sp.w_drift * dt);
      if (plan.with_deflator)
        z *= std::exp(sp.z_vol.dot(xi) * sq + sp.z_drift * dt);
      if (store_x) {
        Eigen::Map<Eigen::VectorXd> cont(cont_buf.data() + k * d, d);
        Eigen::Map<Eigen::VectorXd> drift(drift_buf.data() + k * d, d);
        cont += sq * (sp.vol * xi);
        drift += dt * sp.drift_eff;
      }
    };

    while (next_jump < jumps_buf.size() && jumps_buf[next_jump].time <= t_next) {
      const JumpEvent& ev = jumps_buf[next_jump];
      diffuse(ev.time - t);
      t = ev.time;
      const SegmentPlan& ep = plan.segments[ev.segment];
      const double factor = ep.w_jump[ev.atom];
      if (!(factor > 0.0))
        throw std::domain_error("jump drives wealth to zero or below "
                                "(fraction outside the admissible domain)");
      w *= factor;
      if (plan.with_deflator) z *= ep.z_jump[ev.atom];
      ++next_jump;
    }
    diffuse(t_next - t);

    wealth_buf[k + 1] = w;
    if (plan.with_deflator) deflator_buf[k + 1] = z;
  }
}

void run_all(const Plan& plan, const SimOptions& opts, bool store_x, PathSink& sink) {
  const std::size_t n_blocks = (opts.n_paths + kBlock - 1) / kBlock;
  int workers = opts.workers > 0 ? opts.workers
                                 : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n_blocks)));

  std::atomic<std::size_t> next_block{0};
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mutex;

  const auto worker = [&]() {
    std::vector<double> wealth, deflator, cont, drift;
    std::vector<JumpEvent> jumps;
    for (;;) {
      const std::size_t blk = next_block.fetch_add(1);
      if (blk >= n_blocks || failed.load()) return;
      const std::size_t lo = blk * kBlock;
      const std::size_t hi = std::min(opts.n_paths, lo + kBlock);
      for (std::size_t p = lo; p < hi; ++p) {
        try {
          run_one_path(plan, opts.seed, p, store_x, wealth, deflator, cont, drift, jumps);
          const double lw = std::log(wealth.back());
          sink.consume(p, wealth, deflator, cont, drift, jumps, lw);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(error_mutex);
          error = e.what();
          failed.store(true);
          return;
        }
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw std::domain_error(error);
}

struct Moments {
  double sum = 0.0;
  double sumsq = 0.0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
  }
  void merge(const Moments& o) {
    sum += o.sum;
    sumsq += o.sumsq;
  }
};

GridStat finish(const Moments& m, std::size_t n) {
  GridStat g;
  g.mean = m.sum / static_cast<double>(n);
  if (n > 1) {
    const double var =
        std::max(0.0, (m.sumsq - static_cast<double>(n) * g.mean * g.mean) /
                          static_cast<double>(n - 1));
    g.se = std::sqrt(var / static_cast<double>(n));
  }
  return g;
}

}  // namespace

std::vector<double> simulation_grid(const MarketModel& m, int n_steps) {
  if (n_steps <= 0) n_steps = static_cast<int>(std::ceil(250.0 * m.horizon()));
  n_steps = std::max(n_steps, 1);
  std::vector<double> grid;
  const double T = m.horizon();
  for (int k = 0; k <= n_steps; ++k)
    grid.push_back(T * static_cast<double>(k) / static_cast<double>(n_steps));
  for (std::size_t s = 1; s < m.n_segments(); ++s)
    grid.push_back(m.segments()[s].t_start);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [T](double a, double b) { return std::abs(a - b) < 1e-12 * T; }),
             grid.end());
  grid.front() = 0.0;
  grid.back() = T;
  return grid;
}

FractionProcess constant_fraction(const MarketModel& m, const Eigen::VectorXd& phi) {
  FractionProcess out(m.n_segments(), phi);
  for (std::size_t s = 0; s < m.n_segments(); ++s)
    if (!(domain_margin(m.segments()[s], phi) > 0.0))
      throw std::invalid_argument("fraction outside the admissible domain");
  return out;
}

PathBundle simulate(const MarketModel& m, const FractionProcess& phi,
                    const DeflatorParam* deflator, const SimOptions& opts) {
  Plan plan = make_plan(m, phi, deflator, opts.n_steps);
  const std::size_t G = plan.grid.size();
  const int d = plan.dim;

  PathBundle bundle;
  bundle.grid = plan.grid;
  bundle.n_paths = opts.n_paths;
  bundle.seed = opts.seed;
  bundle.wealth.resize(opts.n_paths * G);
  if (deflator) bundle.deflator.resize(opts.n_paths * G);
  bundle.log_wealth_T.resize(opts.n_paths);
  bundle.x_cont.resize(opts.n_paths * (G - 1) * d);
  bundle.x_drift.resize(opts.n_paths * (G - 1) * d);
  bundle.jumps.resize(opts.n_paths);

  struct Sink : PathSink {
    PathBundle* b;
    std::size_t G;
    int d;
    void consume(std::size_t p, const std::vector<double>& wealth,
                 const std::vector<double>& deflator, const std::vector<double>& cont,
                 const std::vector<double>& drift, const std::vector<JumpEvent>& jumps,
                 double lw) override {
      std::copy(wealth.begin(), wealth.end(), b->wealth.begin() + p * G);
      if (!b->deflator.empty())
        std::copy(deflator.begin(), deflator.end(), b->deflator.begin() + p * G);
      std::copy(cont.begin(), cont.end(), b->x_cont.begin() + p * (G - 1) * d);
      std::copy(drift.begin(), drift.end(), b->x_drift.begin() + p * (G - 1) * d);
      b->jumps[p] = jumps;
      b->log_wealth_T[p] = lw;
    }
  } sink;
  sink.b = &bundle;
  sink.G = G;
  sink.d = d;

  run_all(plan, opts, /*store_x=*/true, sink);
  return bundle;
}

SimSummary simulate_summary(const MarketModel& m, const FractionProcess& phi,
                            const DeflatorParam* deflator, const SimOptions& opts,
                            std::vector<std::size_t> checkpoints) {
  Plan plan = make_plan(m, phi, deflator, opts.n_steps);
  const std::size_t G = plan.grid.size();
  if (checkpoints.empty())
    for (std::size_t k = 0; k < G; ++k) checkpoints.push_back(k);

  struct BlockSums {
    std::vector<Moments> wealth, deflator, product, step;
    Moments log_wealth;
    double max_err = 0.0;
    bool used = false;
  };
  const std::size_t n_blocks = (opts.n_paths + kBlock - 1) / kBlock;

  struct Sink : PathSink {
    std::vector<BlockSums> blocks;
    const std::vector<std::size_t>* checkpoints;
    std::size_t G = 0;
    bool with_deflator = false;
    void consume(std::size_t p, const std::vector<double>& wealth,
                 const std::vector<double>& deflator, const std::vector<double>&,
                 const std::vector<double>&, const std::vector<JumpEvent>&,
                 double lw) override {
      BlockSums& b = blocks[p / kBlock];
      if (!b.used) {
        b.wealth.resize(G);
        if (with_deflator) {
          b.deflator.resize(G);
          b.product.resize(G);
          b.step.resize(checkpoints->size() - 1);
        }
        b.used = true;
      }
      for (std::size_t k = 0; k < G; ++k) b.wealth[k].add(wealth[k]);
      if (with_deflator) {
        double prev = 0.0;
        std::size_t ci = 0;
        for (std::size_t k = 0; k < G; ++k) {
          const double prod = deflator[k] * wealth[k];
          b.deflator[k].add(deflator[k]);
          b.product[k].add(prod);
          b.max_err = std::max(b.max_err, std::abs(prod - 1.0));
          if (ci < checkpoints->size() && (*checkpoints)[ci] == k) {
            if (ci > 0) b.step[ci - 1].add(prod - prev);
            prev = prod;
            ++ci;
          }
        }
      }
      b.log_wealth.add(lw);
    }
  } sink;
  sink.blocks.resize(n_blocks);
  sink.checkpoints = &checkpoints;
  sink.G = G;
  sink.with_deflator = deflator != nullptr;

  run_all(plan, opts, /*store_x=*/false, sink);

  // Deterministic reduction in block order.
  BlockSums total;
  total.wealth.resize(G);
  total.deflator.resize(G);
  total.product.resize(G);
  total.step.resize(checkpoints.size() > 0 ? checkpoints.size() - 1 : 0);
  for (const auto& b : sink.blocks) {
    if (!b.used) continue;
    for (std::size_t k = 0; k < G; ++k) total.wealth[k].merge(b.wealth[k]);
    if (deflator) {
      for (std::size_t k = 0; k < G; ++k) {
        total.deflator[k].merge(b.deflator[k]);
        total.product[k].merge(b.product[k]);
      }
      for (std::size_t k = 0; k < total.step.size(); ++k) total.step[k].merge(b.step[k]);
    }
    total.log_wealth.merge(b.log_wealth);
    total.max_err = std::max(total.max_err, b.max_err);
  }

  SimSummary out;
  out.grid = plan.grid;
  out.n_paths = opts.n_paths;
  out.seed = opts.seed;
  out.checkpoints = checkpoints;
  for (std::size_t k = 0; k < G; ++k) out.wealth.push_back(finish(total.wealth[k], opts.n_paths));
  if (deflator) {
    for (std::size_t k = 0; k < G; ++k) {
      out.deflator.push_back(finish(total.deflator[k], opts.n_paths));
      out.product.push_back(finish(total.product[k], opts.n_paths));
    }
    for (const auto& mom : total.step) out.product_step.push_back(finish(mom, opts.n_paths));
    out.max_product_error = total.max_err;
  }
  out.log_wealth_T = finish(total.log_wealth, opts.n_paths);
  return out;
}

}  // namespace logopt
