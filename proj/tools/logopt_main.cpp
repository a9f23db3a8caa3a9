// logopt command line tool: growth-optimal portfolio analysis for
// jump-diffusion models given by their predictable characteristics.
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "logopt/model_io.hpp"
#include "logopt/objective.hpp"
#include "logopt/report.hpp"
#include "logopt/simulate.hpp"
#include "logopt/solver.hpp"
#include "logopt/verify.hpp"

using namespace logopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitInputError = 2;
constexpr int kExitNonAttainment = 3;

struct CommonOpts {
  std::string model_path;
  std::uint64_t seed = 42;
  std::size_t n_paths = 100000;
  int n_steps = 0;  // 0 = 250 per unit time
  int n_probes = 64;
  double tol = 1e-10;
  int workers = 0;
  std::string out_dir;
  std::string format = "text";
  std::string lambda_arg;
  double delta = 0.0;
  bool dump_paths = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_model = true) {
  auto* model = cmd->add_option("--model,-m", o.model_path, "model file (json)")
                    ->envname("GE_MODEL");
  if (needs_model) model->required();
  cmd->add_option("--seed", o.seed, "rng seed")->envname("GE_SEED");
  cmd->add_option("--paths", o.n_paths, "Monte Carlo paths")
      ->envname("GE_PATHS")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--steps", o.n_steps, "grid steps over [0,T] (default 250/unit time)")
      ->envname("GE_STEPS");
  cmd->add_option("--probes", o.n_probes, "verification probes")
      ->envname("GE_PROBES")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol", o.tol, "solver/certification tolerance")->envname("GE_TOL");
  cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)")
      ->envname("GE_WORKERS");
  cmd->add_option("--out", o.out_dir, "output directory for report artifacts")
      ->envname("GE_OUT");
  cmd->add_option("--format", o.format, "stdout format: text or table")
      ->envname("GE_FORMAT")
      ->check(CLI::IsMember({"text", "table"}));
}

void emit(const CommonOpts& o, const std::string& name, const std::string& text,
          const Table& table) {
  if (o.format == "table")
    std::fputs(table.to_csv().c_str(), stdout);
  else
    std::fputs(text.c_str(), stdout);
  if (!o.out_dir.empty()) {
    std::filesystem::create_directories(o.out_dir);
    atomic_write(o.out_dir + "/" + name + ".txt", text);
    atomic_write(o.out_dir + "/" + name + ".csv", table.to_csv());
  }
}

std::string vec_to_string(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < v.size(); ++i)
    os << format_number(v[i]) << (i + 1 < v.size() ? ", " : "");
  os << ")";
  return os.str();
}

Eigen::VectorXd parse_lambda(const std::string& arg, int dim) {
  std::vector<double> values;
  std::stringstream ss(arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ModelParseError("--lambda: cannot parse '" + item + "' as a number");
    }
  }
  if (static_cast<int>(values.size()) != dim)
    throw ModelParseError("--lambda needs exactly " + std::to_string(dim) +
                          " comma-separated numbers");
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = values[i];
  return v;
}

SolveOptions solve_options(const CommonOpts& o) {
  SolveOptions s;
  s.tol = o.tol;
  s.seed = o.seed;
  s.n_probes = o.n_probes;
  return s;
}

// ---------------------------------------------------------------------------

int run_validate(const CommonOpts& o) {
  const MarketModel m = load_model(o.model_path);
  const ValidationReport r = validate_model(m);
  Table t({"check", "passed", "message"});
  for (const auto& c : r.checks)
    t.begin_row().cell(c.name).cell(std::string(c.passed ? "1" : "0")).cell(c.message);
  std::ostringstream text;
  text << "model: " << o.model_path << "\n" << r.summary();
  text << (r.usable() ? "model usable\n" : "model NOT usable\n");
  emit(o, "validate", text.str(), t);
  return r.usable() ? kExitOk : kExitInputError;
}

int run_eval(const CommonOpts& o) {
  const MarketModel m = load_model(o.model_path);
  if (!validate_model(m).usable()) {
    std::fprintf(stderr, "model failed validation; run `logopt validate`\n");
    return kExitInputError;
  }
  const Eigen::VectorXd lambda = parse_lambda(o.lambda_arg, m.dim());

  Table t({"segment", "field", "i", "j", "value"});
  std::ostringstream text;
  for (std::size_t s = 0; s < m.n_segments(); ++s) {
    const Segment& seg = m.segments()[s];
    const ObjectiveEval e = o.delta > 0.0
                                ? eval_smoothed_objective(seg, lambda, o.delta)
                                : eval_objective(seg, lambda);
    const long long ls = static_cast<long long>(s);
    t.begin_row().cell(ls).cell(std::string("value")).cell(0LL).cell(0LL).cell(e.value);
    text << "segment " << s << ": value = " << format_number(e.value) << "\n";
    if (e.gradient) {
      for (int i = 0; i < m.dim(); ++i)
        t.begin_row()
            .cell(ls)
            .cell(std::string("gradient"))
            .cell(static_cast<long long>(i))
            .cell(0LL)
            .cell((*e.gradient)(i));
      text << "  gradient = " << vec_to_string(*e.gradient) << "\n";
    }
    if (e.hessian) {
      for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j)
          t.begin_row()
              .cell(ls)
              .cell(std::string("hessian"))
              .cell(static_cast<long long>(i))
              .cell(static_cast<long long>(j))
              .cell((*e.hessian)(i, j));
      text << "  hessian row0 = " << vec_to_string(e.hessian->row(0).transpose()) << "\n";
      for (int i = 1; i < m.dim(); ++i)
        text << "  hessian row" << i << " = "
             << vec_to_string(e.hessian->row(i).transpose()) << "\n";
    }
  }
  emit(o, "eval", text.str(), t);
  return kExitOk;
}

Table solve_table(const MarketModel& m, const SolveReport& r) {
  std::vector<std::string> cols = {"t_start"};
  for (int i = 0; i < m.dim(); ++i) cols.push_back("phi_" + std::to_string(i));
  for (const char* name : {"value", "grad_norm", "kkt_residual", "v_drift"})
    cols.push_back(name);
  Table t(cols);
  for (std::size_t s = 0; s < r.segments.size(); ++s) {
    const auto& seg = r.segments[s];
    t.begin_row().cell(m.segments()[s].t_start);
    for (int i = 0; i < m.dim(); ++i) t.cell(seg.phi(i));
    t.cell(seg.value).cell(seg.grad_norm).cell(seg.kkt_residual).cell(seg.v_drift);
  }
  // summary row: time-integrated objective, dual bound, expected log wealth
  t.begin_row().cell(std::string("total"));
  for (int i = 0; i < m.dim(); ++i) t.cell(std::string(""));
  t.cell(r.total_value).cell(r.dual_log_value).cell(r.optimal_log_wealth).cell(std::string(""));
  return t;
}

std::string solve_text(const MarketModel& m, const SolveReport& r,
                       const std::string& model_path) {
  std::ostringstream text;
  text << "model: " << model_path << "\n";
  for (std::size_t s = 0; s < r.segments.size(); ++s) {
    const auto& seg = r.segments[s];
    text << "segment " << s << " (t >= " << format_number(m.segments()[s].t_start)
         << "): phi = " << vec_to_string(seg.phi)
         << ", value = " << format_number(seg.value)
         << ", grad_norm = " << format_number(seg.grad_norm)
         << ", kkt_residual = " << format_number(seg.kkt_residual)
         << ", v_drift = " << format_number(seg.v_drift)
         << (seg.boundary_mode ? " [boundary certificate]" : "") << "\n";
  }
  text << "time-integrated objective = " << format_number(r.total_value) << "\n";
  text << "dual bound (deterministic) = " << format_number(r.dual_log_value) << "\n";
  text << "optimal expected log wealth = " << format_number(r.optimal_log_wealth)
       << "\n";
  return text.str();
}

int run_solve(const CommonOpts& o) {
  const MarketModel m = load_model(o.model_path);
  if (!validate_model(m).usable()) {
    std::fprintf(stderr, "model failed validation; run `logopt validate`\n");
    return kExitInputError;
  }
  const SolveReport r = solve(m, solve_options(o));
  emit(o, "solve", solve_text(m, r, o.model_path), solve_table(m, r));
  return kExitOk;
}

int run_recession(const CommonOpts& o) {
  const MarketModel m = load_model(o.model_path);
  if (!validate_model(m).usable()) {
    std::fprintf(stderr, "model failed validation; run `logopt validate`\n");
    return kExitInputError;
  }
  Table t({"segment", "kind", "component", "value"});
  std::ostringstream text;
  text << "model: " << o.model_path << "\n";
  for (std::size_t s = 0; s < m.n_segments(); ++s) {
    const RecessionReport r = attainment_certificate(m.segments()[s], 512, o.seed);
    const long long ls = static_cast<long long>(s);
    t.begin_row().cell(ls).cell(std::string("attained")).cell(0LL)
        .cell(std::string(r.attained ? "1" : "0"));
    text << "segment " << s << ": attained = " << (r.attained ? "yes" : "no") << "\n";
    if (r.witness_direction) {
      for (int i = 0; i < m.dim(); ++i)
        t.begin_row()
            .cell(ls)
            .cell(std::string("witness"))
            .cell(static_cast<long long>(i))
            .cell((*r.witness_direction)(i));
      t.begin_row().cell(ls).cell(std::string("witness_value")).cell(0LL).cell(
          r.witness_value);
      text << "  witness direction y = " << vec_to_string(*r.witness_direction)
           << ", asymptotic slope = " << format_number(r.witness_value)
           << (r.witness_inconclusive ? " [inconclusive tie]" : "") << "\n";
      for (std::size_t k = 0; k < r.witness_ray_values.size(); ++k) {
        t.begin_row()
            .cell(ls)
            .cell(std::string("ray_value"))
            .cell(static_cast<long long>(k))
            .cell(r.witness_ray_values[k]);
        text << "  objective along witness[" << k
             << "] = " << format_number(r.witness_ray_values[k]) << "\n";
      }
    }
    for (std::size_t b = 0; b < r.rc_basis.size(); ++b) {
      for (int i = 0; i < m.dim(); ++i)
        t.begin_row()
            .cell(ls)
            .cell(std::string("constancy_basis_" + std::to_string(b)))
            .cell(static_cast<long long>(i))
            .cell(r.rc_basis[b](i));
      text << "  constancy direction " << b << " = " << vec_to_string(r.rc_basis[b])
           << "\n";
    }
    text << "  directions checked = " << r.n_directions_checked << "\n";
    t.begin_row().cell(ls).cell(std::string("directions_checked")).cell(0LL).cell(
        static_cast<long long>(r.n_directions_checked));
  }
  emit(o, "analyze-recession", text.str(), t);
  return kExitOk;
}

int run_simulate(const CommonOpts& o) {
  const MarketModel m = load_model(o.model_path);
  if (!validate_model(m).usable()) {
    std::fprintf(stderr, "model failed validation; run `logopt validate`\n");
    return kExitInputError;
  }

  FractionProcess phi;
  const DeflatorParam* defl = nullptr;
  DeflatorParam defl_storage;
  if (o.lambda_arg.empty()) {
    const SolveReport r = solve(m, solve_options(o));
    for (const auto& seg : r.segments) phi.push_back(seg.phi);
    defl_storage = build_deflator(m, r);
    defl = &defl_storage;
  } else {
    phi = constant_fraction(m, parse_lambda(o.lambda_arg, m.dim()));
  }

  SimOptions sim;
  sim.n_paths = o.n_paths;
  sim.n_steps = o.n_steps;
  sim.seed = o.seed;
  sim.workers = o.workers;
  const SimSummary s = simulate_summary(m, phi, defl, sim);

  std::vector<std::string> cols = {"t", "mean_wealth", "se_wealth"};
  if (defl)
    for (const char* c : {"mean_deflator", "se_deflator", "mean_product", "se_product"})
      cols.push_back(c);
  Table t(cols);
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    t.begin_row().cell(s.grid[k]).cell(s.wealth[k].mean).cell(s.wealth[k].se);
    if (defl)
      t.cell(s.deflator[k].mean)
          .cell(s.deflator[k].se)
          .cell(s.product[k].mean)
          .cell(s.product[k].se);
  }
  std::ostringstream text;
  text << "model: " << o.model_path << ", paths = " << s.n_paths
       << ", seed = " << s.seed << "\n";
  for (std::size_t s2 = 0; s2 < phi.size(); ++s2)
    text << "fraction phi[segment " << s2 << "] = " << vec_to_string(phi[s2]) << "\n";
  text << "terminal mean log wealth = " << format_number(s.log_wealth_T.mean)
       << " (se " << format_number(s.log_wealth_T.se) << ")\n";
  if (defl)
    text << "max |deflator * wealth - 1| = " << format_number(s.max_product_error)
         << "\n";
  text << "grid rows = " << s.grid.size() << " (see table)\n";
  Table extra({"name", "value"});
  extra.begin_row().cell(std::string("mean_log_wealth_T")).cell(s.log_wealth_T.mean);
  extra.begin_row().cell(std::string("se_log_wealth_T")).cell(s.log_wealth_T.se);
  if (defl)
    extra.begin_row().cell(std::string("max_product_error")).cell(s.max_product_error);

  if (o.format == "table") {
    std::fputs(t.to_csv().c_str(), stdout);
  } else {
    std::fputs(text.str().c_str(), stdout);
  }
  if (!o.out_dir.empty()) {
    std::filesystem::create_directories(o.out_dir);
    atomic_write(o.out_dir + "/simulate.txt", text.str());
    atomic_write(o.out_dir + "/simulate.csv", t.to_csv());
    atomic_write(o.out_dir + "/simulate_summary.csv", extra.to_csv());
    if (o.dump_paths) {
      SimOptions audit = sim;
      audit.n_paths = std::min<std::size_t>(sim.n_paths, 1000);
      const PathBundle paths = simulate(m, phi, defl, audit);
      Table dump(defl ? std::vector<std::string>{"path", "t", "wealth", "deflator"}
                      : std::vector<std::string>{"path", "t", "wealth"});
      for (std::size_t p = 0; p < paths.n_paths; ++p)
        for (std::size_t k = 0; k < paths.grid.size(); ++k) {
          dump.begin_row()
              .cell(static_cast<long long>(p))
              .cell(paths.grid[k])
              .cell(paths.wealth_at(p, k));
          if (defl) dump.cell(paths.deflator_at(p, k));
        }
      atomic_write(o.out_dir + "/paths.csv", dump.to_csv());
    }
  }
  return kExitOk;
}

struct VerifyOutcome {
  Table table{std::vector<std::string>{"check", "passed", "value"}};
  std::ostringstream text;
  bool all_ok = true;

  void add(const std::string& name, bool ok, double value) {
    table.begin_row().cell(name).cell(std::string(ok ? "1" : "0")).cell(value);
    text << (ok ? "[pass] " : "[FAIL] ") << name << " = " << format_number(value)
         << "\n";
    all_ok = all_ok && ok;
  }
};

int run_verify(const CommonOpts& o) {
  const MarketModel m = load_model(o.model_path);
  if (!validate_model(m).usable()) {
    std::fprintf(stderr, "model failed validation; run `logopt validate`\n");
    return kExitInputError;
  }
  const SolveReport r = solve(m, solve_options(o));

  VerifyOutcome v;
  const DualityReport d = verify_duality(m, r, o.n_paths, o.seed, o.workers, o.n_steps);
  v.add("pathwise deflator identity max error", d.pathwise_ok, d.max_pathwise_error);
  v.add("mc log wealth minus analytic (3se)", d.analytic_ok, d.mc_mean - d.analytic);
  v.add("primal probes below optimum", d.primal_ok,
        static_cast<double>(d.primal.size()));
  v.add("dual probes above optimum", d.dual_ok, static_cast<double>(d.dual.size()));

  const auto phis = random_feasible_fractions(m, 10, o.seed ^ 0x5A17ull);
  const SupermartingaleReport s =
      check_supermartingale(m, r, phis, std::min<std::size_t>(o.n_paths, 20000), 6,
                            o.seed, o.workers, o.n_steps);
  double worst = -1e300;
  for (const auto& c : s.cases) worst = std::max(worst, c.worst_slack);
  v.add("supermartingale battery worst slack", s.all_ok(), worst);
  v.add("optimal product max deviation", s.optimal_ok, s.optimal_max_error);

  const PathInequalityReport ineq = jump_variation_oracle(m, r, 500, o.seed);
  v.add("pathwise quadratic-variation bounds", ineq.ok(),
        static_cast<double>(ineq.n_violations));

  v.text << (v.all_ok ? "verification PASS\n" : "verification FAIL\n");
  emit(o, "verify", v.text.str(), v.table);
  return v.all_ok ? kExitOk : kExitVerifyFail;
}

int run_report(const CommonOpts& o) {
  const MarketModel m = load_model(o.model_path);

  std::ostringstream text;
  text << "== validate ==\n";
  const ValidationReport val = validate_model(m);
  text << val.summary();
  if (!val.usable()) {
    text << "verdict: INVALID INPUT\n";
    std::fputs(text.str().c_str(), stdout);
    return kExitInputError;
  }

  text << "== recession analysis ==\n";
  for (std::size_t s = 0; s < m.n_segments(); ++s) {
    const RecessionReport rec = attainment_certificate(m.segments()[s], 512, o.seed);
    text << "segment " << s << ": attained = " << (rec.attained ? "yes" : "no");
    if (rec.witness_direction)
      text << ", witness " << vec_to_string(*rec.witness_direction) << " slope "
           << format_number(rec.witness_value);
    text << "\n";
    if (!rec.attained) {
      text << "verdict: NON-ATTAINMENT\n";
      std::fputs(text.str().c_str(), stdout);
      if (!o.out_dir.empty()) {
        std::filesystem::create_directories(o.out_dir);
        atomic_write(o.out_dir + "/report.txt", text.str());
      }
      return kExitNonAttainment;
    }
  }

  const SolveReport r = solve(m, solve_options(o));
  text << "== solve ==\n" << solve_text(m, r, o.model_path);

  VerifyOutcome v;
  const DualityReport d = verify_duality(m, r, o.n_paths, o.seed, o.workers, o.n_steps);
  v.add("pathwise deflator identity max error", d.pathwise_ok, d.max_pathwise_error);
  v.add("mc log wealth minus analytic (3se)", d.analytic_ok, d.mc_mean - d.analytic);
  v.add("primal probes below optimum", d.primal_ok,
        static_cast<double>(d.primal.size()));
  v.add("dual probes above optimum", d.dual_ok, static_cast<double>(d.dual.size()));
  const auto phis = random_feasible_fractions(m, 10, o.seed ^ 0x5A17ull);
  const SupermartingaleReport sm =
      check_supermartingale(m, r, phis, std::min<std::size_t>(o.n_paths, 20000), 6,
                            o.seed, o.workers, o.n_steps);
  double worst = -1e300;
  for (const auto& c : sm.cases) worst = std::max(worst, c.worst_slack);
  v.add("supermartingale battery worst slack", sm.all_ok(), worst);
  v.add("optimal product max deviation", sm.optimal_ok, sm.optimal_max_error);
  text << "== verify ==\n" << v.text.str();

  const bool pass = v.all_ok;
  text << "verdict: " << (pass ? "PASS" : "FAIL") << ", optimal value "
       << format_number(r.optimal_log_wealth) << "\n";

  Table combined = solve_table(m, r);
  if (o.format == "table")
    std::fputs(combined.to_csv().c_str(), stdout);
  else
    std::fputs(text.str().c_str(), stdout);
  if (!o.out_dir.empty()) {
    std::filesystem::create_directories(o.out_dir);
    atomic_write(o.out_dir + "/report.txt", text.str());
    atomic_write(o.out_dir + "/report_solve.csv", combined.to_csv());
    atomic_write(o.out_dir + "/report_checks.csv", v.table.to_csv());
  }
  return pass ? kExitOk : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"growth-optimal portfolio solver for jump-diffusion models"};
  app.require_subcommand(1);

  CommonOpts o;
  auto* validate = app.add_subcommand("validate", "check a model file");
  add_common(validate, o);
  auto* eval = app.add_subcommand("eval", "evaluate the growth objective");
  add_common(eval, o);
  eval->add_option("--lambda", o.lambda_arg, "fraction, comma separated")->required();
  eval->add_option("--delta", o.delta, "evaluate the smoothed objective at this delta");
  auto* solve_cmd = app.add_subcommand("solve", "compute the optimal fraction");
  add_common(solve_cmd, o);
  auto* recession = app.add_subcommand("analyze-recession",
                                       "attainment certificate and flat directions");
  add_common(recession, o);
  auto* simulate_cmd =
      app.add_subcommand("simulate", "Monte Carlo wealth and deflator paths");
  add_common(simulate_cmd, o);
  simulate_cmd->add_option("--lambda", o.lambda_arg,
                           "simulate this fraction instead of the optimal one");
  simulate_cmd->add_flag("--dump-paths", o.dump_paths,
                         "also write per-path values (requires --out)");
  auto* verify = app.add_subcommand("verify", "duality and supermartingale checks");
  add_common(verify, o);
  auto* report = app.add_subcommand("report", "full pipeline with a verdict");
  add_common(report, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate)) return run_validate(o);
    if (app.got_subcommand(eval)) return run_eval(o);
    if (app.got_subcommand(solve_cmd)) return run_solve(o);
    if (app.got_subcommand(recession)) return run_recession(o);
    if (app.got_subcommand(simulate_cmd)) return run_simulate(o);
    if (app.got_subcommand(verify)) return run_verify(o);
    if (app.got_subcommand(report)) return run_report(o);
  } catch (const ModelParseError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInputError;
  } catch (const NonAttainmentError& e) {
    std::fprintf(stderr, "non-attainment: %s\n", e.what());
    std::fprintf(stderr, "witness direction y = %s, asymptotic slope %s\n",
                 vec_to_string(e.witness()).c_str(),
                 format_number(e.recession_value()).c_str());
    return kExitNonAttainment;
  } catch (const SolveFailure& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitVerifyFail;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInputError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitVerifyFail;
  }
  return kExitOk;
}
