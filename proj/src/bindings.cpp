#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "logopt/model_io.hpp"
#include "logopt/objective.hpp"
#include "logopt/simulate.hpp"
#include "logopt/solver.hpp"
#include "logopt/verify.hpp"

namespace py = pybind11;
using namespace logopt;

namespace {

py::dict eval_to_dict(const ObjectiveEval& e) {
  py::dict d;
  d["value"] = e.value;
  d["finite"] = e.finite;
  d["gradient"] = e.gradient ? py::cast(*e.gradient) : py::none();
  d["hessian"] = e.hessian ? py::cast(*e.hessian) : py::none();
  return d;
}

py::dict stat_to_dict(const GridStat& g) {
  py::dict d;
  d["mean"] = g.mean;
  d["se"] = g.se;
  return d;
}

FractionProcess fraction_or_optimal(const MarketModel& m, const SolveReport* report,
                                    const py::object& phi) {
  if (phi.is_none()) {
    if (!report)
      throw std::invalid_argument("either a fraction or a solve report is required");
    FractionProcess out;
    for (const auto& s : report->segments) out.push_back(s.phi);
    return out;
  }
  return constant_fraction(m, phi.cast<Eigen::VectorXd>());
}

}  // namespace

PYBIND11_MODULE(_logopt, m) {
  m.doc() = "growth-optimal portfolio analysis for jump-diffusion models";

  py::register_exception<ModelParseError>(m, "ModelParseError", PyExc_ValueError);
  static py::exception<NonAttainmentError> non_attainment(m, "NonAttainmentError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const NonAttainmentError& e) {
      std::ostringstream os;
      os << e.what() << " [witness = (";
      for (int i = 0; i < e.witness().size(); ++i)
        os << e.witness()(i) << (i + 1 < e.witness().size() ? ", " : "");
      os << "), asymptotic slope = " << e.recession_value() << "]";
      py::set_error(non_attainment, os.str().c_str());
    }
  });

  py::class_<MarketModel>(m, "MarketModel")
      .def_property_readonly("dim", &MarketModel::dim)
      .def_property_readonly("horizon", &MarketModel::horizon)
      .def_property_readonly("n_segments", &MarketModel::n_segments)
      .def("to_json", &model_to_json)
      .def("__repr__", [](const MarketModel& mm) {
        return "<MarketModel dim=" + std::to_string(mm.dim()) +
               " segments=" + std::to_string(mm.n_segments()) + ">";
      });

  m.def("load_model", &load_model, py::arg("path"));
  m.def("parse_model", &parse_model, py::arg("text"), py::arg("origin") = "<string>");

  m.def(
      "validate",
      [](const MarketModel& mm) {
        const ValidationReport r = validate_model(mm);
        py::list checks;
        for (const auto& c : r.checks)
          checks.append(py::make_tuple(c.name, c.passed, c.message));
        py::dict d;
        d["usable"] = r.usable();
        d["checks"] = checks;
        return d;
      },
      py::arg("model"));

  m.def(
      "eval_objective",
      [](const MarketModel& mm, const Eigen::VectorXd& lam, std::size_t segment,
         py::object delta) {
        const Segment& seg = mm.segments().at(segment);
        if (delta.is_none()) return eval_to_dict(eval_objective(seg, lam));
        return eval_to_dict(eval_smoothed_objective(seg, lam, delta.cast<double>()));
      },
      py::arg("model"), py::arg("fraction"), py::arg("segment") = 0,
      py::arg("delta") = py::none());

  m.def(
      "recession_value",
      [](const MarketModel& mm, const Eigen::VectorXd& y, std::size_t segment) {
        return recession_value(mm.segments().at(segment), y);
      },
      py::arg("model"), py::arg("direction"), py::arg("segment") = 0);

  m.def(
      "attainment_certificate",
      [](const MarketModel& mm, std::size_t segment, int n_dirs, std::uint64_t seed) {
        const RecessionReport r =
            attainment_certificate(mm.segments().at(segment), n_dirs, seed);
        py::dict d;
        d["attained"] = r.attained;
        d["witness_direction"] =
            r.witness_direction ? py::cast(*r.witness_direction) : py::none();
        d["witness_value"] = r.witness_value;
        d["witness_inconclusive"] = r.witness_inconclusive;
        d["rc_basis"] = r.rc_basis;
        d["n_directions_checked"] = r.n_directions_checked;
        return d;
      },
      py::arg("model"), py::arg("segment") = 0, py::arg("n_dirs") = 512,
      py::arg("seed") = 42);

  py::class_<SolveReport>(m, "SolveReport")
      .def_property_readonly("certified", [](const SolveReport& r) { return r.certified; })
      .def_property_readonly("total_value",
                             [](const SolveReport& r) { return r.total_value; })
      .def_property_readonly("dual_log_value",
                             [](const SolveReport& r) { return r.dual_log_value; })
      .def_property_readonly("optimal_log_wealth",
                             [](const SolveReport& r) { return r.optimal_log_wealth; })
      .def("phi", [](const SolveReport& r, std::size_t s) { return r.phi(s); },
           py::arg("segment") = 0)
      .def("segments", [](const SolveReport& r) {
        py::list out;
        for (const auto& s : r.segments) {
          py::dict d;
          d["phi"] = s.phi;
          d["value"] = s.value;
          d["grad_norm"] = s.grad_norm;
          d["kkt_residual"] = s.kkt_residual;
          d["v_drift"] = s.v_drift;
          d["boundary_mode"] = s.boundary_mode;
          d["iterations"] = s.iterations;
          out.append(d);
        }
        return out;
      });

  m.def(
      "solve",
      [](const MarketModel& mm, double tol, std::uint64_t seed, int n_probes) {
        SolveOptions opts;
        opts.tol = tol;
        opts.seed = seed;
        opts.n_probes = n_probes;
        return solve(mm, opts);
      },
      py::arg("model"), py::arg("tol") = 1e-10, py::arg("seed") = 42,
      py::arg("n_probes") = 64);

  m.def(
      "verify_first_order",
      [](const MarketModel& mm, const Eigen::VectorXd& phi, int n_probes,
         std::uint64_t seed, std::size_t segment) {
        return verify_first_order(mm.segments().at(segment), phi, n_probes, seed);
      },
      py::arg("model"), py::arg("fraction"), py::arg("n_probes") = 64,
      py::arg("seed") = 42, py::arg("segment") = 0);

  m.def("evaluate_dual_bound", &evaluate_dual_bound, py::arg("model"), py::arg("fractions"));

  m.def(
      "simulate_summary",
      [](const MarketModel& mm, py::object phi, const SolveReport* report,
         std::size_t n_paths, int n_steps, std::uint64_t seed, int workers) {
        SimOptions opts;
        opts.n_paths = n_paths;
        opts.n_steps = n_steps;
        opts.seed = seed;
        opts.workers = workers;
        const FractionProcess fp = fraction_or_optimal(mm, report, phi);
        DeflatorParam defl;
        const DeflatorParam* dp = nullptr;
        if (report && report->certified) {
          defl = build_deflator(mm, *report);
          dp = &defl;
        }
        const SimSummary s = simulate_summary(mm, fp, dp, opts);
        py::dict d;
        d["grid"] = s.grid;
        d["n_paths"] = s.n_paths;
        d["seed"] = s.seed;
        d["log_wealth_T"] = stat_to_dict(s.log_wealth_T);
        py::list wealth, product;
        for (const auto& g : s.wealth) wealth.append(stat_to_dict(g));
        for (const auto& g : s.product) product.append(stat_to_dict(g));
        d["wealth"] = wealth;
        d["product"] = product;
        d["max_product_error"] = s.max_product_error;
        return d;
      },
      py::arg("model"), py::arg("fraction") = py::none(),
      py::arg("report") = nullptr, py::arg("n_paths") = 10000,
      py::arg("n_steps") = 0, py::arg("seed") = 42, py::arg("workers") = 0);

  m.def(
      "build_deflator",
      [](const MarketModel& mm, const SolveReport& r) {
        const DeflatorParam p = build_deflator(mm, r);
        py::dict d;
        d["beta"] = p.beta;
        d["f_values"] = p.f_values;
        d["v_drift"] = p.v_drift;
        d["valid"] = p.valid;
        d["log_value"] = p.log_value;
        return d;
      },
      py::arg("model"), py::arg("report"));

  m.def(
      "verify_duality",
      [](const MarketModel& mm, const SolveReport& r, std::size_t n_paths,
         std::uint64_t seed, int workers) {
        const DualityReport d = verify_duality(mm, r, n_paths, seed, workers);
        py::dict out;
        out["pathwise_ok"] = d.pathwise_ok;
        out["max_pathwise_error"] = d.max_pathwise_error;
        out["mc_mean"] = d.mc_mean;
        out["mc_se"] = d.mc_se;
        out["analytic"] = d.analytic;
        out["analytic_ok"] = d.analytic_ok;
        out["primal_ok"] = d.primal_ok;
        out["dual_ok"] = d.dual_ok;
        out["all_ok"] = d.all_ok();
        return out;
      },
      py::arg("model"), py::arg("report"), py::arg("n_paths") = 10000,
      py::arg("seed") = 42, py::arg("workers") = 0);

  m.def(
      "check_supermartingale",
      [](const MarketModel& mm, const SolveReport& r, int n_portfolios,
         std::size_t n_paths, int n_checkpoints, std::uint64_t seed, int workers) {
        const auto phis = random_feasible_fractions(mm, n_portfolios, seed);
        const SupermartingaleReport s =
            check_supermartingale(mm, r, phis, n_paths, n_checkpoints, seed, workers);
        py::dict out;
        out["all_ok"] = s.all_ok();
        out["optimal_ok"] = s.optimal_ok;
        out["optimal_max_error"] = s.optimal_max_error;
        py::list cases;
        for (const auto& c : s.cases) {
          py::dict cd;
          cd["phi"] = c.phi;
          cd["ok"] = c.ok;
          cd["worst_slack"] = c.worst_slack;
          cases.append(cd);
        }
        out["cases"] = cases;
        return out;
      },
      py::arg("model"), py::arg("report"), py::arg("n_portfolios") = 10,
      py::arg("n_paths") = 10000, py::arg("n_checkpoints") = 6, py::arg("seed") = 42,
      py::arg("workers") = 0);
}
