#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lfk/asymptotics.hpp"
#include "lfk/config.hpp"
#include "lfk/errors.hpp"
#include "lfk/fk.hpp"
#include "lfk/levy.hpp"
#include "lfk/pide.hpp"
#include "lfk/variational.hpp"
#include "lfk/verify.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace lfk;

namespace {

json obj_to_json(const py::object& o) {
    const std::string dumped =
        py::module_::import("json").attr("dumps")(o).cast<std::string>();
    return json::parse(dumped);
}

// Model/problem dicts use the same schema as the "model" and "problem"
// sections of a run config; routing them through the config parser keeps the
// bindings, the CLI and the validation rules in one place.
ProblemSpec build_spec(const py::object& model, const py::object& problem) {
    json root;
    root["method"] = {{"name", "pide"}};
    if (!model.is_none()) root["model"] = obj_to_json(model);
    if (!problem.is_none()) root["problem"] = obj_to_json(problem);
    return parse_config(root.dump()).problem;
}

Lagrangian model_lagrangian(const LevyModel& m) {
    if (std::holds_alternative<NoJumps>(m.jumps) && m.sigma2 > 0.0 &&
        m.drift == 0.0)
        return GaussianLagrangian{m.sigma2};
    if (const auto* tp = std::get_if<TwoPointJumps>(&m.jumps))
        if (m.sigma2 == 0.0 && m.drift == 0.0)
            return TwoPointLagrangian{tp->alpha, tp->mass};
    return NumericLagrangian{hamiltonian_h0(m)};
}

std::string hash_hex(uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

} // namespace

PYBIND11_MODULE(_lfk, m) {
    m.doc() = "Levy Feynman-Kac toolkit: Monte Carlo and grid solvers for "
              "killed semigroups, minimizing-path solvers, small-scale "
              "asymptotics";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<ResolutionError>(m, "ResolutionError",
                                            PyExc_ValueError);

    py::class_<MCEstimate>(m, "MCEstimate")
        .def_readonly("mean", &MCEstimate::mean)
        .def_readonly("stderr", &MCEstimate::stderr_)
        .def_readonly("n_paths", &MCEstimate::n_paths)
        .def_readonly("dt", &MCEstimate::dt)
        .def_readonly("seed", &MCEstimate::seed)
        .def("__repr__", [](const MCEstimate& e) {
            char buf[96];
            std::snprintf(buf, sizeof(buf),
                          "MCEstimate(mean=%.12g, stderr=%.3g, n_paths=%zu)",
                          e.mean, e.stderr_, e.n_paths);
            return std::string(buf);
        });

    py::class_<DriftEstimate>(m, "DriftEstimate")
        .def_readonly("value", &DriftEstimate::value)
        .def_readonly("stderr", &DriftEstimate::stderr_)
        .def_readonly("center", &DriftEstimate::center);

    py::class_<ResidualEstimate>(m, "ResidualEstimate")
        .def_readonly("lhs", &ResidualEstimate::lhs)
        .def_readonly("rhs", &ResidualEstimate::rhs)
        .def_readonly("residual", &ResidualEstimate::residual)
        .def_readonly("stderr", &ResidualEstimate::stderr_);

    py::class_<GridSolution>(m, "GridSolution")
        .def_readonly("x", &GridSolution::x)
        .def_readonly("t", &GridSolution::t)
        .def_readonly("u", &GridSolution::u)
        .def_readonly("hbar", &GridSolution::hbar)
        .def_readonly("positive", &GridSolution::positive)
        .def_readonly("boundary_truncated", &GridSolution::boundary_truncated)
        .def("at", &GridSolution::at, py::arg("it"), py::arg("ix"))
        .def("value", &GridSolution::value, py::arg("time"), py::arg("p"));

    py::class_<RefineReport>(m, "RefineReport")
        .def_readonly("errors", &RefineReport::errors)
        .def_readonly("orders", &RefineReport::orders)
        .def_readonly("asymptotic", &RefineReport::asymptotic);

    py::class_<LegendreValue>(m, "LegendreValue")
        .def_readonly("value", &LegendreValue::value)
        .def_readonly("argmax", &LegendreValue::argmax);

    py::class_<MinimizerResult>(m, "MinimizerResult")
        .def_readonly("s", &MinimizerResult::s)
        .def_readonly("phi", &MinimizerResult::phi)
        .def_readonly("dphi", &MinimizerResult::dphi)
        .def_readonly("rho", &MinimizerResult::rho)
        .def_readonly("kinetic", &MinimizerResult::kinetic)
        .def_readonly("potential", &MinimizerResult::potential)
        .def_readonly("boundary", &MinimizerResult::boundary)
        .def_readonly("action", &MinimizerResult::action)
        .def_readonly("G", &MinimizerResult::G)
        .def_readonly("terminal_residual", &MinimizerResult::terminal_residual)
        .def_readonly("iterations", &MinimizerResult::iterations);

    py::class_<PrefactorValue>(m, "PrefactorValue")
        .def_readonly("F_closed", &PrefactorValue::F_closed)
        .def_readonly("F_ode", &PrefactorValue::F_ode)
        .def_readonly("K", &PrefactorValue::K);

    py::class_<K1Report>(m, "K1Report")
        .def_readonly("k0", &K1Report::k0)
        .def_readonly("k0_stderr", &K1Report::k0_stderr)
        .def_readonly("k1bar", &K1Report::k1bar)
        .def_readonly("k1bar_stderr", &K1Report::k1bar_stderr)
        .def_readonly("ratio", &K1Report::ratio);

    py::class_<DriftPrediction>(m, "DriftPrediction")
        .def_readonly("leading", &DriftPrediction::leading)
        .def_readonly("correction_coeff", &DriftPrediction::correction_coeff)
        .def_readonly("minimizer", &DriftPrediction::minimizer);

    py::class_<ExpansionReport>(m, "ExpansionReport")
        .def_readonly("hbars", &ExpansionReport::hbars)
        .def_readonly("values", &ExpansionReport::values)
        .def_readonly("log_values", &ExpansionReport::log_values)
        .def_readonly("fitted_action", &ExpansionReport::fitted_action)
        .def_readonly("fitted_prefactor", &ExpansionReport::fitted_prefactor)
        .def_readonly("predicted_action", &ExpansionReport::predicted_action)
        .def_readonly("predicted_prefactor",
                      &ExpansionReport::predicted_prefactor)
        .def_readonly("residuals", &ExpansionReport::residuals)
        .def_readonly("normalized", &ExpansionReport::normalized)
        .def_readonly("complete", &ExpansionReport::complete)
        .def_readonly("failures", &ExpansionReport::failures);

    py::class_<ExponentPrediction>(m, "ExponentPrediction")
        .def_readonly("action", &ExponentPrediction::action)
        .def_readonly("prefactor", &ExponentPrediction::prefactor);

    py::class_<CriterionResult>(m, "CriterionResult")
        .def_readonly("id", &CriterionResult::id)
        .def_readonly("name", &CriterionResult::name)
        .def_readonly("passed", &CriterionResult::pass)
        .def_readonly("detail", &CriterionResult::detail)
        .def_readonly("seconds", &CriterionResult::seconds);

    // ---- Monte Carlo expectation ---------------------------------------

    m.def(
        "fk_estimate",
        [](const py::object& model, const py::object& problem, double p,
           std::size_t n_paths, double dt, uint64_t seed) {
            ProblemSpec spec = build_spec(model, problem);
            MCParams mc{n_paths, dt, seed};
            py::gil_scoped_release release;
            return fk_estimate(spec, p, mc);
        },
        py::arg("model") = py::none(), py::arg("problem") = py::none(),
        py::arg("p") = 0.0, py::arg("n_paths") = 100000, py::arg("dt") = 1e-3,
        py::arg("seed") = 1,
        "Path-sampled expectation of the killed semigroup at the start "
        "point p.");

    m.def(
        "drift_estimate",
        [](const py::object& model, const py::object& problem, double t,
           double p, double dp, std::size_t n_paths, double dt, uint64_t seed) {
            ProblemSpec spec = build_spec(model, problem);
            MCParams mc{n_paths, dt, seed};
            py::gil_scoped_release release;
            return drift_estimate(spec, t, p, dp, mc);
        },
        py::arg("model") = py::none(), py::arg("problem") = py::none(),
        py::arg("t") = 1.0, py::arg("p") = 0.0, py::arg("dp") = 1e-2,
        py::arg("n_paths") = 100000, py::arg("dt") = 1e-3, py::arg("seed") = 1,
        "Logarithmic gradient of the value function by common-random-number "
        "central differences.");

    m.def(
        "semigroup_residual",
        [](const py::object& model, const py::object& problem, double x,
           double t, int quad_points, std::size_t n_paths, double dt,
           uint64_t seed) {
            ProblemSpec spec = build_spec(model, problem);
            MCParams mc{n_paths, dt, seed};
            py::gil_scoped_release release;
            return semigroup_residual(spec, x, t, quad_points, mc);
        },
        py::arg("model") = py::none(), py::arg("problem") = py::none(),
        py::arg("x") = 0.0, py::arg("t") = 1.0, py::arg("quad_points") = 5,
        py::arg("n_paths") = 100000, py::arg("dt") = 1e-3, py::arg("seed") = 1,
        "Defect of the integrated evolution identity, estimated by "
        "independent Monte Carlo runs for both sides.");

    // ---- grid solver ----------------------------------------------------

    m.def(
        "solve_pide",
        [](const py::object& model, const py::object& problem,
           double half_width, std::size_t points, double dt,
           std::size_t max_slices) {
            ProblemSpec spec = build_spec(model, problem);
            PideGrid grid{half_width, points, dt, max_slices};
            py::gil_scoped_release release;
            return spec.model.scaled() ? solve_pide_scaled(spec, grid)
                                       : solve_pide(spec, grid);
        },
        py::arg("model") = py::none(), py::arg("problem") = py::none(),
        py::arg("half_width") = 10.0, py::arg("points") = 2001,
        py::arg("dt") = 1e-3, py::arg("max_slices") = 257,
        "Deterministic solution on [-half_width, half_width]; scaled models "
        "are routed through the resolution-checked variant.");

    m.def(
        "auto_grid",
        [](const py::object& model, const py::object& problem,
           double eval_point) {
            const PideGrid g = auto_grid(build_spec(model, problem), eval_point);
            py::dict d;
            d["half_width"] = g.L;
            d["points"] = g.n;
            d["dt"] = g.dt;
            d["max_slices"] = g.max_slices;
            return d;
        },
        py::arg("model") = py::none(), py::arg("problem") = py::none(),
        py::arg("eval_point") = 0.0,
        "Grid that resolves the model scale and places eval_point on a node.");

    m.def(
        "refine_order",
        [](const py::object& model, const py::object& problem, double probe_t,
           double probe_p, const std::vector<py::dict>& ladder) {
            ProblemSpec spec = build_spec(model, problem);
            std::vector<PideGrid> grids;
            for (const py::dict& d : ladder) {
                PideGrid g;
                if (d.contains("half_width"))
                    g.L = d["half_width"].cast<double>();
                if (d.contains("points"))
                    g.n = d["points"].cast<std::size_t>();
                if (d.contains("dt")) g.dt = d["dt"].cast<double>();
                if (d.contains("max_slices"))
                    g.max_slices = d["max_slices"].cast<std::size_t>();
                grids.push_back(g);
            }
            py::gil_scoped_release release;
            return refine_order(spec, probe_t, probe_p, grids);
        },
        py::arg("model") = py::none(), py::arg("problem") = py::none(),
        py::arg("probe_t") = 1.0, py::arg("probe_p") = 0.0,
        py::arg("ladder") = std::vector<py::dict>{},
        "Observed convergence order at a probe point over a grid ladder.");

    // ---- minimizing paths ------------------------------------------------

    m.def(
        "solve_el_config",
        [](const std::vector<double>& coeffs, double q, double T,
           double kappa) {
            Poly V{coeffs};
            py::gil_scoped_release release;
            return solve_el_config(V, q, T, kappa);
        },
        py::arg("coeffs"), py::arg("q"), py::arg("T") = 1.0,
        py::arg("kappa") = 0.5,
        "Two-point boundary problem for a quadratic kinetic term and "
        "polynomial potential (ascending coefficients).");

    m.def(
        "solve_el_momentum",
        [](const py::object& model, double p, double T, double kappa) {
            Lagrangian L = model_lagrangian(build_spec(model, py::none()).model);
            py::gil_scoped_release release;
            return solve_el_momentum(L, p, T, kappa);
        },
        py::arg("model") = py::none(), py::arg("p") = 0.0, py::arg("T") = 1.0,
        py::arg("kappa") = 0.5,
        "Hamiltonian two-point problem with the model's convex kinetic term "
        "and quadratic potential.");

    m.def("solve_el_jump", &solve_el_jump, py::arg("alpha") = 1.0,
          py::arg("p") = 0.5, py::arg("t_start") = 0.0,
          py::call_guard<py::gil_scoped_release>(),
          "Minimizing path for the two-point jump family on [t_start, 1].");

    m.def(
        "legendre",
        [](const py::object& model, double u) {
            return legendre_l0(
                model_lagrangian(build_spec(model, py::none()).model), u);
        },
        py::arg("model") = py::none(), py::arg("u") = 0.0,
        "Convex conjugate of the model's cumulant function at velocity u.");

    m.def(
        "hamiltonian",
        [](const py::object& model, double x) {
            return hamiltonian_h0(build_spec(model, py::none()).model)(x);
        },
        py::arg("model") = py::none(), py::arg("x") = 0.0,
        "Cumulant function of the triplet at x.");

    // ---- small-scale asymptotics ------------------------------------------

    m.def("gaussian_quadratic_functional", &gaussian_quadratic_functional,
          py::arg("g2"), py::arg("beta"), py::arg("tau"),
          "Closed form of the Gaussian quadratic path functional.");

    m.def(
        "prefactor",
        [](double t, bool backward) {
            return prefactor_F(backward ? PrefactorDirection::Backward
                                        : PrefactorDirection::Forward,
                               t);
        },
        py::arg("t"), py::arg("backward") = false,
        "Fluctuation prefactor of the harmonic family (closed form plus an "
        "independent ODE integration).");

    m.def(
        "prefactor_mc",
        [](double t, bool backward, std::size_t n_paths, double dt,
           uint64_t seed) {
            MCParams mc{n_paths, dt, seed};
            py::gil_scoped_release release;
            return prefactor_mc(backward ? PrefactorDirection::Backward
                                         : PrefactorDirection::Forward,
                                t, mc);
        },
        py::arg("t"), py::arg("backward") = false, py::arg("n_paths") = 100000,
        py::arg("dt") = 1e-3, py::arg("seed") = 1,
        "Monte Carlo check of the harmonic fluctuation prefactor.");

    m.def(
        "gaussian_k0",
        [](const std::vector<double>& coeffs, const MinimizerResult& min,
           double q, double kappa, std::size_t n_paths, double dt,
           uint64_t seed) {
            Poly V{coeffs};
            MCParams mc{n_paths, dt, seed};
            py::gil_scoped_release release;
            return gaussian_k0(V, min, q, kappa, mc);
        },
        py::arg("coeffs"), py::arg("minimizer"), py::arg("q"),
        py::arg("kappa") = 0.5, py::arg("n_paths") = 100000,
        py::arg("dt") = 1e-3, py::arg("seed") = 1,
        "Gaussian fluctuation factor around a configuration-space minimizer.");

    m.def(
        "gaussian_k1bar",
        [](const std::vector<double>& coeffs, const MinimizerResult& min,
           double q, double kappa, std::size_t n_paths, double dt,
           uint64_t seed) {
            Poly V{coeffs};
            MCParams mc{n_paths, dt, seed};
            py::gil_scoped_release release;
            return gaussian_k1bar(V, min, q, kappa, mc);
        },
        py::arg("coeffs"), py::arg("minimizer"), py::arg("q"),
        py::arg("kappa") = 0.5, py::arg("n_paths") = 100000,
        py::arg("dt") = 1e-3, py::arg("seed") = 1,
        "Next-order fluctuation coefficient; exactly zero for quadratic "
        "potentials.");

    m.def(
        "drift_prediction_config",
        [](const std::vector<double>& coeffs, double q, double T, double kappa,
           std::size_t n_paths, double dt, uint64_t seed) {
            Poly V{coeffs};
            MCParams mc{n_paths, dt, seed};
            py::gil_scoped_release release;
            return drift_prediction_config(V, q, T, kappa, mc);
        },
        py::arg("coeffs"), py::arg("q"), py::arg("T") = 0.5,
        py::arg("kappa") = 0.5, py::arg("n_paths") = 100000,
        py::arg("dt") = 1e-3, py::arg("seed") = 1,
        "Small-scale drift prediction from the configuration-space "
        "minimizer, with next-order correction.");

    m.def(
        "drift_prediction_momentum",
        [](const py::object& model, double p, double T, double kappa) {
            LevyModel lm = build_spec(model, py::none()).model;
            py::gil_scoped_release release;
            return drift_prediction_momentum(lm, p, T, kappa);
        },
        py::arg("model") = py::none(), py::arg("p") = 0.0, py::arg("T") = 0.5,
        py::arg("kappa") = 0.5,
        "Drift prediction from the momentum-side two-point problem.");

    m.def(
        "jump_prefactor_mc",
        [](double alpha, const MinimizerResult& jump_min, double t,
           std::size_t n_paths, double dt, uint64_t seed) {
            MCParams mc{n_paths, dt, seed};
            py::gil_scoped_release release;
            return jump_prefactor_mc(alpha, jump_min, t, mc);
        },
        py::arg("alpha"), py::arg("minimizer"), py::arg("t") = 0.0,
        py::arg("n_paths") = 100000, py::arg("dt") = 1e-3, py::arg("seed") = 1,
        "Fluctuation factor along a jump-family minimizing path.");

    m.def(
        "hbar_sweep",
        [](const py::object& model, const py::object& problem, double p,
           double t_eval, const std::vector<double>& hbars,
           const std::string& source, std::size_t n_paths, double dt,
           uint64_t seed) {
            ProblemSpec spec = build_spec(model, problem);
            SweepSource src;
            if (source == "pide")
                src = SweepSource::Pide;
            else if (source == "mc")
                src = SweepSource::MonteCarlo;
            else
                throw ConfigError("sweep source: expected pide or mc");
            MCParams mc{n_paths, dt, seed};
            py::gil_scoped_release release;
            return hbar_sweep(spec, p, t_eval, hbars, src, mc);
        },
        py::arg("model") = py::none(), py::arg("problem") = py::none(),
        py::arg("p") = 0.0, py::arg("t_eval") = 0.5,
        py::arg("hbars") = std::vector<double>{}, py::arg("source") = "pide",
        py::arg("n_paths") = 100000, py::arg("dt") = 1e-3, py::arg("seed") = 1,
        "Evaluates the value function over a decreasing scale ladder and "
        "fits the exponential rate.");

    m.def(
        "predict_exponent",
        [](const py::object& model, const py::object& problem, double p,
           double t_eval, std::size_t n_paths, double dt, uint64_t seed)
            -> std::optional<ExponentPrediction> {
            ProblemSpec spec = build_spec(model, problem);
            MCParams mc{n_paths, dt, seed};
            py::gil_scoped_release release;
            return predict_exponent(spec, p, t_eval, mc);
        },
        py::arg("model") = py::none(), py::arg("problem") = py::none(),
        py::arg("p") = 0.0, py::arg("t_eval") = 0.5,
        py::arg("n_paths") = 100000, py::arg("dt") = 1e-3, py::arg("seed") = 1,
        "Variational rate/prefactor prediction for the covered families, "
        "None otherwise.");

    // ---- model diagnostics -------------------------------------------------

    m.def(
        "empirical_moments",
        [](const py::object& model, const std::vector<double>& t_grid,
           int order, std::size_t n_paths, uint64_t seed) {
            LevyModel lm = build_spec(model, py::none()).model;
            py::gil_scoped_release release;
            MomentReport rep = empirical_moments(lm, t_grid, order, n_paths, seed);
            return std::make_tuple(rep.times, rep.moment, rep.stderrs,
                                   rep.sup_moment);
        },
        py::arg("model") = py::none(),
        py::arg("t_grid") = std::vector<double>{0.25, 0.5, 0.75, 1.0},
        py::arg("order") = 2, py::arg("n_paths") = 20000, py::arg("seed") = 1,
        "Empirical even moments on a time grid: (times, values, stderrs, "
        "sup).");

    m.def(
        "analytic_second_moment",
        [](const py::object& model, double t) {
            return analytic_second_moment(build_spec(model, py::none()).model,
                                          t);
        },
        py::arg("model") = py::none(), py::arg("t") = 1.0,
        "Exact second moment of the unscaled triplet started at zero.");

    // ---- configs and verification ------------------------------------------

    m.def(
        "canonical_config",
        [](const std::string& text) { return parse_config(text).canonical_json(); },
        py::arg("text"),
        "Parses a run config and returns the resolved canonical form.");

    m.def(
        "config_hash",
        [](const std::string& text) {
            return hash_hex(parse_config(text).config_hash());
        },
        py::arg("text"), "Content hash of the resolved run config.");

    m.def(
        "verify",
        [](const std::string& suite) {
            VerifySuite s;
            if (suite == "fast")
                s = VerifySuite::Fast;
            else if (suite == "full")
                s = VerifySuite::Full;
            else
                throw ConfigError("verify: suite must be fast or full");
            py::gil_scoped_release release;
            return run_verification(s);
        },
        py::arg("suite") = "fast",
        "Runs the self-check suite and returns per-criterion results.");
}
