#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lfk/asymptotics.hpp"
#include "lfk/config.hpp"
#include "lfk/errors.hpp"
#include "lfk/fk.hpp"
#include "lfk/io.hpp"
#include "lfk/pide.hpp"
#include "lfk/variational.hpp"
#include "lfk/verify.hpp"

namespace {

using namespace lfk;

struct CommonOpts {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::string out;
    std::string format;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool config_required) {
    auto* c = cmd->add_option("--config", o.config_path, "config file (JSON)");
    if (config_required) c->required();
    cmd->add_option("--seed", o.seed, "override the config seed");
    cmd->add_option("--out", o.out, "output path (default: stdout)");
    cmd->add_option("--format", o.format, "csv | json | bin")
        ->check(CLI::IsMember({"csv", "json", "bin"}));
}

RunConfig load_common(const CommonOpts& o, const std::string& subcmd) {
    RunConfig cfg = load_config(o.config_path);
    if (cfg.method_name != subcmd)
        throw ConfigError("config method \"" + cfg.method_name +
                          "\" does not match subcommand \"" + subcmd + "\"");
    if (o.seed) {
        cfg.seed = *o.seed;
        cfg.mc.seed = *o.seed;
    }
    if (!o.out.empty()) cfg.out_path = o.out;
    if (!o.format.empty()) {
        if (o.format == "csv") cfg.format = OutputFormat::Csv;
        else if (o.format == "json") cfg.format = OutputFormat::Json;
        else cfg.format = OutputFormat::Bin;
    }
    return cfg;
}

void emit(const RunConfig& cfg, const std::string& bytes) {
    if (cfg.out_path.empty()) {
        std::fwrite(bytes.data(), 1, bytes.size(), stdout);
    } else {
        atomic_write(cfg.out_path, bytes);
    }
}

void emit_sidecar(const RunConfig& cfg, const std::string& method) {
    // the binary slab layout is fixed, so the embedded-config requirement is
    // met by a JSON sidecar next to the artifact
    std::string meta = "{\"config\":" + cfg.canonical_json() +
                       ",\"config_hash\":\"" + hash_hex(cfg.config_hash()) +
                       "\",\"method\":\"" + method + "\"}\n";
    atomic_write(cfg.out_path + ".meta.json", meta);
}

int run_fk(const CommonOpts& o) {
    RunConfig cfg = load_common(o, "fk");
    const double horizon = cfg.problem.horizon;
    const bool forward =
        cfg.problem.direction == TimeDirection::ForwardFromInitial;
    const double t_eval =
        cfg.fk.eval_time.value_or(forward ? horizon : 0.0);
    if (t_eval < 0.0 || t_eval > horizon)
        throw ConfigError("fk: eval_time outside [0, horizon]");
    const double window = forward ? t_eval : horizon - t_eval;
    ProblemSpec sub = cfg.problem;
    sub.horizon = window;
    std::vector<FkRow> rows;
    for (double p : cfg.fk.eval_points) {
        const MCEstimate est = fk_estimate(sub, p, cfg.mc);
        FkRow r;
        r.t = t_eval;
        r.p = p;
        r.mean = est.mean;
        r.stderr_ = est.stderr_;
        r.n_paths = est.n_paths;
        r.dt = est.dt;
        r.seed = est.seed;
        rows.push_back(r);
    }
    if (cfg.format == OutputFormat::Csv) {
        emit(cfg, render_fk_csv(cfg, rows));
    } else if (cfg.format == OutputFormat::Json) {
        emit(cfg, render_fk_json(cfg, rows));
    } else {
        if (cfg.out_path.empty())
            throw ConfigError("fk: binary output needs --out");
        const double hbar = cfg.problem.model.hbar.value_or(1.0);
        std::vector<double> m;
        for (const auto& r : rows) {
            m.insert(m.end(),
                     {r.t, r.p, hbar, r.mean, r.stderr_,
                      static_cast<double>(r.n_paths), r.dt,
                      static_cast<double>(r.seed)});
        }
        emit(cfg, render_slab(rows.size(), 8, m));
        emit_sidecar(cfg, "fk");
    }
    return 0;
}

int run_pide(const CommonOpts& o) {
    RunConfig cfg = load_common(o, "pide");
    const GridSolution sol = cfg.problem.model.scaled()
                                 ? solve_pide_scaled(cfg.problem, cfg.pide.grid)
                                 : solve_pide(cfg.problem, cfg.pide.grid);
    if (cfg.format == OutputFormat::Csv) {
        emit(cfg, render_grid_csv(cfg, sol));
    } else if (cfg.format == OutputFormat::Json) {
        emit(cfg, render_grid_json(cfg, sol));
    } else {
        if (cfg.out_path.empty())
            throw ConfigError("pide: binary output needs --out");
        uint64_t rows = 0, cols = 0;
        const std::vector<double> m = bordered_matrix(sol, &rows, &cols);
        emit(cfg, render_slab(rows, cols, m));
        emit_sidecar(cfg, "pide");
    }
    return 0;
}

Poly rate_as_poly(const RateFunction& r) {
    if (const auto* q = std::get_if<QuadraticRate>(&r))
        return Poly{{0.0, 0.0, q->coeff}};
    if (std::holds_alternative<QuadraticMinusLinearRate>(r))
        return Poly{{0.0, -1.0, 1.0}};
    if (const auto* p = std::get_if<PolynomialRate>(&r)) return p->poly;
    throw ConfigError("variational: rate family has no polynomial form");
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

int run_variational(const CommonOpts& o) {
    RunConfig cfg = load_common(o, "variational");
    const VariationalMethod& vm = cfg.variational;
    MinimizerResult res;
    if (vm.mode == VariationalMode::Config) {
        res = solve_el_config(rate_as_poly(cfg.problem.rate), vm.location,
                              vm.interval, vm.kappa);
    } else if (vm.mode == VariationalMode::Momentum) {
        res = solve_el_momentum(model_lagrangian(cfg.problem.model), vm.location,
                                vm.interval, vm.kappa);
    } else {
        const auto* tp = std::get_if<TwoPointJumps>(&cfg.problem.model.jumps);
        if (!tp)
            throw ConfigError("variational: jump mode needs a two-point model");
        res = solve_el_jump(tp->alpha, vm.location, vm.t_start);
    }
    Table t;
    t.method = "variational";
    t.header = {"s", "phi", "dphi"};
    const bool with_rho = !res.rho.empty();
    if (with_rho) t.header.push_back("rho");
    for (std::size_t i = 0; i < res.s.size(); ++i) {
        std::vector<double> row = {res.s[i], res.phi[i], res.dphi[i]};
        if (with_rho) row.push_back(res.rho[i]);
        t.rows.push_back(std::move(row));
    }
    t.notes = {{"action", format_g17(res.action)},
               {"kinetic", format_g17(res.kinetic)},
               {"potential", format_g17(res.potential)},
               {"boundary", format_g17(res.boundary)},
               {"drift_functional", format_g17(res.G)},
               {"terminal_residual", format_g17(res.terminal_residual)}};
    if (cfg.format == OutputFormat::Bin) {
        if (cfg.out_path.empty())
            throw ConfigError("variational: binary output needs --out");
        std::vector<double> m;
        for (const auto& row : t.rows) m.insert(m.end(), row.begin(), row.end());
        emit(cfg, render_slab(t.rows.size(), t.header.size(), m));
        emit_sidecar(cfg, "variational");
    } else if (cfg.format == OutputFormat::Json) {
        emit(cfg, render_table_json(cfg, t));
    } else {
        emit(cfg, render_table_csv(cfg, t));
    }
    return 0;
}

int run_asymptotics(const CommonOpts& o) {
    RunConfig cfg = load_common(o, "asymptotics");
    const AsymptoticsMethod& am = cfg.asymptotics;
    Table t;
    t.method = "asymptotics";
    if (am.mode == AsymptoticsMode::Prefactor) {
        const PrefactorDirection dir = am.backward
                                           ? PrefactorDirection::Backward
                                           : PrefactorDirection::Forward;
        std::vector<double> times = am.times;
        if (times.empty()) times = {0.0, 0.25, 0.5, 0.75};
        t.header = {"t", "f_closed", "f_ode", "k", "mc_mean", "mc_stderr"};
        for (double tt : times) {
            const PrefactorValue f = prefactor_F(dir, tt);
            const MCEstimate est = prefactor_mc(dir, tt, cfg.mc);
            t.rows.push_back({tt, f.F_closed, f.F_ode, f.K, est.mean,
                              est.stderr_});
        }
    } else if (am.mode == AsymptoticsMode::DriftConfig ||
               am.mode == AsymptoticsMode::DriftMomentum) {
        DriftPrediction pred;
        if (am.mode == AsymptoticsMode::DriftConfig) {
            pred = drift_prediction_config(rate_as_poly(cfg.problem.rate),
                                           am.location, am.interval, am.kappa,
                                           cfg.mc);
        } else {
            pred = drift_prediction_momentum(cfg.problem.model, am.location,
                                             am.interval, am.kappa);
        }
        t.header = {"location", "interval", "kappa", "leading",
                    "correction_coeff"};
        std::vector<double> row = {am.location, am.interval, am.kappa,
                                   pred.leading, pred.correction_coeff};
        if (am.dp > 0.0) {
            if (!cfg.problem.model.scaled())
                throw ConfigError(
                    "asymptotics: drift comparison needs model.hbar");
            ProblemSpec sub = cfg.problem;
            sub.horizon = am.interval;
            const DriftEstimate de =
                drift_estimate(sub, am.interval, am.location, am.dp, cfg.mc);
            t.header.push_back("mc_value");
            t.header.push_back("mc_stderr");
            row.push_back(de.value);
            row.push_back(de.stderr_);
        }
        t.rows.push_back(std::move(row));
        t.notes = {{"action", format_g17(pred.minimizer.action)},
                   {"drift_functional", format_g17(pred.minimizer.G)}};
    } else {
        const SweepSource src =
            am.mc_source ? SweepSource::MonteCarlo : SweepSource::Pide;
        const ExpansionReport rep = hbar_sweep(cfg.problem, am.eval_point,
                                               am.eval_time, am.hbars, src,
                                               cfg.mc);
        t.header = {"hbar", "value", "log_value", "fit_residual"};
        for (std::size_t i = 0; i < rep.hbars.size(); ++i)
            t.rows.push_back({rep.hbars[i], rep.values[i], rep.log_values[i],
                              rep.residuals[i]});
        t.notes = {{"fitted_action", format_g17(rep.fitted_action)},
                   {"fitted_prefactor", format_g17(rep.fitted_prefactor)},
                   {"complete", rep.complete ? "1" : "0"}};
        if (rep.predicted_action)
            t.notes.push_back(
                {"predicted_action", format_g17(*rep.predicted_action)});
        if (rep.predicted_prefactor)
            t.notes.push_back(
                {"predicted_prefactor", format_g17(*rep.predicted_prefactor)});
        for (const auto& f : rep.failures) t.notes.push_back({"failure", f});
    }
    if (cfg.format == OutputFormat::Bin) {
        if (cfg.out_path.empty())
            throw ConfigError("asymptotics: binary output needs --out");
        std::vector<double> m;
        for (const auto& row : t.rows) m.insert(m.end(), row.begin(), row.end());
        emit(cfg, render_slab(t.rows.size(), t.header.size(), m));
        emit_sidecar(cfg, "asymptotics");
    } else if (cfg.format == OutputFormat::Json) {
        emit(cfg, render_table_json(cfg, t));
    } else {
        emit(cfg, render_table_csv(cfg, t));
    }
    return 0;
}

int run_verify(const std::string& suite, const std::string& out) {
    const VerifySuite s =
        suite == "fast" ? VerifySuite::Fast : VerifySuite::Full;
    const auto results = run_verification(s);
    bool all = true;
    for (const auto& r : results) {
        std::printf("[%s] %02d %s (%.2fs): %s\n", r.pass ? "PASS" : "FAIL",
                    r.id, r.name.c_str(), r.seconds, r.detail.c_str());
        all = all && r.pass;
    }
    std::printf("%s: %zu criteria, %s\n", suite.c_str(), results.size(),
                all ? "all passed" : "FAILURES PRESENT");
    if (!out.empty()) {
        std::string csv = "# method=verify\nid,name,pass,seconds\n";
        for (const auto& r : results) {
            csv += std::to_string(r.id) + "," + r.name + "," +
                   (r.pass ? "1" : "0") + "," + format_g17(r.seconds) + "\n";
        }
        atomic_write(out, csv);
    }
    return all ? 0 : 1;
}

int run_report(const std::vector<std::string>& inputs, const std::string& out,
               const std::string& format) {
    if (inputs.empty()) throw ConfigError("report: no input artifacts");
    const std::string merged = format == "json" ? merge_reports_json(inputs)
                                                : merge_reports_csv(inputs);
    if (out.empty()) {
        std::fwrite(merged.data(), 1, merged.size(), stdout);
    } else {
        atomic_write(out, merged);
    }
    return 0;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Feynman-Kac evaluation toolkit for Levy models in momentum "
                 "coordinates"};
    app.require_subcommand(1);

    CommonOpts fk_o, pide_o, var_o, asy_o;
    auto* fk_cmd = app.add_subcommand("fk", "Monte Carlo path-weight estimates");
    add_common(fk_cmd, fk_o, true);
    auto* pide_cmd =
        app.add_subcommand("pide", "deterministic grid solution of the "
                                   "evolution equation");
    add_common(pide_cmd, pide_o, true);
    auto* var_cmd =
        app.add_subcommand("variational", "Euler-Lagrange minimizers and "
                                          "action values");
    add_common(var_cmd, var_o, true);
    auto* asy_cmd =
        app.add_subcommand("asymptotics", "small-scale expansions: prefactors, "
                                          "drift, exponent ladders");
    add_common(asy_cmd, asy_o, true);

    std::string suite = "full", verify_out;
    auto* ver_cmd = app.add_subcommand("verify", "built-in acceptance checks");
    ver_cmd->add_option("--suite", suite, "fast | full")
        ->check(CLI::IsMember({"fast", "full"}));
    ver_cmd->add_option("--out", verify_out, "write results as CSV");

    std::vector<std::string> report_inputs;
    std::string report_out, report_format = "csv";
    auto* rep_cmd =
        app.add_subcommand("report", "merge CSV artifacts into one summary");
    rep_cmd->add_option("inputs", report_inputs, "artifact files")->required();
    rep_cmd->add_option("--out", report_out, "output path (default: stdout)");
    rep_cmd->add_option("--format", report_format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (fk_cmd->parsed()) return run_fk(fk_o);
    if (pide_cmd->parsed()) return run_pide(pide_o);
    if (var_cmd->parsed()) return run_variational(var_o);
    if (asy_cmd->parsed()) return run_asymptotics(asy_o);
    if (ver_cmd->parsed()) return run_verify(suite, verify_out);
    if (rep_cmd->parsed())
        return run_report(report_inputs, report_out, report_format);
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const lfk::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const lfk::ResolutionError& e) {
        std::cerr << "resolution error: " << e.what() << "\n";
        return 4;
    } catch (const lfk::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
