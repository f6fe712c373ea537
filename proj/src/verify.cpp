#include "lfk/verify.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "lfk/asymptotics.hpp"
#include "lfk/fk.hpp"
#include "lfk/pide.hpp"
#include "lfk/rng.hpp"
#include "lfk/variational.hpp"

namespace lfk {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

struct Check {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (!pass) detail << "; ";
            detail << what;
            pass = false;
        }
    }
};

CriterionResult timed(int id, const std::string& name,
                      const std::function<void(Check&)>& body) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    Check c;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail << "exception: " << e.what();
    }
    r.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    r.pass = c.pass;
    r.detail = c.detail.str();
    if (r.pass && r.detail.empty()) r.detail = "ok";
    return r;
}

// ---- criterion bodies ------------------------------------------------------

// 1: numeric Legendre transform of cosh(alpha x) - 1 against its closed form
void crit_legendre(Check& c) {
    double worst = 0.0;
    for (double alpha : {0.5, 1.0, 2.0}) {
        LevyModel m;
        m.drift = 0.0;
        m.sigma2 = 0.0;
        m.jumps = TwoPointJumps{alpha, 1.0};
        NumericLagrangian numeric{hamiltonian_h0(m)};
        TwoPointLagrangian closed{alpha, 1.0};
        for (int i = 0; i <= 200; ++i) {
            const double u = -10.0 * alpha + 0.1 * alpha * i;
            const auto ln = legendre_l0(Lagrangian{numeric}, u);
            const auto lc = legendre_l0(Lagrangian{closed}, u);
            worst = std::max(worst, std::fabs(ln.value - lc.value));
            worst = std::max(worst,
                             std::fabs(ln.argmax - lc.argmax) /
                                 (1.0 + std::fabs(lc.argmax)));
        }
    }
    c.detail << "max err " << fmt(worst);
    c.require(worst <= 1e-8, "legendre mismatch " + fmt(worst) + " > 1e-8");
}

// 2: harmonic fluctuation prefactor, MC vs closed form
void crit_prefactor(Check& c) {
    const MCParams mc{100000, 1e-3, 102};
    for (double t : {0.0, 0.25, 0.5, 0.75}) {
        const double target = gaussian_quadratic_functional(1.0, 1.0, 1.0 - t);
        const MCEstimate est = prefactor_mc(PrefactorDirection::Forward, t, mc);
        const double err = std::fabs(est.mean - target);
        c.detail << "t=" << fmt(t) << " err=" << fmt(err) << " (3se="
                 << fmt(3.0 * est.stderr_) << ") ";
        c.require(err <= 3.0 * est.stderr_,
                  "t=" + fmt(t) + ": " + fmt(err) + " > 3 stderr");
    }
}

// 3: harmonic two-point boundary problem, shooting vs hyperbolic ansatz
void crit_shooting(Check& c) {
    RngStream rng(303, 0);
    const Poly V{{0.0, 0.0, 0.5}};
    double worst_path = 0.0, worst_res = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const double p = -2.0 + 4.0 * rng.uniform();
        const double T = 0.2 + 0.8 * rng.uniform();
        const MinimizerResult num = solve_el_config(V, p, T, 1.0);
        const MinimizerResult ref =
            config_closed_form(1.0, p, T, 1.0, num.phi.size());
        double sup = 0.0;
        for (std::size_t i = 0; i < num.phi.size(); ++i)
            sup = std::max(sup, std::fabs(num.phi[i] - ref.phi[i]));
        worst_path = std::max(worst_path, sup);
        worst_res = std::max(worst_res, std::fabs(num.terminal_residual));
    }
    c.detail << "sup path err " << fmt(worst_path) << ", terminal residual "
             << fmt(worst_res);
    c.require(worst_path <= 1e-6, "path err " + fmt(worst_path) + " > 1e-6");
    c.require(worst_res <= 1e-9, "terminal residual " + fmt(worst_res));
}

// 4: path sampler vs grid solver across the model/rate/data matrix
void crit_fk_vs_pide(Check& c) {
    struct Entry {
        const char* tag;
        LevyModel model;
        PideGrid grid;
    };
    LevyModel brown;
    brown.drift = 0.0;
    brown.sigma2 = 1.0;
    LevyModel twopt;
    twopt.drift = 0.0;
    twopt.sigma2 = 0.0;
    twopt.jumps = TwoPointJumps{1.0, 1.0};
    LevyModel gamma;
    gamma.drift = 0.0;
    gamma.sigma2 = 0.0;
    gamma.jumps = GammaJumps{};
    const Entry entries[] = {
        {"bm", brown, PideGrid{10.0, 2001, 1e-3, 257}},
        {"tp", twopt, PideGrid{12.0, 2401, 1e-3, 257}},
        {"ga", gamma, PideGrid{8.0, 1601, 2e-3, 257}},
    };
    const RateFunction rates[] = {RateFunction{QuadraticRate{0.5}},
                                  RateFunction{PolynomialRate{Poly{{1.0, -1.0, 1.0}}}}};
    const BoundaryData datas[] = {BoundaryData{ScaledGaussianData{0.5, false}},
                                  BoundaryData{OneData{}}};
    int combo = 0;
    double worst_pull = 0.0;
    for (const auto& e : entries) {
        for (const auto& r : rates) {
            for (const auto& g : datas) {
                ProblemSpec spec;
                spec.model = e.model;
                spec.rate = r;
                spec.data = g;
                spec.horizon = 1.0;
                spec.direction = TimeDirection::ForwardFromInitial;
                const GridSolution sol = solve_pide(spec, e.grid);
                for (double p : {0.0, 0.5, 1.0}) {
                    const MCParams mc{100000, 1e-3,
                                      404 + static_cast<uint64_t>(combo)};
                    const MCEstimate est = fk_estimate(spec, p, mc);
                    const double ref =
                        sol.at(sol.t.size() - 1, sol.space_index(p));
                    const double err = std::fabs(est.mean - ref);
                    const double pull = err / est.stderr_;
                    worst_pull = std::max(worst_pull, pull);
                    c.require(err <= 3.0 * est.stderr_,
                              std::string(e.tag) + " p=" + fmt(p) + ": err " +
                                  fmt(err) + " > 3*" + fmt(est.stderr_));
                    ++combo;
                }
            }
        }
    }
    c.detail << combo << " comparisons, worst |err|/stderr " << fmt(worst_pull);
}

// 5: semiclassical exponent of the harmonic family from the grid-solver ladder
void crit_harmonic_sweep(Check& c) {
    ProblemSpec spec;
    spec.model.drift = 0.0;
    spec.model.sigma2 = 1.0;
    spec.model.hbar = 0.4;
    spec.rate = QuadraticRate{0.5};
    spec.data = ScaledGaussianData{1.0, false};
    spec.horizon = 1.0;
    spec.direction = TimeDirection::BackwardFromTerminal;
    const MCParams mc{100000, 1e-3, 505};
    const ExpansionReport rep = hbar_sweep(spec, 0.4, 0.5,
                                           {0.4, 0.2, 0.1, 0.05, 0.025},
                                           SweepSource::Pide, mc);
    c.require(rep.complete, "ladder incomplete");
    c.require(rep.predicted_action.has_value(), "no variational prediction");
    if (!rep.predicted_action) return;
    const double A = *rep.predicted_action;
    const double err = std::fabs(rep.fitted_action - A);
    c.detail << "fitted " << fmt(rep.fitted_action) << " vs " << fmt(A)
             << " (rel " << fmt(err / std::fabs(A)) << ")";
    c.require(err <= 0.01 * std::fabs(A),
              "action err " + fmt(err) + " > 1% of " + fmt(A));
}

// 6: jump family at the trivial-minimizer point; exponent = 0.75
void crit_jump_sweep(Check& c) {
    ProblemSpec spec;
    spec.model.drift = 0.0;
    spec.model.sigma2 = 0.0;
    spec.model.jumps = TwoPointJumps{1.0, 1.0};
    spec.model.hbar = 0.2;
    spec.rate = QuadraticMinusLinearRate{};
    spec.data = ConstantExpData{};
    spec.horizon = 1.0;
    spec.direction = TimeDirection::BackwardFromTerminal;
    const MCParams mc{100000, 1e-3, 606};
    const ExpansionReport rep = hbar_sweep(spec, 0.5, 0.0,
                                           {0.2, 0.1, 0.05, 0.025},
                                           SweepSource::Pide, mc);
    c.require(rep.complete, "ladder incomplete");
    const double err = std::fabs(rep.fitted_action - 0.75);
    c.detail << "fitted " << fmt(rep.fitted_action) << " vs 0.75 (rel "
             << fmt(err / 0.75) << ")";
    c.require(err <= 0.02 * 0.75, "exponent err " + fmt(err) + " > 2%");
}

// 7: configuration-space drift at shrinking scale, quadratic potential
void crit_drift_config(Check& c) {
    const Poly V{{0.0, 0.0, 0.5}};
    const double target = -1.0; // -G at q = 1, kappa = 1/2 (hyperbolic ansatz)
    const double hbars[] = {0.2, 0.1, 0.05};
    const std::size_t paths[] = {300000, 500000, 1000000};
    double errs[3], sds[3];
    for (int i = 0; i < 3; ++i) {
        const double hb = hbars[i];
        ProblemSpec spec;
        spec.model.drift = 0.0;
        spec.model.sigma2 = 1.0;
        spec.model.hbar = hb;
        spec.rate = QuadraticRate{0.5};
        spec.data = ScaledGaussianData{0.5, true};
        spec.horizon = 0.5;
        spec.direction = TimeDirection::ForwardFromInitial;
        const MCParams mc{paths[i], 1e-3, 707 + static_cast<uint64_t>(i)};
        const DriftEstimate de =
            drift_estimate(spec, 0.5, 1.0, std::pow(hb, 1.5), mc);
        errs[i] = std::fabs(de.value - target);
        sds[i] = de.stderr_;
        c.detail << "hb=" << fmt(hb) << " err=" << fmt(errs[i]) << " se="
                 << fmt(sds[i]) << " ";
    }
    for (int i = 0; i < 2; ++i) {
        const double sc = 3.0 * std::hypot(sds[i], sds[i + 1]);
        c.require(errs[i + 1] <= 0.8 * errs[i] + sc,
                  "ratio too high at step " + fmt(hbars[i + 1]));
        c.require(errs[i + 1] >= 0.3 * errs[i] - sc,
                  "ratio too low at step " + fmt(hbars[i + 1]));
    }
    const MCParams tiny{8192, 1e-3, 710};
    const DriftPrediction dp = drift_prediction_config(V, 1.0, 0.5, 0.5, tiny);
    c.require(std::fabs(dp.leading - target) <= 1e-9,
              "leading term " + fmt(dp.leading) + " != -1");
    c.require(dp.correction_coeff == 0.0, "quadratic correction not exactly 0");
}

// 8: momentum-representation drift: Gaussian self-duality plus the two-point
// model against its Hamiltonian two-point problem
void crit_drift_momentum(Check& c) {
    LevyModel gauss;
    gauss.drift = 0.0;
    gauss.sigma2 = 1.0;
    const Poly V{{0.0, 0.0, 0.5}};
    const MCParams tiny{8192, 1e-3, 808};
    double worst = 0.0;
    for (const auto& [p, T, kappa] :
         {std::tuple{1.0, 0.5, 0.5}, std::tuple{0.7, 1.0, 1.0}}) {
        const DriftPrediction mom = drift_prediction_momentum(gauss, p, T, kappa);
        const DriftPrediction con = drift_prediction_config(V, p, T, kappa, tiny);
        worst = std::max(worst, std::fabs(mom.leading - con.leading));
    }
    c.detail << "self-dual gap " << fmt(worst);
    c.require(worst <= 1e-8, "self-dual gap " + fmt(worst) + " > 1e-8");

    LevyModel twopt;
    twopt.drift = 0.0;
    twopt.sigma2 = 0.0;
    twopt.jumps = TwoPointJumps{1.0, 1.0};
    twopt.hbar = 0.05;
    ProblemSpec spec;
    spec.model = twopt;
    spec.rate = QuadraticRate{0.5};
    spec.data = ScaledGaussianData{0.5, true};
    spec.horizon = 0.5;
    spec.direction = TimeDirection::ForwardFromInitial;
    const MCParams mc{400000, 1e-3, 809};
    const DriftEstimate de =
        drift_estimate(spec, 0.5, 0.3, std::pow(0.05, 1.5), mc);
    const DriftPrediction pred = drift_prediction_momentum(twopt, 0.3, 0.5, 0.5);
    const double err = std::fabs(de.value - pred.leading);
    const double tol = std::max(3.0 * de.stderr_, 0.15 * std::fabs(pred.leading));
    c.detail << "; two-point est " << fmt(de.value) << " vs " << fmt(pred.leading)
             << " (err " << fmt(err) << ", tol " << fmt(tol) << ")";
    c.require(err <= tol, "two-point drift err " + fmt(err) + " > " + fmt(tol));
}

// 9: Gaussian quadratic functional with unit curvature over a unit window
void crit_k0_identity(Check& c) {
    const Poly V{{0.0, 0.0, 0.5}};
    const MinimizerResult flat = solve_el_config(V, 0.0, 1.0, 0.5);
    const MCParams mc{100000, 1e-3, 909};
    const MCEstimate est = gaussian_k0(V, flat, 0.0, 0.5, mc);
    const double target = std::exp(-0.5);
    const double err = std::fabs(est.mean - target);
    c.detail << "est " << fmt(est.mean) << " vs " << fmt(target) << " (err "
             << fmt(err) << ", 3se " << fmt(3.0 * est.stderr_) << ")";
    c.require(err <= 3.0 * est.stderr_, "err " + fmt(err) + " > 3 stderr");
}

// 10: sampled moments stay finite and match the closed-form second moment
void crit_moments(Check& c) {
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(0.1 * i);
    LevyModel twopt;
    twopt.drift = 0.0;
    twopt.sigma2 = 0.0;
    twopt.jumps = TwoPointJumps{1.0, 1.0};
    LevyModel gamma;
    gamma.drift = 0.0;
    gamma.sigma2 = 0.0;
    gamma.jumps = GammaJumps{};
    int tag = 0;
    for (const auto& m : {twopt, gamma}) {
        const char* name = tag == 0 ? "tp" : "ga";
        for (int order : {2, 4, 6}) {
            const MomentReport rep = empirical_moments(
                m, grid, order, 100000, 1010 + static_cast<uint64_t>(tag * 3 + order));
            c.require(std::isfinite(rep.sup_moment),
                      std::string(name) + " m=" + fmt(order) + " not finite");
            if (order == 2) {
                const double ref =
                    analytic_second_moment(m, rep.times[rep.sup_index]);
                const double err = std::fabs(rep.sup_moment - ref);
                const double se = rep.stderrs[rep.sup_index];
                c.detail << name << " m2 err " << fmt(err) << " (3se "
                         << fmt(3.0 * se) << ") ";
                c.require(err <= 3.0 * se,
                          std::string(name) + " m=2 err " + fmt(err) +
                              " > 3 stderr");
            }
        }
        ++tag;
    }
}

// fast-suite extra: prefactor ODE integration vs closed form
void extra_prefactor_ode(Check& c) {
    double worst = 0.0;
    for (double t : {0.0, 0.3, 0.7, 1.0}) {
        const PrefactorValue f = prefactor_F(PrefactorDirection::Forward, t);
        worst = std::max(worst, std::fabs(f.F_closed - f.F_ode));
    }
    for (double tau : {0.2, 0.5, 1.0}) {
        const PrefactorValue f = prefactor_F(PrefactorDirection::Backward, tau);
        worst = std::max(worst, std::fabs(f.F_closed - f.F_ode));
    }
    c.detail << "max |closed - ode| " << fmt(worst);
    c.require(worst <= 1e-9, "prefactor ODE gap " + fmt(worst));
}

// fast-suite extra: Fenchel equality L0(H0'(x)) + H0(x) = x H0'(x)
void extra_fenchel(Check& c) {
    LevyModel twopt;
    twopt.sigma2 = 0.0;
    twopt.jumps = TwoPointJumps{1.3, 0.7};
    LevyModel gamma;
    gamma.sigma2 = 0.0;
    gamma.jumps = GammaJumps{};
    double worst = 0.0;
    for (const auto& m : {twopt, gamma}) {
        const Hamiltonian h = hamiltonian_h0(m);
        const NumericLagrangian lag{h};
        for (int i = -8; i <= 8; ++i) {
            // keep gamma (one-sided, steep) within its safe dual range
            const double x = std::holds_alternative<GammaJumps>(m.jumps)
                                 ? 0.05 * i
                                 : 0.4 * i;
            const double u = h.d1(x);
            const auto l = legendre_l0(Lagrangian{lag}, u);
            worst = std::max(worst, std::fabs(l.value + h(x) - x * u));
        }
    }
    c.detail << "max Fenchel defect " << fmt(worst);
    c.require(worst <= 1e-9, "Fenchel defect " + fmt(worst));
}

void extra_self_dual(Check& c) {
    LevyModel gauss;
    gauss.drift = 0.0;
    gauss.sigma2 = 1.0;
    const Poly V{{0.0, 0.0, 0.5}};
    const MCParams tiny{4096, 1e-3, 111};
    const DriftPrediction mom = drift_prediction_momentum(gauss, 0.8, 0.6, 1.0);
    const DriftPrediction con = drift_prediction_config(V, 0.8, 0.6, 1.0, tiny);
    const double gap = std::fabs(mom.leading - con.leading);
    c.detail << "gap " << fmt(gap);
    c.require(gap <= 1e-8, "self-dual gap " + fmt(gap));
}

} // namespace

std::vector<CriterionResult> run_verification(VerifySuite suite) {
    std::vector<CriterionResult> out;
    if (suite == VerifySuite::Fast) {
        out.push_back(timed(1, "legendre-closed-form", crit_legendre));
        out.push_back(timed(3, "harmonic-shooting", crit_shooting));
        out.push_back(timed(0, "prefactor-ode", extra_prefactor_ode));
        out.push_back(timed(0, "fenchel-equality", extra_fenchel));
        out.push_back(timed(0, "self-duality", extra_self_dual));
        return out;
    }
    out.push_back(timed(1, "legendre-closed-form", crit_legendre));
    out.push_back(timed(2, "prefactor-identity", crit_prefactor));
    out.push_back(timed(3, "harmonic-shooting", crit_shooting));
    out.push_back(timed(4, "sampler-vs-grid-matrix", crit_fk_vs_pide));
    out.push_back(timed(5, "harmonic-exponent-ladder", crit_harmonic_sweep));
    out.push_back(timed(6, "jump-exponent-ladder", crit_jump_sweep));
    out.push_back(timed(7, "drift-config-ladder", crit_drift_config));
    out.push_back(timed(8, "drift-momentum", crit_drift_momentum));
    out.push_back(timed(9, "quadratic-functional-identity", crit_k0_identity));
    out.push_back(timed(10, "moment-bounds", crit_moments));
    return out;
}

} // namespace lfk
