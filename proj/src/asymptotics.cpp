#include "lfk/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lfk/errors.hpp"
#include "lfk/fk.hpp"
#include "lfk/parallel.hpp"
#include "lfk/rng.hpp"

namespace lfk {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;
}

double gaussian_quadratic_functional(double g2, double beta, double tau) {
    if (g2 < 0.0 || tau < 0.0) throw ConfigError("gaussian functional: bad arguments");
    if (g2 == 0.0) return 1.0 / std::sqrt(1.0 + 2.0 * beta * tau);
    const double g = std::sqrt(g2);
    return 1.0 / std::sqrt(std::cosh(g * tau) + (2.0 * beta / g) * std::sinh(g * tau));
}

PrefactorValue prefactor_F(PrefactorDirection dir, double t) {
    PrefactorValue out;
    double target; // elapsed length of the ODE integration
    double f, fp;  // boundary values of (F, F')
    if (dir == PrefactorDirection::Forward) {
        if (t < 0.0 || t > 1.0)
            throw ConfigError("prefactor_F: forward time must lie in [0, 1]");
        out.F_closed = (std::cosh(1.0 - t) + 2.0 * std::sinh(1.0 - t)) / kTwoPi;
        // integrate F'' = F from the terminal side s = 1 down to t
        target = 1.0 - t;
        f = 1.0 / kTwoPi;
        fp = -1.0 / 3.141592653589793238463;
    } else {
        if (t < 0.0) throw ConfigError("prefactor_F: backward time must be >= 0");
        out.F_closed = (std::cosh(t) + 2.0 * std::sinh(t)) / kTwoPi;
        target = t;
        f = 1.0 / kTwoPi;
        fp = 2.0 / kTwoPi; // F*'(0) = 1/pi
    }
    // RK4 on (F, F')' = (F', F); forward direction integrates against time,
    // which flips the sign of F' but not of F'' = F, i.e. h < 0 works directly
    const int n = 4000;
    const double h = (dir == PrefactorDirection::Forward ? -target : target) / n;
    for (int i = 0; i < n; ++i) {
        const double k1f = fp, k1p = f;
        const double k2f = fp + 0.5 * h * k1p, k2p = f + 0.5 * h * k1f;
        const double k3f = fp + 0.5 * h * k2p, k3p = f + 0.5 * h * k2f;
        const double k4f = fp + h * k3p, k4p = f + h * k3f;
        f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        fp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    }
    out.F_ode = f;
    if (!(out.F_closed > 0.0) || std::abs(out.F_ode - out.F_closed) > 1e-9)
        throw SolverError("prefactor_F: ODE integration disagrees with the closed form");
    out.K = 1.0 / std::sqrt(kTwoPi * out.F_closed);
    return out;
}

namespace {

// E[exp(-\int c(s) W^2 ds - beta W_tau^2)] with c sampled on a uniform grid
MCEstimate brownian_quadratic_mc(const std::vector<double>& c, double dt, double beta,
                                 const MCParams& mc) {
    const std::size_t steps = c.empty() ? 0 : c.size() - 1;
    const std::size_t n_batches = (mc.n_paths + kBatchSize - 1) / kBatchSize;
    std::vector<double> s1(n_batches, 0.0), s2(n_batches, 0.0);
    for_each_batch(n_batches, [&](std::size_t b) {
        RngStream rng(mc.seed, b);
        const std::size_t lo = b * kBatchSize;
        const std::size_t hi = std::min(mc.n_paths, lo + kBatchSize);
        const double sq = std::sqrt(dt);
        double a1 = 0.0, a2 = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            double w = 0.0, acc = 0.0, prev = 0.0; // c[0] * W_0^2 = 0
            for (std::size_t j = 1; j <= steps; ++j) {
                w += sq * rng.normal();
                const double cur = c[j] * w * w;
                acc += 0.5 * dt * (prev + cur);
                prev = cur;
            }
            const double v = std::exp(-acc - beta * w * w);
            a1 += v;
            a2 += v * v;
        }
        s1[b] = a1;
        s2[b] = a2;
    });
    double S1 = 0.0, S2 = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
        S1 += s1[b];
        S2 += s2[b];
    }
    const double n = static_cast<double>(mc.n_paths);
    MCEstimate est;
    est.mean = S1 / n;
    const double var =
        std::max(0.0, S2 / n - est.mean * est.mean) * n / std::max(1.0, n - 1.0);
    est.stderr_ = std::sqrt(var / n);
    est.n_paths = mc.n_paths;
    est.dt = dt;
    est.seed = mc.seed;
    return est;
}

std::vector<double> resample_on_grid(const std::vector<double>& s,
                                     const std::vector<double>& v, double t0,
                                     double tau, std::size_t steps) {
    std::vector<double> out(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) {
        const double t = t0 + tau * static_cast<double>(j) / static_cast<double>(steps);
        auto it = std::lower_bound(s.begin(), s.end(), t);
        if (it == s.begin()) {
            out[j] = v.front();
        } else if (it == s.end()) {
            out[j] = v.back();
        } else {
            const std::size_t i = static_cast<std::size_t>(it - s.begin());
            const double w = (t - s[i - 1]) / (s[i] - s[i - 1]);
            out[j] = v[i - 1] * (1.0 - w) + v[i] * w;
        }
    }
    return out;
}

} // namespace

MCEstimate prefactor_mc(PrefactorDirection dir, double t, const MCParams& mc) {
    const double tau = dir == PrefactorDirection::Forward ? 1.0 - t : t;
    if (tau < 0.0) throw ConfigError("prefactor_mc: bad time");
    const auto steps = static_cast<std::size_t>(std::ceil(tau / mc.dt - 1e-12));
    const double dt = steps ? tau / static_cast<double>(steps) : mc.dt;
    std::vector<double> c(steps + 1, 0.5); // -1/2 \int W^2, beta = 1
    return brownian_quadratic_mc(c, dt, 1.0, mc);
}

MCEstimate gaussian_k0(const Poly& V, const MinimizerResult& min, double q,
                       double kappa, const MCParams& mc) {
    if (min.s.size() < 2) throw ConfigError("gaussian_k0: minimizer path too short");
    const Poly V2 = V.derivative().derivative();
    const double t0 = min.s.front();
    const double tau = min.s.back() - t0;
    const auto steps = static_cast<std::size_t>(std::ceil(tau / mc.dt - 1e-12));
    const double dt = tau / static_cast<double>(steps);
    std::vector<double> half_v2(min.s.size());
    for (std::size_t i = 0; i < min.s.size(); ++i)
        half_v2[i] = 0.5 * V2(min.phi[i] + q);
    const auto c = resample_on_grid(min.s, half_v2, t0, tau, steps);
    return brownian_quadratic_mc(c, dt, kappa, mc);
}

MCEstimate jump_prefactor_mc(double alpha, const MinimizerResult& jump_min, double t,
                             const MCParams& mc) {
    if (jump_min.rho.size() != jump_min.s.size() || jump_min.s.size() < 2)
        throw ConfigError("jump_prefactor_mc: minimizer lacks momentum samples");
    const double tau = 1.0 - t;
    if (!(tau > 0.0)) {
        MCEstimate unit;
        unit.mean = 1.0;
        unit.n_paths = mc.n_paths;
        unit.seed = mc.seed;
        return unit; // empty window: the functional is empty, E[...] = 1
    }
    const auto steps = static_cast<std::size_t>(std::ceil(tau / mc.dt - 1e-12));
    const double dt = tau / static_cast<double>(steps);
    std::vector<double> integrand(jump_min.s.size());
    for (std::size_t i = 0; i < jump_min.s.size(); ++i)
        integrand[i] = alpha * alpha * std::cosh(jump_min.rho[i]);
    const auto c = resample_on_grid(jump_min.s, integrand, jump_min.s.front(), tau, steps);
    return brownian_quadratic_mc(c, dt, 0.0, mc);
}

K1Report gaussian_k1bar(const Poly& V, const MinimizerResult& min, double q,
                        double kappa, const MCParams& mc) {
    K1Report rep;
    const Poly V2 = V.derivative().derivative();
    const Poly V3 = V2.derivative();
    const Poly V4 = V3.derivative();
    if (V3.degree() < 0 && V4.degree() < 0) {
        // expansion terminates: the correction vanishes identically
        MCParams tiny = mc;
        tiny.n_paths = std::min<std::size_t>(mc.n_paths, 4096);
        const MCEstimate k0 = gaussian_k0(V, min, q, kappa, tiny);
        rep.k0 = k0.mean;
        rep.k0_stderr = k0.stderr_;
        return rep;
    }
    const double t0 = min.s.front();
    const double tau = min.s.back() - t0;
    const auto steps = static_cast<std::size_t>(std::ceil(tau / mc.dt - 1e-12));
    const double dt = tau / static_cast<double>(steps);
    const std::size_t m = min.s.size();
    std::vector<double> c2(m), c3(m), c4(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double y = min.phi[i] + q;
        c2[i] = V2(y);
        c3[i] = V3(y);
        c4[i] = V4(y);
    }
    const auto g2 = resample_on_grid(min.s, c2, t0, tau, steps);
    const auto g3 = resample_on_grid(min.s, c3, t0, tau, steps);
    const auto g4 = resample_on_grid(min.s, c4, t0, tau, steps);
    const double G0 = min.G;

    const std::size_t n_batches = (mc.n_paths + kBatchSize - 1) / kBatchSize;
    std::vector<double> k0s(n_batches, 0.0), k0s2(n_batches, 0.0);
    std::vector<double> k1s(n_batches, 0.0), k1s2(n_batches, 0.0);
    for_each_batch(n_batches, [&](std::size_t b) {
        RngStream rng(mc.seed, b);
        const std::size_t lo = b * kBatchSize;
        const std::size_t hi = std::min(mc.n_paths, lo + kBatchSize);
        const double sq = std::sqrt(dt);
        double a0 = 0.0, a02 = 0.0, a1 = 0.0, a12 = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            double w = 0.0;
            double i2 = 0.0, j1 = 0.0, i32 = 0.0, i33 = 0.0, i44 = 0.0;
            double p2 = 0.0, p1 = 0.0, p32 = 0.0, p33 = 0.0, p44 = 0.0;
            for (std::size_t j = 1; j <= steps; ++j) {
                w += sq * rng.normal();
                const double w2 = w * w;
                const double q2 = g2[j] * w2, q1 = g2[j] * w;
                const double q32 = g3[j] * w2, q33 = g3[j] * w2 * w;
                const double q44 = g4[j] * w2 * w2;
                i2 += 0.5 * dt * (p2 + q2);
                j1 += 0.5 * dt * (p1 + q1);
                i32 += 0.5 * dt * (p32 + q32);
                i33 += 0.5 * dt * (p33 + q33);
                i44 += 0.5 * dt * (p44 + q44);
                p2 = q2;
                p1 = q1;
                p32 = q32;
                p33 = q33;
                p44 = q44;
            }
            const double e = std::exp(-0.5 * i2 - kappa * w * w);
            const double f3 = -i33; // F'''(phi*) W^3
            const double f4 = -i44; // F''''(phi*) W^4
            const double gp = j1 + w;   // G'(phi*) W
            const double gpp = i32;     // G''(phi*)(W, W)
            const double k1 = e * (0.5 * gpp + gp * f3 / 6.0 + G0 * f4 / 24.0 +
                                   G0 * f3 * f3 / 72.0);
            a0 += e;
            a02 += e * e;
            a1 += k1;
            a12 += k1 * k1;
        }
        k0s[b] = a0;
        k0s2[b] = a02;
        k1s[b] = a1;
        k1s2[b] = a12;
    });
    double S0 = 0.0, S02 = 0.0, S1 = 0.0, S12 = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
        S0 += k0s[b];
        S02 += k0s2[b];
        S1 += k1s[b];
        S12 += k1s2[b];
    }
    const double n = static_cast<double>(mc.n_paths);
    rep.k0 = S0 / n;
    rep.k0_stderr = std::sqrt(std::max(0.0, S02 / n - rep.k0 * rep.k0) / n);
    rep.k1bar = S1 / n;
    rep.k1bar_stderr = std::sqrt(std::max(0.0, S12 / n - rep.k1bar * rep.k1bar) / n);
    rep.ratio = rep.k0 != 0.0 ? rep.k1bar / rep.k0 : 0.0;
    return rep;
}

DriftPrediction drift_prediction_config(const Poly& V, double q, double T, double kappa,
                                        const MCParams& mc) {
    DriftPrediction pred;
    pred.minimizer = solve_el_config(V, q, T, kappa);
    pred.leading = -pred.minimizer.G;
    const K1Report k1 = gaussian_k1bar(V, pred.minimizer, q, kappa, mc);
    pred.correction_coeff = k1.k0 > 0.0 ? -k1.k1bar / k1.k0 : 0.0;
    return pred;
}

DriftPrediction drift_prediction_momentum(const LevyModel& model, double p, double T,
                                          double kappa) {
    DriftPrediction pred;
    Lagrangian L = NumericLagrangian{hamiltonian_h0(model)};
    if (std::holds_alternative<NoJumps>(model.jumps) && model.drift == 0.0 &&
        model.sigma2 > 0.0)
        L = GaussianLagrangian{model.sigma2};
    else if (const auto* tp = std::get_if<TwoPointJumps>(&model.jumps);
             tp && model.sigma2 == 0.0 && model.drift == 0.0)
        L = TwoPointLagrangian{tp->alpha, tp->mass};
    pred.minimizer = solve_el_momentum(L, p, T, kappa);
    pred.leading = -pred.minimizer.G;
    pred.correction_coeff = 0.0; // the momentum-representation correction vanishes
    return pred;
}

ExpansionReport hbar_sweep(const ProblemSpec& spec, double p, double t_eval,
                           const std::vector<double>& hbars, SweepSource source,
                           const MCParams& mc) {
    if (hbars.size() < 4)
        throw ConfigError("hbar_sweep: ladder needs at least 4 values");
    for (std::size_t i = 0; i < hbars.size(); ++i) {
        if (!(hbars[i] > 0.0)) throw ConfigError("hbar_sweep: hbar must be > 0");
        if (i > 0 && hbars[i] >= hbars[i - 1])
            throw ConfigError("hbar_sweep: ladder must be strictly decreasing");
    }
    const double tau = spec.direction == TimeDirection::BackwardFromTerminal
                           ? spec.horizon - t_eval
                           : t_eval;
    if (!(tau > 0.0)) throw ConfigError("hbar_sweep: evaluation time out of range");

    ExpansionReport rep;
    rep.normalized = false;
    if (const auto* g = std::get_if<ScaledGaussianData>(&spec.data))
        rep.normalized = g->normalized;

    std::vector<double> xs, ys, ws;
    for (double hb : hbars) {
        ProblemSpec sub = spec;
        sub.model.hbar = hb;
        sub.horizon = tau;
        double value = 0.0;
        try {
            if (source == SweepSource::Pide) {
                const PideGrid grid = auto_grid(sub, p);
                const GridSolution sol = solve_pide_scaled(sub, grid);
                value = sol.at(sol.t.size() - 1, sol.space_index(p));
            } else {
                value = fk_estimate(sub, p, mc).mean;
            }
        } catch (const std::exception& e) {
            rep.complete = false;
            rep.failures.push_back("hbar = " + std::to_string(hb) + ": " + e.what());
            continue;
        }
        if (!(value > 0.0)) {
            rep.complete = false;
            rep.failures.push_back("hbar = " + std::to_string(hb) + ": nonpositive value");
            continue;
        }
        rep.hbars.push_back(hb);
        rep.values.push_back(value);
        double y = std::log(value);
        if (rep.normalized) y += 0.5 * std::log(kTwoPi * hb);
        rep.log_values.push_back(y);
        xs.push_back(1.0 / hb);
        ys.push_back(y);
        ws.push_back(1.0 / hb);
    }
    if (xs.size() >= 2) {
        double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sw += ws[i];
            swx += ws[i] * xs[i];
            swy += ws[i] * ys[i];
            swxx += ws[i] * xs[i] * xs[i];
            swxy += ws[i] * xs[i] * ys[i];
        }
        const double det = sw * swxx - swx * swx;
        const double slope = (sw * swxy - swx * swy) / det;
        const double icept = (swy - slope * swx) / sw;
        rep.fitted_action = -slope;
        rep.fitted_prefactor = std::exp(icept);
        for (std::size_t i = 0; i < xs.size(); ++i)
            rep.residuals.push_back(std::abs(ys[i] - (slope * xs[i] + icept)));
    } else {
        rep.complete = false;
    }
    if (const auto guess = predict_exponent(spec, p, t_eval, mc)) {
        rep.predicted_action = guess->action;
        rep.predicted_prefactor = guess->prefactor;
    }
    return rep;
}

std::optional<ExponentPrediction> predict_exponent(const ProblemSpec& spec, double p,
                                                   double t_eval, const MCParams& mc) {
    const double tau = spec.direction == TimeDirection::BackwardFromTerminal
                           ? spec.horizon - t_eval
                           : t_eval;
    if (!(tau > 0.0)) return std::nullopt;
    // diffusive harmonic family: quadratic rate + scaled Gaussian data
    if (std::holds_alternative<NoJumps>(spec.model.jumps) && spec.model.sigma2 > 0.0 &&
        spec.model.drift == 0.0) {
        const auto* qr = std::get_if<QuadraticRate>(&spec.rate);
        const auto* gd = std::get_if<ScaledGaussianData>(&spec.data);
        if (qr && gd && std::abs(qr->coeff - 0.5) < 1e-12 &&
            std::abs(spec.model.sigma2 - 1.0) < 1e-12) {
            Poly v;
            v.c = {0.0, 0.0, 0.5};
            const MinimizerResult min = solve_el_config(v, p, tau, gd->coeff);
            ExponentPrediction out;
            out.action = min.action;
            out.prefactor = gaussian_quadratic_functional(1.0, gd->coeff, tau);
            return out;
        }
        return std::nullopt;
    }
    // two-point jump family with U = p^2 - p and constant-exponential data
    if (const auto* tp = std::get_if<TwoPointJumps>(&spec.model.jumps);
        tp && spec.model.sigma2 == 0.0 && spec.model.drift == 0.0 &&
        std::holds_alternative<QuadraticMinusLinearRate>(spec.rate) &&
        std::holds_alternative<ConstantExpData>(spec.data) &&
        spec.direction == TimeDirection::BackwardFromTerminal) {
        const double t_start = spec.horizon - tau;
        const MinimizerResult min = solve_el_jump(tp->alpha, p, t_start);
        ExponentPrediction out;
        out.action = min.action;
        out.prefactor = jump_prefactor_mc(tp->alpha, min, t_start, mc).mean;
        return out;
    }
    return std::nullopt;
}

} // namespace lfk
