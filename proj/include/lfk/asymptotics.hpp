#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lfk/pide.hpp"
#include "lfk/problem.hpp"
#include "lfk/variational.hpp"

namespace lfk {

// E[exp(-(g2/2) \int_0^tau W^2 ds - beta W_tau^2)]
//   = (cosh(g tau) + (2 beta/g) sinh(g tau))^{-1/2},  g = sqrt(g2);
// the closed-form oracle behind every Gaussian quadratic functional here
double gaussian_quadratic_functional(double g2, double beta, double tau);

enum class PrefactorDirection { Forward, Backward };

struct PrefactorValue {
    double F_closed = 0.0; // (cosh + 2 sinh)/(2 pi) evaluated per direction
    double F_ode = 0.0;    // independent RK4 integration of F'' = F
    double K = 0.0;        // (2 pi F)^{-1/2}
};

// fluctuation prefactor of the harmonic family; Forward evaluates at time t in
// [0,1] (window [t,1]), Backward at elapsed time tau >= 0
PrefactorValue prefactor_F(PrefactorDirection dir, double t);

// Monte Carlo of the same functional, E[exp(-1/2 \int_0^tau W^2 - W_tau^2)]
MCEstimate prefactor_mc(PrefactorDirection dir, double t, const MCParams& mc);

// Gaussian fluctuation factor around a config-space minimizer:
//   K0 = E[exp(-1/2 \int V''(phi*+q) W^2 ds - kappa W_T^2)]
MCEstimate gaussian_k0(const Poly& V, const MinimizerResult& min, double q,
                       double kappa, const MCParams& mc);

struct K1Report {
    double k0 = 0.0;
    double k0_stderr = 0.0;
    double k1bar = 0.0; // next-order coefficient (see drift expansion)
    double k1bar_stderr = 0.0;
    double ratio = 0.0; // k1bar / k0
};

// next-order functional: per path
//   e^{E} [ G''(W,W)/2 + G'(W) F3(W)/6 + G(phi*) F4(W)/24 + G(phi*) F3(W)^2/72 ]
// with E = -1/2 \int V'' W^2 - kappa W_T^2, F3 = -\int V''' W^3,
// F4 = -\int V'''' W^4, G'(W) = \int V'' W + W_T, G''(W,W) = \int V''' W^2.
// Exactly zero (no MC) when V''' = V'''' = 0.
K1Report gaussian_k1bar(const Poly& V, const MinimizerResult& min, double q,
                        double kappa, const MCParams& mc);

struct DriftPrediction {
    double leading = 0.0;          // -G(phi*)
    double correction_coeff = 0.0; // -k1bar/k0 (coefficient of hbar)
    MinimizerResult minimizer;
};

// semiclassical drift prediction hbar d_p log u ~ leading + hbar*correction
DriftPrediction drift_prediction_config(const Poly& V, double q, double T, double kappa,
                                        const MCParams& mc);
// momentum representation: leading term from the Hamiltonian two-point problem,
// correction identically zero
DriftPrediction drift_prediction_momentum(const LevyModel& model, double p, double T,
                                          double kappa);

// jump-case prefactor: P = E[exp(-alpha^2 \int_0^{1-t} cosh(rho(s)) W_s^2 ds)]
MCEstimate jump_prefactor_mc(double alpha, const MinimizerResult& jump_min, double t,
                             const MCParams& mc);

enum class SweepSource { Pide, MonteCarlo };

struct ExpansionReport {
    std::vector<double> hbars;
    std::vector<double> values;     // u^hbar(t, p)
    std::vector<double> log_values; // ln u, after removing the (2 pi hbar)^{-1/2}
                                    // normalization when the data carries one
    double fitted_action = 0.0;     // weighted LS fit ln u = -A/hbar + ln C
    double fitted_prefactor = 0.0;  // C
    std::optional<double> predicted_action;
    std::optional<double> predicted_prefactor;
    std::vector<double> residuals; // |ln u_i - fit_i|
    bool normalized = false;
    bool complete = true; // false if some ladder point failed to solve
    std::vector<std::string> failures;
};

// evaluates u^hbar(t_eval, p) over a strictly decreasing ladder (>= 4 values)
// and fits the exponential rate; weights scale like 1/hbar so small scales
// dominate the fit
ExpansionReport hbar_sweep(const ProblemSpec& spec, double p, double t_eval,
                           const std::vector<double>& hbars, SweepSource source,
                           const MCParams& mc);

// closed-form/variational predictions (A, C) for the two canonical families
// (diffusive harmonic; two-point jump with U = p^2 - p); nullopt otherwise
struct ExponentPrediction {
    double action = 0.0;
    double prefactor = 0.0;
};
std::optional<ExponentPrediction> predict_exponent(const ProblemSpec& spec, double p,
                                                   double t_eval, const MCParams& mc);

} // namespace lfk
