#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "lfk/levy.hpp"
#include "lfk/poly.hpp"

namespace lfk {

// cumulant-generating Hamiltonian of the triplet:
//   H0(x) = b x + sigma2 x^2/2 + \int (e^{xk} - 1) nu(dk)
// (exact for atomic measures, quadrature atoms for the gamma density)
struct Hamiltonian {
    double drift = 0.0;
    double sigma2 = 0.0;
    std::vector<std::pair<double, double>> atoms; // (k, rate)

    double operator()(double x) const;
    double d1(double x) const;
    double d2(double x) const;
};

Hamiltonian hamiltonian_h0(const LevyModel& m);

struct LegendreValue {
    double value = 0.0; // L0(u) = sup_x (x u - H0(x))
    double argmax = 0.0;
};

// closed forms for the Gaussian and symmetric two-point families
struct GaussianLagrangian {
    double sigma2 = 1.0;
};
struct TwoPointLagrangian {
    double alpha = 1.0;
    double mass = 1.0;
};
// safeguarded Newton on H0'(x) = u with automatic bracketing
struct NumericLagrangian {
    Hamiltonian h;
};

using Lagrangian = std::variant<GaussianLagrangian, TwoPointLagrangian, NumericLagrangian>;

LegendreValue legendre_l0(const Lagrangian& L, double u);
double lagrangian_d1(const Lagrangian& L, double u); // L0'(u) = argmax x
// velocity from conjugate momentum, i.e. H0'(psi); inverse of lagrangian_d1
double hamiltonian_velocity(const Lagrangian& L, double psi);

enum class BoundaryTerm { None, Half, Full, ConstantOne };

// action \int (L0(phi') + U(phi + p)) ds + boundary term, with the
// finite-difference derivative of the sampled path
double action_value(const Lagrangian& L, const Poly& rate, const std::vector<double>& s,
                    const std::vector<double>& phi, double p, BoundaryTerm bt);

struct MinimizerResult {
    std::vector<double> s;    // sample times over the interval
    std::vector<double> phi;  // minimizer, phi(0) = 0
    std::vector<double> dphi; // derivative along the path
    std::vector<double> rho;  // conjugate momentum: psi for the momentum solver,
                              // asinh(z'/alpha) for the jump solver (else empty)
    double kinetic = 0.0;     // \int L0(phi') ds
    double potential = 0.0;   // \int U(phi + p) ds
    double boundary = 0.0;    // kappa |phi(T) + p|^2 (jump solver: constant 1)
    double action = 0.0;      // kinetic + potential + boundary
    double G = 0.0;           // leading drift functional: -phi'(0) resp. -L0'(phi'(0))
    double terminal_residual = 0.0;
    int iterations = 0;
};

// Euler-Lagrange two-point problem for a quadratic kinetic term:
//   phi'' = V'(phi + q), phi(0) = 0, phi'(T) + 2 kappa (phi(T) + q) = 0
// by RK4 + secant shooting.  For quadratic V the hyperbolic closed form is
// also computed and the shooting result is checked against it.
MinimizerResult solve_el_config(const Poly& V, double q, double T, double kappa);

// closed-form minimizer for V = (w2/2) x^2 (hyperbolic ansatz)
MinimizerResult config_closed_form(double w2, double q, double T, double kappa,
                                   std::size_t samples = 1001);

// Hamiltonian form for a general convex kinetic term, quadratic potential
// x^2/2:  phi' = H0'(psi), psi' = phi + p, phi(0) = 0,
// psi(T) + 2 kappa (phi(T) + p) = 0
MinimizerResult solve_el_momentum(const Lagrangian& L, double p, double T, double kappa);

// two-point measure with U(p) = p^2 - p on [t, 1]:
//   z'' = (2(z+p) - 1) alpha sqrt(z'^2 + alpha^2), z(t) = 0, z'(1) = 0
// (z identically 0 when p = 1/2); rho = asinh(z'/alpha)
MinimizerResult solve_el_jump(double alpha, double p, double t_start);

} // namespace lfk
