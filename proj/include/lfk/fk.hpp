#pragma once

#include "lfk/problem.hpp"

namespace lfk {

// E[ g(xi_t) exp(-hbar^{-1} \int_0^t U(xi_s) ds) | xi_0 = p ] over the
// problem's horizon.  Path weights are aggregated in log space (max-shifted
// log-sum-exp); batches use per-batch substreams and reduce in batch order.
MCEstimate fk_estimate(const ProblemSpec& spec, double p, const MCParams& mc);

// (A - U/hbar) g at a single point, using the closed-form data derivatives for
// the local part and the measure atoms for the nonlocal part
double dressed_generator(const ProblemSpec& spec, double x);

struct ResidualEstimate {
    double lhs = 0.0;      // T_t g(x) - g(x)
    double rhs = 0.0;      // \int_0^t T_s (A g - U g)(x) ds by Simpson quadrature
    double residual = 0.0; // |lhs - rhs|
    double stderr_ = 0.0;  // combined MC uncertainty of both sides
};

// Checks the semigroup identity T_t g - g = \int_0^t T_s (A - U) g ds by
// independent Monte Carlo runs for the two sides; the quadrature nodes of the
// right side share one path ensemble.  quad_points must be odd and >= 3.
ResidualEstimate semigroup_residual(const ProblemSpec& spec, double x, double t,
                                    int quad_points, const MCParams& mc);

struct DriftEstimate {
    double value = 0.0;   // hbar * (u(p+dp) - u(p-dp)) / (2 dp u(p))
    double stderr_ = 0.0; // batch jackknife
    MCEstimate center;
};

// Logarithmic gradient hbar * d_p log u at p by central differences with
// common random numbers: the three start points share every increment.
DriftEstimate drift_estimate(const ProblemSpec& spec, double t, double p, double dp,
                             const MCParams& mc);

} // namespace lfk
