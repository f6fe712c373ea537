#pragma once

#include <cmath>
#include <variant>

#include "lfk/poly.hpp"

namespace lfk {

struct LevyModel; // fwd

// Killing/potential rate families.  All supported rates are bounded below;
// validation rejects anything that could drive exp(-hbar^{-1} \int U) to
// overflow.
struct QuadraticRate {
    double coeff = 0.5; // U(p) = coeff * p^2
};
struct QuadraticMinusLinearRate {}; // U(p) = p^2 - p
struct PolynomialRate {
    Poly poly; // ascending coefficients
};
struct HalfPowerRate {}; // U(p) = p^{1/2}, subordinator models only

using RateFunction =
    std::variant<QuadraticRate, QuadraticMinusLinearRate, PolynomialRate, HalfPowerRate>;

double rate_eval(const RateFunction& r, double p);
// finite lower bound of U over the real line (exact for the supported families)
double rate_lower_bound(const RateFunction& r);
// throws ConfigError on unbounded-below polynomials or HalfPower with a
// non-subordinator model
void validate_rate(const RateFunction& r, const LevyModel& model);

} // namespace lfk
