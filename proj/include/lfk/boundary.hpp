#pragma once

#include <variant>

namespace lfk {

// Initial/terminal data families.  Data that depends on the semiclassical
// scale takes hbar at evaluation time (hbar = 1 in the unscaled regime).
struct ScaledGaussianData {
    double coeff = 1.0;      // g(p) = exp(-coeff p^2 / hbar)
    bool normalized = false; // multiply by (2 pi hbar)^{-1/2}
};
struct ConstantExpData {}; // g = exp(-1/hbar)
struct OneData {};         // g = 1
// smooth rapidly-decreasing samples: g(p) = p^m exp(-a p^2)
struct SchwartzData {
    int power = 0;
    double a = 1.0;
};

using BoundaryData = std::variant<ScaledGaussianData, ConstantExpData, OneData, SchwartzData>;

double data_eval(const BoundaryData& g, double p, double hbar);
double data_log_eval(const BoundaryData& g, double p, double hbar); // -inf if g(p) == 0
// first/second derivatives in p (closed forms; used by the pointwise generator)
double data_d1(const BoundaryData& g, double p, double hbar);
double data_d2(const BoundaryData& g, double p, double hbar);

void validate_data(const BoundaryData& g);

} // namespace lfk
