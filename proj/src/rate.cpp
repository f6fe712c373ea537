#include "lfk/rate.hpp"

#include <algorithm>
#include <cmath>

#include "lfk/errors.hpp"
#include "lfk/levy.hpp"

namespace lfk {

double rate_eval(const RateFunction& r, double p) {
    return std::visit(
        [p](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, QuadraticRate>) {
                return f.coeff * p * p;
            } else if constexpr (std::is_same_v<T, QuadraticMinusLinearRate>) {
                return p * p - p;
            } else if constexpr (std::is_same_v<T, PolynomialRate>) {
                return f.poly(p);
            } else {
                // subordinator-only; clamp so off-support probes stay finite
                return std::sqrt(std::max(0.0, p));
            }
        },
        r);
}

double rate_lower_bound(const RateFunction& r) {
    return std::visit(
        [](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, QuadraticRate>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, QuadraticMinusLinearRate>) {
                return -0.25;
            } else if constexpr (std::is_same_v<T, PolynomialRate>) {
                const int deg = f.poly.degree();
                if (deg <= 0) return deg < 0 ? 0.0 : f.poly.c[0];
                // beyond R the leading term dominates the rest, so the global
                // minimum lies in [-R, R]; locate it by scan + golden refinement
                double sum = 0.0;
                for (int i = 0; i < deg; ++i) sum += std::abs(f.poly.c[i]);
                const double R = 1.0 + sum / std::abs(f.poly.c[deg]);
                double best = f.poly(-R), best_x = -R;
                const int N = 4096;
                for (int i = 1; i <= N; ++i) {
                    const double x = -R + 2.0 * R * i / N;
                    const double v = f.poly(x);
                    if (v < best) {
                        best = v;
                        best_x = x;
                    }
                }
                double a = best_x - 2.0 * R / N, b = best_x + 2.0 * R / N;
                const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
                for (int it = 0; it < 80; ++it) {
                    const double c = b - gr * (b - a), d = a + gr * (b - a);
                    if (f.poly(c) < f.poly(d))
                        b = d;
                    else
                        a = c;
                }
                return std::min(best, f.poly(0.5 * (a + b)));
            } else {
                return 0.0; // p^{1/2} on p >= 0
            }
        },
        r);
}

void validate_rate(const RateFunction& r, const LevyModel& model) {
    if (std::holds_alternative<HalfPowerRate>(r)) {
        if (!model.is_subordinator())
            throw ConfigError("half-power rate requires a subordinator model");
        return;
    }
    if (const auto* q = std::get_if<QuadraticRate>(&r)) {
        if (q->coeff < 0.0) throw ConfigError("quadratic rate needs coeff >= 0");
        return;
    }
    if (const auto* pr = std::get_if<PolynomialRate>(&r)) {
        const int deg = pr->poly.degree();
        if (deg > 0 && (deg % 2 != 0 || pr->poly.c[deg] < 0.0))
            throw ConfigError(
                "polynomial rate must be bounded below (even degree, positive leading coefficient)");
    }
}

} // namespace lfk
