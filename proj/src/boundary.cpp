#include "lfk/boundary.hpp"

#include <cmath>
#include <limits>

#include "lfk/errors.hpp"

namespace lfk {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;
}

double data_log_eval(const BoundaryData& g, double p, double hbar) {
    return std::visit(
        [p, hbar](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, ScaledGaussianData>) {
                double lg = -d.coeff * p * p / hbar;
                if (d.normalized) lg -= 0.5 * std::log(kTwoPi * hbar);
                return lg;
            } else if constexpr (std::is_same_v<T, ConstantExpData>) {
                return -1.0 / hbar;
            } else if constexpr (std::is_same_v<T, OneData>) {
                return 0.0;
            } else {
                if (d.power != 0 && p == 0.0)
                    return -std::numeric_limits<double>::infinity();
                return d.power * std::log(std::abs(p)) - d.a * p * p;
            }
        },
        g);
}

double data_eval(const BoundaryData& g, double p, double hbar) {
    if (const auto* s = std::get_if<SchwartzData>(&g)) {
        double v = std::exp(-s->a * p * p);
        for (int i = 0; i < s->power; ++i) v *= p; // keep the sign
        return v;
    }
    return std::exp(data_log_eval(g, p, hbar));
}

double data_d1(const BoundaryData& g, double p, double hbar) {
    return std::visit(
        [p, hbar, &g](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, ScaledGaussianData>) {
                return -2.0 * d.coeff * p / hbar * data_eval(g, p, hbar);
            } else if constexpr (std::is_same_v<T, SchwartzData>) {
                // (m p^{m-1} - 2 a p^{m+1}) e^{-a p^2}
                double pm1 = 1.0;
                for (int i = 0; i + 1 < d.power; ++i) pm1 *= p;
                const double pm = pm1 * (d.power > 0 ? p : 1.0);
                return (d.power * pm1 - 2.0 * d.a * pm * p) * std::exp(-d.a * p * p);
            } else {
                return 0.0;
            }
        },
        g);
}

double data_d2(const BoundaryData& g, double p, double hbar) {
    return std::visit(
        [p, hbar, &g](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, ScaledGaussianData>) {
                const double c = 2.0 * d.coeff / hbar;
                return (c * c * p * p - c) * data_eval(g, p, hbar);
            } else if constexpr (std::is_same_v<T, SchwartzData>) {
                const int m = d.power;
                const double a = d.a;
                double pm2 = 1.0;
                for (int i = 0; i + 2 < m; ++i) pm2 *= p;
                const double pm1 = pm2 * (m > 1 ? p : 1.0);
                const double pm = pm1 * (m > 0 ? p : 1.0);
                // (m(m-1)p^{m-2} - 2a(2m+1)p^m + 4a^2 p^{m+2}) e^{-a p^2}
                return (m * (m - 1) * pm2 - 2.0 * a * (2 * m + 1) * pm +
                        4.0 * a * a * pm * p * p) *
                       std::exp(-a * p * p);
            } else {
                return 0.0;
            }
        },
        g);
}

void validate_data(const BoundaryData& g) {
    if (const auto* s = std::get_if<ScaledGaussianData>(&g)) {
        if (s->coeff < 0.0) throw ConfigError("scaled gaussian data needs coeff >= 0");
    } else if (const auto* sc = std::get_if<SchwartzData>(&g)) {
        if (sc->power < 0 || sc->power > 8)
            throw ConfigError("schwartz data power must be in [0, 8]");
        if (!(sc->a > 0.0)) throw ConfigError("schwartz data needs a > 0");
    }
}

} // namespace lfk
