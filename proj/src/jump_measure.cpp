#include "lfk/jump_measure.hpp"

#include <cmath>
#include <stdexcept>

#include "lfk/errors.hpp"

namespace lfk {

namespace {

// \int_eps^K e^{-k} k^{r-1} dk for r = 0,1,2,...  (r = 0 via expint)
double gamma_partial_moment(const GammaJumps& g, int r) {
    if (r == 0) {
        // E1(x) = -Ei(-x)
        return -std::expint(-g.eps) + std::expint(-g.cutoff);
    }
    // reduction: \int e^{-k} k^{n} dk = -e^{-k} k^n + n \int e^{-k} k^{n-1}
    auto upper_incomplete = [](int n, double a, double b) {
        // \int_a^b e^{-k} k^n dk by the recursion above
        double lo = std::exp(-a), hi = std::exp(-b); // n = 0 case
        double val = lo - hi;
        for (int m = 1; m <= n; ++m)
            val = std::exp(-a) * std::pow(a, m) - std::exp(-b) * std::pow(b, m) +
                  static_cast<double>(m) * val;
        return val;
    };
    return upper_incomplete(r - 1, g.eps, g.cutoff);
}

} // namespace

double jump_total_mass(const JumpMeasure& m) {
    return jump_moment(m, 0);
}

double jump_moment(const JumpMeasure& m, int r) {
    return std::visit(
        [r](const auto& j) -> double {
            using T = std::decay_t<decltype(j)>;
            if constexpr (std::is_same_v<T, NoJumps>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, TwoPointJumps>) {
                if (r % 2 == 1) return 0.0;
                return j.mass * std::pow(j.alpha, r);
            } else if constexpr (std::is_same_v<T, AtomicJumps>) {
                double acc = 0.0;
                for (const auto& [k, w] : j.atoms) acc += w * std::pow(k, r);
                return acc;
            } else {
                return gamma_partial_moment(j, r);
            }
        },
        m);
}

bool jump_is_symmetric(const JumpMeasure& m) {
    return std::visit(
        [](const auto& j) -> bool {
            using T = std::decay_t<decltype(j)>;
            if constexpr (std::is_same_v<T, NoJumps>) {
                return true;
            } else if constexpr (std::is_same_v<T, TwoPointJumps>) {
                return true;
            } else if constexpr (std::is_same_v<T, AtomicJumps>) {
                // symmetric iff every atom has a mirror with the same rate
                for (const auto& [k, w] : j.atoms) {
                    double mirror = 0.0;
                    for (const auto& [k2, w2] : j.atoms)
                        if (std::abs(k2 + k) < 1e-14 * (1.0 + std::abs(k))) mirror += w2;
                    if (std::abs(mirror - w) > 1e-12 * (1.0 + w)) return false;
                }
                return true;
            } else {
                return false;
            }
        },
        m);
}

bool jump_positive_support(const JumpMeasure& m) {
    return std::visit(
        [](const auto& j) -> bool {
            using T = std::decay_t<decltype(j)>;
            if constexpr (std::is_same_v<T, NoJumps>) {
                return true;
            } else if constexpr (std::is_same_v<T, TwoPointJumps>) {
                return false;
            } else if constexpr (std::is_same_v<T, AtomicJumps>) {
                for (const auto& [k, w] : j.atoms)
                    if (k <= 0.0 && w > 0.0) return false;
                return true;
            } else {
                return true;
            }
        },
        m);
}

std::vector<std::pair<double, double>> jump_atoms(const JumpMeasure& m) {
    return std::visit(
        [](const auto& j) -> std::vector<std::pair<double, double>> {
            using T = std::decay_t<decltype(j)>;
            if constexpr (std::is_same_v<T, NoJumps>) {
                return {};
            } else if constexpr (std::is_same_v<T, TwoPointJumps>) {
                return {{j.alpha, 0.5 * j.mass}, {-j.alpha, 0.5 * j.mass}};
            } else if constexpr (std::is_same_v<T, AtomicJumps>) {
                return j.atoms;
            } else {
                // composite midpoint on log-spaced cells of [eps, cutoff]
                std::vector<std::pair<double, double>> atoms;
                atoms.reserve(static_cast<std::size_t>(j.quad_nodes));
                const double ratio = std::log(j.cutoff / j.eps) /
                                     static_cast<double>(j.quad_nodes);
                double lo = j.eps;
                for (int c = 0; c < j.quad_nodes; ++c) {
                    const double hi = j.eps * std::exp(ratio * (c + 1));
                    const double mid = std::sqrt(lo * hi);
                    atoms.emplace_back(mid, (hi - lo) * std::exp(-mid) / mid);
                    lo = hi;
                }
                return atoms;
            }
        },
        m);
}

double sample_jump_size(const JumpMeasure& m, RngStream& rng) {
    return std::visit(
        [&rng](const auto& j) -> double {
            using T = std::decay_t<decltype(j)>;
            if constexpr (std::is_same_v<T, NoJumps>) {
                throw SolverError("sample_jump_size: measure has no jumps");
            } else if constexpr (std::is_same_v<T, TwoPointJumps>) {
                return rng.uniform() < 0.5 ? j.alpha : -j.alpha;
            } else if constexpr (std::is_same_v<T, AtomicJumps>) {
                double total = 0.0;
                for (const auto& [k, w] : j.atoms) total += w;
                double u = rng.uniform() * total;
                for (const auto& [k, w] : j.atoms) {
                    if (u < w) return k;
                    u -= w;
                }
                return j.atoms.back().first;
            } else {
                // exact rejection for e^{-k}/k on [eps, cutoff]:
                // proposal dk/k (log-uniform), acceptance e^{-(k-eps)}
                const double lr = std::log(j.cutoff / j.eps);
                for (;;) {
                    const double k = j.eps * std::exp(lr * rng.uniform());
                    if (rng.uniform() <= std::exp(-(k - j.eps))) return k;
                }
            }
        },
        m);
}

void validate_jump_measure(const JumpMeasure& m) {
    std::visit(
        [](const auto& j) {
            using T = std::decay_t<decltype(j)>;
            if constexpr (std::is_same_v<T, TwoPointJumps>) {
                if (j.alpha <= 0.0 || j.mass <= 0.0)
                    throw ConfigError("two-point measure needs alpha > 0, mass > 0");
            } else if constexpr (std::is_same_v<T, AtomicJumps>) {
                if (j.atoms.empty()) throw ConfigError("atomic measure needs atoms");
                for (const auto& [k, w] : j.atoms) {
                    if (w < 0.0) throw ConfigError("atomic measure: negative rate");
                    if (k == 0.0) throw ConfigError("atomic measure: zero-size atom");
                }
            } else if constexpr (std::is_same_v<T, GammaJumps>) {
                if (!(j.eps > 0.0) || !(j.cutoff > j.eps))
                    throw ConfigError("gamma measure needs 0 < eps < cutoff");
                if (j.quad_nodes < 8)
                    throw ConfigError("gamma measure: too few quadrature nodes");
            }
        },
        m);
}

} // namespace lfk
