#include "lfk/variational.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lfk/errors.hpp"

namespace lfk {

namespace {
constexpr double kExpGuard = 690.0; // exp beyond this overflows double
}

double Hamiltonian::operator()(double x) const {
    double v = drift * x + 0.5 * sigma2 * x * x;
    for (const auto& [k, w] : atoms) {
        const double e = x * k;
        if (e > kExpGuard) throw SolverError("hamiltonian: exponent overflow");
        v += w * std::expm1(e);
    }
    return v;
}

double Hamiltonian::d1(double x) const {
    double v = drift + sigma2 * x;
    for (const auto& [k, w] : atoms) {
        const double e = x * k;
        if (e > kExpGuard) throw SolverError("hamiltonian: exponent overflow");
        v += w * k * std::exp(e);
    }
    return v;
}

double Hamiltonian::d2(double x) const {
    double v = sigma2;
    for (const auto& [k, w] : atoms) {
        const double e = x * k;
        if (e > kExpGuard) throw SolverError("hamiltonian: exponent overflow");
        v += w * k * k * std::exp(e);
    }
    return v;
}

Hamiltonian hamiltonian_h0(const LevyModel& m) {
    validate_model(m);
    Hamiltonian h;
    h.drift = m.drift;
    h.sigma2 = m.sigma2;
    h.atoms = jump_atoms(m.jumps);
    return h;
}

namespace {

// solve H0'(x) = u by bracketed Newton
double invert_d1(const Hamiltonian& h, double u) {
    double lo = -1.0, hi = 1.0;
    int guard = 0;
    while (h.d1(lo) > u) {
        lo *= 2.0;
        // one-sided measures have inf H0' = drift: u below that is unreachable
        if (++guard > 60) throw SolverError("legendre: u below the range of H0'");
    }
    guard = 0;
    while (h.d1(hi) < u) {
        hi *= 2.0;
        if (++guard > 60) throw SolverError("legendre: u above the range of H0'");
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = h.d1(x) - u;
        if (std::abs(f) <= 1e-13 * (1.0 + std::abs(u))) return x;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        const double d = h.d2(x);
        double xn = d > 0.0 ? x - f / d : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (xn == x) return x;
        x = xn;
    }
    return x;
}

} // namespace

LegendreValue legendre_l0(const Lagrangian& L, double u) {
    return std::visit(
        [u](const auto& l) -> LegendreValue {
            using T = std::decay_t<decltype(l)>;
            LegendreValue out;
            if constexpr (std::is_same_v<T, GaussianLagrangian>) {
                if (!(l.sigma2 > 0.0)) throw ConfigError("gaussian lagrangian: sigma2 <= 0");
                out.argmax = u / l.sigma2;
                out.value = 0.5 * u * u / l.sigma2;
            } else if constexpr (std::is_same_v<T, TwoPointLagrangian>) {
                const double ma = l.mass * l.alpha;
                const double ua = u / l.alpha;
                out.argmax = std::asinh(u / ma) / l.alpha;
                out.value = ua * std::asinh(u / ma) + l.mass -
                            std::sqrt(l.mass * l.mass + ua * ua);
            } else {
                out.argmax = invert_d1(l.h, u);
                out.value = out.argmax * u - l.h(out.argmax);
            }
            return out;
        },
        L);
}

double lagrangian_d1(const Lagrangian& L, double u) { return legendre_l0(L, u).argmax; }

double hamiltonian_velocity(const Lagrangian& L, double psi) {
    return std::visit(
        [psi](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, GaussianLagrangian>) {
                return l.sigma2 * psi;
            } else if constexpr (std::is_same_v<T, TwoPointLagrangian>) {
                return l.mass * l.alpha * std::sinh(l.alpha * psi);
            } else {
                return l.h.d1(psi);
            }
        },
        L);
}

double action_value(const Lagrangian& L, const Poly& rate, const std::vector<double>& s,
                    const std::vector<double>& phi, double p, BoundaryTerm bt) {
    const std::size_t n = s.size();
    if (n < 2 || phi.size() != n) throw ConfigError("action_value: bad path");
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0)
            d[i] = (phi[1] - phi[0]) / (s[1] - s[0]);
        else if (i + 1 == n)
            d[i] = (phi[n - 1] - phi[n - 2]) / (s[n - 1] - s[n - 2]);
        else
            d[i] = (phi[i + 1] - phi[i - 1]) / (s[i + 1] - s[i - 1]);
    }
    double acc = 0.0;
    double prev = legendre_l0(L, d[0]).value + rate(phi[0] + p);
    for (std::size_t i = 1; i < n; ++i) {
        const double cur = legendre_l0(L, d[i]).value + rate(phi[i] + p);
        acc += 0.5 * (s[i] - s[i - 1]) * (prev + cur);
        prev = cur;
    }
    const double endv = phi.back() + p;
    switch (bt) {
        case BoundaryTerm::None: break;
        case BoundaryTerm::Half: acc += 0.5 * endv * endv; break;
        case BoundaryTerm::Full: acc += endv * endv; break;
        case BoundaryTerm::ConstantOne: acc += 1.0; break;
    }
    return acc;
}

namespace {

constexpr std::size_t kOdeSteps = 10000;
constexpr std::size_t kStoreStride = 10;

// generic RK4 shooting for phi'' = force(phi), phi(0) = 0, phi'(0) = slope;
// returns (phi(T), phi'(T)) and optionally records the trajectory
template <typename Force>
std::pair<double, double> integrate2(const Force& force, double T, double slope,
                                     MinimizerResult* rec = nullptr) {
    const double h = T / static_cast<double>(kOdeSteps);
    double y = 0.0, v = slope;
    if (rec) {
        rec->s.clear();
        rec->phi.clear();
        rec->dphi.clear();
        rec->s.push_back(0.0);
        rec->phi.push_back(y);
        rec->dphi.push_back(v);
    }
    for (std::size_t i = 0; i < kOdeSteps; ++i) {
        const double k1y = v, k1v = force(y);
        const double k2y = v + 0.5 * h * k1v, k2v = force(y + 0.5 * h * k1y);
        const double k3y = v + 0.5 * h * k2v, k3v = force(y + 0.5 * h * k2y);
        const double k4y = v + h * k3v, k4v = force(y + h * k3y);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (!std::isfinite(y) || !std::isfinite(v))
            throw SolverError("shooting: trajectory diverged");
        if (rec && ((i + 1) % kStoreStride == 0 || i + 1 == kOdeSteps)) {
            rec->s.push_back(h * static_cast<double>(i + 1));
            rec->phi.push_back(y);
            rec->dphi.push_back(v);
        }
    }
    return {y, v};
}

// secant iteration on residual(slope) with bracket-scan fallback
template <typename Residual>
std::pair<double, int> shoot(const Residual& residual, double s0, double s1, double scale) {
    const double tol = 1e-11 * (1.0 + scale);
    double r0 = residual(s0), r1 = residual(s1);
    int iters = 0;
    for (; iters < 80; ++iters) {
        if (std::abs(r1) <= tol) return {s1, iters};
        const double denom = r1 - r0;
        double s2 = denom != 0.0 ? s1 - r1 * (s1 - s0) / denom : s1 + 0.1;
        if (!std::isfinite(s2)) break;
        s0 = s1;
        r0 = r1;
        s1 = s2;
        try {
            r1 = residual(s1);
        } catch (const SolverError&) {
            break; // diverged trajectory: fall through to the bracket scan
        }
    }
    // bracket scan
    const double R = 16.0 * (1.0 + scale);
    const int N = 256;
    double prev_s = -R, prev_r;
    try {
        prev_r = residual(prev_s);
    } catch (const SolverError&) {
        prev_r = std::nan("");
    }
    for (int i = 1; i <= N; ++i) {
        const double cur_s = -R + 2.0 * R * i / N;
        double cur_r;
        try {
            cur_r = residual(cur_s);
        } catch (const SolverError&) {
            prev_r = std::nan("");
            continue;
        }
        if (std::isfinite(prev_r) && prev_r * cur_r <= 0.0) {
            double a = prev_s, ra = prev_r, b = cur_s;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                const double rm = residual(mid);
                if (std::abs(rm) <= tol) return {mid, iters + it};
                if (ra * rm <= 0.0)
                    b = mid;
                else {
                    a = mid;
                    ra = rm;
                }
            }
            return {0.5 * (a + b), iters + 200};
        }
        prev_s = cur_s;
        prev_r = cur_r;
    }
    throw SolverError("shooting: no root found (residual at 0: " +
                      std::to_string(residual(0.0)) + ")");
}

double quadratic_slope(double w2, double q, double T, double kappa) {
    const double w = std::sqrt(std::max(w2, 1e-16));
    const double ch = std::cosh(w * T), sh = std::sinh(w * T);
    return -q * w * (w * sh + 2.0 * kappa * ch) / (w * ch + 2.0 * kappa * sh);
}

} // namespace

MinimizerResult config_closed_form(double w2, double q, double T, double kappa,
                                   std::size_t samples) {
    if (!(T > 0.0) || samples < 2) throw ConfigError("config_closed_form: bad arguments");
    const double w = std::sqrt(std::max(w2, 1e-16));
    const double C = quadratic_slope(w2, q, T, kappa) / w;
    MinimizerResult res;
    res.s.resize(samples);
    res.phi.resize(samples);
    res.dphi.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double s = T * static_cast<double>(i) / static_cast<double>(samples - 1);
        const double y = q * std::cosh(w * s) + C * std::sinh(w * s);
        res.s[i] = s;
        res.phi[i] = y - q;
        res.dphi[i] = w * (q * std::sinh(w * s) + C * std::cosh(w * s));
    }
    // energy identity: int (y'^2 + w^2 y^2)/2 = [y y']/2
    const double yT = res.phi.back() + q;
    const double vT = res.dphi.back();
    const double total = 0.5 * (yT * vT - q * res.dphi.front());
    double kin = 0.0;
    for (std::size_t i = 1; i < samples; ++i)
        kin += 0.5 * (res.s[i] - res.s[i - 1]) * 0.5 *
               (res.dphi[i] * res.dphi[i] + res.dphi[i - 1] * res.dphi[i - 1]);
    res.kinetic = kin;
    res.potential = total - kin;
    res.boundary = kappa * yT * yT;
    res.action = total + res.boundary;
    res.G = -res.dphi.front();
    res.terminal_residual = std::abs(vT + 2.0 * kappa * yT);
    return res;
}

MinimizerResult solve_el_config(const Poly& V, double q, double T, double kappa) {
    if (!(T > 0.0)) throw ConfigError("solve_el_config: T must be > 0");
    if (!(kappa >= 0.0)) throw ConfigError("solve_el_config: kappa must be >= 0");
    const Poly V1 = V.derivative();
    const Poly V2 = V1.derivative();
    auto force = [&](double phi) { return V1(phi + q); };
    auto residual = [&](double slope) {
        const auto [yT, vT] = integrate2(force, T, slope);
        return vT + 2.0 * kappa * (yT + q);
    };
    const double guess = quadratic_slope(std::max(V2(q), 0.0), q, T, kappa);
    const auto [slope, iters] = shoot(residual, guess, guess + 0.1 * (1.0 + std::abs(q)),
                                      std::abs(q));

    MinimizerResult res;
    const auto [yT, vT] = integrate2(force, T, slope, &res);
    res.iterations = iters;
    res.terminal_residual = std::abs(vT + 2.0 * kappa * (yT + q));
    const double endv = yT + q;
    res.boundary = kappa * endv * endv;
    double kin = 0.0, pot = 0.0;
    for (std::size_t i = 1; i < res.s.size(); ++i) {
        const double h = res.s[i] - res.s[i - 1];
        kin += 0.5 * h * 0.5 * (res.dphi[i] * res.dphi[i] + res.dphi[i - 1] * res.dphi[i - 1]);
        pot += 0.5 * h * (V(res.phi[i] + q) + V(res.phi[i - 1] + q));
    }
    res.kinetic = kin;
    res.potential = pot;
    res.action = kin + pot + res.boundary;
    res.G = -res.dphi.front();

    // quadratic potentials admit the hyperbolic closed form; cross-check
    const int deg = V.degree();
    const bool pure_quadratic =
        deg <= 2 && (V.c.size() < 2 || V.c[1] == 0.0);
    if (pure_quadratic) {
        const double w2 = deg == 2 ? 2.0 * V.c[2] : 0.0;
        const double exact = quadratic_slope(w2, q, T, kappa);
        if (std::abs(slope - exact) > 1e-7 * (1.0 + std::abs(exact)))
            throw SolverError("solve_el_config: shooting disagrees with the closed form");
    }
    return res;
}

MinimizerResult solve_el_momentum(const Lagrangian& L, double p, double T, double kappa) {
    if (!(T > 0.0)) throw ConfigError("solve_el_momentum: T must be > 0");
    const double h = T / static_cast<double>(kOdeSteps);
    // Hamiltonian system phi' = H0'(psi), psi' = phi + p
    auto integrate = [&](double psi0, MinimizerResult* rec) {
        double phi = 0.0, psi = psi0;
        if (rec) {
            rec->s.assign(1, 0.0);
            rec->phi.assign(1, 0.0);
            rec->dphi.assign(1, hamiltonian_velocity(L, psi0));
            rec->rho.assign(1, psi0);
        }
        for (std::size_t i = 0; i < kOdeSteps; ++i) {
            auto f = [&](double ph, double ps) {
                return std::pair<double, double>{hamiltonian_velocity(L, ps), ph + p};
            };
            const auto [k1p, k1s] = f(phi, psi);
            const auto [k2p, k2s] = f(phi + 0.5 * h * k1p, psi + 0.5 * h * k1s);
            const auto [k3p, k3s] = f(phi + 0.5 * h * k2p, psi + 0.5 * h * k2s);
            const auto [k4p, k4s] = f(phi + h * k3p, psi + h * k3s);
            phi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            psi += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
            if (!std::isfinite(phi) || !std::isfinite(psi))
                throw SolverError("shooting: trajectory diverged");
            if (rec && ((i + 1) % kStoreStride == 0 || i + 1 == kOdeSteps)) {
                rec->s.push_back(h * static_cast<double>(i + 1));
                rec->phi.push_back(phi);
                rec->dphi.push_back(hamiltonian_velocity(L, psi));
                rec->rho.push_back(psi);
            }
        }
        return std::pair<double, double>{phi, psi};
    };
    auto residual = [&](double psi0) {
        const auto [phiT, psiT] = integrate(psi0, nullptr);
        return psiT + 2.0 * kappa * (phiT + p);
    };
    // warm start: Gaussian-equivalent curvature H0''(0)
    double sig_eff = 1.0;
    std::visit(
        [&](const auto& l) {
            using T2 = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T2, GaussianLagrangian>)
                sig_eff = l.sigma2;
            else if constexpr (std::is_same_v<T2, TwoPointLagrangian>)
                sig_eff = l.mass * l.alpha * l.alpha;
            else
                sig_eff = l.h.d2(0.0);
        },
        L);
    const double guess = quadratic_slope(sig_eff, p, T, kappa) / std::max(sig_eff, 1e-12);
    const auto [psi0, iters] =
        shoot(residual, guess, guess + 0.1 * (1.0 + std::abs(p)), std::abs(p));

    MinimizerResult res;
    const auto [phiT, psiT] = integrate(psi0, &res);
    res.iterations = iters;
    res.terminal_residual = std::abs(psiT + 2.0 * kappa * (phiT + p));
    const double endv = phiT + p;
    res.boundary = kappa * endv * endv;
    double kin = 0.0, pot = 0.0;
    for (std::size_t i = 1; i < res.s.size(); ++i) {
        const double hh = res.s[i] - res.s[i - 1];
        // L0(phi') = psi phi' - H0(psi) along the extremal (Fenchel equality)
        auto l0 = [&](std::size_t j) {
            return std::visit(
                [&](const auto& l) -> double {
                    using T2 = std::decay_t<decltype(l)>;
                    const double ps = res.rho[j];
                    if constexpr (std::is_same_v<T2, GaussianLagrangian>) {
                        return ps * res.dphi[j] - 0.5 * l.sigma2 * ps * ps;
                    } else if constexpr (std::is_same_v<T2, TwoPointLagrangian>) {
                        return ps * res.dphi[j] -
                               l.mass * (std::cosh(l.alpha * ps) - 1.0);
                    } else {
                        return ps * res.dphi[j] - l.h(ps);
                    }
                },
                L);
        };
        auto u2 = [&](std::size_t j) {
            const double y = res.phi[j] + p;
            return 0.5 * y * y;
        };
        kin += 0.5 * hh * (l0(i) + l0(i - 1));
        pot += 0.5 * hh * (u2(i) + u2(i - 1));
    }
    res.kinetic = kin;
    res.potential = pot;
    res.action = kin + pot + res.boundary;
    res.G = -res.rho.front(); // -L0'(phi'(0)) = -psi(0)
    return res;
}

MinimizerResult solve_el_jump(double alpha, double p, double t_start) {
    if (!(alpha > 0.0)) throw ConfigError("solve_el_jump: alpha must be > 0");
    if (!(t_start >= 0.0 && t_start < 1.0))
        throw ConfigError("solve_el_jump: start time must lie in [0, 1)");
    const double Tlen = 1.0 - t_start;
    // z'' = U'(z+p) alpha sqrt(z'^2 + alpha^2) with U = x^2 - x
    auto force_v = [alpha, p](double z, double v) {
        return (2.0 * (z + p) - 1.0) * alpha * std::sqrt(v * v + alpha * alpha);
    };
    const double h = Tlen / static_cast<double>(kOdeSteps);
    auto integrate = [&](double v0, MinimizerResult* rec) {
        double z = 0.0, v = v0;
        if (rec) {
            rec->s.assign(1, t_start);
            rec->phi.assign(1, 0.0);
            rec->dphi.assign(1, v0);
            rec->rho.assign(1, std::asinh(v0 / alpha));
        }
        for (std::size_t i = 0; i < kOdeSteps; ++i) {
            const double k1z = v, k1v = force_v(z, v);
            const double k2z = v + 0.5 * h * k1v, k2v = force_v(z + 0.5 * h * k1z, v + 0.5 * h * k1v);
            const double k3z = v + 0.5 * h * k2v, k3v = force_v(z + 0.5 * h * k2z, v + 0.5 * h * k2v);
            const double k4z = v + h * k3v, k4v = force_v(z + h * k3z, v + h * k3v);
            z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            if (!std::isfinite(z) || !std::isfinite(v) || std::abs(v) > 1e12)
                throw SolverError("shooting: trajectory diverged");
            if (rec && ((i + 1) % kStoreStride == 0 || i + 1 == kOdeSteps)) {
                rec->s.push_back(t_start + h * static_cast<double>(i + 1));
                rec->phi.push_back(z);
                rec->dphi.push_back(v);
                rec->rho.push_back(std::asinh(v / alpha));
            }
        }
        return std::pair<double, double>{z, v};
    };
    auto residual = [&](double v0) { return integrate(v0, nullptr).second; };
    const auto [v0, iters] = shoot(residual, 0.0, 0.1, std::abs(p) + alpha);

    MinimizerResult res;
    const auto [zT, vT] = integrate(v0, &res);
    (void)zT;
    res.iterations = iters;
    res.terminal_residual = std::abs(vT);
    res.boundary = 1.0; // data exp(-1/hbar) contributes hbar * (1/hbar)
    double kin = 0.0, pot = 0.0;
    for (std::size_t i = 1; i < res.s.size(); ++i) {
        const double hh = res.s[i] - res.s[i - 1];
        auto l0 = [&](std::size_t j) {
            const double u = res.dphi[j] / alpha;
            return u * std::asinh(res.dphi[j] / alpha) + 1.0 -
                   std::sqrt(1.0 + u * u);
        };
        auto uj = [&](std::size_t j) {
            const double y = res.phi[j] + p;
            return y * y - y;
        };
        kin += 0.5 * hh * (l0(i) + l0(i - 1));
        pot += 0.5 * hh * (uj(i) + uj(i - 1));
    }
    res.kinetic = kin;
    res.potential = pot;
    res.action = kin + pot + res.boundary;
    res.G = -std::asinh(v0 / alpha) / alpha;
    return res;
}

} // namespace lfk
