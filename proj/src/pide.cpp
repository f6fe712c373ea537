#include "lfk/pide.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lfk/errors.hpp"

namespace lfk {

double GridSolution::value(double time, double p) const {
    if (t.empty() || x.empty()) throw SolverError("GridSolution::value on empty slab");
    auto clamp_idx = [](double pos, std::size_t n) {
        if (pos <= 0.0) return std::pair<std::size_t, double>{0, 0.0};
        if (pos >= static_cast<double>(n - 1))
            return std::pair<std::size_t, double>{n - 2, 1.0};
        const auto i = static_cast<std::size_t>(pos);
        return std::pair<std::size_t, double>{i, pos - static_cast<double>(i)};
    };
    // time rows may be unevenly spaced (decimated storage): locate by search
    std::size_t it = 0;
    while (it + 1 < t.size() && t[it + 1] <= time) ++it;
    double wt = 0.0;
    if (it + 1 < t.size() && t[it + 1] > t[it])
        wt = std::clamp((time - t[it]) / (t[it + 1] - t[it]), 0.0, 1.0);
    const std::size_t itn = std::min(it + 1, t.size() - 1);

    const double dx = x.size() > 1 ? x[1] - x[0] : 1.0;
    const auto [ix, wx] = clamp_idx((p - x.front()) / dx, x.size());
    auto interp_row = [&](std::size_t row) {
        return at(row, ix) * (1.0 - wx) + at(row, ix + 1) * wx;
    };
    return interp_row(it) * (1.0 - wt) + interp_row(itn) * wt;
}

std::size_t GridSolution::space_index(double p) const {
    const double dx = x[1] - x[0];
    const double pos = (p - x.front()) / dx;
    const auto i = static_cast<std::size_t>(std::llround(pos));
    if (i >= x.size() || std::abs(x[i] - p) > 1e-9 * (1.0 + std::abs(p)))
        throw ResolutionError("requested point does not lie on the spatial grid");
    return i;
}

namespace {

// Thomas solve for the constant-coefficient tridiagonal (lo, di, up)
void tridiag_solve(const std::vector<double>& lo, const std::vector<double>& di,
                   const std::vector<double>& up, std::vector<double>& rhs,
                   std::vector<double>& cp, std::vector<double>& dp) {
    const std::size_t n = di.size();
    cp[0] = up[0] / di[0];
    dp[0] = rhs[0] / di[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double m = 1.0 / (di[i] - lo[i] * cp[i - 1]);
        cp[i] = up[i] * m;
        dp[i] = (rhs[i] - lo[i] * dp[i - 1]) * m;
    }
    rhs[n - 1] = dp[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = dp[i] - cp[i] * rhs[i + 1];
}

struct JumpStencil {
    // shift decomposed as integer offset + linear interpolation weight
    std::ptrdiff_t base;
    double frac;
    double rate;
};

GridSolution solve_core(const ProblemSpec& spec, const PideGrid& grid) {
    validate_problem(spec);
    if (grid.n < 5 || !(grid.L > 0.0) || !(grid.dt > 0.0))
        throw ConfigError("solve_pide: bad grid parameters");
    const std::size_t n = grid.n;
    const double dx = 2.0 * grid.L / static_cast<double>(n - 1);
    const double hb = spec.scale();
    const LevyModel& m = spec.model;

    GridSolution sol;
    sol.hbar = hb;
    sol.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) sol.x[i] = -grid.L + dx * static_cast<double>(i);

    // time grid
    const double T = spec.horizon;
    const auto n_steps = static_cast<std::size_t>(std::ceil(T / grid.dt - 1e-12));
    const double dt = T / static_cast<double>(n_steps);
    std::size_t stride = 1;
    if (grid.max_slices >= 2)
        stride = std::max<std::size_t>(1, n_steps / (grid.max_slices - 1));

    // initial data (terminal data of the reversed problem reads the same)
    std::vector<double> u(n), work(n), rhs(n), cp(n), dp(n), jump_term(n), u_pred(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = data_eval(spec.data, sol.x[i], hb);

    // dressed local operator T = diff d2 + drift d1(upwind) - U/hbar
    const double diff = 0.5 * hb * m.sigma2;
    const double r = diff / (dx * dx);
    std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0); // T coefficients
    std::vector<double> Ux(n);
    for (std::size_t i = 0; i < n; ++i) Ux[i] = rate_eval(spec.rate, sol.x[i]) / hb;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        lo[i] = r;
        up[i] = r;
        di[i] = -2.0 * r - Ux[i];
        if (m.drift > 0.0) { // u_t = b u_x + ...: information flows from the right
            up[i] += m.drift / dx;
            di[i] -= m.drift / dx;
        } else if (m.drift < 0.0) {
            lo[i] += -m.drift / dx;
            di[i] -= -m.drift / dx;
        }
    }
    // Dirichlet clamp rows
    di[0] = di[n - 1] = 1.0;

    // Crank-Nicolson matrices: (I - dt/2 T) u+ = (I + dt/2 T) u + dt * jump
    std::vector<double> Alo(n), Adi(n), Aup(n);
    for (std::size_t i = 0; i < n; ++i) {
        Alo[i] = -0.5 * dt * lo[i];
        Aup[i] = -0.5 * dt * up[i];
        Adi[i] = 1.0 - 0.5 * dt * di[i];
    }
    Adi[0] = Adi[n - 1] = 1.0;
    Alo[0] = Aup[0] = Alo[n - 1] = Aup[n - 1] = 0.0;

    // jump stencils on the scaled measure
    std::vector<JumpStencil> stencils;
    double jump_rate = 0.0;
    for (const auto& [k, w] : jump_atoms(m.jumps)) {
        JumpStencil st;
        const double shift = (hb * k) / dx;
        st.base = static_cast<std::ptrdiff_t>(std::floor(shift));
        st.frac = shift - static_cast<double>(st.base);
        if (st.frac < 1e-9 || st.frac > 1.0 - 1e-9) { // snap aligned shifts
            st.base = static_cast<std::ptrdiff_t>(std::llround(shift));
            st.frac = 0.0;
        }
        st.rate = w / hb;
        jump_rate += st.rate;
        stencils.push_back(st);
    }
    const bool has_jumps = !stencils.empty();
    if (has_jumps && dt * jump_rate > 1.0)
        throw SolverError("solve_pide: explicit jump step unstable, need dt <= " +
                          std::to_string(1.0 / jump_rate));

    auto apply_jumps = [&](const std::vector<double>& v, std::vector<double>& out) {
        std::fill(out.begin(), out.end(), 0.0);
        const auto ni = static_cast<std::ptrdiff_t>(n);
        for (const auto& st : stencils) {
            for (std::ptrdiff_t i = 1; i + 1 < ni; ++i) {
                const std::ptrdiff_t j = i + st.base;
                double shifted = 0.0;
                if (j >= 0 && j < ni) {
                    shifted = v[static_cast<std::size_t>(j)] * (1.0 - st.frac);
                    if (st.frac > 0.0 && j + 1 < ni)
                        shifted += v[static_cast<std::size_t>(j + 1)] * st.frac;
                    if (st.frac > 0.0 && j + 1 >= ni) sol.boundary_truncated = true;
                } else {
                    sol.boundary_truncated = true;
                }
                out[static_cast<std::size_t>(i)] += st.rate * (shifted - v[static_cast<std::size_t>(i)]);
            }
        }
    };

    auto apply_local_explicit = [&](const std::vector<double>& v, std::vector<double>& out) {
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i)
            out[i] = lo[i] * v[i - 1] + di[i] * v[i] + up[i] * v[i + 1];
    };

    auto store_slice = [&](double time) {
        sol.t.push_back(time);
        sol.u.insert(sol.u.end(), u.begin(), u.end());
        double mn = 0.0, mx = 0.0;
        for (double v : u) {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        if (mn < -1e-10 * std::max(1.0, mx)) sol.positive = false;
    };

    store_slice(0.0);
    const double sup0 = *std::max_element(u.begin(), u.end());
    const double umin = rate_lower_bound(spec.rate);
    std::vector<double> jmp2(n);

    for (std::size_t s = 0; s < n_steps; ++s) {
        if (has_jumps) {
            // Heun predictor-corrector in the jump term, CN in the local term
            apply_jumps(u, jump_term);
            apply_local_explicit(u, work);
            for (std::size_t i = 0; i < n; ++i)
                u_pred[i] = u[i] + dt * (work[i] + jump_term[i]);
            apply_jumps(u_pred, jmp2);
            for (std::size_t i = 0; i < n; ++i)
                rhs[i] = u[i] + 0.5 * dt * work[i] +
                         0.5 * dt * (jump_term[i] + jmp2[i]);
        } else {
            apply_local_explicit(u, work);
            for (std::size_t i = 0; i < n; ++i) rhs[i] = u[i] + 0.5 * dt * work[i];
        }
        rhs[0] = 0.0;
        rhs[n - 1] = 0.0;
        tridiag_solve(Alo, Adi, Aup, rhs, cp, dp);
        u.swap(rhs);

        // guard against blow-up (allows the legitimate growth e^{|min U| t / hbar})
        const double sup = *std::max_element(u.begin(), u.end());
        const double allowed =
            10.0 * sup0 *
            (umin < 0.0 ? std::exp(-umin * dt * static_cast<double>(s + 1) / hb) : 1.0);
        if (!std::isfinite(sup) || sup > allowed)
            throw SolverError("solve_pide: instability at dt = " + std::to_string(dt) +
                              " (step " + std::to_string(s) + ")");

        const bool last = s + 1 == n_steps;
        if (last || ((s + 1) % stride == 0 && sol.t.size() + 1 < grid.max_slices))
            store_slice(dt * static_cast<double>(s + 1));
    }
    return sol;
}

} // namespace

GridSolution solve_pide(const ProblemSpec& spec, const PideGrid& grid) {
    if (spec.model.scaled())
        throw ConfigError("solve_pide expects an unscaled model; use solve_pide_scaled");
    return solve_core(spec, grid);
}

GridSolution solve_pide_scaled(const ProblemSpec& spec, const PideGrid& grid) {
    const double hb = spec.scale();
    const double dx = 2.0 * grid.L / static_cast<double>(grid.n - 1);
    if (spec.model.sigma2 > 0.0) {
        // resolve the diffusion width sqrt(hbar)
        if (std::sqrt(hb * spec.model.sigma2) / dx < 8.0)
            throw ResolutionError("solve_pide_scaled: fewer than 8 grid points per "
                                  "sqrt(hbar) diffusion width");
    }
    if (!std::holds_alternative<GammaJumps>(spec.model.jumps)) {
        for (const auto& [k, w] : jump_atoms(spec.model.jumps)) {
            (void)w;
            const double shift = hb * std::abs(k) / dx;
            if (std::abs(shift - std::round(shift)) > 1e-9 * (1.0 + shift))
                throw ResolutionError("solve_pide_scaled: scaled atom " +
                                      std::to_string(hb * k) +
                                      " is not an integer multiple of the grid spacing");
        }
    }
    return solve_core(spec, grid);
}

PideGrid auto_grid(const ProblemSpec& spec, double eval_point) {
    const double hb = spec.scale();
    PideGrid g;
    const LevyModel& m = spec.model;
    if (m.sigma2 > 0.0) {
        const double width = std::sqrt(hb * m.sigma2 * spec.horizon);
        const double L0 = std::max(4.0, 2.0 * (std::abs(eval_point) + 6.0 * width));
        double dx = std::sqrt(hb * m.sigma2) / 24.0;
        // land the evaluation point on the grid: make dx divide it exactly
        if (eval_point != 0.0)
            dx = std::abs(eval_point) / std::ceil(std::abs(eval_point) / dx);
        const std::size_t half = static_cast<std::size_t>(std::ceil(L0 / dx));
        g.L = dx * static_cast<double>(half);
        g.n = 2 * half + 1;
        const double u_edge = rate_eval(spec.rate, g.L) / hb;
        g.dt = std::min(1e-3, 0.5 / std::max(1.0, u_edge));
    } else {
        // atom-aligned spacing; evaluation point must be commensurate
        double align = 0.0;
        for (const auto& [k, w] : jump_atoms(m.jumps))
            align = std::max(align, hb * std::abs(k));
        double dx = align;
        while (dx > 0.026) dx *= 0.5;
        if (dx == 0.0) dx = 0.01;
        const double L = std::max(4.0, std::abs(eval_point) + 3.0);
        const std::size_t half = static_cast<std::size_t>(std::round(L / dx));
        g.L = dx * static_cast<double>(half);
        g.n = 2 * half + 1;
        const double jr = jump_total_mass(m.jumps) / hb;
        g.dt = std::min(5e-4, 0.5 / std::max(1.0, jr));
    }
    return g;
}

RefineReport refine_order(const ProblemSpec& spec, double probe_t, double probe_p,
                          const std::vector<PideGrid>& ladder) {
    if (ladder.size() < 3)
        throw ConfigError("refine_order: need at least 3 grids in the ladder");
    std::vector<double> vals;
    vals.reserve(ladder.size());
    for (const auto& g : ladder) {
        const GridSolution sol =
            spec.model.scaled() ? solve_pide_scaled(spec, g) : solve_pide(spec, g);
        vals.push_back(sol.value(probe_t, probe_p));
    }
    RefineReport rep;
    // error proxy: difference against the next finer level
    for (std::size_t i = 0; i + 1 < vals.size(); ++i)
        rep.errors.push_back(std::abs(vals[i] - vals[i + 1]));
    for (std::size_t i = 0; i + 1 < rep.errors.size(); ++i) {
        if (rep.errors[i + 1] == 0.0 || rep.errors[i] <= rep.errors[i + 1])
            rep.asymptotic = false;
        rep.orders.push_back(std::log2(rep.errors[i] / std::max(1e-300, rep.errors[i + 1])));
    }
    return rep;
}

} // namespace lfk
