#include "lfk/levy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lfk/errors.hpp"
#include "lfk/parallel.hpp"

namespace lfk {

void validate_model(const LevyModel& m) {
    if (m.sigma2 < 0.0) throw ConfigError("sigma2 must be >= 0");
    if (m.hbar && !(*m.hbar > 0.0)) throw ConfigError("hbar must be > 0");
    validate_jump_measure(m.jumps);
    if (std::holds_alternative<GammaJumps>(m.jumps) && !m.is_subordinator())
        throw ConfigError("gamma measure is subordinator-only (needs drift >= 0, sigma2 = 0)");
    if (m.sigma2 == 0.0 && m.drift == 0.0 &&
        std::holds_alternative<NoJumps>(m.jumps))
        throw ConfigError("degenerate model: no diffusion, drift or jumps");
}

double characteristic_exponent(const LevyModel& m, double x) {
    double v = 0.5 * m.sigma2 * x * x;
    for (const auto& [k, w] : jump_atoms(m.jumps)) v += w * (1.0 - std::cos(x * k));
    return v;
}

GeneratorResult apply_generator(const LevyModel& m, const std::vector<double>& f,
                                const UniformGrid& grid) {
    if (f.size() != grid.n) throw ConfigError("apply_generator: f size != grid size");
    if (grid.n < 3 || !(grid.dx > 0.0)) throw ConfigError("apply_generator: bad grid");
    const double hb = m.scale();
    const double diff = 0.5 * hb * m.sigma2; // diffusion coefficient of the scaled process
    const double inv_dx = 1.0 / grid.dx;

    GeneratorResult out;
    out.values.assign(grid.n, 0.0);

    // local part: centered differences, one-sided copy of neighbors at the ends
    for (std::size_t i = 1; i + 1 < grid.n; ++i) {
        const double d2 = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv_dx * inv_dx;
        const double d1 = (f[i + 1] - f[i - 1]) * 0.5 * inv_dx;
        out.values[i] = diff * d2 + m.drift * d1;
    }
    out.values[0] = out.values[1];
    out.values[grid.n - 1] = out.values[grid.n - 2];

    auto atoms = jump_atoms(m.jumps);
    if (atoms.empty()) return out;
    const double rate_scale = 1.0 / hb;
    for (auto& [k, w] : atoms) {
        k *= hb;
        w *= rate_scale;
    }
    // f == 0 outside the grid (decay convention); flag the truncation
    auto value_at = [&](double p, bool& outside) -> double {
        const double pos = (p - grid.left) * inv_dx;
        if (pos < 0.0 || pos > static_cast<double>(grid.n - 1)) {
            outside = true;
            return 0.0;
        }
        const auto i0 = static_cast<std::size_t>(pos);
        if (i0 + 1 >= grid.n) return f[grid.n - 1];
        const double frac = pos - static_cast<double>(i0);
        return f[i0] * (1.0 - frac) + f[i0 + 1] * frac;
    };
    bool truncated = false;
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double p = grid.point(i);
        double acc = 0.0;
        for (const auto& [k, w] : atoms) acc += w * (value_at(p + k, truncated) - f[i]);
        out.values[i] += acc;
    }
    out.boundary_truncated = truncated;
    return out;
}

namespace {

struct ScaledParams {
    double drift, sig, rate; // sig = sqrt(hbar*sigma2), rate = mass/hbar
    double size_scale;       // hbar
};

ScaledParams scaled_params(const LevyModel& m) {
    const double hb = m.scale();
    return {m.drift, std::sqrt(hb * m.sigma2), jump_total_mass(m.jumps) / hb, hb};
}

} // namespace

SamplePath sample_path(const LevyModel& m, double t, double dt, double p0,
                       uint64_t seed, uint64_t stream) {
    if (!(t > 0.0) || !(dt > 0.0)) throw ConfigError("sample_path: need t > 0, dt > 0");
    validate_model(m);
    const ScaledParams sp = scaled_params(m);
    RngStream rng(seed, stream);

    SamplePath path;
    path.seed = seed;
    path.times.push_back(0.0);
    path.values.push_back(p0);

    double next_jump = sp.rate > 0.0 ? rng.exponential(sp.rate)
                                     : std::numeric_limits<double>::infinity();
    double x = p0, tc = 0.0;
    std::size_t k = 1; // next regular grid node index
    while (tc < t) {
        const double grid_t = std::min(t, static_cast<double>(k) * dt);
        const bool is_jump = next_jump <= grid_t && next_jump <= t;
        const double tn = is_jump ? next_jump : grid_t;
        const double h = tn - tc;
        double xl = x + sp.drift * h;
        if (sp.sig > 0.0 && h > 0.0) xl += sp.sig * std::sqrt(h) * rng.normal();
        if (is_jump) {
            path.jump_index.push_back(path.times.size());
            path.pre_jump.push_back(xl);
            x = xl + sp.size_scale * sample_jump_size(m.jumps, rng);
            next_jump = tn + rng.exponential(sp.rate);
        } else {
            x = xl;
            if (grid_t >= static_cast<double>(k) * dt) ++k;
        }
        if (tn > path.times.back()) {
            path.times.push_back(tn);
            path.values.push_back(x);
        } else {
            path.values.back() = x; // jump landed exactly on the last node
        }
        tc = tn;
    }
    return path;
}

SamplePath sample_scaled_brownian(double hbar, double t, double dt, uint64_t seed,
                                  uint64_t stream) {
    LevyModel m;
    m.drift = 0.0;
    m.sigma2 = 1.0;
    m.hbar = hbar;
    return sample_path(m, t, dt, 0.0, seed, stream);
}

MomentReport empirical_moments(const LevyModel& m, const std::vector<double>& t_grid,
                               int order, std::size_t n_paths, uint64_t seed) {
    if (order <= 0 || order % 2 != 0)
        throw ConfigError("empirical_moments: order must be a positive even integer");
    if (t_grid.empty()) throw ConfigError("empirical_moments: empty time grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (t_grid[i] < 0.0 || t_grid[i] > 1.0)
            throw ConfigError("empirical_moments: time grid must lie in [0,1]");
        if (i > 0 && t_grid[i] <= t_grid[i - 1])
            throw ConfigError("empirical_moments: time grid must be increasing");
    }
    validate_model(m);
    const ScaledParams sp = scaled_params(m);
    const std::size_t n_batches = (n_paths + kBatchSize - 1) / kBatchSize;
    const std::size_t nt = t_grid.size();

    std::vector<std::vector<double>> sum1(n_batches), sum2(n_batches);
    for_each_batch(n_batches, [&](std::size_t b) {
        RngStream rng(seed, b);
        const std::size_t lo = b * kBatchSize;
        const std::size_t hi = std::min(n_paths, lo + kBatchSize);
        std::vector<double> s1(nt, 0.0), s2(nt, 0.0);
        for (std::size_t i = lo; i < hi; ++i) {
            // exact increments between observation times; jumps via the
            // exponential clock inside each interval
            double x = 0.0, tc = 0.0;
            double next_jump = sp.rate > 0.0
                                   ? rng.exponential(sp.rate)
                                   : std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < nt; ++j) {
                const double tn = t_grid[j];
                while (next_jump <= tn) {
                    x += sp.size_scale * sample_jump_size(m.jumps, rng);
                    next_jump += rng.exponential(sp.rate);
                }
                const double h = tn - tc;
                if (h > 0.0) {
                    x += sp.drift * h;
                    if (sp.sig > 0.0) x += sp.sig * std::sqrt(h) * rng.normal();
                }
                tc = tn;
                const double mom = std::pow(x, order);
                s1[j] += mom;
                s2[j] += mom * mom;
            }
        }
        sum1[b] = std::move(s1);
        sum2[b] = std::move(s2);
    });

    MomentReport rep;
    rep.times = t_grid;
    rep.moment.assign(nt, 0.0);
    rep.stderrs.assign(nt, 0.0);
    const double n = static_cast<double>(n_paths);
    for (std::size_t j = 0; j < nt; ++j) {
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t b = 0; b < n_batches; ++b) {
            s1 += sum1[b][j];
            s2 += sum2[b][j];
        }
        const double mean = s1 / n;
        const double var = std::max(0.0, s2 / n - mean * mean);
        rep.moment[j] = mean;
        rep.stderrs[j] = std::sqrt(var / n);
        if (mean >= rep.sup_moment) {
            rep.sup_moment = mean;
            rep.sup_index = j;
        }
    }
    return rep;
}

double analytic_second_moment(const LevyModel& m, double t) {
    const double var_rate = m.sigma2 + jump_moment(m.jumps, 2);
    const double mean_rate = m.drift + jump_moment(m.jumps, 1);
    return t * var_rate + (t * mean_rate) * (t * mean_rate);
}

} // namespace lfk
