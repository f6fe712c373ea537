#include "lfk/fk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lfk/errors.hpp"
#include "lfk/parallel.hpp"

namespace lfk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double reval(const QuadraticRate& f, double x) { return f.coeff * x * x; }
inline double reval(const QuadraticMinusLinearRate&, double x) { return x * x - x; }
inline double reval(const PolynomialRate& f, double x) { return f.poly(x); }
inline double reval(const HalfPowerRate&, double x) { return std::sqrt(std::max(0.0, x)); }

struct PathParams {
    double drift, sig, rate, size_scale, inv_hbar;
    bool pure_jump; // constant between jumps: the rate integral is exact on jump nodes
};

PathParams path_params(const LevyModel& m) {
    const double hb = m.scale();
    PathParams pp;
    pp.drift = m.drift;
    pp.sig = std::sqrt(hb * m.sigma2);
    pp.rate = jump_total_mass(m.jumps) / hb;
    pp.size_scale = hb;
    pp.inv_hbar = 1.0 / hb;
    pp.pure_jump = m.sigma2 == 0.0 && m.drift == 0.0 && pp.rate > 0.0;
    return pp;
}

// One path over [0, T] started at p + offsets[o]; all offsets share every
// increment (common random numbers).  On return I[o] holds \int_0^T U(xi + off)
// and xT the shared terminal point (without offset).
template <typename RateF, std::size_t NOff>
inline void walk_path(const RateF& rf, const PathParams& pp, const JumpMeasure& jm,
                      double p, const double (&off)[NOff], double T, double dt,
                      RngStream& rng, double (&I)[NOff], double& xT) {
    double x = p, tc = 0.0;
    double uprev[NOff];
    for (std::size_t o = 0; o < NOff; ++o) {
        I[o] = 0.0;
        uprev[o] = reval(rf, x + off[o]);
    }
    double next_jump = pp.rate > 0.0 ? rng.exponential(pp.rate) : kInf;
    if (pp.pure_jump) {
        // piecewise constant path: rectangle rule is exact
        while (next_jump < T) {
            const double h = next_jump - tc;
            for (std::size_t o = 0; o < NOff; ++o) I[o] += h * uprev[o];
            x += pp.size_scale * sample_jump_size(jm, rng);
            for (std::size_t o = 0; o < NOff; ++o) uprev[o] = reval(rf, x + off[o]);
            tc = next_jump;
            next_jump += rng.exponential(pp.rate);
        }
        const double h = T - tc;
        for (std::size_t o = 0; o < NOff; ++o) I[o] += h * uprev[o];
        xT = x;
        return;
    }
    std::size_t k = 1;
    while (tc < T) {
        const double grid_t = std::min(T, static_cast<double>(k) * dt);
        const bool is_jump = next_jump <= grid_t && next_jump <= T;
        const double tn = is_jump ? next_jump : grid_t;
        const double h = tn - tc;
        double xl = x + pp.drift * h;
        if (pp.sig > 0.0 && h > 0.0) xl += pp.sig * std::sqrt(h) * rng.normal();
        for (std::size_t o = 0; o < NOff; ++o) {
            const double ul = reval(rf, xl + off[o]); // left limit at tn
            I[o] += 0.5 * h * (uprev[o] + ul);
            uprev[o] = ul;
        }
        if (is_jump) {
            x = xl + pp.size_scale * sample_jump_size(jm, rng);
            for (std::size_t o = 0; o < NOff; ++o) uprev[o] = reval(rf, x + off[o]);
            next_jump = tn + rng.exponential(pp.rate);
        } else {
            x = xl;
            if (grid_t >= static_cast<double>(k) * dt) ++k;
        }
        tc = tn;
    }
    xT = x;
}

struct LseAcc { // max-shifted accumulator for sum of exp(lw) and exp(2 lw)
    double m = -kInf;
    double s1 = 0.0, s2 = 0.0;
    std::size_t n = 0;

    void add(double lw) {
        ++n;
        if (lw == -kInf) return;
        if (lw > m) {
            if (m != -kInf) {
                const double sc = std::exp(m - lw);
                s1 *= sc;
                s2 *= sc * sc;
            }
            m = lw;
        }
        const double e = std::exp(lw - m);
        s1 += e;
        s2 += e * e;
    }
};

struct LseTotal {
    double mean = 0.0, var = 0.0;
};

LseTotal combine(const std::vector<LseAcc>& batches) {
    double M = -kInf;
    std::size_t n = 0;
    for (const auto& b : batches) {
        M = std::max(M, b.m);
        n += b.n;
    }
    LseTotal tot;
    if (M == -kInf || n == 0) return tot;
    double S1 = 0.0, S2 = 0.0;
    for (const auto& b : batches) {
        if (b.m == -kInf) continue;
        const double sc = std::exp(b.m - M);
        S1 += b.s1 * sc;
        S2 += b.s2 * sc * sc;
    }
    const double nd = static_cast<double>(n);
    const double mean = S1 / nd;
    const double m2 = S2 / nd;
    tot.mean = std::exp(M) * mean;
    const double var_unit = std::max(0.0, m2 - mean * mean) * (nd / std::max(1.0, nd - 1.0));
    tot.var = std::exp(2.0 * M) * var_unit;
    return tot;
}

template <std::size_t NOff>
struct BatchSums {
    LseAcc acc[NOff];
};

template <std::size_t NOff>
std::vector<BatchSums<NOff>> run_ensemble(const ProblemSpec& spec, double p,
                                          const double (&off)[NOff], double T,
                                          const MCParams& mc, uint64_t stream_base) {
    const PathParams pp = path_params(spec.model);
    const double hb = spec.scale();
    const std::size_t n_batches = (mc.n_paths + kBatchSize - 1) / kBatchSize;
    std::vector<BatchSums<NOff>> out(n_batches);
    std::visit(
        [&](const auto& rf) {
            for_each_batch(n_batches, [&](std::size_t b) {
                RngStream rng(mc.seed, stream_base + b);
                const std::size_t lo = b * kBatchSize;
                const std::size_t hi = std::min(mc.n_paths, lo + kBatchSize);
                BatchSums<NOff> sums;
                double I[NOff], xT;
                for (std::size_t i = lo; i < hi; ++i) {
                    walk_path(rf, pp, spec.model.jumps, p, off, T, mc.dt, rng, I, xT);
                    for (std::size_t o = 0; o < NOff; ++o) {
                        const double lw =
                            -I[o] * pp.inv_hbar + data_log_eval(spec.data, xT + off[o], hb);
                        sums.acc[o].add(lw);
                    }
                }
                out[b] = sums;
            });
        },
        spec.rate);
    return out;
}

} // namespace

MCEstimate fk_estimate(const ProblemSpec& spec, double p, const MCParams& mc) {
    validate_problem(spec);
    if (mc.n_paths == 0 || !(mc.dt > 0.0)) throw ConfigError("fk_estimate: bad MC params");
    const double off[1] = {0.0};
    auto batches = run_ensemble(spec, p, off, spec.horizon, mc, 0);
    std::vector<LseAcc> accs(batches.size());
    for (std::size_t b = 0; b < batches.size(); ++b) accs[b] = batches[b].acc[0];
    const LseTotal tot = combine(accs);
    MCEstimate est;
    est.mean = tot.mean;
    est.stderr_ = std::sqrt(tot.var / static_cast<double>(mc.n_paths));
    est.n_paths = mc.n_paths;
    est.dt = mc.dt;
    est.seed = mc.seed;
    return est;
}

DriftEstimate drift_estimate(const ProblemSpec& spec, double t, double p, double dp,
                             const MCParams& mc) {
    validate_problem(spec);
    if (!(dp > 0.0)) throw ConfigError("drift_estimate: dp must be > 0");
    if (!(t > 0.0)) throw ConfigError("drift_estimate: t must be > 0");
    const double hb = spec.scale();
    const double off[3] = {-dp, 0.0, +dp};
    auto batches = run_ensemble(spec, p, off, t, mc, 0);
    const std::size_t B = batches.size();

    // totals per offset
    std::vector<LseAcc> per_off[3];
    for (int o = 0; o < 3; ++o) {
        per_off[o].resize(B);
        for (std::size_t b = 0; b < B; ++b) per_off[o][b] = batches[b].acc[o];
    }
    const LseTotal tm = combine(per_off[0]);
    const LseTotal tc = combine(per_off[1]);
    const LseTotal tp = combine(per_off[2]);
    if (!(tc.mean > 10.0 * std::numeric_limits<double>::min()))
        throw SolverError("drift_estimate: center estimate vanished (degenerate denominator)");

    DriftEstimate de;
    de.value = hb * (tp.mean - tm.mean) / (2.0 * dp * tc.mean);
    de.center.mean = tc.mean;
    de.center.stderr_ = std::sqrt(tc.var / static_cast<double>(mc.n_paths));
    de.center.n_paths = mc.n_paths;
    de.center.dt = mc.dt;
    de.center.seed = mc.seed;

    // delete-one-batch jackknife for the ratio statistic
    if (B > 1) {
        std::vector<double> theta(B);
        std::vector<LseAcc> keep;
        keep.reserve(B - 1);
        for (std::size_t drop = 0; drop < B; ++drop) {
            double v[3];
            for (int o = 0; o < 3; ++o) {
                keep.clear();
                for (std::size_t b = 0; b < B; ++b)
                    if (b != drop) keep.push_back(per_off[o][b]);
                v[o] = combine(keep).mean;
            }
            theta[drop] = v[1] > 0.0 ? hb * (v[2] - v[0]) / (2.0 * dp * v[1])
                                     : de.value;
        }
        double tbar = 0.0;
        for (double th : theta) tbar += th;
        tbar /= static_cast<double>(B);
        double ss = 0.0;
        for (double th : theta) ss += (th - tbar) * (th - tbar);
        de.stderr_ = std::sqrt(ss * static_cast<double>(B - 1) / static_cast<double>(B));
    }
    return de;
}

// pointwise (A - U/hbar) g at x for the (possibly scaled) triplet
double dressed_generator(const ProblemSpec& spec, double x) {
    const LevyModel& m = spec.model;
    const double hb = m.scale();
    double v = m.drift * data_d1(spec.data, x, hb) +
               0.5 * hb * m.sigma2 * data_d2(spec.data, x, hb);
    const double gx = data_eval(spec.data, x, hb);
    for (const auto& [k, w] : jump_atoms(m.jumps))
        v += (w / hb) * (data_eval(spec.data, x + hb * k, hb) - gx);
    v -= rate_eval(spec.rate, x) / hb * gx;
    return v;
}

ResidualEstimate semigroup_residual(const ProblemSpec& spec, double x, double t,
                                    int quad_points, const MCParams& mc) {
    validate_problem(spec);
    if (quad_points < 3 || quad_points % 2 == 0)
        throw ConfigError("semigroup_residual: quad_points must be odd and >= 3");
    if (!(t >= 0.0)) throw ConfigError("semigroup_residual: t must be >= 0");
    const double hb = spec.scale();
    const double gx = data_eval(spec.data, x, hb);

    ResidualEstimate res;
    if (t == 0.0) return res; // both sides vanish identically

    // left side: independent substreams
    ProblemSpec at_t = spec;
    at_t.horizon = t;
    MCParams mc_lhs = mc;
    mc_lhs.seed = RngStream::mix(mc.seed + 0x517CC1B727220A95ull);
    const MCEstimate Tg = fk_estimate(at_t, x, mc_lhs);
    res.lhs = Tg.mean - gx;

    // right side: one ensemble, Simpson nodes observed along each path
    const int J = quad_points;
    const double hs = t / static_cast<double>(J - 1);
    std::vector<double> wq(J);
    for (int j = 0; j < J; ++j)
        wq[j] = hs / 3.0 * (j == 0 || j == J - 1 ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0));

    const PathParams pp = path_params(spec.model);
    const std::size_t n_batches = (mc.n_paths + kBatchSize - 1) / kBatchSize;
    std::vector<double> bsum(n_batches, 0.0), bsum2(n_batches, 0.0);
    std::visit(
        [&](const auto& rf) {
            for_each_batch(n_batches, [&](std::size_t b) {
                RngStream rng(mc.seed, b);
                const std::size_t lo = b * kBatchSize;
                const std::size_t hi = std::min(mc.n_paths, lo + kBatchSize);
                double s = 0.0, s2 = 0.0;
                for (std::size_t i = lo; i < hi; ++i) {
                    // walk the quadrature grid exactly; dt refines in between
                    double xc = x, tcur = 0.0, I = 0.0;
                    double uprev = reval(rf, xc);
                    double next_jump = pp.rate > 0.0 ? rng.exponential(pp.rate) : kInf;
                    double phi = 0.0;
                    for (int j = 0; j < J; ++j) {
                        const double tq = static_cast<double>(j) * hs;
                        // advance from tcur to tq on the dt grid with jumps
                        while (tcur < tq) {
                            double tn = std::min(tq, tcur + mc.dt);
                            const bool isj = next_jump <= tn;
                            if (isj) tn = next_jump;
                            const double h = tn - tcur;
                            double xl = xc + pp.drift * h;
                            if (pp.sig > 0.0 && h > 0.0)
                                xl += pp.sig * std::sqrt(h) * rng.normal();
                            const double ul = reval(rf, xl);
                            I += 0.5 * h * (uprev + ul);
                            uprev = ul;
                            xc = xl;
                            if (isj) {
                                xc += pp.size_scale * sample_jump_size(spec.model.jumps, rng);
                                uprev = reval(rf, xc);
                                next_jump = tn + rng.exponential(pp.rate);
                            }
                            tcur = tn;
                        }
                        phi += wq[j] * dressed_generator(spec, xc) *
                               std::exp(-I * pp.inv_hbar);
                    }
                    s += phi;
                    s2 += phi * phi;
                }
                bsum[b] = s;
                bsum2[b] = s2;
            });
        },
        spec.rate);

    double S = 0.0, S2 = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
        S += bsum[b];
        S2 += bsum2[b];
    }
    const double n = static_cast<double>(mc.n_paths);
    res.rhs = S / n;
    const double var = std::max(0.0, S2 / n - res.rhs * res.rhs) * n / std::max(1.0, n - 1.0);
    const double rhs_stderr = std::sqrt(var / n);
    res.residual = std::abs(res.lhs - res.rhs);
    res.stderr_ = std::sqrt(Tg.stderr_ * Tg.stderr_ + rhs_stderr * rhs_stderr);
    return res;
}

} // namespace lfk
