#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lfk/jump_measure.hpp"
#include "lfk/rng.hpp"

namespace lfk {

// Levy triplet (drift, sigma2, jumps).  With a semiclassical scale hbar the
// generated process has diffusion hbar*sigma2, jump intensity mass/hbar and
// jump sizes scaled by hbar (drift unscaled), matching the generator
//   b f' + (hbar sigma2/2) f'' + (1/hbar) \int (f(p+hbar k) - f(p)) nu(dk).
struct LevyModel {
    double drift = 0.0;
    double sigma2 = 1.0;
    JumpMeasure jumps = NoJumps{};
    std::optional<double> hbar; // engaged => scaled regime

    double scale() const { return hbar.value_or(1.0); }
    bool scaled() const { return hbar.has_value(); }
    bool is_subordinator() const {
        return drift >= 0.0 && sigma2 == 0.0 && jump_positive_support(jumps);
    }
};

void validate_model(const LevyModel& m);

// real part of the characteristic exponent, sigma2 x^2/2 + \int (1-cos(xk)) nu(dk);
// the drift contributes only an imaginary part and is reported separately by
// the triplet itself.  Always evaluated on the unscaled triplet.
double characteristic_exponent(const LevyModel& m, double x);

struct UniformGrid {
    double left = -10.0;
    double dx = 0.01;
    std::size_t n = 2001;
    double point(std::size_t i) const { return left + dx * static_cast<double>(i); }
    double right() const { return point(n - 1); }
};

struct GeneratorResult {
    std::vector<double> values;
    bool boundary_truncated = false; // some shifted argument fell outside the grid
};

// generator applied to a grid function; second differences for the diffusion
// part, centered first difference for the drift, shifts (linear interpolation
// off-grid, zero outside) for the jump part
GeneratorResult apply_generator(const LevyModel& m, const std::vector<double>& f,
                                const UniformGrid& grid);

struct SamplePath {
    std::vector<double> times;  // strictly increasing, includes 0, t, jump instants
    std::vector<double> values; // right limits (post-jump at jump instants)
    std::vector<std::size_t> jump_index; // positions in times that are jumps
    std::vector<double> pre_jump;        // left limits at those positions
    uint64_t seed = 0;
};

// exact skeleton: Brownian increments are exact on the grid, jump times come
// from the exponential clock at the (scaled) total rate, jump sizes from the
// (scaled) measure
SamplePath sample_path(const LevyModel& m, double t, double dt, double p0,
                       uint64_t seed, uint64_t stream = 0);

// convenience: path of sqrt(hbar) * standard Brownian motion on a uniform grid
SamplePath sample_scaled_brownian(double hbar, double t, double dt, uint64_t seed,
                                  uint64_t stream = 0);

struct MomentReport {
    std::vector<double> times;
    std::vector<double> moment; // empirical E[(xi_t - p0)^m], p0 = 0
    std::vector<double> stderrs;
    double sup_moment = 0.0;
    std::size_t sup_index = 0;
};

// empirical E[xi_t^m] (xi_0 = 0) on a time grid inside [0,1]; m even.
// Sampling uses the exact skeleton on the requested grid.
MomentReport empirical_moments(const LevyModel& m, const std::vector<double>& t_grid,
                               int order, std::size_t n_paths, uint64_t seed);

// t*(sigma2 + \int k^2 nu) + (t*(drift + \int k nu))^2, the exact second moment
// of the (unscaled) triplet started at 0
double analytic_second_moment(const LevyModel& m, double t);

} // namespace lfk
