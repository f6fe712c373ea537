#pragma once

#include <vector>

#include "lfk/problem.hpp"

namespace lfk {

struct PideGrid {
    double L = 10.0;      // domain [-L, L]
    std::size_t n = 2001; // grid points
    double dt = 1e-3;
    std::size_t max_slices = 257; // stored time slices (first/last always kept)
};

struct GridSolution {
    std::vector<double> x;
    std::vector<double> t;     // stored slice times (ascending, includes 0 and horizon)
    std::vector<double> u;     // t.size() x x.size(), row-major
    double hbar = 1.0;
    bool positive = true;      // discrete maximum-principle check over stored slices
    bool boundary_truncated = false; // jump shifts referenced points outside [-L, L]

    double at(std::size_t it, std::size_t ix) const { return u[it * x.size() + ix]; }
    const double* slice(std::size_t it) const { return u.data() + it * x.size(); }
    // bilinear interpolation in (time, space)
    double value(double time, double p) const;
    std::size_t space_index(double p) const; // nearest grid index, error if off-grid
};

// Method of lines on [-L, L] with zero Dirichlet clamp: Crank-Nicolson for
// diffusion (+ upwinded drift + killing term), explicit trapezoidal
// predictor-corrector for the jump part (atom shifts exact on aligned grids,
// otherwise linear interpolation).  Integrates the initial-value form; for
// terminal-value problems query at horizon - t.
GridSolution solve_pide(const ProblemSpec& spec, const PideGrid& grid);

// hbar-scaled variant; checks the diffusion width is resolved (>= 8 points per
// sqrt(hbar)) and that atomic shifts hbar*k land on integer multiples of dx.
// Throws ResolutionError otherwise.
GridSolution solve_pide_scaled(const ProblemSpec& spec, const PideGrid& grid);

// grid auto-selection used by sweeps: spacing ~ sqrt(hbar)/24 for diffusive
// models, atom-aligned spacing for scaled atomic measures; eval_point is
// guaranteed to land on the grid
PideGrid auto_grid(const ProblemSpec& spec, double eval_point);

struct RefineReport {
    std::vector<double> errors; // |value - value_finest| at the probe, coarse..fine
    std::vector<double> orders; // log2(e_k / e_{k+1}) for consecutive pairs
    bool asymptotic = true;     // false if the error sequence is not monotone
};

// observed convergence order at a probe point over a ladder of >= 3 grids
// (caller varies either n or dt along the ladder)
RefineReport refine_order(const ProblemSpec& spec, double probe_t, double probe_p,
                          const std::vector<PideGrid>& ladder);

} // namespace lfk
