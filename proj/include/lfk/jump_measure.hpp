#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "lfk/rng.hpp"

namespace lfk {

struct NoJumps {};

// (mass/2)(delta_{+alpha} + delta_{-alpha})
struct TwoPointJumps {
    double alpha = 1.0;
    double mass = 1.0;
};

// finite list of atoms (size k_i, rate w_i)
struct AtomicJumps {
    std::vector<std::pair<double, double>> atoms; // (size, rate)
};

// density e^{-k}/k truncated to [eps, cutoff]; one-sided (subordinator use)
struct GammaJumps {
    double eps = 1e-4;
    double cutoff = 30.0;
    int quad_nodes = 256; // log-midpoint quadrature resolution for PIDE/H0
};

using JumpMeasure = std::variant<NoJumps, TwoPointJumps, AtomicJumps, GammaJumps>;

// total rate nu(R)
double jump_total_mass(const JumpMeasure& m);
// \int k^r nu(dk), exact for atoms, closed form for the truncated gamma density
double jump_moment(const JumpMeasure& m, int r);
bool jump_is_symmetric(const JumpMeasure& m);
bool jump_positive_support(const JumpMeasure& m);

// measure collapsed to weighted atoms: exact for atomic families, log-spaced
// composite-midpoint quadrature for the gamma density
std::vector<std::pair<double, double>> jump_atoms(const JumpMeasure& m);

// draw one jump size (measure normalized to a probability); gamma sizes are
// sampled from the exact truncated density by rejection
double sample_jump_size(const JumpMeasure& m, RngStream& rng);

void validate_jump_measure(const JumpMeasure& m);

} // namespace lfk
