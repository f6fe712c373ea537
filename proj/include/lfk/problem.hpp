#pragma once

#include <cstdint>

#include "lfk/boundary.hpp"
#include "lfk/levy.hpp"
#include "lfk/rate.hpp"

namespace lfk {

enum class TimeDirection {
    ForwardFromInitial,  // u(0,.) = g, report u(t,.)
    BackwardFromTerminal // u(T,.) = g; u(t,.) equals the initial-value solution
                         // at T - t after time reversal
};

// One Feynman-Kac problem: d/dt u = A u - (U/hbar) u with data g, where A is
// the (possibly hbar-scaled) generator of the Levy triplet.
struct ProblemSpec {
    LevyModel model;
    RateFunction rate = QuadraticRate{};
    BoundaryData data = OneData{};
    double horizon = 1.0;
    TimeDirection direction = TimeDirection::ForwardFromInitial;

    double scale() const { return model.scale(); }
};

void validate_problem(const ProblemSpec& spec);

struct MCParams {
    std::size_t n_paths = 100000;
    double dt = 1e-3;
    uint64_t seed = 1;
};

struct MCEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n_paths = 0;
    double dt = 0.0;
    uint64_t seed = 0;
};

} // namespace lfk
