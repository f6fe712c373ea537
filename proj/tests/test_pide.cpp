#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lfk/errors.hpp"
#include "lfk/pide.hpp"

using namespace lfk;

namespace {

ProblemSpec heat_problem() {
    ProblemSpec spec;
    spec.model.drift = 0.0;
    spec.model.sigma2 = 1.0;
    spec.rate = PolynomialRate{Poly{{0.0}}};
    spec.data = SchwartzData{0, 1.0};
    spec.horizon = 1.0;
    spec.direction = TimeDirection::ForwardFromInitial;
    return spec;
}

} // namespace

TEST_CASE("heat equation against the Gaussian closed form") {
    const ProblemSpec spec = heat_problem();
    const GridSolution sol = solve_pide(spec, PideGrid{10.0, 2001, 1e-3, 257});
    CHECK(sol.positive);
    CHECK(!sol.boundary_truncated);
    CHECK(sol.t.front() == 0.0);
    CHECK(sol.t.back() == doctest::Approx(1.0).epsilon(1e-12));
    // u(t,p) = (1+2t)^{-1/2} exp(-p^2/(1+2t))
    for (double p : {-1.0, 0.0, 0.3, 1.0}) {
        const double ref = std::exp(-p * p / 3.0) / std::sqrt(3.0);
        const double got = sol.at(sol.t.size() - 1, sol.space_index(p));
        CHECK(std::fabs(got - ref) < 1e-4);
    }
    // initial slice reproduces the data exactly
    CHECK(sol.at(0, sol.space_index(0.3)) ==
          doctest::Approx(std::exp(-0.09)).epsilon(1e-12));
}

TEST_CASE("quadratic killing against the hyperbolic closed form") {
    ProblemSpec spec = heat_problem();
    spec.rate = QuadraticRate{0.5};
    spec.data = OneData{};
    const GridSolution sol = solve_pide(spec, PideGrid{10.0, 2001, 1e-3, 257});
    const double u0 = sol.at(sol.t.size() - 1, sol.space_index(0.0));
    const double u1 = sol.at(sol.t.size() - 1, sol.space_index(1.0));
    CHECK(std::fabs(u0 - 0.805018182195) < 2e-4);
    CHECK(std::fabs(u1 - 0.550082235292) < 2e-4);
}

TEST_CASE("constant killing with flat data is integrated exactly") {
    ProblemSpec spec;
    spec.model.drift = 0.0;
    spec.model.sigma2 = 0.0;
    spec.model.jumps = TwoPointJumps{1.0, 1.0};
    spec.rate = PolynomialRate{Poly{{0.4}}};
    spec.data = OneData{};
    spec.horizon = 1.0;
    // domain wide enough that boundary truncation (ten unit jumps away from
    // the probe) is invisible at the tolerance below
    const GridSolution sol = solve_pide(spec, PideGrid{10.0, 1001, 1e-3, 17});
    CHECK(sol.boundary_truncated); // edge nodes do reference clamped points
    CHECK(sol.positive);
    const double interior = sol.at(sol.t.size() - 1, sol.space_index(0.0));
    CHECK(interior == doctest::Approx(std::exp(-0.4)).epsilon(1e-6));
}

TEST_CASE("stored slices decimate without changing the solution") {
    const ProblemSpec spec = heat_problem();
    const GridSolution full = solve_pide(spec, PideGrid{8.0, 801, 1e-2, 1000});
    const GridSolution thin = solve_pide(spec, PideGrid{8.0, 801, 1e-2, 9});
    CHECK(full.t.size() == 101);
    CHECK(thin.t.size() <= 14);
    CHECK(thin.t.front() == 0.0);
    CHECK(thin.t.back() == full.t.back());
    const std::size_t ix = thin.space_index(0.5);
    // final slice must be bitwise identical: storage policy only
    CHECK(thin.at(thin.t.size() - 1, ix) == full.at(full.t.size() - 1, ix));
}

TEST_CASE("bilinear value lookup matches stored nodes") {
    const ProblemSpec spec = heat_problem();
    const GridSolution sol = solve_pide(spec, PideGrid{8.0, 801, 1e-2, 101});
    const std::size_t ix = sol.space_index(0.4);
    CHECK(sol.value(sol.t[5], sol.x[ix]) ==
          doctest::Approx(sol.at(5, ix)).epsilon(1e-12));
    // between slices the value interpolates between the neighbors
    const double mid = sol.value(0.5 * (sol.t[5] + sol.t[6]), sol.x[ix]);
    CHECK(mid == doctest::Approx(0.5 * (sol.at(5, ix) + sol.at(6, ix)))
                     .epsilon(1e-9));
    CHECK_THROWS_AS(sol.space_index(0.4003), ResolutionError);
}

TEST_CASE("scaled solves enforce resolution requirements") {
    ProblemSpec spec = heat_problem();
    spec.model.hbar = 0.01;
    spec.rate = QuadraticRate{0.5};
    spec.data = ScaledGaussianData{1.0, false};
    // sqrt(hbar) = 0.1 needs dx <= 0.0125; dx = 0.05 is under-resolved
    CHECK_THROWS_AS(solve_pide_scaled(spec, PideGrid{4.0, 161, 1e-3, 17}),
                    ResolutionError);

    ProblemSpec jump;
    jump.model.sigma2 = 0.0;
    jump.model.jumps = TwoPointJumps{1.0, 1.0};
    jump.model.hbar = 0.09;
    jump.rate = QuadraticMinusLinearRate{};
    jump.data = ConstantExpData{};
    jump.horizon = 1.0;
    // scaled atoms sit at +-0.09 but dx = 0.025: not grid aligned
    CHECK_THROWS_AS(solve_pide_scaled(jump, PideGrid{4.0, 321, 5e-4, 17}),
                    ResolutionError);
    // auto_grid picks an aligned spacing instead
    const PideGrid g = auto_grid(jump, 0.5);
    CHECK_NOTHROW(solve_pide_scaled(jump, g));

    // unscaled entry point refuses scaled models
    CHECK_THROWS_AS(solve_pide(spec, PideGrid{4.0, 161, 1e-3, 17}),
                    ConfigError);
}

TEST_CASE("explicit jump step rejects unstable time steps") {
    ProblemSpec jump;
    jump.model.sigma2 = 0.0;
    jump.model.jumps = TwoPointJumps{1.0, 1.0};
    jump.model.hbar = 0.05; // scaled intensity 20
    jump.rate = QuadraticRate{0.5};
    jump.data = ScaledGaussianData{1.0, false};
    jump.horizon = 1.0;
    CHECK_THROWS_AS(solve_pide_scaled(jump, PideGrid{4.0, 161, 0.1, 17}),
                    SolverError);
}

TEST_CASE("negative killing minimum does not trip the growth guard") {
    ProblemSpec jump;
    jump.model.sigma2 = 0.0;
    jump.model.jumps = TwoPointJumps{1.0, 1.0};
    jump.model.hbar = 0.2;
    jump.rate = QuadraticMinusLinearRate{}; // minimum -1/4
    jump.data = ConstantExpData{};
    jump.horizon = 1.0;
    const GridSolution sol = solve_pide_scaled(jump, auto_grid(jump, 0.5));
    CHECK(sol.positive);
    const double v = sol.at(sol.t.size() - 1, sol.space_index(0.5));
    CHECK(v > 0.0);
    CHECK(std::isfinite(v));
}

TEST_CASE("grid refinement shows second-order convergence in space") {
    ProblemSpec spec = heat_problem();
    spec.horizon = 0.25;
    const std::vector<PideGrid> ladder = {
        PideGrid{8.0, 201, 2e-4, 3},
        PideGrid{8.0, 401, 2e-4, 3},
        PideGrid{8.0, 801, 2e-4, 3},
        PideGrid{8.0, 1601, 2e-4, 3},
    };
    const RefineReport rep = refine_order(spec, 0.25, 0.0, ladder);
    REQUIRE(rep.errors.size() == 3);
    REQUIRE(rep.orders.size() == 2);
    CHECK(rep.asymptotic);
    for (double o : rep.orders) {
        CHECK(o > 1.5);
        CHECK(o < 2.6);
    }
}
