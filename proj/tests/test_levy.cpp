#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "lfk/errors.hpp"
#include "lfk/levy.hpp"

using namespace lfk;

namespace {

LevyModel two_point_model(double alpha = 1.0, double mass = 1.0) {
    LevyModel m;
    m.drift = 0.0;
    m.sigma2 = 0.0;
    m.jumps = TwoPointJumps{alpha, mass};
    return m;
}

LevyModel gamma_model() {
    LevyModel m;
    m.drift = 0.0;
    m.sigma2 = 0.0;
    m.jumps = GammaJumps{};
    return m;
}

} // namespace

TEST_CASE("jump measure masses and moments") {
    const JumpMeasure tp = TwoPointJumps{1.5, 0.8};
    CHECK(jump_total_mass(tp) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(jump_moment(tp, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(jump_moment(tp, 2) == doctest::Approx(0.8 * 2.25).epsilon(1e-12));
    CHECK(jump_is_symmetric(tp));
    CHECK(!jump_positive_support(tp));

    const JumpMeasure g = GammaJumps{};
    // independent quadrature oracle: \int_{1e-4}^{30} e^{-k}/k dk = 8.63322470457
    CHECK(jump_total_mass(g) ==
          doctest::Approx(8.63322470457).epsilon(2e-3));
    // the polynomial moments have closed forms and must be tight
    CHECK(jump_moment(g, 1) == doctest::Approx(0.999900005).epsilon(1e-9));
    CHECK(jump_moment(g, 2) == doctest::Approx(0.999999994997).epsilon(1e-9));
    CHECK(jump_moment(g, 4) == doctest::Approx(5.9999999972).epsilon(1e-9));
    CHECK(!jump_is_symmetric(g));
    CHECK(jump_positive_support(g));
}

TEST_CASE("gamma jump sampler reproduces the density mean") {
    const JumpMeasure g = GammaJumps{};
    RngStream rng(31, 0);
    const int n = 200000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += sample_jump_size(g, rng);
    const double mean = s / n;
    const double target = 0.999900005 / 8.63322470457; // int k nu / nu(R)
    // var = m2/m0 - mean^2 = 0.1024
    const double se = std::sqrt(0.1024 / n);
    CHECK(std::fabs(mean - target) < 5.0 * se);
}

TEST_CASE("model validation") {
    CHECK_NOTHROW(validate_model(two_point_model()));
    CHECK_NOTHROW(validate_model(gamma_model()));

    LevyModel bad = gamma_model();
    bad.sigma2 = 1.0; // the truncated-gamma family is subordinator-only here
    CHECK_THROWS_AS(validate_model(bad), ConfigError);

    LevyModel degenerate;
    degenerate.drift = 0.0;
    degenerate.sigma2 = 0.0;
    CHECK_THROWS_AS(validate_model(degenerate), ConfigError);

    CHECK(gamma_model().is_subordinator());
    CHECK(!two_point_model().is_subordinator());
}

TEST_CASE("characteristic exponent closed forms") {
    LevyModel bm;
    bm.sigma2 = 2.0;
    CHECK(characteristic_exponent(bm, 3.0) ==
          doctest::Approx(9.0).epsilon(1e-12));

    const LevyModel tp = two_point_model();
    // mass 1 at +-1: psi(x) = 1 - cos(x)
    CHECK(characteristic_exponent(tp, 2.0) ==
          doctest::Approx(1.41614683655).epsilon(1e-9));

    LevyModel both = two_point_model();
    both.sigma2 = 2.0;
    CHECK(characteristic_exponent(both, 2.0) ==
          doctest::Approx(4.0 + 1.41614683655).epsilon(1e-9));
}

TEST_CASE("generator on a quadratic grid function") {
    UniformGrid grid{-5.0, 0.01, 1001};
    std::vector<double> f(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.point(i);
        f[i] = x * x;
    }

    LevyModel bm;
    bm.drift = 0.5;
    bm.sigma2 = 2.0;
    const GeneratorResult rb = apply_generator(bm, f, grid);
    CHECK(!rb.boundary_truncated);
    // (sigma2/2) f'' + b f' = 2 + x  (exact for centered differences)
    for (std::size_t i = 10; i + 10 < grid.n; i += 97) {
        const double x = grid.point(i);
        CHECK(rb.values[i] == doctest::Approx(2.0 + x).epsilon(1e-9));
    }

    const LevyModel tp = two_point_model(1.0, 1.0);
    const GeneratorResult rj = apply_generator(tp, f, grid);
    CHECK(rj.boundary_truncated); // +-1 shifts leave the grid near its ends
    // interior: ((x+1)^2 + (x-1)^2)/2 - x^2 = 1
    for (std::size_t i = 150; i + 150 < grid.n; i += 83) {
        CHECK(rj.values[i] == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("two-point paths jump by one atom at a time") {
    const LevyModel tp = two_point_model();
    int total_jumps = 0;
    const int n = 5000;
    for (int i = 0; i < n; ++i) {
        const SamplePath path = sample_path(tp, 1.0, 0.1, 0.0, 555, i);
        REQUIRE(path.times.front() == 0.0);
        REQUIRE(path.times.back() == doctest::Approx(1.0));
        for (std::size_t j = 1; j < path.times.size(); ++j)
            REQUIRE(path.times[j] > path.times[j - 1]);
        for (std::size_t idx = 0; idx < path.jump_index.size(); ++idx) {
            const std::size_t k = path.jump_index[idx];
            const double step = path.values[k] - path.pre_jump[idx];
            REQUIRE(std::fabs(std::fabs(step) - 1.0) < 1e-12);
        }
        total_jumps += static_cast<int>(path.jump_index.size());
    }
    // jump count is Poisson(1) per unit time
    const double mean = static_cast<double>(total_jumps) / n;
    CHECK(std::fabs(mean - 1.0) < 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("scaled two-point paths use rescaled atoms and intensity") {
    LevyModel tp = two_point_model();
    tp.hbar = 0.1;
    int total_jumps = 0;
    const int n = 3000;
    for (int i = 0; i < n; ++i) {
        const SamplePath path = sample_path(tp, 1.0, 0.1, 0.0, 777, i);
        for (std::size_t idx = 0; idx < path.jump_index.size(); ++idx) {
            const std::size_t k = path.jump_index[idx];
            const double step = path.values[k] - path.pre_jump[idx];
            REQUIRE(std::fabs(std::fabs(step) - 0.1) < 1e-12);
        }
        total_jumps += static_cast<int>(path.jump_index.size());
    }
    const double mean = static_cast<double>(total_jumps) / n; // ~ Poisson(10)
    CHECK(std::fabs(mean - 10.0) < 5.0 * std::sqrt(10.0 / n));
}

TEST_CASE("brownian endpoint variance") {
    LevyModel bm;
    bm.sigma2 = 1.0;
    const int n = 50000;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const SamplePath path = sample_path(bm, 1.0, 0.05, 0.0, 888, i);
        s2 += path.values.back() * path.values.back();
    }
    CHECK(std::fabs(s2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("empirical moments match the closed-form second moment") {
    const std::vector<double> grid = {0.25, 0.5, 0.75, 1.0};
    const LevyModel tp = two_point_model();
    const MomentReport rep = empirical_moments(tp, grid, 2, 100000, 99);
    REQUIRE(rep.times.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double ref = analytic_second_moment(tp, grid[i]);
        CHECK(std::fabs(rep.moment[i] - ref) < 4.0 * rep.stderrs[i]);
    }
    CHECK(rep.sup_index == grid.size() - 1);

    const LevyModel g = gamma_model();
    const MomentReport repg = empirical_moments(g, {1.0}, 2, 100000, 98);
    // oracle: m2 + m1^2 = 1.999800015 at t = 1
    CHECK(std::fabs(repg.moment[0] - 1.999800015) < 4.0 * repg.stderrs[0]);

    CHECK_THROWS_AS(empirical_moments(tp, grid, 3, 1000, 1), ConfigError);
    CHECK_THROWS_AS(empirical_moments(tp, {0.5, 0.25}, 2, 1000, 1), ConfigError);
}

TEST_CASE("analytic second moment composes drift and jumps") {
    LevyModel m = two_point_model(2.0, 0.5); // int k^2 nu = 0.5*4 = 2
    m.drift = 1.0;
    m.sigma2 = 3.0;
    // t (sigma2 + int k^2 nu) + (t drift)^2 at t = 2: 2*5 + 4 = 14
    CHECK(analytic_second_moment(m, 2.0) == doctest::Approx(14.0).epsilon(1e-12));
}
