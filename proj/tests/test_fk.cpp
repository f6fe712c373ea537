#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>

#include "lfk/errors.hpp"
#include "lfk/fk.hpp"

using namespace lfk;

namespace {

ProblemSpec brownian_quadratic(double coeff = 0.5) {
    ProblemSpec spec;
    spec.model.drift = 0.0;
    spec.model.sigma2 = 1.0;
    spec.rate = QuadraticRate{coeff};
    spec.data = OneData{};
    spec.horizon = 1.0;
    spec.direction = TimeDirection::ForwardFromInitial;
    return spec;
}

} // namespace

// closed form: E exp(-1/2 int_0^t (p+W_s)^2 ds)
//            = (cosh t)^{-1/2} exp(-(p^2/2) tanh t)
TEST_CASE("path weights reproduce the quadratic-killing closed form") {
    const ProblemSpec spec = brownian_quadratic();
    const MCParams mc{200000, 1e-3, 17};

    const MCEstimate at0 = fk_estimate(spec, 0.0, mc);
    CHECK(std::fabs(at0.mean - 0.805018182195) < 4.0 * at0.stderr_);
    CHECK(at0.stderr_ < 2e-3);
    CHECK(at0.n_paths == 200000);

    const MCEstimate at1 = fk_estimate(spec, 1.0, mc);
    CHECK(std::fabs(at1.mean - 0.550082235292) < 4.0 * at1.stderr_);

    ProblemSpec half = spec;
    half.horizon = 0.5;
    const MCEstimate mid = fk_estimate(half, 0.5, mc);
    CHECK(std::fabs(mid.mean - 0.888854345133) < 4.0 * mid.stderr_);
}

TEST_CASE("heat semigroup on rapidly decreasing data") {
    ProblemSpec spec = brownian_quadratic();
    spec.rate = PolynomialRate{Poly{{0.0}}}; // no killing
    spec.data = SchwartzData{0, 1.0};
    const MCParams mc{200000, 1e-3, 23};
    // u(t,p) = (1+2t)^{-1/2} exp(-p^2/(1+2t)) at t = 1, p = 0.3
    const MCEstimate est = fk_estimate(spec, 0.3, mc);
    CHECK(std::fabs(est.mean - 0.560286990028) < 4.0 * est.stderr_);
}

TEST_CASE("pure-jump constant killing is exact up to weights") {
    ProblemSpec spec;
    spec.model.drift = 0.0;
    spec.model.sigma2 = 0.0;
    spec.model.jumps = TwoPointJumps{1.0, 1.0};
    spec.rate = PolynomialRate{Poly{{0.3}}};
    spec.data = OneData{};
    spec.horizon = 1.0;
    const MCParams mc{20000, 1e-3, 5};
    const MCEstimate est = fk_estimate(spec, 0.25, mc);
    // every path carries weight exp(-0.3) exactly
    CHECK(est.mean == doctest::Approx(std::exp(-0.3)).epsilon(1e-12));
    CHECK(est.stderr_ < 1e-12);
}

TEST_CASE("estimates are deterministic and thread-count independent") {
    const ProblemSpec spec = brownian_quadratic();
    const MCParams mc{30000, 1e-3, 404};

    setenv("LFK_THREADS", "1", 1);
    const MCEstimate a = fk_estimate(spec, 0.5, mc);
    setenv("LFK_THREADS", "4", 1);
    const MCEstimate b = fk_estimate(spec, 0.5, mc);
    unsetenv("LFK_THREADS");

    CHECK(a.mean == b.mean);       // bitwise, not approximate
    CHECK(a.stderr_ == b.stderr_);

    MCParams other = mc;
    other.seed = 405;
    const MCEstimate c = fk_estimate(spec, 0.5, other);
    CHECK(a.mean != c.mean);
}

TEST_CASE("scaled drift estimate matches the exact logarithmic gradient") {
    // with a normalized Gaussian start and quadratic killing the evolved
    // density stays Gaussian: hbar d_q log u = -q for every hbar and t
    ProblemSpec spec;
    spec.model.drift = 0.0;
    spec.model.sigma2 = 1.0;
    spec.model.hbar = 0.1;
    spec.rate = QuadraticRate{0.5};
    spec.data = ScaledGaussianData{0.5, true};
    spec.horizon = 0.5;
    const MCParams mc{200000, 1e-3, 71};
    const DriftEstimate de =
        drift_estimate(spec, 0.5, 0.7, std::pow(0.1, 1.5), mc);
    CHECK(std::fabs(de.value - (-0.7)) < 4.0 * de.stderr_);
    CHECK(de.stderr_ > 0.0);
    CHECK(de.stderr_ < 0.05);
    CHECK(de.center.mean > 0.0);
}

TEST_CASE("semigroup identity holds along the flow") {
    ProblemSpec diff = brownian_quadratic();
    diff.data = SchwartzData{0, 1.0};
    const MCParams mc{150000, 1e-3, 29};

    const ResidualEstimate zero = semigroup_residual(diff, 0.5, 0.0, 5, mc);
    CHECK(zero.lhs == 0.0);
    CHECK(zero.rhs == 0.0);
    CHECK(zero.residual == 0.0);

    const ResidualEstimate mid = semigroup_residual(diff, 0.5, 0.5, 9, mc);
    CHECK(std::fabs(mid.residual) < 3.5 * mid.stderr_);

    ProblemSpec jump = diff;
    jump.model.sigma2 = 0.0;
    jump.model.jumps = TwoPointJumps{1.0, 1.0};
    const ResidualEstimate jmp = semigroup_residual(jump, 0.5, 0.5, 9, mc);
    CHECK(std::fabs(jmp.residual) < 3.5 * jmp.stderr_);

    CHECK_THROWS_AS(semigroup_residual(diff, 0.5, 0.5, 4, mc), ConfigError);
}

TEST_CASE("dressed generator agrees with manual finite differences") {
    ProblemSpec spec = brownian_quadratic();
    spec.model.drift = 0.3;
    spec.data = SchwartzData{0, 1.0};
    const double x = 0.4;
    const double h = 1e-5;
    auto g = [&](double p) { return data_eval(spec.data, p, 1.0); };
    const double fd1 = (g(x + h) - g(x - h)) / (2.0 * h);
    const double fd2 = (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
    const double manual =
        0.3 * fd1 + 0.5 * fd2 - rate_eval(spec.rate, x) * g(x);
    CHECK(dressed_generator(spec, x) == doctest::Approx(manual).epsilon(1e-5));

    ProblemSpec jump = spec;
    jump.model.drift = 0.0;
    jump.model.sigma2 = 0.0;
    jump.model.jumps = TwoPointJumps{1.0, 1.0};
    const double jm = 0.5 * (g(x + 1.0) + g(x - 1.0)) - g(x) -
                      rate_eval(jump.rate, x) * g(x);
    CHECK(dressed_generator(jump, x) == doctest::Approx(jm).epsilon(1e-9));
}
