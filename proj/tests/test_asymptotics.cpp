#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lfk/asymptotics.hpp"
#include "lfk/errors.hpp"

using namespace lfk;

namespace {

Poly half_square() { return Poly{{0.0, 0.0, 0.5}}; }

ProblemSpec harmonic_spec() {
    ProblemSpec spec;
    spec.model.sigma2 = 1.0;
    spec.rate = QuadraticRate{0.5};
    spec.data = ScaledGaussianData{1.0, false};
    spec.horizon = 1.0;
    spec.direction = TimeDirection::BackwardFromTerminal;
    return spec;
}

ProblemSpec jump_spec() {
    ProblemSpec spec;
    spec.model.sigma2 = 0.0;
    spec.model.jumps = TwoPointJumps{1.0, 1.0};
    spec.rate = QuadraticMinusLinearRate{};
    spec.data = ConstantExpData{};
    spec.horizon = 1.0;
    spec.direction = TimeDirection::BackwardFromTerminal;
    return spec;
}

} // namespace

TEST_CASE("quadratic Gaussian functional closed form") {
    // degenerate frequency: pure terminal weight
    CHECK(gaussian_quadratic_functional(0.0, 1.0, 0.5) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(gaussian_quadratic_functional(1.0, 1.0, 0.5) ==
          doctest::Approx(0.678872925488).epsilon(1e-10));
    CHECK(gaussian_quadratic_functional(1.0, 1.0, 1.0) ==
          doctest::Approx(0.506793291436).epsilon(1e-10));
    CHECK(gaussian_quadratic_functional(1.0, 0.5, 1.0) ==
          doctest::Approx(std::exp(-0.5)).epsilon(1e-10));
    CHECK(gaussian_quadratic_functional(2.0, 0.0, 1.0) ==
          doctest::Approx(0.677567805526).epsilon(1e-10));
    // small-frequency limit approaches the degenerate value
    CHECK(gaussian_quadratic_functional(1e-12, 1.0, 0.5) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
    CHECK_THROWS_AS(gaussian_quadratic_functional(-1.0, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(gaussian_quadratic_functional(1.0, 0.0, -1.0), ConfigError);
}

TEST_CASE("fluctuation prefactor closed form and independent integration") {
    const PrefactorValue at_end = prefactor_F(PrefactorDirection::Forward, 1.0);
    CHECK(at_end.K == doctest::Approx(1.0).epsilon(1e-12));
    const PrefactorValue at_start = prefactor_F(PrefactorDirection::Forward, 0.0);
    CHECK(at_start.K == doctest::Approx(0.506793291436).epsilon(1e-10));
    CHECK(std::fabs(at_start.F_ode - at_start.F_closed) < 1e-9);
    const PrefactorValue mid = prefactor_F(PrefactorDirection::Backward, 0.5);
    CHECK(mid.K == doctest::Approx(0.678872925488).epsilon(1e-10));
    CHECK_THROWS_AS(prefactor_F(PrefactorDirection::Forward, 1.5), ConfigError);
    CHECK_THROWS_AS(prefactor_F(PrefactorDirection::Backward, -0.1), ConfigError);
}

TEST_CASE("sampled prefactor matches the closed form") {
    MCParams mc;
    mc.n_paths = 25600;
    mc.dt = 1e-3;
    mc.seed = 11;
    const MCEstimate est = prefactor_mc(PrefactorDirection::Backward, 0.5, mc);
    CHECK(est.stderr_ > 0.0);
    CHECK(est.stderr_ < 3e-3);
    CHECK(std::fabs(est.mean - 0.678872925488) < 5.0 * est.stderr_);
    // empty window: the functional collapses to 1
    const MCEstimate unit = prefactor_mc(PrefactorDirection::Forward, 1.0, mc);
    CHECK(unit.mean == 1.0);
}

TEST_CASE("Gaussian fluctuation factor around a quadratic minimizer") {
    const MinimizerResult min = solve_el_config(half_square(), 1.0, 1.0, 0.5);
    MCParams mc;
    mc.n_paths = 25600;
    mc.dt = 1e-3;
    mc.seed = 12;
    const MCEstimate k0 = gaussian_k0(half_square(), min, 1.0, 0.5, mc);
    CHECK(std::fabs(k0.mean - std::exp(-0.5)) < 5.0 * k0.stderr_);
    CHECK(k0.stderr_ < 3e-3);
}

TEST_CASE("next-order coefficient vanishes identically for quadratic wells") {
    const MinimizerResult min = solve_el_config(half_square(), 1.0, 0.5, 0.5);
    MCParams mc;
    mc.n_paths = 4096;
    mc.dt = 2e-3;
    mc.seed = 13;
    const K1Report rep = gaussian_k1bar(half_square(), min, 1.0, 0.5, mc);
    CHECK(rep.k1bar == 0.0);
    CHECK(rep.k1bar_stderr == 0.0);
    CHECK(rep.ratio == 0.0);
    CHECK(rep.k0 > 0.0);
    CHECK(rep.k0 < 1.0);
}

TEST_CASE("next-order coefficient is finite for a quartic well") {
    const Poly quartic{{0.0, 0.0, 0.0, 0.0, 0.25}};
    const MinimizerResult min = solve_el_config(quartic, 0.8, 0.5, 0.5);
    MCParams mc;
    mc.n_paths = 8192;
    mc.dt = 2e-3;
    mc.seed = 14;
    const K1Report rep = gaussian_k1bar(quartic, min, 0.8, 0.5, mc);
    CHECK(std::isfinite(rep.k1bar));
    CHECK(rep.k0 > 0.0);
    CHECK(rep.ratio == doctest::Approx(rep.k1bar / rep.k0).epsilon(1e-12));
}

TEST_CASE("drift prediction in configuration space") {
    MCParams mc;
    mc.n_paths = 4096;
    mc.dt = 2e-3;
    mc.seed = 15;
    const DriftPrediction half = drift_prediction_config(half_square(), 1.0, 0.5, 0.5, mc);
    CHECK(half.leading == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(half.correction_coeff == 0.0);
    const DriftPrediction full = drift_prediction_config(half_square(), 1.0, 1.0, 1.0, mc);
    CHECK(full.leading == doctest::Approx(-1.09448594975).epsilon(1e-7));
    CHECK(full.correction_coeff == 0.0);
}

TEST_CASE("drift prediction in momentum form") {
    LevyModel tp;
    tp.sigma2 = 0.0;
    tp.jumps = TwoPointJumps{1.0, 1.0};
    const DriftPrediction jump = drift_prediction_momentum(tp, 0.3, 0.5, 0.5);
    CHECK(jump.leading == doctest::Approx(-0.299034561245).epsilon(1e-6));
    CHECK(jump.correction_coeff == 0.0);

    LevyModel gauss;
    gauss.sigma2 = 1.0;
    const DriftPrediction diff = drift_prediction_momentum(gauss, 0.4, 0.5, 0.5);
    CHECK(diff.leading == doctest::Approx(-0.4).epsilon(1e-8));
}

TEST_CASE("jump prefactor reduces to a constant-coefficient functional at the minimum") {
    const MinimizerResult min = solve_el_jump(1.0, 0.5, 0.0);
    MCParams mc;
    mc.n_paths = 25600;
    mc.dt = 1e-3;
    mc.seed = 16;
    const MCEstimate est = jump_prefactor_mc(1.0, min, 0.0, mc);
    CHECK(std::fabs(est.mean - 0.677567805526) < 5.0 * est.stderr_);
    CHECK(est.stderr_ < 3e-3);
    // empty window
    const MCEstimate unit = jump_prefactor_mc(1.0, min, 1.0, mc);
    CHECK(unit.mean == 1.0);
    // a minimizer without momentum samples cannot feed the functional
    const MinimizerResult no_rho = config_closed_form(1.0, 1.0, 1.0, 1.0);
    CHECK_THROWS_AS(jump_prefactor_mc(1.0, no_rho, 0.0, mc), ConfigError);
}

TEST_CASE("scale sweep recovers the harmonic exponent from sampled values") {
    const ProblemSpec spec = harmonic_spec();
    MCParams mc;
    mc.n_paths = 20000;
    mc.dt = 1e-3;
    mc.seed = 17;
    const std::vector<double> ladder = {0.4, 0.2, 0.1, 0.05};
    const ExpansionReport rep =
        hbar_sweep(spec, 0.4, 0.5, ladder, SweepSource::MonteCarlo, mc);
    CHECK(rep.complete);
    CHECK(rep.values.size() == 4);
    CHECK(!rep.normalized);
    REQUIRE(rep.predicted_action.has_value());
    CHECK(*rep.predicted_action == doctest::Approx(0.102362467551).epsilon(1e-6));
    REQUIRE(rep.predicted_prefactor.has_value());
    CHECK(*rep.predicted_prefactor == doctest::Approx(0.678872925488).epsilon(1e-9));
    CHECK(std::fabs(rep.fitted_action - 0.102362467551) < 0.05 * 0.102362467551);
    for (double r : rep.residuals) CHECK(r < 0.05);
}

TEST_CASE("scale sweep validates its ladder") {
    const ProblemSpec spec = harmonic_spec();
    MCParams mc;
    mc.n_paths = 100;
    CHECK_THROWS_AS(
        hbar_sweep(spec, 0.4, 0.5, {0.4, 0.2, 0.1}, SweepSource::MonteCarlo, mc),
        ConfigError);
    CHECK_THROWS_AS(hbar_sweep(spec, 0.4, 0.5, {0.4, 0.4, 0.2, 0.1},
                               SweepSource::MonteCarlo, mc),
                    ConfigError);
    CHECK_THROWS_AS(hbar_sweep(spec, 0.4, 0.5, {0.4, 0.2, 0.1, -0.05},
                               SweepSource::MonteCarlo, mc),
                    ConfigError);
    // backward problems evaluate strictly before the horizon
    CHECK_THROWS_AS(hbar_sweep(spec, 0.4, 1.0, {0.4, 0.2, 0.1, 0.05},
                               SweepSource::MonteCarlo, mc),
                    ConfigError);
}

TEST_CASE("exponent prediction covers the two canonical families") {
    MCParams mc;
    mc.n_paths = 25600;
    mc.dt = 1e-3;
    mc.seed = 18;
    const auto harm = predict_exponent(harmonic_spec(), 0.4, 0.5, mc);
    REQUIRE(harm.has_value());
    CHECK(harm->action == doctest::Approx(0.102362467551).epsilon(1e-6));
    CHECK(harm->prefactor == doctest::Approx(0.678872925488).epsilon(1e-9));

    const auto jmp = predict_exponent(jump_spec(), 0.5, 0.0, mc);
    REQUIRE(jmp.has_value());
    CHECK(jmp->action == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(std::fabs(jmp->prefactor - 0.677567805526) < 0.01);

    // outside the covered families: no prediction
    ProblemSpec off = harmonic_spec();
    off.model.sigma2 = 2.0;
    CHECK(!predict_exponent(off, 0.4, 0.5, mc).has_value());
    ProblemSpec drifted = harmonic_spec();
    drifted.model.drift = 0.3;
    CHECK(!predict_exponent(drifted, 0.4, 0.5, mc).has_value());
    ProblemSpec gamma;
    gamma.model.sigma2 = 0.0;
    gamma.model.drift = 1.0;
    gamma.model.jumps = GammaJumps{};
    gamma.rate = HalfPowerRate{};
    gamma.data = OneData{};
    CHECK(!predict_exponent(gamma, 0.5, 0.5, mc).has_value());
    // evaluation at the horizon leaves no window
    CHECK(!predict_exponent(harmonic_spec(), 0.4, 1.0, mc).has_value());
}
