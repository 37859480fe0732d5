#include "debtlab/core.hpp"

#include <cmath>
#include <stdexcept>

#include "debtlab/rng.hpp"
#include "doctest.h"

namespace {

using namespace debtlab;

MacroYear year(double g, double pi, double i, double pb, double of) {
    MacroYear y;
    y.g = g;
    y.pi = pi;
    y.i = i;
    y.pb = pb;
    y.of = of;
    return y;
}

// Deterministic case generator for the randomized identities below.
MacroYear random_year(std::uint64_t seed, std::uint64_t k) {
    auto u = [&](std::uint64_t ch) { return rng::uniform(seed, 0x544553544459ull, k, ch); };
    return year(-0.15 + 0.35 * u(0), -0.05 + 0.20 * u(1), 0.18 * u(2),
                -0.08 + 0.16 * u(3), -0.05 + 0.10 * u(4));
}

}  // namespace

TEST_CASE("debt step matches the hand-computed recursion") {
    // d1 = 0.8 * 1.03 / (1.02 * 1.025) - 0.01 + 0.002
    const MacroYear y = year(0.02, 0.025, 0.03, 0.01, 0.002);
    const double expected = 0.8 * 1.03 / (1.02 * 1.025) - 0.01 + 0.002;
    CHECK(debt_step(0.8, y) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("both algebraic forms of the step agree") {
    for (std::uint64_t k = 0; k < 2000; ++k) {
        const MacroYear y = random_year(11, k);
        const double d = 2.0 * rng::uniform(11, 1, k, 99);
        const double a = debt_step(d, y);
        const double b = debt_step_split(d, y);
        REQUIRE(std::fabs(a - b) <= 1e-14 * std::max(1.0, std::fabs(a)));
    }
}

TEST_CASE("decomposition terms add up to the exact one-year change") {
    for (std::uint64_t k = 0; k < 2000; ++k) {
        const MacroYear y = random_year(17, k);
        const double d = 2.0 * rng::uniform(17, 1, k, 99);
        const double change = debt_step(d, y) - d;
        const double sum = decompose_step(d, y).total();
        REQUIRE(std::fabs(sum - change) <= 1e-12 * std::max(1.0, std::fabs(change)));
    }
}

TEST_CASE("decomposition terms carry the expected signs") {
    const StepDecomposition dec = decompose_step(0.6, year(0.03, 0.02, 0.04, 0.01, -0.002));
    CHECK(dec.interest > 0.0);
    CHECK(dec.inflation < 0.0);
    CHECK(dec.growth < 0.0);
    CHECK(dec.primary_balance == -0.01);
    CHECK(dec.other_flows == -0.002);
}

TEST_CASE("step is monotone in each rate") {
    const MacroYear base = year(0.025, 0.02, 0.03, 0.0, 0.0);
    const double d0 = 0.6;
    const double ref = debt_step(d0, base);

    MacroYear hi = base;
    hi.i += 0.01;
    CHECK(debt_step(d0, hi) > ref);

    hi = base;
    hi.g += 0.01;
    CHECK(debt_step(d0, hi) < ref);

    hi = base;
    hi.pi += 0.01;
    CHECK(debt_step(d0, hi) < ref);
}

TEST_CASE("primary balance and other flows shift the step one-for-one") {
    const MacroYear base = year(0.025, 0.02, 0.03, 0.012, -0.004);
    const double d0 = 0.6;
    const double ref = debt_step(d0, base);

    MacroYear y = base;
    y.pb += 0.01;
    CHECK(debt_step(d0, y) == doctest::Approx(ref - 0.01).epsilon(1e-14));

    y = base;
    y.of += 0.01;
    CHECK(debt_step(d0, y) == doctest::Approx(ref + 0.01).epsilon(1e-14));
}

TEST_CASE("first-order step approximates the exact one for small rates") {
    for (std::uint64_t k = 0; k < 500; ++k) {
        auto u = [&](std::uint64_t ch) { return rng::uniform(23, 7, k, ch); };
        const MacroYear y = year(-0.02 + 0.04 * u(0), -0.02 + 0.04 * u(1), 0.04 * u(2),
                                 -0.02 + 0.04 * u(3), -0.02 + 0.04 * u(4));
        const double d = 1.2 * u(5);
        const double exact = debt_step(d, y) - d;
        // the neglected cross terms are O(rate^2) * d
        const double rate = std::max({std::fabs(y.g), std::fabs(y.pi), std::fabs(y.i)});
        CHECK(std::fabs(exact - approx_step(d, y)) <= 10.0 * rate * rate * std::max(d, 1.0));
    }
}

TEST_CASE("amplification is the snowball wedge") {
    const MacroYear y = year(0.025, 0.02, 0.03, 0.5, 0.5);
    CHECK(amplification(y) == 0.03 - 0.02 - 0.025);
}

TEST_CASE("projection applies the step year by year") {
    MacroAssumptions a;
    a.start_year = 2025;
    a.years = {year(0.03, 0.02, 0.03, 0.005, 0.0), year(0.025, 0.02, 0.031, 0.0, 0.006)};
    const DebtPath path = project_path(0.58, a);
    REQUIRE(path.size() == 2);
    CHECK(path.start_year == 2025);
    const double d1 = debt_step(0.58, a.years[0]);
    CHECK(path.d[0] == d1);
    CHECK(path.d[1] == debt_step(d1, a.years[1]));
    CHECK(path.year_at(1) == 2026);
    CHECK(path.at_year(2026) == path.d[1]);
    CHECK(path.index_of(2024) == -1);
    CHECK_THROWS_AS(path.at_year(2030), std::out_of_range);
    CHECK_FALSE(path.negative_debt_warning);
}

TEST_CASE("projection flags negative debt") {
    MacroAssumptions a;
    a.start_year = 2025;
    a.years = {year(0.0, 0.0, 0.0, 0.9, 0.0)};
    CHECK(project_path(0.5, a).negative_debt_warning);
}

TEST_CASE("extending the horizon repeats the final assumption year") {
    MacroAssumptions a;
    a.start_year = 2025;
    a.years = {year(0.03, 0.02, 0.03, 0.0, 0.0), year(0.025, 0.021, 0.031, 0.001, 0.002)};
    const MacroAssumptions ext = extend_assumptions(a, 2030);
    REQUIRE(ext.size() == 6);
    CHECK(ext.start_year == 2025);
    for (std::size_t k = 2; k < ext.size(); ++k) {
        CHECK(ext.years[k].g == a.years[1].g);
        CHECK(ext.years[k].pb == a.years[1].pb);
        CHECK(ext.years[k].of == a.years[1].of);
    }
    // already-covered horizons come back unchanged
    CHECK(extend_assumptions(a, 2026).size() == 2);
}

TEST_CASE("path decomposition covers every projected year") {
    MacroAssumptions a;
    a.start_year = 2025;
    a.years = {year(0.03, 0.02, 0.03, 0.005, 0.0), year(0.025, 0.02, 0.031, 0.0, 0.006),
               year(0.02, 0.02, 0.032, -0.01, 0.0)};
    const DebtPath path = project_path(0.58, a);
    const auto decs = decompose_path(0.58, a);
    REQUIRE(decs.size() == path.size());
    double prev = 0.58;
    for (std::size_t k = 0; k < decs.size(); ++k) {
        CHECK(decs[k].total() == doctest::Approx(path.d[k] - prev).epsilon(1e-12));
        prev = path.d[k];
    }
}

TEST_CASE("threshold crossing reports the first year strictly below") {
    DebtPath path;
    path.start_year = 2020;
    path.d = {0.63, 0.60, 0.597, 0.61, 0.55};
    CHECK(first_year_below(path, 0.60) == 2022);
    CHECK(first_year_below(path, 0.10) == 0);
}

TEST_CASE("stabilization year is the first non-increasing step in the window") {
    DebtPath path;
    path.start_year = 2025;
    path.d = {0.57, 0.59, 0.60, 0.60, 0.58};
    CHECK(stabilization_year(path, 2026) == 2028);  // 2028 repeats the 2027 level
    CHECK(stabilization_year(path, 2029) == 2029);

    DebtPath rising;
    rising.start_year = 2025;
    rising.d = {0.50, 0.51, 0.52};
    CHECK(stabilization_year(rising, 2026) == 2028);  // still rising: one past the end

    CHECK_THROWS_AS(stabilization_year(path, 2025), std::invalid_argument);
}

TEST_CASE("implied residual flows reconstruct the observed series") {
    // assumptions are keyed by arrival year: a[2020] drives the 2019 -> 2020 step
    MacroAssumptions a;
    a.start_year = 2020;
    a.years = {year(0.03, 0.02, 0.03, 0.01, 0.0), year(-0.08, 0.01, 0.025, -0.05, 0.0),
               year(0.12, 0.03, 0.022, 0.0, 0.0)};
    const double of_true[] = {0.004, 0.026, -0.006};

    DebtPath observed;
    observed.start_year = 2019;
    observed.d = {0.70, 0.0, 0.0, 0.0};
    double d = observed.d[0];
    for (std::size_t k = 0; k < a.size(); ++k) {
        MacroYear y = a.years[k];
        y.of = of_true[k];
        d = debt_step(d, y);
        observed.d[k + 1] = d;
    }

    const auto res = implied_flow_residuals(a, observed);
    REQUIRE(res.size() == 3);
    for (std::size_t k = 0; k < res.size(); ++k)
        CHECK(res[k] == doctest::Approx(of_true[k]).epsilon(1e-12));

    // the residual plugged back in reproduces the observation to rounding
    double check = observed.d[0];
    for (std::size_t k = 0; k < a.size(); ++k) {
        MacroYear y = a.years[k];
        y.of = res[k];
        check = debt_step(check, y);
        CHECK(check == doctest::Approx(observed.d[k + 1]).epsilon(1e-14));
    }
}
