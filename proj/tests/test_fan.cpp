#include "debtlab/sim.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#include "debtlab/core.hpp"
#include "debtlab/rng.hpp"
#include "doctest.h"

namespace {

using namespace debtlab;

MacroAssumptions flat_baseline(int start_year, int n) {
    MacroAssumptions a;
    a.start_year = start_year;
    MacroYear y;
    y.g = 0.025;
    y.pi = 0.02;
    y.i = 0.03;
    y.pb = 0.002;
    a.years.assign(static_cast<std::size_t>(n), y);
    return a;
}

ShockDistribution small_distribution() {
    ShockDistribution dist;
    // modest positive-definite covariance, fractions squared
    const double v[4] = {4e-4, 1e-4, 2e-4, 3e-4};
    for (int a = 0; a < 4; ++a) dist.covariance[a][a] = v[a];
    dist.covariance[0][3] = dist.covariance[3][0] = 1e-4;
    dist.covariance[0][2] = dist.covariance[2][0] = -5e-5;
    return dist;
}

FanSettings quick_settings(std::uint64_t seed, int iterations) {
    FanSettings s;
    s.seed = seed;
    s.iterations = iterations;
    return s;
}

}  // namespace

TEST_CASE("counter generator reproduces pinned draws") {
    CHECK(rng::word(1, 2, 3, 4) == 15374388949593934587ull);
    CHECK(rng::uniform(61075, rng::kStreamPerPeriod, 0, 0) ==
          doctest::Approx(0.15028778962581252).epsilon(1e-16));
    CHECK(rng::uniform(20250615, rng::kStreamFan, 0, 0) ==
          doctest::Approx(0.7896721924068075).epsilon(1e-16));
    // draws stay inside the open unit interval by construction
    CHECK(rng::to_unit(0) > 0.0);
    CHECK(rng::to_unit(~0ull) < 1.0);
}

TEST_CASE("normal inverse matches reference quantiles") {
    CHECK(rng::normal_inverse(0.5) == 0.0);
    CHECK(rng::normal_inverse(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(rng::normal_inverse(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-14));
    CHECK(rng::normal_inverse(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-14));
    CHECK(rng::normal_inverse(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-12));
    CHECK_THROWS_AS(rng::normal_inverse(0.0), std::invalid_argument);
    CHECK_THROWS_AS(rng::normal_inverse(1.0), std::invalid_argument);
}

TEST_CASE("shock moments come from the history sample") {
    HistoryData h;
    h.macro.start_year = 2021;
    MacroYear a, b, c;
    a.g = 0.01; a.i = 0.02; a.pi = 0.03; a.pb = 0.00;
    b.g = 0.03; b.i = 0.02; b.pi = 0.01; b.pb = 0.01;
    c.g = 0.05; c.i = 0.05; c.pi = 0.02; c.pb = -0.01;
    h.macro.years = {a, b, c};

    ShockDistribution dist = estimate_distribution(h);
    CHECK(dist.mean[0] == doctest::Approx(0.03).epsilon(1e-15));
    CHECK(dist.mean[1] == doctest::Approx(0.03).epsilon(1e-15));
    CHECK(dist.mean[3] == doctest::Approx(0.0).epsilon(1e-15));
    // sample covariance with n-1 in the denominator
    CHECK(dist.covariance[0][0] == doctest::Approx(4e-4).epsilon(1e-12));
    CHECK(dist.covariance[0][1] == doctest::Approx(3e-4).epsilon(1e-12));
    CHECK(dist.covariance[0][1] == dist.covariance[1][0]);

    HistoryData tiny;
    tiny.macro.years = {a};
    CHECK_THROWS_AS(estimate_distribution(tiny), ValidationError);
}

TEST_CASE("a zero covariance collapses the fan onto the deterministic path") {
    MacroAssumptions baseline = flat_baseline(2025, 7);
    const DebtPath det = project_path(0.58, baseline);
    ShockDistribution zero;  // all moments zero

    FanChart fan = simulate_fan(baseline, 0.58, zero, quick_settings(9, 64), "digest");
    REQUIRE(fan.paths.size() == 64);
    for (const auto& path : fan.paths) {
        REQUIRE(path.size() == det.size());
        for (std::size_t t = 0; t < path.size(); ++t) CHECK(path[t] == det.d[t]);
    }
    for (const auto& band : fan.bands)
        for (std::size_t t = 0; t < band.size(); ++t) CHECK(band[t] == det.d[t]);
}

TEST_CASE("declared drift recenters the collapsed fan") {
    MacroAssumptions baseline = flat_baseline(2025, 4);
    ShockDistribution zero;
    FanSettings s = quick_settings(9, 8);
    s.centering = FanCentering::kDeclared;
    s.drift = {-0.0032, 0.0004, -0.0008, -0.0044};

    MacroAssumptions shifted = baseline;
    for (auto& y : shifted.years) {
        y.g += s.drift[0];
        y.i += s.drift[1];
        y.pi += s.drift[2];
        y.pb += s.drift[3];
    }
    const DebtPath det = project_path(0.58, shifted);

    FanChart fan = simulate_fan(baseline, 0.58, zero, s, "digest");
    for (std::size_t t = 0; t < det.size(); ++t)
        CHECK(fan.paths[0][t] == doctest::Approx(det.d[t]).epsilon(1e-14));
}

TEST_CASE("fan bands are monotone across levels at every year") {
    MacroAssumptions baseline = flat_baseline(2025, 7);
    FanChart fan =
        simulate_fan(baseline, 0.58, small_distribution(), quick_settings(41, 2000), "digest");
    REQUIRE(fan.bands.size() == 5);
    for (std::size_t t = 0; t < fan.bands[0].size(); ++t)
        for (std::size_t lvl = 1; lvl < fan.bands.size(); ++lvl)
            CHECK(fan.bands[lvl][t] >= fan.bands[lvl - 1][t]);
}

TEST_CASE("the same seed reproduces the fan bit for bit") {
    MacroAssumptions baseline = flat_baseline(2025, 6);
    FanChart a =
        simulate_fan(baseline, 0.58, small_distribution(), quick_settings(77, 500), "digest");
    FanChart b =
        simulate_fan(baseline, 0.58, small_distribution(), quick_settings(77, 500), "digest");
    for (std::size_t it = 0; it < a.paths.size(); ++it)
        for (std::size_t t = 0; t < a.paths[it].size(); ++t)
            CHECK(a.paths[it][t] == b.paths[it][t]);

    FanChart c =
        simulate_fan(baseline, 0.58, small_distribution(), quick_settings(78, 500), "digest");
    CHECK(c.paths[0][0] != a.paths[0][0]);
}

TEST_CASE("thread count never changes the simulated numbers") {
    MacroAssumptions baseline = flat_baseline(2025, 7);
    FanChart serial = simulate_fan(baseline, 0.58, small_distribution(),
                                   quick_settings(99, 400), "digest", 1);
    for (int threads : {2, 3, 8}) {
        FanChart parallel = simulate_fan(baseline, 0.58, small_distribution(),
                                         quick_settings(99, 400), "digest", threads);
        for (std::size_t it = 0; it < serial.paths.size(); ++it)
            for (std::size_t t = 0; t < serial.paths[it].size(); ++t)
                REQUIRE(parallel.paths[it][t] == serial.paths[it][t]);
        for (std::size_t lvl = 0; lvl < serial.bands.size(); ++lvl)
            for (std::size_t t = 0; t < serial.bands[lvl].size(); ++t)
                REQUIRE(parallel.bands[lvl][t] == serial.bands[lvl][t]);
    }
}

TEST_CASE("shock persistence feeds the previous draw forward") {
    MacroAssumptions baseline = flat_baseline(2025, 6);
    FanSettings base = quick_settings(55, 50);
    FanSettings sticky = base;
    sticky.ar1 = 0.5;

    FanChart a = simulate_fan(baseline, 0.58, small_distribution(), base, "digest");
    FanChart b = simulate_fan(baseline, 0.58, small_distribution(), sticky, "digest");
    // identical first-year draws, diverging afterwards
    CHECK(b.paths[0][0] == a.paths[0][0]);
    CHECK(b.paths[0][1] != a.paths[0][1]);
    CHECK(b.ar1 == 0.5);
    for (const auto& path : b.paths)
        for (double d : path) CHECK(std::isfinite(d));
}

TEST_CASE("sigma scale shrinks the spread") {
    MacroAssumptions baseline = flat_baseline(2025, 6);
    FanSettings wide = quick_settings(21, 1500);
    FanSettings narrow = wide;
    narrow.sigma_scale = 0.25;
    FanChart a = simulate_fan(baseline, 0.58, small_distribution(), wide, "digest");
    FanChart b = simulate_fan(baseline, 0.58, small_distribution(), narrow, "digest");
    const std::size_t last = a.bands[0].size() - 1;
    const double spread_a = a.bands[4][last] - a.bands[0][last];
    const double spread_b = b.bands[4][last] - b.bands[0][last];
    CHECK(spread_b < spread_a);
    CHECK(spread_b > 0.0);
}

TEST_CASE("threshold exceedance counts strictly above") {
    MacroAssumptions baseline = flat_baseline(2025, 3);
    ShockDistribution zero;
    FanChart fan = simulate_fan(baseline, 0.58, zero, quick_settings(5, 10), "digest");

    const double exact = fan.paths[0][1];  // every path hits this value
    auto rows = band_summary(fan, {exact, exact - 1e-9, 0.99});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].probability[1] == 0.0);  // equality does not count
    CHECK(rows[1].probability[1] == 1.0);
    CHECK(rows[2].probability[1] == 0.0);

    FanChart empty;
    CHECK_THROWS_AS(band_summary(empty, {0.6}), ValidationError);
}

TEST_CASE("fan runs carry their provenance stamps") {
    MacroAssumptions baseline = flat_baseline(2031, 2);
    FanChart fan = simulate_fan(baseline, 0.5, small_distribution(),
                                quick_settings(13, 25), "cafe1234");
    CHECK(fan.start_year == 2031);
    CHECK(fan.iterations == 25);
    CHECK(fan.seed == 13);
    CHECK(fan.rng_version == "ctr64/v1");
    CHECK(fan.calibration_digest == "cafe1234");
    CHECK(fan.percentile_levels == std::vector<double>{0.10, 0.25, 0.50, 0.75, 0.90});
}
