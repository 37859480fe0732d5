#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "debtlab/calib.hpp"
#include "debtlab/core.hpp"
#include "debtlab/io.hpp"

namespace debtlab {

// Joint distribution of the four macro shock channels, estimated from
// history. Channel order everywhere in this module: growth, interest,
// inflation, primary balance. All moments are in fractions.
struct ShockDistribution {
    std::array<double, 4> mean = {0.0, 0.0, 0.0, 0.0};
    std::array<std::array<double, 4>, 4> covariance = {};
};

ShockDistribution estimate_distribution(const HistoryData& history);

struct FanChart {
    int start_year = 0;
    std::vector<double> percentile_levels;
    std::vector<std::vector<double>> bands;  // [level][year], debt ratio fractions
    std::vector<std::vector<double>> paths;  // [iteration][year], debt ratio fractions
    int iterations = 0;
    std::uint64_t seed = 0;
    std::string rng_version;
    std::string calibration_digest;
    FanCentering centering = FanCentering::kBaseline;
    std::array<double, 4> drift = {0.0, 0.0, 0.0, 0.0};
    double sigma_scale = 1.0;
    double ar1 = 0.0;
};

// Monte Carlo fan around the baseline. Every draw comes from a counter RNG
// keyed by (seed, iteration, year, channel), so the result is independent of
// thread count and schedule; threads = 0 picks the hardware count.
FanChart simulate_fan(const MacroAssumptions& baseline, double d0,
                      const ShockDistribution& dist, const FanSettings& settings,
                      const std::string& calibration_digest, int threads = 0);

// Probability that debt exceeds each threshold, per projection year.
struct ThresholdSummary {
    double threshold = 0.0;  // fraction of GDP
    std::vector<double> probability;
};

std::vector<ThresholdSummary> band_summary(const FanChart& fan,
                                           const std::vector<double>& thresholds);

}  // namespace debtlab
