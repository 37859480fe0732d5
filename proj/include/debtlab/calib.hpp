#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "debtlab/core.hpp"
#include "debtlab/io.hpp"
#include "debtlab/percentile.hpp"

namespace debtlab {

enum class ScenarioMode { kOneOff, kPerPeriod, kLocalProjection, kQuantileRegression };
enum class Channel { kGrowth, kPrimaryBalance, kInterest, kInflation };
enum class DrawMode { kSingleYear, kEventProfile };

std::string to_string(ScenarioMode mode);
std::string to_string(Channel channel);
ScenarioMode parse_mode(const std::string& s);
Channel parse_channel(const std::string& s);

// Everything a scenario run needs beyond the data files. fb0 is the
// pre-disaster fiscal balance in percent of GDP (the unit the impact
// regressions use); rates and deviations elsewhere are fractions.
struct ScenarioSpec {
    ScenarioMode mode = ScenarioMode::kOneOff;
    double percentile = 0.05;  // severity level, oriented per channel
    int shock_start_year = 0;
    std::set<Channel> channels = {Channel::kGrowth, Channel::kPrimaryBalance};
    double fb0 = 0.0;
    double adaptive_capacity = 0.0;
    std::uint64_t seed = 0;
    DrawMode draw_mode = DrawMode::kSingleYear;
};

struct ShockVector {
    Channel channel = Channel::kGrowth;
    std::vector<double> deviations;  // fractions, horizon 0..H
};

// Observed impact values backing the shock construction. profile_samples
// holds one sample set per horizon (the anchor profile ships as singleton
// sets, so any percentile reproduces it exactly); marginal_samples holds the
// single-year impact distribution used by per-period draws, one entry per
// recorded disaster scaled by its damage relative to the reference event.
struct EmpiricalDistribution {
    std::map<Channel, std::vector<std::vector<double>>> profile_samples;
    std::map<Channel, std::vector<double>> marginal_samples;
    std::vector<double> damage_scales;  // damage / reference damage per event
};

// INI-style file: [section] headers, key = value pairs, and bare delimited
// rows for tabular sections. '#' starts a comment.
struct ConfigFile {
    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, std::vector<std::vector<std::string>>> tables;

    static ConfigFile parse(const std::string& content, const std::string& source_name);
    static ConfigFile load(const std::filesystem::path& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key) const;
    int get_int(const std::string& section, const std::string& key) const;
    std::uint64_t get_uint64(const std::string& section, const std::string& key) const;
};

enum class FanCentering { kBaseline, kDeclared };

struct FanSettings {
    std::uint64_t seed = 1;
    int iterations = 10000;
    FanCentering centering = FanCentering::kBaseline;
    // per-year deviation means when centering = declared; order g, i, pi, pb
    std::array<double, 4> drift = {0.0, 0.0, 0.0, 0.0};  // fractions
    double sigma_scale = 1.0;
    double ar1 = 0.0;  // shock persistence; 0 keeps draws independent
    std::vector<double> percentile_levels = {0.10, 0.25, 0.50, 0.75, 0.90};
};

// Parsed calibration: scenario defaults, anchor profile, channel
// orientations, prediction covariate constants, and fan settings.
struct Calibration {
    ScenarioSpec scenario;
    std::map<Channel, std::vector<double>> anchor_profile;  // fractions
    std::map<Channel, AdverseDirection> orientation;
    AdverseDirection damage_orientation = AdverseDirection::kUp;
    double lcompshock = 0.0;
    double extra_nd1995 = 0.0;
    double lag_fb = 0.0;  // realized pre-event fiscal balance, percent of GDP
    double decay = 0.5;   // geometric continuation factor past the last horizon
    int horizons = 6;     // applied profile length
    FanSettings fan;
    std::string digest;   // sha256 of the calibration file bytes

    static Calibration load(const std::filesystem::path& path);
    // Overlay scenario-level overrides from a second config file.
    void apply_overrides(const ConfigFile& cfg);
};

EmpiricalDistribution build_empirical_distribution(const Calibration& calib,
                                                   const std::vector<DisasterRecord>& disasters);

// Damage covariate for the impact regressions: the severity percentile of the
// recorded damage distribution, oriented so higher damage is worse.
double damage_at_severity(const std::vector<DisasterRecord>& disasters, double percentile,
                          AdverseDirection orientation);

// One-off vectors: per-horizon severity percentile of the profile sample sets.
std::map<Channel, ShockVector> build_one_off_vectors(const EmpiricalDistribution& dist,
                                                     const ScenarioSpec& spec,
                                                     const Calibration& calib);

struct PerPeriodDraw {
    int year = 0;
    double u = 0.0;  // shared across channels: a bad year is bad everywhere
    std::map<Channel, double> deviation;
};

struct ScenarioResult {
    MacroAssumptions shocked;
    DebtPath path;
    std::map<Channel, std::vector<double>> applied;  // per projection year, fractions
    std::vector<PerPeriodDraw> draws;                // per-period mode only
};

// Adds fixed shock vectors to the baseline starting at spec.shock_start_year.
ScenarioResult apply_shock_vectors(const MacroAssumptions& baseline, double d0,
                                   const ScenarioSpec& spec,
                                   const std::map<Channel, ShockVector>& vectors);

// Draws one deviation per projection year (counter RNG keyed by spec.seed).
ScenarioResult apply_per_period_draws(const MacroAssumptions& baseline, double d0,
                                      const ScenarioSpec& spec,
                                      const EmpiricalDistribution& dist,
                                      const Calibration& calib);

}  // namespace debtlab
