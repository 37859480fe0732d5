#include "debtlab/calib.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "debtlab/rng.hpp"
#include "debtlab/sha256.hpp"

namespace debtlab {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

}  // namespace

std::string to_string(ScenarioMode mode) {
    switch (mode) {
        case ScenarioMode::kOneOff: return "one_off";
        case ScenarioMode::kPerPeriod: return "per_period";
        case ScenarioMode::kLocalProjection: return "local_projection";
        case ScenarioMode::kQuantileRegression: return "quantile_regression";
    }
    return "unknown";
}

std::string to_string(Channel channel) {
    switch (channel) {
        case Channel::kGrowth: return "growth";
        case Channel::kPrimaryBalance: return "primary_balance";
        case Channel::kInterest: return "interest";
        case Channel::kInflation: return "inflation";
    }
    return "unknown";
}

ScenarioMode parse_mode(const std::string& s) {
    if (s == "one_off") return ScenarioMode::kOneOff;
    if (s == "per_period") return ScenarioMode::kPerPeriod;
    if (s == "local_projection") return ScenarioMode::kLocalProjection;
    if (s == "quantile_regression") return ScenarioMode::kQuantileRegression;
    throw ValidationError("unknown scenario mode '" + s +
                          "' (expected one_off, per_period, local_projection, or "
                          "quantile_regression)");
}

Channel parse_channel(const std::string& s) {
    if (s == "growth") return Channel::kGrowth;
    if (s == "primary_balance") return Channel::kPrimaryBalance;
    if (s == "interest") return Channel::kInterest;
    if (s == "inflation") return Channel::kInflation;
    throw ValidationError("unknown channel '" + s +
                          "' (expected growth, primary_balance, interest, or inflation)");
}

ConfigFile ConfigFile::parse(const std::string& content, const std::string& source_name) {
    ConfigFile cfg;
    std::istringstream in(content);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ValidationError(source_name + ":" + std::to_string(lineno) +
                                      ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ValidationError(source_name + ":" + std::to_string(lineno) +
                                      ": empty section name");
            cfg.values[section];
            continue;
        }
        if (section.empty())
            throw ValidationError(source_name + ":" + std::to_string(lineno) +
                                  ": content before the first [section] header");
        auto eq = line.find('=');
        if (eq != std::string::npos) {
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw ValidationError(source_name + ":" + std::to_string(lineno) +
                                      ": empty key");
            cfg.values[section][key] = value;
        } else {
            cfg.tables[section].push_back(split_list(line));
        }
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.filename().string());
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto s = values.find(section);
    return s != values.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
    auto s = values.find(section);
    if (s == values.end())
        throw ValidationError("config: missing section [" + section + "]");
    auto k = s->second.find(key);
    if (k == s->second.end())
        throw ValidationError("config: section [" + section + "] missing key '" + key + "'");
    return k->second;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
    return parse_number(get_string(section, key), "[" + section + "] " + key);
}

int ConfigFile::get_int(const std::string& section, const std::string& key) const {
    double v = get_double(section, key);
    int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw ValidationError("config: [" + section + "] " + key + " must be an integer");
    return i;
}

std::uint64_t ConfigFile::get_uint64(const std::string& section, const std::string& key) const {
    const std::string s = get_string(section, key);
    try {
        size_t pos = 0;
        unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("config: [" + section + "] " + key +
                              " must be a non-negative integer, got '" + s + "'");
    }
}

namespace {

AdverseDirection parse_direction(const std::string& s, const std::string& what) {
    if (s == "down") return AdverseDirection::kDown;
    if (s == "up") return AdverseDirection::kUp;
    throw ValidationError("config: orientation for " + what +
                          " must be 'down' or 'up', got '" + s + "'");
}

void read_scenario_section(const ConfigFile& cfg, ScenarioSpec& spec) {
    if (!cfg.values.count("scenario")) return;
    if (cfg.has("scenario", "mode")) spec.mode = parse_mode(cfg.get_string("scenario", "mode"));
    if (cfg.has("scenario", "percentile")) spec.percentile = cfg.get_double("scenario", "percentile");
    if (cfg.has("scenario", "shock_start_year"))
        spec.shock_start_year = cfg.get_int("scenario", "shock_start_year");
    if (cfg.has("scenario", "channels")) {
        spec.channels.clear();
        for (const auto& name : split_list(cfg.get_string("scenario", "channels")))
            spec.channels.insert(parse_channel(name));
    }
    if (cfg.has("scenario", "fb0")) spec.fb0 = cfg.get_double("scenario", "fb0");
    if (cfg.has("scenario", "adaptive_capacity"))
        spec.adaptive_capacity = cfg.get_double("scenario", "adaptive_capacity");
    if (cfg.has("scenario", "seed")) spec.seed = cfg.get_uint64("scenario", "seed");
    if (cfg.has("scenario", "draw_mode")) {
        const std::string dm = cfg.get_string("scenario", "draw_mode");
        if (dm == "single_year") spec.draw_mode = DrawMode::kSingleYear;
        else if (dm == "event_profile") spec.draw_mode = DrawMode::kEventProfile;
        else
            throw ValidationError("config: [scenario] draw_mode must be 'single_year' or "
                                  "'event_profile', got '" + dm + "'");
    }
    if (spec.percentile <= 0.0 || spec.percentile >= 1.0)
        throw ValidationError("config: [scenario] percentile must lie strictly between 0 and 1");
}

void read_anchor_profile(const ConfigFile& cfg, Calibration& calib) {
    auto it = cfg.tables.find("anchor_profile");
    if (it == cfg.tables.end()) return;
    const auto& rows = it->second;
    if (rows.size() < 2)
        throw ValidationError("config: [anchor_profile] needs a header row and data rows");
    const auto& header = rows.front();
    if (header.empty() || header[0] != "horizon")
        throw ValidationError("config: [anchor_profile] first column must be 'horizon'");
    std::vector<Channel> cols;
    for (size_t j = 1; j < header.size(); ++j) cols.push_back(parse_channel(header[j]));
    calib.anchor_profile.clear();
    for (Channel c : cols) calib.anchor_profile[c] = {};
    for (size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != header.size())
            throw ValidationError("config: [anchor_profile] row " + std::to_string(r) +
                                  " has " + std::to_string(rows[r].size()) +
                                  " fields, header has " + std::to_string(header.size()));
        int h = static_cast<int>(parse_number(rows[r][0], "anchor_profile horizon"));
        if (h != static_cast<int>(r) - 1)
            throw ValidationError("config: [anchor_profile] horizons must run 0,1,2,... "
                                  "without gaps");
        for (size_t j = 1; j < header.size(); ++j) {
            double pp = parse_number(rows[r][j], "anchor_profile " + header[j]);
            calib.anchor_profile[cols[j - 1]].push_back(pp / 100.0);  // pp of GDP in the file
        }
    }
}

void read_orientation(const ConfigFile& cfg, Calibration& calib) {
    auto it = cfg.values.find("orientation");
    if (it == cfg.values.end()) return;
    for (const auto& [key, value] : it->second) {
        if (key == "damage") {
            calib.damage_orientation = parse_direction(value, key);
        } else {
            calib.orientation[parse_channel(key)] = parse_direction(value, key);
        }
    }
}

void read_prediction(const ConfigFile& cfg, Calibration& calib) {
    if (!cfg.values.count("prediction")) return;
    if (cfg.has("prediction", "lcompshock"))
        calib.lcompshock = cfg.get_double("prediction", "lcompshock");
    if (cfg.has("prediction", "extra_nd1995"))
        calib.extra_nd1995 = cfg.get_double("prediction", "extra_nd1995");
    if (cfg.has("prediction", "lag_fb"))
        calib.lag_fb = cfg.get_double("prediction", "lag_fb");
    if (cfg.has("prediction", "decay")) {
        calib.decay = cfg.get_double("prediction", "decay");
        if (calib.decay < 0.0 || calib.decay >= 1.0)
            throw ValidationError("config: [prediction] decay must lie in [0, 1)");
    }
    if (cfg.has("prediction", "horizons")) {
        calib.horizons = cfg.get_int("prediction", "horizons");
        if (calib.horizons < 1)
            throw ValidationError("config: [prediction] horizons must be at least 1");
    }
}

void read_fan(const ConfigFile& cfg, FanSettings& fan) {
    if (!cfg.values.count("fan")) return;
    if (cfg.has("fan", "seed")) fan.seed = cfg.get_uint64("fan", "seed");
    if (cfg.has("fan", "iterations")) {
        fan.iterations = cfg.get_int("fan", "iterations");
        if (fan.iterations < 1)
            throw ValidationError("config: [fan] iterations must be at least 1");
    }
    if (cfg.has("fan", "centering")) {
        const std::string c = cfg.get_string("fan", "centering");
        if (c == "baseline") fan.centering = FanCentering::kBaseline;
        else if (c == "declared") fan.centering = FanCentering::kDeclared;
        else
            throw ValidationError("config: [fan] centering must be 'baseline' or 'declared', "
                                  "got '" + c + "'");
    }
    const char* drift_keys[4] = {"drift_growth", "drift_interest", "drift_inflation",
                                 "drift_primary_balance"};
    for (int k = 0; k < 4; ++k)
        if (cfg.has("fan", drift_keys[k]))
            fan.drift[k] = cfg.get_double("fan", drift_keys[k]) / 100.0;  // pp in the file
    if (cfg.has("fan", "sigma_scale")) {
        fan.sigma_scale = cfg.get_double("fan", "sigma_scale");
        if (fan.sigma_scale <= 0.0)
            throw ValidationError("config: [fan] sigma_scale must be positive");
    }
    if (cfg.has("fan", "ar1")) {
        fan.ar1 = cfg.get_double("fan", "ar1");
        if (fan.ar1 <= -1.0 || fan.ar1 >= 1.0)
            throw ValidationError("config: [fan] ar1 must lie strictly between -1 and 1");
    }
    if (cfg.has("fan", "percentiles")) {
        fan.percentile_levels.clear();
        for (const auto& tok : split_list(cfg.get_string("fan", "percentiles"))) {
            double p = parse_number(tok, "[fan] percentiles") / 100.0;
            if (p <= 0.0 || p >= 1.0)
                throw ValidationError("config: [fan] percentiles must lie strictly between "
                                      "0 and 100");
            fan.percentile_levels.push_back(p);
        }
        if (!std::is_sorted(fan.percentile_levels.begin(), fan.percentile_levels.end()))
            throw ValidationError("config: [fan] percentiles must be increasing");
    }
}

}  // namespace

Calibration Calibration::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open calibration file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();

    Calibration calib;
    calib.digest = sha256_hex(content);
    ConfigFile cfg = ConfigFile::parse(content, path.filename().string());
    read_scenario_section(cfg, calib.scenario);
    read_anchor_profile(cfg, calib);
    read_orientation(cfg, calib);
    read_prediction(cfg, calib);
    read_fan(cfg, calib.fan);

    for (const auto& [channel, profile] : calib.anchor_profile) {
        if (!calib.orientation.count(channel))
            throw ValidationError("config: [orientation] missing entry for channel '" +
                                  to_string(channel) + "'");
        (void)profile;
    }
    return calib;
}

void Calibration::apply_overrides(const ConfigFile& cfg) {
    read_scenario_section(cfg, scenario);
    read_anchor_profile(cfg, *this);
    read_orientation(cfg, *this);
    read_prediction(cfg, *this);
    read_fan(cfg, fan);
}

EmpiricalDistribution build_empirical_distribution(const Calibration& calib,
                                                   const std::vector<DisasterRecord>& disasters) {
    EmpiricalDistribution dist;
    double ref = 0.0;
    for (const auto& d : disasters) ref = std::max(ref, d.damage_gdp);
    for (const auto& [channel, profile] : calib.anchor_profile) {
        auto& sets = dist.profile_samples[channel];
        sets.reserve(profile.size());
        for (double v : profile) sets.push_back({v});
        if (ref > 0.0) {
            auto& marg = dist.marginal_samples[channel];
            marg.reserve(disasters.size());
            for (const auto& d : disasters) marg.push_back(profile.front() * d.damage_gdp / ref);
        }
    }
    if (ref > 0.0) {
        dist.damage_scales.reserve(disasters.size());
        for (const auto& d : disasters) dist.damage_scales.push_back(d.damage_gdp / ref);
    }
    return dist;
}

double damage_at_severity(const std::vector<DisasterRecord>& disasters, double percentile,
                          AdverseDirection orientation) {
    if (disasters.empty())
        throw ValidationError("damage severity needs at least one recorded disaster");
    std::vector<double> damages;
    damages.reserve(disasters.size());
    for (const auto& d : disasters) damages.push_back(d.damage_gdp);
    return severity_percentile(damages, percentile, orientation);
}

std::map<Channel, ShockVector> build_one_off_vectors(const EmpiricalDistribution& dist,
                                                     const ScenarioSpec& spec,
                                                     const Calibration& calib) {
    std::map<Channel, ShockVector> out;
    for (Channel channel : spec.channels) {
        auto it = dist.profile_samples.find(channel);
        if (it == dist.profile_samples.end())
            throw ValidationError("no impact profile available for channel '" +
                                  to_string(channel) + "'");
        auto dir_it = calib.orientation.find(channel);
        if (dir_it == calib.orientation.end())
            throw ValidationError("no orientation declared for channel '" +
                                  to_string(channel) + "'");
        ShockVector vec;
        vec.channel = channel;
        vec.deviations.reserve(it->second.size());
        for (const auto& samples : it->second)
            vec.deviations.push_back(severity_percentile(samples, spec.percentile, dir_it->second));
        out[channel] = vec;
    }
    return out;
}

namespace {

void add_deviation(MacroYear& y, Channel channel, double dev) {
    switch (channel) {
        case Channel::kGrowth: y.g += dev; break;
        case Channel::kPrimaryBalance: y.pb += dev; break;
        case Channel::kInterest: y.i += dev; break;
        case Channel::kInflation: y.pi += dev; break;
    }
}

int shock_start_index(const MacroAssumptions& baseline, const ScenarioSpec& spec) {
    int k0 = baseline.index_of(spec.shock_start_year);
    if (k0 < 0)
        throw ValidationError("shock_start_year " + std::to_string(spec.shock_start_year) +
                              " is outside the projection horizon");
    return k0;
}

}  // namespace

ScenarioResult apply_shock_vectors(const MacroAssumptions& baseline, double d0,
                                   const ScenarioSpec& spec,
                                   const std::map<Channel, ShockVector>& vectors) {
    const int k0 = shock_start_index(baseline, spec);
    const int n = static_cast<int>(baseline.years.size());

    ScenarioResult res;
    res.shocked = baseline;
    for (const auto& [channel, vec] : vectors) {
        auto& applied = res.applied[channel];
        applied.assign(n, 0.0);
        for (int h = 0; h < static_cast<int>(vec.deviations.size()); ++h) {
            int t = k0 + h;
            if (t >= n) break;  // profile tail past the horizon end is dropped
            applied[t] += vec.deviations[h];
            add_deviation(res.shocked.years[t], channel, vec.deviations[h]);
        }
    }
    res.path = project_path(d0, res.shocked);
    return res;
}

ScenarioResult apply_per_period_draws(const MacroAssumptions& baseline, double d0,
                                      const ScenarioSpec& spec,
                                      const EmpiricalDistribution& dist,
                                      const Calibration& calib) {
    const int k0 = shock_start_index(baseline, spec);
    const int n = static_cast<int>(baseline.years.size());

    for (Channel channel : spec.channels) {
        if (!dist.marginal_samples.count(channel))
            throw ValidationError("per-period draws need recorded disasters with positive "
                                  "damage to build the impact distribution for channel '" +
                                  to_string(channel) + "'");
    }

    ScenarioResult res;
    res.shocked = baseline;
    for (Channel channel : spec.channels) res.applied[channel].assign(n, 0.0);

    for (int t = 0; k0 + t < n; ++t) {
        PerPeriodDraw draw;
        draw.year = baseline.start_year + k0 + t;
        draw.u = rng::uniform(spec.seed, rng::kStreamPerPeriod,
                              static_cast<std::uint64_t>(t), 0);
        if (spec.draw_mode == DrawMode::kSingleYear) {
            // One single-year deviation per channel; the same u across
            // channels keeps a bad year bad everywhere.
            for (Channel channel : spec.channels) {
                double dev = severity_percentile(dist.marginal_samples.at(channel), draw.u,
                                                 calib.orientation.at(channel));
                draw.deviation[channel] = dev;
                res.applied[channel][k0 + t] += dev;
            }
        } else {
            // Draw an event severity and roll its whole profile forward.
            double scale = percentile(dist.damage_scales, 1.0 - draw.u);
            for (Channel channel : spec.channels) {
                const auto& profile = calib.anchor_profile.at(channel);
                draw.deviation[channel] = profile.front() * scale;
                for (int h = 0; h < static_cast<int>(profile.size()) && k0 + t + h < n; ++h)
                    res.applied[channel][k0 + t + h] += profile[h] * scale;
            }
        }
        res.draws.push_back(draw);
    }

    for (const auto& [channel, devs] : res.applied)
        for (int t = 0; t < n; ++t)
            add_deviation(res.shocked.years[t], channel, devs[t]);

    res.path = project_path(d0, res.shocked);
    return res;
}

}  // namespace debtlab
