#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "debtlab/calib.hpp"
#include "debtlab/core.hpp"
#include "debtlab/econ.hpp"
#include "debtlab/io.hpp"
#include "debtlab/percentile.hpp"
#include "debtlab/report.hpp"
#include "debtlab/sha256.hpp"
#include "debtlab/sim.hpp"

namespace {

using namespace debtlab;

std::string pct(double fraction) { return format_number(fraction * 100.0); }

std::string file_sha256(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

std::string channel_list(const std::set<Channel>& channels) {
    std::string out;
    for (Channel c : channels) {
        if (!out.empty()) out += ",";
        out += to_string(c);
    }
    return out;
}

const std::set<Channel> kAllChannels = {Channel::kGrowth, Channel::kPrimaryBalance,
                                        Channel::kInterest, Channel::kInflation};

struct OutputOptions {
    std::string out;
    std::string format = "csv";
};

void add_output_options(CLI::App* cmd, OutputOptions& opts) {
    cmd->add_option("--out", opts.out, "Write the report to this file");
    cmd->add_option("--format", opts.format, "File format for --out")
        ->check(CLI::IsMember({"text", "table", "csv", "json"}))
        ->capture_default_str();
}

void emit(const Report& report, const OutputOptions& opts) {
    std::cout << to_text(report);
    if (!opts.out.empty()) write_report(report, opts.out, parse_format(opts.format));
}

// Shared inputs: manifest, observed history, projection assumptions, and the
// debt anchor (last observed ratio).
struct Workspace {
    Manifest manifest;
    HistoryData history;
    ProjectionData projections;
    double d0 = 0.0;
};

Workspace load_workspace(const std::string& manifest_path) {
    Workspace ws;
    ws.manifest = Manifest::load(manifest_path);
    ws.history = load_history(ws.manifest);
    ws.projections = load_projections(ws.manifest, ws.history.mean_other_flows);
    ws.d0 = ws.history.debt.d.back();
    return ws;
}

void attach_input_notes(Report& report, const Workspace& ws) {
    for (const auto& w : ws.history.warnings) report.notes.push_back(w);
    for (const auto& w : ws.projections.warnings) report.notes.push_back(w);
    for (const auto& e : ws.projections.provenance) {
        report.notes.push_back(e.dataset + " " + e.column + " " + std::to_string(e.year) + ": " +
                               e.rule + " (" + pct(e.value) + " percent)");
    }
}

Report run_baseline(const Workspace& ws, int horizon_end) {
    MacroAssumptions assumptions = ws.projections.macro;
    if (horizon_end > 0) assumptions = extend_assumptions(assumptions, horizon_end);
    DebtPath path = project_path(ws.d0, assumptions);

    Report rpt;
    rpt.command = "baseline";
    rpt.meta("manifest_digest", ws.manifest.digest);
    const int anchor_year = ws.history.debt.year_at(ws.history.debt.size() - 1);
    rpt.add("anchor_year", std::to_string(anchor_year));
    rpt.add("anchor_debt_pct", pct(ws.d0));
    rpt.add("final_year", std::to_string(path.year_at(path.size() - 1)));
    rpt.add("final_debt_pct", pct(path.d.back()));
    int crossing = first_year_below(ws.history.debt, 0.60);
    if (crossing == 0) crossing = first_year_below(path, 0.60);
    rpt.add("first_year_below_60pct", std::to_string(crossing));
    rpt.add("stabilization_year",
            std::to_string(stabilization_year(path, path.start_year + 1)));

    rpt.tables.emplace_back("debt_path", path_table(path));
    rpt.tables.emplace_back("annual_decomposition",
                            decomposition_table(ws.d0, assumptions, assumptions.start_year));

    Table sfa;
    sfa.columns = {"year", "implied_stock_flow_pct"};
    sfa.units = {"-", "percent"};
    for (const auto& [year, resid] : implied_sfa_by_year(ws.history)) {
        sfa.rows.push_back({std::to_string(year), pct(resid)});
    }
    rpt.tables.emplace_back("history_stock_flow", sfa);

    attach_input_notes(rpt, ws);
    if (path.negative_debt_warning) rpt.notes.push_back("projected debt ratio turns negative");
    return rpt;
}

// Applies the configured scenario to the projection baseline. Model-based
// modes read their coefficient file through the manifest.
ScenarioResult run_configured_scenario(const Workspace& ws,
                                       const std::vector<DisasterRecord>& disasters,
                                       const Calibration& calib) {
    const ScenarioSpec& spec = calib.scenario;
    switch (spec.mode) {
        case ScenarioMode::kOneOff: {
            auto dist = build_empirical_distribution(calib, disasters);
            auto vectors = build_one_off_vectors(dist, spec, calib);
            return apply_shock_vectors(ws.projections.macro, ws.d0, spec, vectors);
        }
        case ScenarioMode::kPerPeriod: {
            auto dist = build_empirical_distribution(calib, disasters);
            return apply_per_period_draws(ws.projections.macro, ws.d0, spec, dist, calib);
        }
        case ScenarioMode::kLocalProjection:
        case ScenarioMode::kQuantileRegression: {
            const bool lp = spec.mode == ScenarioMode::kLocalProjection;
            const std::string role = lp ? "coefficients_lp" : "coefficients_qr";
            auto coeffs = CoefficientSet::load(ws.manifest.resolve(role));
            const std::string expected = lp ? "local_projection" : "quantile_regression";
            if (coeffs.model != expected) {
                throw ValidationError("coefficient file for role '" + role + "' declares model '" +
                                      coeffs.model + "'; scenario mode needs '" + expected + "'");
            }
            double damage_pct =
                100.0 * damage_at_severity(disasters, spec.percentile, calib.damage_orientation);
            auto vectors = build_model_vectors(coeffs, calib, spec, damage_pct);
            return apply_shock_vectors(ws.projections.macro, ws.d0, spec, vectors);
        }
    }
    throw ComputationError("unhandled scenario mode");
}

void require_model_mode_for_four_channels(ScenarioMode mode) {
    if (mode == ScenarioMode::kOneOff || mode == ScenarioMode::kPerPeriod) {
        throw ValidationError(
            "four-channel application needs a model-based mode (local_projection or "
            "quantile_regression); the anchor profile only covers growth and primary balance");
    }
}

void summarize_paths(Report& rpt, const DebtPath& baseline, const ScenarioResult& result,
                     double d0, int shock_start_year) {
    const DebtPath& shocked = result.path;
    rpt.add("baseline_final_pct", pct(baseline.d.back()));
    rpt.add("scenario_final_pct", pct(shocked.d.back()));
    rpt.add("final_delta_pp", pct(shocked.d.back() - baseline.d.back()));

    double peak_delta = 0.0;
    int peak_delta_year = shocked.start_year;
    double max_step = 0.0;
    int max_step_year = shocked.start_year;
    double prev = d0;
    for (std::size_t k = 0; k < shocked.size(); ++k) {
        const double delta = shocked.d[k] - baseline.d[k];
        if (k == 0 || delta > peak_delta) {
            peak_delta = delta;
            peak_delta_year = shocked.year_at(k);
        }
        const double step = shocked.d[k] - prev;
        if (k == 0 || step > max_step) {
            max_step = step;
            max_step_year = shocked.year_at(k);
        }
        prev = shocked.d[k];
    }
    rpt.add("peak_delta_pp", pct(peak_delta));
    rpt.add("peak_delta_year", std::to_string(peak_delta_year));
    rpt.add("max_annual_increase_pp", pct(max_step));
    rpt.add("max_annual_increase_year", std::to_string(max_step_year));
    rpt.add("baseline_stabilization_year",
            std::to_string(stabilization_year(baseline, shock_start_year)));
    rpt.add("scenario_stabilization_year",
            std::to_string(stabilization_year(shocked, shock_start_year)));
}

Table draws_table(const std::vector<PerPeriodDraw>& draws) {
    Table t;
    t.columns = {"year", "u"};
    t.units = {"-", "-"};
    for (const auto& d : draws) t.rows.push_back({std::to_string(d.year), format_number(d.u)});
    return t;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"debtlab: public debt stress-testing toolkit"};
    app.require_subcommand(1);

    std::string manifest_path = "replication/manifest.json";

    // baseline
    auto* baseline_cmd =
        app.add_subcommand("baseline", "Project the debt path under baseline assumptions");
    int horizon_end = 0;
    OutputOptions baseline_out;
    baseline_cmd->add_option("--manifest", manifest_path, "Dataset manifest")
        ->capture_default_str();
    baseline_cmd->add_option("--horizon-end", horizon_end,
                             "Extend the projection to this year by repeating the final "
                             "assumptions");
    add_output_options(baseline_cmd, baseline_out);
    baseline_cmd->callback([&]() {
        Workspace ws = load_workspace(manifest_path);
        emit(run_baseline(ws, horizon_end), baseline_out);
    });

    // scenario
    auto* scenario_cmd =
        app.add_subcommand("scenario", "Apply a disaster shock scenario to the baseline");
    std::string scenario_config;
    std::string mode_override;
    std::uint64_t seed_override = 0;
    double percentile_override = 0.0;
    bool four_channel = false;
    OutputOptions scenario_out;
    scenario_cmd->add_option("--manifest", manifest_path, "Dataset manifest")
        ->capture_default_str();
    scenario_cmd->add_option("--config", scenario_config,
                             "Scenario config overlaid on the calibration");
    scenario_cmd->add_option("--mode", mode_override,
                             "Override the scenario mode: one_off, per_period, "
                             "local_projection, or quantile_regression");
    auto* seed_opt = scenario_cmd->add_option("--seed", seed_override,
                                              "Override the per-period draw seed");
    auto* pct_opt = scenario_cmd->add_option("--percentile", percentile_override,
                                             "Override the severity percentile (0,1)");
    scenario_cmd->add_flag("--four-channel", four_channel,
                           "Shock all four channels (model-based modes only)");
    add_output_options(scenario_cmd, scenario_out);
    scenario_cmd->callback([&]() {
        Workspace ws = load_workspace(manifest_path);
        auto disasters = load_disasters(ws.manifest);
        Calibration calib = Calibration::load(ws.manifest.resolve("calibration"));
        std::string overlay_digest;
        if (!scenario_config.empty()) {
            calib.apply_overrides(ConfigFile::load(scenario_config));
            overlay_digest = file_sha256(scenario_config);
        }
        if (!mode_override.empty()) calib.scenario.mode = parse_mode(mode_override);
        if (seed_opt->count() > 0) calib.scenario.seed = seed_override;
        if (pct_opt->count() > 0) {
            if (!(percentile_override > 0.0 && percentile_override < 1.0))
                throw ValidationError("--percentile must lie strictly between 0 and 1");
            calib.scenario.percentile = percentile_override;
        }
        if (four_channel) {
            require_model_mode_for_four_channels(calib.scenario.mode);
            calib.scenario.channels = kAllChannels;
        }

        DebtPath baseline = project_path(ws.d0, ws.projections.macro);
        ScenarioResult result = run_configured_scenario(ws, disasters, calib);
        const ScenarioSpec& spec = calib.scenario;

        Report rpt;
        rpt.command = "scenario";
        rpt.meta("manifest_digest", ws.manifest.digest);
        rpt.meta("calibration_digest", calib.digest);
        if (!overlay_digest.empty()) rpt.meta("scenario_config_digest", overlay_digest);
        rpt.meta("mode", to_string(spec.mode));
        rpt.meta("severity_percentile", format_number(spec.percentile));
        rpt.meta("channels", channel_list(spec.channels));
        rpt.meta("seed", std::to_string(spec.seed));
        rpt.add("shock_start_year", std::to_string(spec.shock_start_year));
        summarize_paths(rpt, baseline, result, ws.d0, spec.shock_start_year);

        rpt.tables.emplace_back("scenario_path", scenario_table(baseline, result.path));
        rpt.tables.emplace_back("applied_deviations",
                                applied_deviation_table(ws.projections.macro, result.applied));
        rpt.tables.emplace_back(
            "shocked_decomposition",
            decomposition_table(ws.d0, result.shocked, result.shocked.start_year));
        if (!result.draws.empty()) rpt.tables.emplace_back("draws", draws_table(result.draws));

        if (four_channel) rpt.notes.push_back(kFourChannelCautionNote);
        attach_input_notes(rpt, ws);
        if (result.path.negative_debt_warning)
            rpt.notes.push_back("projected debt ratio turns negative");
        emit(rpt, scenario_out);
    });

    // fan
    auto* fan_cmd = app.add_subcommand("fan", "Monte Carlo fan chart around the baseline");
    std::uint64_t fan_seed = 0;
    int fan_iterations = 0;
    int fan_threads = 0;
    bool dump_paths = false;
    std::vector<double> fan_percentiles;
    std::vector<double> fan_thresholds;
    OutputOptions fan_out;
    fan_cmd->add_option("--manifest", manifest_path, "Dataset manifest")->capture_default_str();
    auto* fan_seed_opt = fan_cmd->add_option("--seed", fan_seed, "Override the fan seed");
    auto* fan_iter_opt =
        fan_cmd->add_option("--iterations", fan_iterations, "Override the iteration count");
    fan_cmd->add_option("--percentiles", fan_percentiles,
                        "Band levels in percent, e.g. 10,25,50,75,90")
        ->delimiter(',');
    fan_cmd->add_option("--thresholds", fan_thresholds,
                        "Exceedance thresholds in percent of GDP (default 60)")
        ->delimiter(',');
    fan_cmd->add_option("--threads", fan_threads, "Worker threads; 0 = hardware count");
    fan_cmd->add_flag("--dump-paths", dump_paths, "Include every simulated path in the report");
    add_output_options(fan_cmd, fan_out);
    fan_cmd->callback([&]() {
        Workspace ws = load_workspace(manifest_path);
        Calibration calib = Calibration::load(ws.manifest.resolve("calibration"));
        FanSettings settings = calib.fan;
        if (fan_seed_opt->count() > 0) settings.seed = fan_seed;
        if (fan_iter_opt->count() > 0) settings.iterations = fan_iterations;
        if (!fan_percentiles.empty()) {
            std::vector<double> levels;
            for (double p : fan_percentiles) {
                if (!(p > 0.0 && p < 100.0))
                    throw ValidationError("--percentiles must lie strictly between 0 and 100");
                levels.push_back(p / 100.0);
            }
            if (!std::is_sorted(levels.begin(), levels.end()) ||
                std::adjacent_find(levels.begin(), levels.end()) != levels.end())
                throw ValidationError("--percentiles must be strictly increasing");
            settings.percentile_levels = levels;
        }
        std::vector<double> thresholds;
        if (fan_thresholds.empty()) fan_thresholds = {60.0};
        for (double t : fan_thresholds) thresholds.push_back(t / 100.0);

        ShockDistribution dist = estimate_distribution(ws.history);
        FanChart fan = simulate_fan(ws.projections.macro, ws.d0, dist, settings, calib.digest,
                                    fan_threads);
        auto summaries = band_summary(fan, thresholds);

        Report rpt;
        rpt.command = "fan";
        rpt.meta("manifest_digest", ws.manifest.digest);
        rpt.meta("calibration_digest", calib.digest);
        rpt.meta("rng", fan.rng_version);
        rpt.meta("seed", std::to_string(fan.seed));
        rpt.meta("iterations", std::to_string(fan.iterations));
        rpt.meta("centering",
                 fan.centering == FanCentering::kDeclared ? "declared" : "baseline");
        rpt.meta("sigma_scale", format_number(fan.sigma_scale));
        rpt.meta("ar1", format_number(fan.ar1));
        const int final_year = fan.start_year + static_cast<int>(fan.bands.front().size()) - 1;
        rpt.add("final_year", std::to_string(final_year));
        for (std::size_t li = 0; li < fan.percentile_levels.size(); ++li) {
            rpt.add("p" + format_number(fan.percentile_levels[li] * 100.0) + "_final_pct",
                    pct(fan.bands[li].back()));
        }
        for (const auto& s : summaries) {
            rpt.add("prob_above_" + pct(s.threshold) + "_final",
                    format_number(s.probability.back()));
        }

        rpt.tables.emplace_back("fan_bands", fan_plot_table(fan));
        rpt.tables.emplace_back("exceedance", exceedance_table(summaries, fan.start_year));
        if (dump_paths) rpt.tables.emplace_back("paths", fan_paths_table(fan));
        attach_input_notes(rpt, ws);
        emit(rpt, fan_out);
    });

    // estimate
    auto* estimate_cmd =
        app.add_subcommand("estimate", "Estimate impact regressions from a panel dataset");
    std::string model_kind = "local_projection";
    std::string outcome;
    int est_horizons = 3;
    double est_tau = 0.95;
    std::string coeff_out;
    estimate_cmd->add_option("--manifest", manifest_path, "Dataset manifest")
        ->capture_default_str();
    estimate_cmd->add_option("--model", model_kind, "local_projection or quantile_regression")
        ->check(CLI::IsMember({"local_projection", "quantile_regression", "lp", "qr"}))
        ->capture_default_str();
    estimate_cmd->add_option("--outcome", outcome, "Outcome column in the panel")->required();
    estimate_cmd->add_option("--horizons", est_horizons, "Estimated horizons (h = 0..H-1)")
        ->capture_default_str();
    estimate_cmd->add_option("--tau", est_tau, "Quantile level for quantile_regression")
        ->capture_default_str();
    estimate_cmd->add_option("--out", coeff_out, "Write the coefficient file here");
    estimate_cmd->callback([&]() {
        Manifest manifest = Manifest::load(manifest_path);
        Panel panel = Panel::from_table(read_dsv(manifest.resolve("panel")));
        LpEstimateSpec espec;
        espec.outcome = outcome;
        espec.horizons = est_horizons;
        const bool lp = model_kind == "local_projection" || model_kind == "lp";
        if (!lp && !(est_tau > 0.0 && est_tau < 1.0))
            throw ValidationError("--tau must lie strictly between 0 and 1");
        OutcomeModel model =
            lp ? lp_estimate(panel, espec) : qr_estimate(panel, espec, est_tau);

        CoefficientSet set;
        set.model = lp ? "local_projection" : "quantile_regression";
        set.outcomes[outcome] = model;
        if (!coeff_out.empty()) set.save(coeff_out);

        Report rpt;
        rpt.command = "estimate";
        rpt.meta("manifest_digest", manifest.digest);
        rpt.meta("model", set.model);
        rpt.meta("outcome", outcome);
        if (!lp) rpt.meta("tau", format_number(est_tau));
        Table t;
        t.columns = {"horizon", "term", "estimate", "se"};
        t.units = {"-", "-", "-", "-"};
        for (const auto& h : model.horizons) {
            rpt.add("h" + std::to_string(h.horizon) + "_n_obs", std::to_string(h.n_obs));
            rpt.add("h" + std::to_string(h.horizon) + "_prediction_se",
                    format_number(h.prediction_se));
            if (lp)
                rpt.add("h" + std::to_string(h.horizon) + "_r_squared",
                        format_number(h.r_squared));
            for (const auto& [term, coef] : h.terms) {
                t.rows.push_back({std::to_string(h.horizon), term, format_number(coef.estimate),
                                  format_number(coef.se)});
            }
        }
        rpt.tables.emplace_back("coefficients", t);
        if (!coeff_out.empty()) rpt.notes.push_back("coefficient file written to " + coeff_out);
        std::cout << to_text(rpt);
    });

    // counterfactual
    auto* counter_cmd = app.add_subcommand(
        "counterfactual", "Run two scenario configs and compare the resulting paths");
    std::string config_a;
    std::string config_b;
    bool counter_four_channel = false;
    OutputOptions counter_out;
    counter_cmd->add_option("--manifest", manifest_path, "Dataset manifest")
        ->capture_default_str();
    counter_cmd->add_option("--config-a", config_a, "Reference scenario config")->required();
    counter_cmd->add_option("--config-b", config_b, "Alternative scenario config")->required();
    counter_cmd->add_flag("--four-channel", counter_four_channel,
                          "Shock all four channels (model-based modes only)");
    add_output_options(counter_cmd, counter_out);
    counter_cmd->callback([&]() {
        Workspace ws = load_workspace(manifest_path);
        auto disasters = load_disasters(ws.manifest);
        Calibration base = Calibration::load(ws.manifest.resolve("calibration"));

        auto configure = [&](const std::string& path) {
            Calibration c = base;
            c.apply_overrides(ConfigFile::load(path));
            if (counter_four_channel) {
                require_model_mode_for_four_channels(c.scenario.mode);
                c.scenario.channels = kAllChannels;
            }
            return c;
        };
        Calibration ca = configure(config_a);
        Calibration cb = configure(config_b);
        ScenarioResult ra = run_configured_scenario(ws, disasters, ca);
        ScenarioResult rb = run_configured_scenario(ws, disasters, cb);
        CounterfactualComparison cmp =
            compare_scenarios(ra, rb, ca.scenario.shock_start_year);

        Report rpt;
        rpt.command = "counterfactual";
        rpt.meta("manifest_digest", ws.manifest.digest);
        rpt.meta("calibration_digest", base.digest);
        rpt.meta("config_a_digest", file_sha256(config_a));
        rpt.meta("config_b_digest", file_sha256(config_b));
        rpt.meta("mode_a", to_string(ca.scenario.mode));
        rpt.meta("mode_b", to_string(cb.scenario.mode));
        rpt.add("shock_start_year", std::to_string(ca.scenario.shock_start_year));
        rpt.add("peak_a_pct", format_number(cmp.peak_a));
        rpt.add("peak_b_pct", format_number(cmp.peak_b));
        rpt.add("peak_reduction_pp", format_number(cmp.peak_reduction));
        rpt.add("stabilization_a", std::to_string(cmp.stabilization_a));
        rpt.add("stabilization_b", std::to_string(cmp.stabilization_b));
        rpt.add("stabilization_gain_years",
                std::to_string(cmp.stabilization_a - cmp.stabilization_b));

        rpt.tables.emplace_back("paths", counterfactual_table(ra.path, rb.path));
        rpt.tables.emplace_back("applied_a",
                                applied_deviation_table(ws.projections.macro, ra.applied));
        rpt.tables.emplace_back("applied_b",
                                applied_deviation_table(ws.projections.macro, rb.applied));
        if (counter_four_channel) rpt.notes.push_back(kFourChannelCautionNote);
        attach_input_notes(rpt, ws);
        emit(rpt, counter_out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
