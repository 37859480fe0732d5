#include "debtlab/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace debtlab {

const char* kFourChannelCautionNote =
    "While the estimated local projection coefficients capture statistically significant "
    "relationships between composite climate shocks and macroeconomic variables, the "
    "empirical results for the GDP deflator and the effective interest rate should be "
    "interpreted with caution.";

void Report::meta(const std::string& key, const std::string& value) {
    metadata.emplace_back(key, value);
}

void Report::add(const std::string& key, const std::string& value) {
    summary.emplace_back(key, value);
}

ReportFormat parse_format(const std::string& s) {
    if (s == "table" || s == "text") return ReportFormat::kText;
    if (s == "csv") return ReportFormat::kCsv;
    if (s == "json") return ReportFormat::kJson;
    throw ValidationError("unknown report format '" + s + "' (expected table, csv, or json)");
}

namespace {

std::string render_table_text(const Table& table) {
    std::vector<std::size_t> width(table.columns.size());
    for (std::size_t j = 0; j < table.columns.size(); ++j)
        width[j] = std::max(table.columns[j].size(), table.units[j].size());
    std::vector<std::vector<std::string>> cells;
    cells.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        std::vector<std::string> out_row;
        for (std::size_t j = 0; j < row.size(); ++j) {
            std::string cell = row[j];
            // Shorten long fractions for the screen; files keep full precision.
            const auto dot = cell.find('.');
            if (dot != std::string::npos && cell.find_first_not_of("+-0123456789.eE") ==
                std::string::npos && cell.size() - dot > 4 &&
                cell.find('e') == std::string::npos && cell.find('E') == std::string::npos)
                cell = cell.substr(0, dot + 4);
            width[j] = std::max(width[j], cell.size());
            out_row.push_back(cell);
        }
        cells.push_back(std::move(out_row));
    }

    std::ostringstream out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out << "  ";
            out << std::string(width[j] - row[j].size(), ' ') << row[j];
        }
        out << "\n";
    };
    emit_row(table.columns);
    emit_row(table.units);
    for (const auto& row : cells) emit_row(row);
    return out.str();
}

}  // namespace

std::string to_text(const Report& report) {
    std::ostringstream out;
    out << report.command << "\n";
    for (const auto& [key, value] : report.metadata) out << "  " << key << ": " << value << "\n";
    if (!report.summary.empty()) out << "\n";
    for (const auto& [key, value] : report.summary) out << "  " << key << " = " << value << "\n";
    for (const auto& [name, table] : report.tables) {
        out << "\n" << name << "\n" << render_table_text(table);
    }
    if (!report.notes.empty()) out << "\n";
    for (const auto& note : report.notes) out << "note: " << note << "\n";
    return out.str();
}

std::string to_csv(const Report& report) {
    if (report.tables.empty())
        throw ComputationError("report '" + report.command + "' has no table to export");
    Table table = report.tables.front().second;
    std::vector<std::string> comments;
    comments.push_back("# command: " + report.command);
    for (const auto& [key, value] : report.metadata) comments.push_back("# " + key + ": " + value);
    for (const auto& [key, value] : report.summary) comments.push_back("# " + key + " = " + value);
    for (const auto& note : report.notes) comments.push_back("# note: " + note);
    for (const auto& existing : table.comments) comments.push_back(existing);
    table.comments = comments;
    return format_dsv(table);
}

std::string to_json_text(const Report& report) {
    nlohmann::json j;
    j["command"] = report.command;
    nlohmann::json meta = nlohmann::json::object();
    for (const auto& [key, value] : report.metadata) meta[key] = value;
    j["metadata"] = meta;
    nlohmann::json summary = nlohmann::json::object();
    for (const auto& [key, value] : report.summary) summary[key] = value;
    j["summary"] = summary;
    nlohmann::json tables = nlohmann::json::object();
    for (const auto& [name, table] : report.tables) {
        nlohmann::json t;
        t["columns"] = table.columns;
        t["units"] = table.units;
        t["rows"] = table.rows;
        tables[name] = t;
    }
    j["tables"] = tables;
    j["notes"] = report.notes;
    return j.dump(2) + "\n";
}

std::string render_report(const Report& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::kText: return to_text(report);
        case ReportFormat::kCsv: return to_csv(report);
        case ReportFormat::kJson: return to_json_text(report);
    }
    throw ComputationError("unhandled report format");
}

void write_report(const Report& report, const std::filesystem::path& path, ReportFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write report file: " + path.string());
    out << render_report(report, format);
}

namespace {

std::string pct(double fraction) { return format_number(fraction * 100.0); }

}  // namespace

Table path_table(const DebtPath& path) {
    Table t;
    t.columns = {"year", "debt"};
    t.units = {"-", "percent"};
    for (std::size_t k = 0; k < path.d.size(); ++k)
        t.rows.push_back({std::to_string(path.year_at(k)), pct(path.d[k])});
    return t;
}

Table decomposition_table(double d0, const MacroAssumptions& assumptions, int start_year) {
    Table t;
    t.columns = {"year",           "delta",       "interest",    "inflation",
                 "growth",         "primary_balance", "other_flows", "approx_delta"};
    t.units = {"-", "percent", "percent", "percent", "percent", "percent", "percent", "percent"};
    const auto steps = decompose_path(d0, assumptions);
    double d = d0;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const MacroYear& y = assumptions.years[k];
        t.rows.push_back({std::to_string(start_year + static_cast<int>(k)),
                          pct(steps[k].total()), pct(steps[k].interest), pct(steps[k].inflation),
                          pct(steps[k].growth), pct(steps[k].primary_balance),
                          pct(steps[k].other_flows), pct(approx_step(d, y))});
        d = debt_step(d, y);
    }
    return t;
}

Table scenario_table(const DebtPath& baseline, const DebtPath& shocked) {
    if (baseline.d.size() != shocked.d.size() || baseline.start_year != shocked.start_year)
        throw ComputationError("scenario and baseline paths cover different years");
    Table t;
    t.columns = {"year", "baseline", "scenario", "delta"};
    t.units = {"-", "percent", "percent", "percent"};
    for (std::size_t k = 0; k < baseline.d.size(); ++k)
        t.rows.push_back({std::to_string(baseline.year_at(k)), pct(baseline.d[k]),
                          pct(shocked.d[k]), pct(shocked.d[k] - baseline.d[k])});
    return t;
}

Table applied_deviation_table(const MacroAssumptions& baseline,
                              const std::map<Channel, std::vector<double>>& applied) {
    Table t;
    t.columns = {"year"};
    t.units = {"-"};
    for (const auto& [channel, devs] : applied) {
        (void)devs;
        t.columns.push_back(to_string(channel));
        t.units.push_back("percent");
    }
    for (std::size_t k = 0; k < baseline.years.size(); ++k) {
        std::vector<std::string> row = {std::to_string(baseline.year_at(k))};
        for (const auto& [channel, devs] : applied) {
            (void)channel;
            row.push_back(pct(devs[k]));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table fan_plot_table(const FanChart& fan) {
    Table t;
    t.columns = {"year", "level", "value"};
    t.units = {"-", "-", "percent"};
    const std::size_t ny = fan.bands.empty() ? 0 : fan.bands.front().size();
    for (std::size_t lvl = 0; lvl < fan.percentile_levels.size(); ++lvl)
        for (std::size_t k = 0; k < ny; ++k)
            t.rows.push_back({std::to_string(fan.start_year + static_cast<int>(k)),
                              format_number(fan.percentile_levels[lvl] * 100.0),
                              pct(fan.bands[lvl][k])});
    return t;
}

Table exceedance_table(const std::vector<ThresholdSummary>& summaries, int start_year) {
    Table t;
    t.columns = {"year"};
    t.units = {"-"};
    for (const auto& s : summaries) {
        t.columns.push_back("above_" + format_number(s.threshold * 100.0));
        t.units.push_back("fraction");
    }
    const std::size_t ny = summaries.empty() ? 0 : summaries.front().probability.size();
    for (std::size_t k = 0; k < ny; ++k) {
        std::vector<std::string> row = {std::to_string(start_year + static_cast<int>(k))};
        for (const auto& s : summaries) row.push_back(format_number(s.probability[k]));
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table fan_paths_table(const FanChart& fan) {
    Table t;
    t.columns = {"iteration", "year", "debt"};
    t.units = {"-", "-", "percent"};
    for (std::size_t it = 0; it < fan.paths.size(); ++it)
        for (std::size_t k = 0; k < fan.paths[it].size(); ++k)
            t.rows.push_back({std::to_string(it),
                              std::to_string(fan.start_year + static_cast<int>(k)),
                              pct(fan.paths[it][k])});
    return t;
}

Table counterfactual_table(const DebtPath& a, const DebtPath& b) {
    if (a.d.size() != b.d.size() || a.start_year != b.start_year)
        throw ComputationError("counterfactual paths cover different years");
    Table t;
    t.columns = {"year", "path_a", "path_b", "difference"};
    t.units = {"-", "percent", "percent", "percent"};
    for (std::size_t k = 0; k < a.d.size(); ++k)
        t.rows.push_back({std::to_string(a.year_at(k)), pct(a.d[k]), pct(b.d[k]),
                          pct(b.d[k] - a.d[k])});
    return t;
}

}  // namespace debtlab
