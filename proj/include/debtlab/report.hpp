#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "debtlab/calib.hpp"
#include "debtlab/core.hpp"
#include "debtlab/io.hpp"
#include "debtlab/sim.hpp"

namespace debtlab {

// Carried verbatim into any report produced with the four-channel flag.
extern const char* kFourChannelCautionNote;

// One command's output: metadata first, then summary scalars, then tables.
// The first table is the plot-data table a structured export writes.
struct Report {
    std::string command;
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::pair<std::string, std::string>> summary;
    std::vector<std::pair<std::string, Table>> tables;
    std::vector<std::string> notes;

    void meta(const std::string& key, const std::string& value);
    void add(const std::string& key, const std::string& value);
};

enum class ReportFormat { kText, kCsv, kJson };

ReportFormat parse_format(const std::string& s);

std::string to_text(const Report& report);
// Structured tabular export: metadata and summary as '#' comment lines, then
// the first table. Loadable by the tabular parser.
std::string to_csv(const Report& report);
std::string to_json_text(const Report& report);

std::string render_report(const Report& report, ReportFormat format);
void write_report(const Report& report, const std::filesystem::path& path, ReportFormat format);

// Table builders. Report tables carry percent units.
Table path_table(const DebtPath& path);
Table decomposition_table(double d0, const MacroAssumptions& assumptions, int start_year);
Table scenario_table(const DebtPath& baseline, const DebtPath& shocked);
Table applied_deviation_table(const MacroAssumptions& baseline,
                              const std::map<Channel, std::vector<double>>& applied);
Table fan_plot_table(const FanChart& fan);
Table exceedance_table(const std::vector<ThresholdSummary>& summaries, int start_year);
Table fan_paths_table(const FanChart& fan);
Table counterfactual_table(const DebtPath& a, const DebtPath& b);

}  // namespace debtlab
