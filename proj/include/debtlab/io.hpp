#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "debtlab/core.hpp"

namespace debtlab {

// Input/config problems: bad files, missing columns, unit mismatches. CLI exit 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numeric/model failures: solver breakdowns, degenerate inputs. CLI exit 3.
struct ComputationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Delimiter-separated table with a header row and a mandatory units row.
// Leading '#' lines are kept verbatim so a parse -> serialize round trip is
// the identity on everything but the delimiter choice.
struct Table {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::string> units;  // percent | fraction | "-" per column
    std::vector<std::vector<std::string>> rows;
    char delimiter = ',';

    int column_index(const std::string& name) const;
    int require_column(const std::string& name) const;  // throws ValidationError
    const std::string& cell(std::size_t row, int col) const { return rows[row][static_cast<std::size_t>(col)]; }
};

Table parse_dsv(const std::string& content, const std::string& source_name);
Table read_dsv(const std::filesystem::path& path);
std::string format_dsv(const Table& table);
void write_dsv(const Table& table, const std::filesystem::path& path);

// Strict numeric cell parser: period decimal point only. A cell like "12,5"
// is rejected with a message naming the comma-decimal convention.
double parse_number(const std::string& cell, const std::string& context);

// Shortest decimal text that parses back to exactly the same double.
std::string format_number(double v);

// Record of every cell the loaders filled or defaulted, with the rule used.
struct ProvenanceEntry {
    std::string dataset;
    std::string column;
    int year = 0;
    std::string rule;
    double value = 0.0;
};
using ProvenanceLog = std::vector<ProvenanceEntry>;

struct DatasetEntry {
    std::string path;
    std::string source;                          // free-text source label
    std::map<std::string, std::string> columns;  // logical -> file column name
    std::map<std::string, std::string> units;    // logical -> expected unit
};

// Dataset manifest: which file plays which role, how its columns map onto the
// logical schema, and what units the numeric columns must declare.
struct Manifest {
    std::filesystem::path base_dir;
    std::map<std::string, DatasetEntry> datasets;
    std::string digest;  // sha256 over the manifest bytes and all referenced files

    static Manifest load(const std::filesystem::path& path);
    bool has(const std::string& role) const { return datasets.count(role) > 0; }
    const DatasetEntry& require(const std::string& role) const;
    std::filesystem::path resolve(const std::string& role) const;
};

struct HistoryData {
    MacroAssumptions macro;  // fractions
    DebtPath debt;           // observed debt ratios, same year span
    double mean_other_flows = 0.0;
    std::vector<std::string> warnings;
};

struct ProjectionData {
    MacroAssumptions macro;  // fractions; other flows filled where absent
    ProvenanceLog provenance;
    std::vector<std::string> warnings;
};

struct DisasterRecord {
    int year = 0;
    std::string kind;
    double damage_gdp = 0.0;                // fraction of GDP
    std::optional<double> affected_pop;     // fraction of population
};

HistoryData load_history(const Manifest& manifest);

// fill_other_flows: value used for years whose other-flows cell is empty
// (the historical average); every filled cell lands in the provenance log.
ProjectionData load_projections(const Manifest& manifest, double fill_other_flows);

std::vector<DisasterRecord> load_disasters(const Manifest& manifest);

// Backtest residuals keyed by year: observed debt change minus what the
// recursion explains without other flows. Large values are the implied
// stock-flow adjustment.
std::map<int, double> implied_sfa_by_year(const HistoryData& history);

}  // namespace debtlab
