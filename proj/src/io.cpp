#include "debtlab/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

#include "json.hpp"

#include "debtlab/sha256.hpp"

namespace debtlab {
namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(trim(field));
    if (!line.empty() && line.back() == delim) out.push_back("");
    return out;
}

char sniff_delimiter(const std::string& header) {
    const char candidates[] = {',', ';', '\t'};
    char best = ',';
    std::size_t best_count = 0;
    for (char c : candidates) {
        std::size_t n = static_cast<std::size_t>(std::count(header.begin(), header.end(), c));
        if (n > best_count) {
            best = c;
            best_count = n;
        }
    }
    return best;
}

bool is_valid_unit(const std::string& u) {
    return u == "percent" || u == "fraction" || u == "-";
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int Table::column_index(const std::string& name) const {
    for (std::size_t k = 0; k < columns.size(); ++k)
        if (columns[k] == name) return static_cast<int>(k);
    return -1;
}

int Table::require_column(const std::string& name) const {
    int k = column_index(name);
    if (k < 0) throw ValidationError("missing column '" + name + "'");
    return k;
}

Table parse_dsv(const std::string& content, const std::string& source_name) {
    Table t;
    std::stringstream ss(content);
    std::string line;
    bool have_header = false;
    bool have_units = false;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && !have_header) continue;
        if (!line.empty() && line[0] == '#') {
            if (!have_header) t.comments.push_back(line);
            continue;
        }
        if (!have_header) {
            t.delimiter = sniff_delimiter(line);
            t.columns = split(line, t.delimiter);
            have_header = true;
            continue;
        }
        if (!have_units) {
            t.units = split(line, t.delimiter);
            for (const std::string& u : t.units)
                if (!is_valid_unit(u))
                    throw ValidationError(source_name + ": second row must declare units "
                                          "(percent, fraction, or -), got '" + u + "'");
            if (t.units.size() != t.columns.size())
                throw ValidationError(source_name + ": units row has " +
                                      std::to_string(t.units.size()) + " entries for " +
                                      std::to_string(t.columns.size()) + " columns");
            have_units = true;
            continue;
        }
        if (trim(line).empty()) continue;
        std::vector<std::string> row = split(line, t.delimiter);
        if (row.size() != t.columns.size())
            throw ValidationError(source_name + ": row has " + std::to_string(row.size()) +
                                  " fields, expected " + std::to_string(t.columns.size()) +
                                  " ('" + line + "'); note that decimal commas are not supported");
        t.rows.push_back(std::move(row));
    }
    if (!have_header) throw ValidationError(source_name + ": empty table");
    if (!have_units)
        throw ValidationError(source_name + ": missing units row (second non-comment line)");
    return t;
}

Table read_dsv(const std::filesystem::path& path) {
    return parse_dsv(read_file(path), path.filename().string());
}

std::string format_dsv(const Table& table) {
    std::ostringstream out;
    for (const std::string& c : table.comments) out << c << "\n";
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out << table.delimiter;
            out << row[k];
        }
        out << "\n";
    };
    emit_row(table.columns);
    emit_row(table.units);
    for (const auto& r : table.rows) emit_row(r);
    return out.str();
}

void write_dsv(const Table& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path.string());
    out << format_dsv(table);
}

double parse_number(const std::string& cell, const std::string& context) {
    std::string s = trim(cell);
    if (s.empty()) throw ValidationError(context + ": empty numeric cell");
    if (s.find(',') != std::string::npos)
        throw ValidationError(context + ": '" + s + "' uses a comma decimal separator; "
                              "use a period decimal point");
    const char* begin = s.data();
    const char* end = begin + s.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ValidationError(context + ": cannot parse number '" + s + "'");
    return value;
}

std::string format_number(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    int prec = 1;
    for (; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    std::string s = buf;
    if (s.find('e') != std::string::npos) {
        // prefer the plain spelling unless it is much longer (10, not 1e+01)
        for (int p2 = prec + 1; p2 <= 17; ++p2) {
            std::snprintf(buf, sizeof(buf), "%.*g", p2, v);
            if (std::strtod(buf, nullptr) != v) continue;
            if (std::string_view(buf).find('e') == std::string_view::npos) {
                if (std::string_view(buf).size() <= s.size() + 2) s = buf;
                break;
            }
        }
    }
    return s;
}

Manifest Manifest::load(const std::filesystem::path& path) {
    std::string raw = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("manifest " + path.string() + ": " + e.what());
    }
    Manifest m;
    m.base_dir = path.parent_path();
    if (!j.contains("datasets") || !j["datasets"].is_object())
        throw ValidationError("manifest " + path.string() + ": missing 'datasets' object");
    for (auto& [role, spec] : j["datasets"].items()) {
        DatasetEntry e;
        if (spec.is_string()) {
            e.path = spec.get<std::string>();
        } else {
            if (!spec.contains("path"))
                throw ValidationError("manifest: dataset '" + role + "' has no path");
            e.path = spec["path"].get<std::string>();
            if (spec.contains("source")) e.source = spec["source"].get<std::string>();
            if (spec.contains("columns"))
                for (auto& [k, v] : spec["columns"].items()) e.columns[k] = v.get<std::string>();
            if (spec.contains("units"))
                for (auto& [k, v] : spec["units"].items()) e.units[k] = v.get<std::string>();
        }
        m.datasets[role] = std::move(e);
    }
    // digest covers the manifest text plus every referenced file, so a report
    // stamped with it pins the full data vintage
    Sha256 h;
    h.update(raw);
    for (const auto& [role, e] : m.datasets) {
        h.update(role);
        std::filesystem::path p = m.base_dir / e.path;
        if (std::filesystem::exists(p)) h.update(read_file(p));
    }
    m.digest = h.hex_digest();
    return m;
}

const DatasetEntry& Manifest::require(const std::string& role) const {
    auto it = datasets.find(role);
    if (it == datasets.end())
        throw ValidationError("manifest does not declare a '" + role + "' dataset");
    return it->second;
}

std::filesystem::path Manifest::resolve(const std::string& role) const {
    return base_dir / require(role).path;
}

namespace {

// Resolves a logical column through the manifest's column map, checks the
// file's declared unit against the manifest declaration, and hands back the
// index plus a fraction-conversion factor.
struct BoundColumn {
    int index = -1;
    double to_fraction = 1.0;
};

BoundColumn bind_column(const Table& t, const DatasetEntry& e, const std::string& logical,
                        const std::string& dataset, bool required = true) {
    std::string file_col = logical;
    auto it = e.columns.find(logical);
    if (it != e.columns.end()) file_col = it->second;
    int idx = t.column_index(file_col);
    if (idx < 0) {
        if (required) throw ValidationError(dataset + ": missing column '" + file_col + "'");
        return {};
    }
    const std::string& unit = t.units[static_cast<std::size_t>(idx)];
    auto uit = e.units.find(logical);
    if (uit != e.units.end() && uit->second != unit)
        throw ValidationError(dataset + ": column '" + file_col + "' declares unit '" + unit +
                              "' but the manifest requires '" + uit->second + "'");
    BoundColumn b;
    b.index = idx;
    b.to_fraction = unit == "percent" ? 0.01 : 1.0;
    return b;
}

void warn_extra_columns(const Table& t, const DatasetEntry& e,
                        const std::vector<std::string>& logical,
                        const std::string& dataset, std::vector<std::string>& warnings) {
    std::set<std::string> known;
    for (const std::string& name : logical) {
        auto it = e.columns.find(name);
        known.insert(it != e.columns.end() ? it->second : name);
    }
    for (const std::string& c : t.columns)
        if (!known.count(c))
            warnings.push_back(dataset + ": ignoring extra column '" + c + "'");
}

// Row indices sorted by year, with gap and duplicate detection.
std::vector<std::size_t> year_order(const Table& t, int year_col, const std::string& dataset) {
    std::vector<std::pair<int, std::size_t>> keyed;
    keyed.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        double y = parse_number(t.cell(r, year_col), dataset + " year column");
        keyed.emplace_back(static_cast<int>(y), r);
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::size_t> order;
    order.reserve(keyed.size());
    for (std::size_t k = 0; k < keyed.size(); ++k) {
        if (k > 0) {
            int prev = keyed[k - 1].first;
            int cur = keyed[k].first;
            if (cur == prev)
                throw ValidationError(dataset + ": duplicate year " + std::to_string(cur));
            if (cur != prev + 1)
                throw ValidationError(dataset + ": missing year " + std::to_string(prev + 1));
        }
        order.push_back(keyed[k].second);
    }
    return order;
}

}  // namespace

HistoryData load_history(const Manifest& manifest) {
    const DatasetEntry& e = manifest.require("history");
    Table t = read_dsv(manifest.resolve("history"));
    const std::string ds = "history";
    HistoryData out;
    const std::vector<std::string> logical = {"year", "gdp_growth", "gdp_deflator",
                                              "interest_rate", "primary_balance",
                                              "other_flows", "debt"};
    warn_extra_columns(t, e, logical, ds, out.warnings);
    BoundColumn year = bind_column(t, e, "year", ds);
    BoundColumn g = bind_column(t, e, "gdp_growth", ds);
    BoundColumn pi = bind_column(t, e, "gdp_deflator", ds);
    BoundColumn i = bind_column(t, e, "interest_rate", ds);
    BoundColumn pb = bind_column(t, e, "primary_balance", ds);
    BoundColumn of = bind_column(t, e, "other_flows", ds);
    BoundColumn d = bind_column(t, e, "debt", ds);

    std::vector<std::size_t> order = year_order(t, year.index, ds);
    if (order.empty()) throw ValidationError("history: no data rows");
    out.macro.start_year =
        static_cast<int>(parse_number(t.cell(order.front(), year.index), ds));
    out.debt.start_year = out.macro.start_year;
    double of_sum = 0.0;
    for (std::size_t r : order) {
        std::string ctx = ds + " year " + t.cell(r, year.index);
        MacroYear y;
        y.g = parse_number(t.cell(r, g.index), ctx) * g.to_fraction;
        y.pi = parse_number(t.cell(r, pi.index), ctx) * pi.to_fraction;
        y.i = parse_number(t.cell(r, i.index), ctx) * i.to_fraction;
        y.pb = parse_number(t.cell(r, pb.index), ctx) * pb.to_fraction;
        y.of = parse_number(t.cell(r, of.index), ctx) * of.to_fraction;
        of_sum += y.of;
        out.macro.years.push_back(y);
        out.debt.d.push_back(parse_number(t.cell(r, d.index), ctx) * d.to_fraction);
    }
    out.mean_other_flows = of_sum / static_cast<double>(out.macro.years.size());
    return out;
}

ProjectionData load_projections(const Manifest& manifest, double fill_other_flows) {
    const DatasetEntry& e = manifest.require("projections");
    Table t = read_dsv(manifest.resolve("projections"));
    const std::string ds = "projections";
    ProjectionData out;
    const std::vector<std::string> logical = {"year", "gdp_growth", "gdp_deflator",
                                              "interest_rate", "primary_balance", "other_flows"};
    warn_extra_columns(t, e, logical, ds, out.warnings);
    BoundColumn year = bind_column(t, e, "year", ds);
    BoundColumn g = bind_column(t, e, "gdp_growth", ds);
    BoundColumn pi = bind_column(t, e, "gdp_deflator", ds);
    BoundColumn i = bind_column(t, e, "interest_rate", ds);
    BoundColumn pb = bind_column(t, e, "primary_balance", ds);
    BoundColumn of = bind_column(t, e, "other_flows", ds);

    std::vector<std::size_t> order = year_order(t, year.index, ds);
    if (order.empty()) throw ValidationError("projections: no data rows");
    out.macro.start_year =
        static_cast<int>(parse_number(t.cell(order.front(), year.index), ds));
    for (std::size_t r : order) {
        int yr = static_cast<int>(parse_number(t.cell(r, year.index), ds));
        std::string ctx = ds + " year " + std::to_string(yr);
        MacroYear y;
        y.g = parse_number(t.cell(r, g.index), ctx) * g.to_fraction;
        y.pi = parse_number(t.cell(r, pi.index), ctx) * pi.to_fraction;
        y.i = parse_number(t.cell(r, i.index), ctx) * i.to_fraction;
        y.pb = parse_number(t.cell(r, pb.index), ctx) * pb.to_fraction;
        const std::string& of_cell = t.cell(r, of.index);
        if (of_cell.empty()) {
            y.of = fill_other_flows;
            out.provenance.push_back({ds, "other_flows", yr,
                                      "filled with historical average", fill_other_flows});
        } else {
            y.of = parse_number(of_cell, ctx) * of.to_fraction;
        }
        out.macro.years.push_back(y);
    }
    return out;
}

std::vector<DisasterRecord> load_disasters(const Manifest& manifest) {
    const DatasetEntry& e = manifest.require("disasters");
    Table t = read_dsv(manifest.resolve("disasters"));
    const std::string ds = "disasters";
    BoundColumn year = bind_column(t, e, "year", ds);
    int kind = t.require_column(e.columns.count("kind") ? e.columns.at("kind") : "kind");
    BoundColumn damage = bind_column(t, e, "damage_gdp", ds);
    BoundColumn pop = bind_column(t, e, "affected_pop", ds, /*required=*/false);

    std::vector<DisasterRecord> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        DisasterRecord rec;
        rec.year = static_cast<int>(parse_number(t.cell(r, year.index), ds));
        rec.kind = t.cell(r, kind);
        rec.damage_gdp = parse_number(t.cell(r, damage.index), ds) * damage.to_fraction;
        if (rec.damage_gdp < 0.0)
            throw ValidationError("disasters: negative damage in year " + std::to_string(rec.year));
        if (pop.index >= 0 && !t.cell(r, pop.index).empty()) {
            double v = parse_number(t.cell(r, pop.index), ds) * pop.to_fraction;
            if (v < 0.0 || v > 1.0)
                throw ValidationError("disasters: affected population share outside [0,1] in year " +
                                      std::to_string(rec.year));
            rec.affected_pop = v;
        }
        out.push_back(std::move(rec));
    }
    if (out.empty()) throw ValidationError("disasters: no records");
    return out;
}

std::map<int, double> implied_sfa_by_year(const HistoryData& history) {
    std::vector<double> res = implied_flow_residuals(history.macro, history.debt);
    std::map<int, double> out;
    for (std::size_t k = 0; k < res.size(); ++k)
        out[history.debt.year_at(k + 1)] = res[k];
    return out;
}

}  // namespace debtlab
