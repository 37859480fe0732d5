#include "debtlab/report.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "debtlab/core.hpp"
#include "debtlab/io.hpp"
#include "debtlab/sim.hpp"
#include "doctest.h"
#include "json.hpp"

namespace {

using namespace debtlab;

Report sample_report() {
    Report r;
    r.command = "baseline";
    r.meta("manifest_digest", "abc123");
    r.add("final_debt_pct", "55.091");

    DebtPath path;
    path.start_year = 2025;
    path.d = {0.57376058783035525, 0.5674303091238148};
    r.tables.emplace_back("debt_path", path_table(path));
    r.notes.push_back("history: ignoring extra column 'memo'");
    return r;
}

MacroAssumptions two_years() {
    MacroAssumptions a;
    a.start_year = 2025;
    MacroYear y;
    y.g = 0.03;
    y.pi = 0.02;
    y.i = 0.025;
    y.pb = 0.01;
    y.of = -0.002;
    a.years = {y, y};
    return a;
}

}  // namespace

TEST_CASE("format names parse to the three renderers") {
    CHECK(parse_format("text") == ReportFormat::kText);
    CHECK(parse_format("table") == ReportFormat::kText);
    CHECK(parse_format("csv") == ReportFormat::kCsv);
    CHECK(parse_format("json") == ReportFormat::kJson);
    CHECK_THROWS_WITH_AS(parse_format("xml"), doctest::Contains("unknown report format"),
                         ValidationError);
}

TEST_CASE("text rendering lays out metadata, summary, tables, and notes") {
    const std::string text = to_text(sample_report());
    CHECK(text.find("baseline\n") == 0);
    CHECK(text.find("  manifest_digest: abc123") != std::string::npos);
    CHECK(text.find("  final_debt_pct = 55.091") != std::string::npos);
    CHECK(text.find("debt_path") != std::string::npos);
    CHECK(text.find("year") != std::string::npos);
    CHECK(text.find("note: history: ignoring extra column 'memo'") != std::string::npos);
    // long fractions are shortened on screen only
    CHECK(text.find("57.376") != std::string::npos);
    CHECK(text.find("57.376058783035525") == std::string::npos);
}

TEST_CASE("structured exports parse back through the tabular reader") {
    const std::string csv = to_csv(sample_report());
    Table t = parse_dsv(csv, "export.csv");
    REQUIRE(t.columns == std::vector<std::string>{"year", "debt"});
    CHECK(t.units == std::vector<std::string>{"-", "percent"});
    REQUIRE(t.rows.size() == 2);
    // full precision survives the export
    CHECK(parse_number(t.cell(0, 1), "debt") == 57.376058783035525);
    // the report context rides along as comments
    bool found_meta = false, found_summary = false, found_note = false;
    for (const auto& c : t.comments) {
        if (c.find("manifest_digest: abc123") != std::string::npos) found_meta = true;
        if (c.find("final_debt_pct = 55.091") != std::string::npos) found_summary = true;
        if (c.find("note: history") != std::string::npos) found_note = true;
    }
    CHECK(found_meta);
    CHECK(found_summary);
    CHECK(found_note);

    Report empty;
    empty.command = "baseline";
    CHECK_THROWS_AS(to_csv(empty), ComputationError);
}

TEST_CASE("json rendering carries every section") {
    const nlohmann::json j = nlohmann::json::parse(to_json_text(sample_report()));
    CHECK(j["command"] == "baseline");
    CHECK(j["metadata"]["manifest_digest"] == "abc123");
    CHECK(j["summary"]["final_debt_pct"] == "55.091");
    REQUIRE(j["tables"].contains("debt_path"));
    CHECK(j["tables"]["debt_path"]["columns"][1] == "debt");
    CHECK(j["tables"]["debt_path"]["rows"][0][0] == "2025");
    REQUIRE(j["notes"].size() == 1);
}

TEST_CASE("report files land on disk in the requested format") {
    namespace fs = std::filesystem;
    fs::path p = fs::temp_directory_path() / "debtlab_report_out.csv";
    write_report(sample_report(), p, ReportFormat::kCsv);
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == to_csv(sample_report()));
    fs::remove(p);

    CHECK(render_report(sample_report(), ReportFormat::kJson) ==
          to_json_text(sample_report()));
}

TEST_CASE("path tables print years against percent debt") {
    DebtPath path;
    path.start_year = 2025;
    path.d = {0.6, 0.55091};
    Table t = path_table(path);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.cell(0, 0) == "2025");
    CHECK(t.cell(0, 1) == "60");
    CHECK(t.cell(1, 1) == "55.091");
}

TEST_CASE("decomposition tables add up row by row") {
    MacroAssumptions a = two_years();
    Table t = decomposition_table(0.6, a, 2025);
    REQUIRE(t.rows.size() == 2);
    REQUIRE(t.columns.size() == 8);
    CHECK(t.columns[1] == "delta");
    CHECK(t.columns.back() == "approx_delta");
    for (const auto& row : t.rows) {
        // the trailing approx_delta diagnostic is not part of the additive split
        double parts = 0.0;
        for (std::size_t j = 2; j + 1 < row.size(); ++j) parts += parse_number(row[j], "part");
        CHECK(parse_number(row[1], "delta") == doctest::Approx(parts).epsilon(1e-9));
    }
}

TEST_CASE("scenario tables show both paths and their gap") {
    DebtPath base, shocked;
    base.start_year = 2025;
    base.d = {0.57, 0.56};
    shocked.start_year = 2025;
    shocked.d = {0.57, 0.61};
    Table t = scenario_table(base, shocked);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.columns == std::vector<std::string>{"year", "baseline", "scenario", "delta"});
    CHECK(parse_number(t.cell(1, 3), "delta") == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("applied deviation tables list shocked channels in percent") {
    MacroAssumptions a = two_years();
    std::map<Channel, std::vector<double>> applied;
    applied[Channel::kGrowth] = {0.0, -0.03};
    Table t = applied_deviation_table(a, applied);
    CHECK(t.columns == std::vector<std::string>{"year", "growth"});
    CHECK(t.cell(1, 1) == "-3");
}

TEST_CASE("fan tables expose bands, paths, and exceedance probabilities") {
    MacroAssumptions a = two_years();
    ShockDistribution zero;
    FanSettings s;
    s.seed = 3;
    s.iterations = 4;
    FanChart fan = simulate_fan(a, 0.6, zero, s, "digest");

    Table bands = fan_plot_table(fan);
    CHECK(bands.columns == std::vector<std::string>{"year", "level", "value"});
    CHECK(bands.rows.size() == fan.percentile_levels.size() * 2);

    Table paths = fan_paths_table(fan);
    CHECK(paths.columns == std::vector<std::string>{"iteration", "year", "debt"});
    CHECK(paths.rows.size() == 8);

    auto summaries = band_summary(fan, {0.0, 1.0});
    Table exc = exceedance_table(summaries, fan.start_year);
    REQUIRE(exc.columns.size() == 3);
    CHECK(exc.columns[1] == "above_0");
    CHECK(exc.columns[2] == "above_100");
    CHECK(exc.cell(0, 1) == "1");  // everything exceeds zero
    CHECK(exc.cell(0, 2) == "0");
}

TEST_CASE("counterfactual tables pair the two paths") {
    DebtPath a, b;
    a.start_year = 2025;
    a.d = {0.60, 0.65};
    b.start_year = 2025;
    b.d = {0.60, 0.62};
    Table t = counterfactual_table(a, b);
    CHECK(t.columns == std::vector<std::string>{"year", "path_a", "path_b", "difference"});
    CHECK(parse_number(t.cell(1, 3), "difference") == doctest::Approx(-3.0).epsilon(1e-9));
}

TEST_CASE("the four-channel caution note is pinned verbatim") {
    const std::string note = kFourChannelCautionNote;
    CHECK(note.find("GDP deflator") != std::string::npos);
    CHECK(note.find("effective interest rate") != std::string::npos);
    CHECK(note.find("interpreted with caution") != std::string::npos);
    Report r = sample_report();
    r.notes.push_back(note);
    CHECK(to_text(r).find("note: " + note) != std::string::npos);
}
