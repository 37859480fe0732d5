#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "debtlab/calib.hpp"
#include "debtlab/core.hpp"
#include "debtlab/econ.hpp"
#include "debtlab/io.hpp"
#include "debtlab/percentile.hpp"
#include "debtlab/sim.hpp"

namespace py = pybind11;
using namespace debtlab;

namespace {

AdverseDirection parse_direction(const std::string& s) {
    if (s == "down") return AdverseDirection::kDown;
    if (s == "up") return AdverseDirection::kUp;
    throw ValidationError("direction must be 'down' or 'up', got '" + s + "'");
}

struct LoadedInputs {
    Manifest manifest;
    HistoryData history;
    ProjectionData projections;
    double d0 = 0.0;
};

LoadedInputs load_inputs(const std::string& manifest_path) {
    LoadedInputs in;
    in.manifest = Manifest::load(manifest_path);
    in.history = load_history(in.manifest);
    in.projections = load_projections(in.manifest, in.history.mean_other_flows);
    in.d0 = in.history.debt.d.back();
    return in;
}

DebtPath baseline_path(const std::string& manifest_path, int horizon_end) {
    LoadedInputs in = load_inputs(manifest_path);
    MacroAssumptions a = in.projections.macro;
    if (horizon_end > 0) a = extend_assumptions(a, horizon_end);
    return project_path(in.d0, a);
}

DebtPath scenario_path(const std::string& manifest_path, const std::string& mode) {
    LoadedInputs in = load_inputs(manifest_path);
    auto disasters = load_disasters(in.manifest);
    Calibration calib = Calibration::load(in.manifest.resolve("calibration"));
    calib.scenario.mode = parse_mode(mode);
    const ScenarioSpec& spec = calib.scenario;
    switch (spec.mode) {
        case ScenarioMode::kOneOff: {
            auto dist = build_empirical_distribution(calib, disasters);
            auto vectors = build_one_off_vectors(dist, spec, calib);
            return apply_shock_vectors(in.projections.macro, in.d0, spec, vectors).path;
        }
        case ScenarioMode::kPerPeriod: {
            auto dist = build_empirical_distribution(calib, disasters);
            return apply_per_period_draws(in.projections.macro, in.d0, spec, dist, calib).path;
        }
        case ScenarioMode::kLocalProjection:
        case ScenarioMode::kQuantileRegression: {
            const bool lp = spec.mode == ScenarioMode::kLocalProjection;
            auto coeffs = CoefficientSet::load(
                in.manifest.resolve(lp ? "coefficients_lp" : "coefficients_qr"));
            double damage_pct =
                100.0 * damage_at_severity(disasters, spec.percentile, calib.damage_orientation);
            auto vectors = build_model_vectors(coeffs, calib, spec, damage_pct);
            return apply_shock_vectors(in.projections.macro, in.d0, spec, vectors).path;
        }
    }
    throw ComputationError("unhandled scenario mode");
}

std::map<double, std::vector<double>> fan_bands(const std::string& manifest_path,
                                                std::optional<int> iterations,
                                                std::optional<std::uint64_t> seed) {
    LoadedInputs in = load_inputs(manifest_path);
    Calibration calib = Calibration::load(in.manifest.resolve("calibration"));
    FanSettings settings = calib.fan;
    if (iterations) settings.iterations = *iterations;
    if (seed) settings.seed = *seed;
    ShockDistribution dist = estimate_distribution(in.history);
    FanChart fan = simulate_fan(in.projections.macro, in.d0, dist, settings, calib.digest);
    std::map<double, std::vector<double>> out;
    for (std::size_t li = 0; li < fan.percentile_levels.size(); ++li)
        out[fan.percentile_levels[li]] = fan.bands[li];
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Debt stress-testing core: projection, scenarios, fan charts";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<ComputationError>(m, "ComputationError", PyExc_RuntimeError);

    py::class_<MacroYear>(m, "MacroYear")
        .def(py::init<>())
        .def(py::init([](double g, double pi, double i, double pb, double of) {
                 return MacroYear{g, pi, i, pb, of};
             }),
             py::arg("g") = 0.0, py::arg("pi") = 0.0, py::arg("i") = 0.0, py::arg("pb") = 0.0,
             py::arg("of") = 0.0)
        .def_readwrite("g", &MacroYear::g)
        .def_readwrite("pi", &MacroYear::pi)
        .def_readwrite("i", &MacroYear::i)
        .def_readwrite("pb", &MacroYear::pb)
        .def_readwrite("of", &MacroYear::of);

    py::class_<MacroAssumptions>(m, "MacroAssumptions")
        .def(py::init<>())
        .def(py::init([](int start_year, std::vector<MacroYear> years) {
                 MacroAssumptions a;
                 a.start_year = start_year;
                 a.years = std::move(years);
                 return a;
             }),
             py::arg("start_year"), py::arg("years"))
        .def_readwrite("start_year", &MacroAssumptions::start_year)
        .def_readwrite("years", &MacroAssumptions::years)
        .def("year_at", &MacroAssumptions::year_at)
        .def("__len__", &MacroAssumptions::size);

    py::class_<DebtPath>(m, "DebtPath")
        .def_readonly("start_year", &DebtPath::start_year)
        .def_readonly("d", &DebtPath::d)
        .def_readonly("negative_debt_warning", &DebtPath::negative_debt_warning)
        .def("year_at", &DebtPath::year_at)
        .def("at_year", &DebtPath::at_year)
        .def("__len__", &DebtPath::size);

    m.def("debt_step", &debt_step, py::arg("d_prev"), py::arg("year"),
          "One step of the debt ratio recursion (all rates as fractions)");
    m.def("approx_step", &approx_step, py::arg("d_prev"), py::arg("year"),
          "First-order change (i - pi - g) d - pb + of");
    m.def("amplification", &amplification, py::arg("year"), "Snowball wedge i - pi - g");
    m.def("project_path", &project_path, py::arg("d0"), py::arg("assumptions"));

    m.def("percentile", &percentile, py::arg("values"), py::arg("p"),
          "Sorted-sample percentile with linear interpolation between closest ranks");
    m.def(
        "severity_percentile",
        [](std::vector<double> values, double p, const std::string& direction) {
            return severity_percentile(std::move(values), p, parse_direction(direction));
        },
        py::arg("values"), py::arg("p"), py::arg("direction"),
        "Percentile of the adverse tail; direction is 'down' or 'up'");

    m.def("baseline_path", &baseline_path, py::arg("manifest"), py::arg("horizon_end") = 0,
          "Load a manifest and project the baseline debt path");
    m.def("scenario_path", &scenario_path, py::arg("manifest"), py::arg("mode"),
          "Load a manifest and run the calibrated scenario under the given mode");
    m.def("fan_bands", &fan_bands, py::arg("manifest"), py::arg("iterations") = py::none(),
          py::arg("seed") = py::none(),
          "Simulate the fan chart; returns {percentile level: per-year debt ratios}");
}
