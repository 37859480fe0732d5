#include "debtlab/core.hpp"

#include <cmath>
#include <stdexcept>

namespace debtlab {

int MacroAssumptions::index_of(int year) const {
    int k = year - start_year;
    if (k < 0 || k >= static_cast<int>(years.size())) return -1;
    return k;
}

int DebtPath::index_of(int year) const {
    int k = year - start_year;
    if (k < 0 || k >= static_cast<int>(d.size())) return -1;
    return k;
}

double DebtPath::at_year(int year) const {
    int k = index_of(year);
    if (k < 0) throw std::out_of_range("debt path has no year " + std::to_string(year));
    return d[static_cast<std::size_t>(k)];
}

double debt_step(double d_prev, const MacroYear& y) {
    return d_prev * (1.0 + y.i) / ((1.0 + y.g) * (1.0 + y.pi)) - y.pb + y.of;
}

double debt_step_split(double d_prev, const MacroYear& y) {
    const double den = (1.0 + y.g) * (1.0 + y.pi);
    // d_prev + interest wedge - growth drag, then the flow terms
    return d_prev + (y.i - (1.0 + y.g) * y.pi) / den * d_prev - y.g / den * d_prev - y.pb + y.of;
}

StepDecomposition decompose_step(double d_prev, const MacroYear& y) {
    const double den = (1.0 + y.g) * (1.0 + y.pi);
    StepDecomposition c;
    c.interest = y.i / den * d_prev;
    c.inflation = -y.pi * (1.0 + y.g) / den * d_prev;
    c.growth = -y.g / den * d_prev;
    c.primary_balance = -y.pb;
    c.other_flows = y.of;
    return c;
}

double approx_step(double d_prev, const MacroYear& y) {
    return (y.i - y.pi - y.g) * d_prev - y.pb + y.of;
}

double amplification(const MacroYear& y) { return y.i - y.pi - y.g; }

DebtPath project_path(double d0, const MacroAssumptions& a) {
    if (!std::isfinite(d0)) throw std::invalid_argument("non-finite initial debt ratio");
    DebtPath path;
    path.start_year = a.start_year;
    path.d.reserve(a.years.size());
    double d = d0;
    for (const MacroYear& y : a.years) {
        if (!std::isfinite(y.g) || !std::isfinite(y.pi) || !std::isfinite(y.i) ||
            !std::isfinite(y.pb) || !std::isfinite(y.of))
            throw std::invalid_argument("non-finite macro assumption");
        if (y.g <= -1.0 || y.pi <= -1.0)
            throw std::invalid_argument("growth or deflator rate at or below -100%");
        d = debt_step(d, y);
        if (d < 0.0) path.negative_debt_warning = true;
        path.d.push_back(d);
    }
    return path;
}

MacroAssumptions extend_assumptions(const MacroAssumptions& a, int end_year) {
    if (a.years.empty()) throw std::invalid_argument("cannot extend an empty horizon");
    const int last_year = a.start_year + static_cast<int>(a.years.size()) - 1;
    if (end_year < last_year)
        throw std::invalid_argument("extension end year precedes the horizon end");
    MacroAssumptions out = a;
    for (int y = last_year + 1; y <= end_year; ++y) out.years.push_back(a.years.back());
    return out;
}

std::vector<StepDecomposition> decompose_path(double d0, const MacroAssumptions& a) {
    std::vector<StepDecomposition> out;
    out.reserve(a.years.size());
    double d = d0;
    for (const MacroYear& y : a.years) {
        out.push_back(decompose_step(d, y));
        d = debt_step(d, y);
    }
    return out;
}

int first_year_below(const DebtPath& path, double threshold) {
    for (std::size_t k = 0; k < path.d.size(); ++k)
        if (path.d[k] < threshold) return path.year_at(k);
    return 0;
}

int stabilization_year(const DebtPath& path, int from_year) {
    int k0 = path.index_of(from_year);
    if (k0 <= 0) throw std::invalid_argument("stabilization window must start after the first path year");
    for (std::size_t k = static_cast<std::size_t>(k0); k < path.d.size(); ++k)
        if (path.d[k] <= path.d[k - 1] + 1e-12) return path.year_at(k);
    return path.year_at(path.d.size() - 1) + 1;
}

std::vector<double> implied_flow_residuals(const MacroAssumptions& a, const DebtPath& observed) {
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < observed.d.size(); ++k) {
        int year = observed.year_at(k + 1);
        int ia = a.index_of(year);
        if (ia < 0) continue;
        MacroYear y = a.years[static_cast<std::size_t>(ia)];
        y.of = 0.0;
        out.push_back(observed.d[k + 1] - debt_step(observed.d[k], y));
    }
    return out;
}

}  // namespace debtlab
