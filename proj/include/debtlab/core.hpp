#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace debtlab {

// One year of macro assumptions. All rates are fractions (0.03 = 3%):
// g real GDP growth, pi deflator growth, i effective nominal interest rate,
// pb primary balance / GDP (surplus positive), of other debt-creating flows / GDP.
struct MacroYear {
    double g = 0.0;
    double pi = 0.0;
    double i = 0.0;
    double pb = 0.0;
    double of = 0.0;
};

struct MacroAssumptions {
    int start_year = 0;
    std::vector<MacroYear> years;

    std::size_t size() const { return years.size(); }
    int year_at(std::size_t k) const { return start_year + static_cast<int>(k); }
    // -1 when the year is outside the window
    int index_of(int year) const;
};

struct DebtPath {
    int start_year = 0;
    std::vector<double> d;  // debt/GDP fractions
    bool negative_debt_warning = false;

    std::size_t size() const { return d.size(); }
    int year_at(std::size_t k) const { return start_year + static_cast<int>(k); }
    int index_of(int year) const;
    double at_year(int year) const;  // throws std::out_of_range
};

// Debt ratio recursion: d_t = d_{t-1}(1+i) / ((1+g)(1+pi)) - pb + of.
double debt_step(double d_prev, const MacroYear& y);

// Same quantity, rearranged as d_prev plus interest/growth/deflator wedges.
// Agrees with debt_step to rounding error; used by the form-equivalence test.
double debt_step_split(double d_prev, const MacroYear& y);

// Additive split of the one-year change d_t - d_{t-1}.
struct StepDecomposition {
    double interest = 0.0;        //  i / ((1+g)(1+pi)) * d_prev
    double inflation = 0.0;       // -pi (1+g) / ((1+g)(1+pi)) * d_prev
    double growth = 0.0;          // -g / ((1+g)(1+pi)) * d_prev
    double primary_balance = 0.0; // -pb
    double other_flows = 0.0;     //  of
    double total() const { return interest + inflation + growth + primary_balance + other_flows; }
};

StepDecomposition decompose_step(double d_prev, const MacroYear& y);

// First-order change (i - pi - g) d_prev - pb + of. Diagnostic only; the
// projection itself always uses the exact recursion.
double approx_step(double d_prev, const MacroYear& y);

// The snowball wedge i - pi - g.
double amplification(const MacroYear& y);

DebtPath project_path(double d0, const MacroAssumptions& a);

// Extends the horizon to end_year by repeating the final year's assumptions.
MacroAssumptions extend_assumptions(const MacroAssumptions& a, int end_year);

std::vector<StepDecomposition> decompose_path(double d0, const MacroAssumptions& a);

// First year with d strictly below threshold, or 0 if never.
int first_year_below(const DebtPath& path, double threshold);

// First year at or after from_year whose debt does not exceed the prior year.
// Returns last year + 1 when the path is still rising at the end.
int stabilization_year(const DebtPath& path, int from_year);

// Residual flows implied by an observed debt series: what the recursion with
// of = 0 fails to explain each year. Index k corresponds to the k-th
// transition (year observed.start_year + k + 1).
std::vector<double> implied_flow_residuals(const MacroAssumptions& a, const DebtPath& observed);

}  // namespace debtlab
