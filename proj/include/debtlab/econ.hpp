#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "debtlab/calib.hpp"
#include "debtlab/io.hpp"

namespace debtlab {

// All quantities at this boundary are in percent: coefficient tables,
// predicted deviations, damage, and fiscal-balance covariates. Conversion to
// fractions happens where predictions become shock vectors.

struct Coefficient {
    double estimate = 0.0;
    double se = 0.0;
};

struct HorizonModel {
    int horizon = 0;
    std::vector<std::pair<std::string, Coefficient>> terms;  // file order
    double prediction_se = 0.0;
    int n_obs = 0;
    double r_squared = 0.0;
    int n_countries = 0;
    std::optional<double> tau;  // quantile level, quantile models only

    const Coefficient* find(const std::string& term) const;
};

struct OutcomeModel {
    std::string outcome;
    std::vector<HorizonModel> horizons;  // contiguous from horizon 0
};

struct CoefficientSet {
    std::string model;  // "local_projection" or "quantile_regression"
    std::map<std::string, OutcomeModel> outcomes;

    static CoefficientSet load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
    const OutcomeModel& require(const std::string& outcome) const;
};

// Canonical term names, in the order prediction sums them. The sum order is
// pinned: reordering changes the floating-point result and breaks stored
// scenario outputs.
extern const std::vector<std::string> kPredictionTermOrder;

struct PredictionInputs {
    double lcompshock = 0.0;         // composite shock intensity at the event
    double damage = 0.0;             // percent of GDP
    double advanced_economy = 1.0;
    double lag_outcome = 0.0;        // pre-event deviation from trend
    double fb_interaction = 0.0;     // percent of GDP, the counterfactual lever
    double fb_lag = 0.0;             // percent of GDP, realized pre-event balance
    double nd_capacity = 0.0;
    double lag_extra = 0.0;
    double decay = 0.5;              // continuation factor past estimated horizons
    int horizons = 6;                // total output length
};

PredictionInputs prediction_inputs(const Calibration& calib, const ScenarioSpec& spec,
                                   double damage_percent);

// Predicted per-horizon deviations in percent, estimated horizons first, then
// geometric continuation out to inputs.horizons.
std::vector<double> predict_deviations(const OutcomeModel& model, const PredictionInputs& in);

// Symmetric prediction bands: deviation +/- z * prediction_se per estimated
// horizon (continuation years reuse the last estimated SE, decayed).
struct PredictionBand {
    std::vector<double> lower, center, upper;
};
PredictionBand predict_band(const OutcomeModel& model, const PredictionInputs& in, double z);

std::map<std::string, Channel> default_outcome_channels();

// Builds shock vectors (fractions) from a coefficient set for the channels the
// scenario requests.
std::map<Channel, ShockVector> build_model_vectors(const CoefficientSet& coeffs,
                                                   const Calibration& calib,
                                                   const ScenarioSpec& spec,
                                                   double damage_percent);

// ----------------------------------------------------------------------------
// Estimation

struct FeOlsResult {
    std::vector<std::string> names;
    std::vector<double> beta;
    std::vector<double> se;
    double constant = 0.0;       // grand mean of y minus fitted grand mean of X
    double prediction_se = 0.0;  // root mean squared residual
    double r_squared = 0.0;      // within (demeaned) fit
    int n_obs = 0;
    int n_countries = 0;
    int dof = 0;
};

// Fixed-effects least squares: demeans y and each regressor within group,
// then solves the pooled system. Conventional standard errors with
// n - k - G degrees of freedom. Throws on rank deficiency, naming the
// collinear columns.
FeOlsResult fe_ols(const std::vector<double>& y,
                   const std::vector<std::vector<double>>& x_cols,
                   const std::vector<int>& group,
                   const std::vector<std::string>& names);

// Long panel: one row per (country, year), numeric data columns.
struct Panel {
    std::vector<std::string> country;
    std::vector<int> year;
    std::map<std::string, std::vector<double>> columns;

    size_t size() const { return country.size(); }
    static Panel from_table(const Table& table);
};

struct LpEstimateSpec {
    std::string outcome;
    int horizons = 3;
    std::string shock = "lcompshock";
    std::string onset = "onset";
    std::string damage = "damage";
    std::string advanced = "advanced";
    std::string fiscal_balance = "fb";
    std::string nd_capacity = "nd_capacity";
    std::string extra = "extra_nd1995";
};

// Estimates the impact regressions per horizon h: dependent variable
// y(t+h) - y(t-1), regressors [shock(t+h), onset(t), onset*damage,
// onset*AE, y(t-1), onset*fb, fb(t-1), onset*nd_capacity, extra(t-1)].
// Requires every included country to span at least horizons + 2 consecutive
// years.
OutcomeModel lp_estimate(const Panel& panel, const LpEstimateSpec& spec);

// Same design, fitted by pinball loss at quantile tau with an explicit
// constant instead of fixed effects. Standard errors are not reported.
OutcomeModel qr_estimate(const Panel& panel, const LpEstimateSpec& spec, double tau);

// ----------------------------------------------------------------------------
// Quantile regression

double pinball_loss(const std::vector<double>& y, const std::vector<double>& yhat, double tau);

struct QrResult {
    std::vector<double> beta;  // aligned with x_cols; caller supplies intercept column
    double loss = 0.0;         // mean pinball loss at the fit
    int iterations = 0;
};

// Smoothed iteratively reweighted fit of the pinball objective, with the
// smoothing width driven toward zero.
QrResult qr_fit(const std::vector<double>& y,
                const std::vector<std::vector<double>>& x_cols,
                double tau);

// Exact minimizer by enumerating basic solutions (every k-subset of rows
// interpolated exactly). Exponential; guarded to small n for test oracles.
QrResult qr_exhaustive(const std::vector<double>& y,
                       const std::vector<std::vector<double>>& x_cols,
                       double tau);

// ----------------------------------------------------------------------------
// Counterfactual comparison

struct CounterfactualComparison {
    double peak_a = 0.0;
    double peak_b = 0.0;
    double peak_reduction = 0.0;   // peak_a - peak_b, percentage points
    int stabilization_a = 0;       // first year debt stops rising, per path
    int stabilization_b = 0;
};

CounterfactualComparison compare_scenarios(const ScenarioResult& a, const ScenarioResult& b,
                                           int from_year);

}  // namespace debtlab
