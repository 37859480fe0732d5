#include "debtlab/econ.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <set>

namespace debtlab {

const std::vector<std::string> kPredictionTermOrder = {
    "shock",   "onset",  "onset_damage",     "onset_ae",         "lag_outcome",
    "onset_fb", "lag_fb", "onset_ndcapacity", "lag_extra_nd1995", "constant",
};

const Coefficient* HorizonModel::find(const std::string& term) const {
    for (const auto& [name, coeff] : terms)
        if (name == term) return &coeff;
    return nullptr;
}

const OutcomeModel& CoefficientSet::require(const std::string& outcome) const {
    auto it = outcomes.find(outcome);
    if (it == outcomes.end())
        throw ValidationError("coefficient set has no outcome '" + outcome + "'");
    return it->second;
}


CoefficientSet CoefficientSet::load(const std::filesystem::path& path) {
    Table table = read_dsv(path);
    const int c_model = table.require_column("model");
    const int c_outcome = table.require_column("outcome");
    const int c_horizon = table.require_column("horizon");
    const int c_term = table.require_column("term");
    const int c_estimate = table.require_column("estimate");
    const int c_se = table.require_column("se");

    CoefficientSet set;
    // keyed storage while reading; flattened after
    std::map<std::string, std::map<int, HorizonModel>> sink;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const std::string model = table.rows[r][c_model];
        if (set.model.empty()) set.model = model;
        else if (set.model != model)
            throw ValidationError(path.filename().string() +
                                  ": mixed model kinds in one coefficient file ('" + set.model +
                                  "' and '" + model + "')");
        const std::string outcome = table.rows[r][c_outcome];
        const int horizon =
            static_cast<int>(parse_number(table.rows[r][c_horizon], "coefficient horizon"));
        const std::string term = table.rows[r][c_term];
        const double estimate = parse_number(table.rows[r][c_estimate], "coefficient estimate");
        HorizonModel& hm = sink[outcome][horizon];
        hm.horizon = horizon;
        if (term == "n_obs") {
            hm.n_obs = static_cast<int>(estimate);
        } else if (term == "n_countries") {
            hm.n_countries = static_cast<int>(estimate);
        } else if (term == "r_squared") {
            hm.r_squared = estimate;
        } else if (term == "prediction_se") {
            hm.prediction_se = estimate;
        } else if (term == "tau") {
            hm.tau = estimate;
        } else {
            Coefficient coeff;
            coeff.estimate = estimate;
            const std::string& se_text = table.rows[r][c_se];
            coeff.se = se_text.empty() ? 0.0 : parse_number(se_text, "coefficient se");
            for (const auto& [existing, unused] : hm.terms) {
                (void)unused;
                if (existing == term)
                    throw ValidationError(path.filename().string() + ": duplicate term '" + term +
                                          "' for outcome '" + outcome + "' horizon " +
                                          std::to_string(horizon));
            }
            hm.terms.emplace_back(term, coeff);
        }
    }
    if (sink.empty())
        throw ValidationError(path.filename().string() + ": coefficient file has no rows");

    for (auto& [outcome, horizons] : sink) {
        OutcomeModel om;
        om.outcome = outcome;
        int expect = 0;
        for (auto& [h, hm] : horizons) {
            if (h != expect)
                throw ValidationError(path.filename().string() + ": outcome '" + outcome +
                                      "' horizons must run 0,1,2,... (missing horizon " +
                                      std::to_string(expect) + ")");
            ++expect;
            om.horizons.push_back(std::move(hm));
        }
        set.outcomes[outcome] = std::move(om);
    }
    return set;
}

void CoefficientSet::save(const std::filesystem::path& path) const {
    Table table;
    table.columns = {"model", "outcome", "horizon", "term", "estimate", "se"};
    table.units = {"-", "-", "-", "-", "-", "-"};
    for (const auto& [outcome, om] : outcomes) {
        for (const auto& hm : om.horizons) {
            const std::string h = std::to_string(hm.horizon);
            for (const auto& [term, coeff] : hm.terms)
                table.rows.push_back({model, outcome, h, term, format_number(coeff.estimate),
                                      format_number(coeff.se)});
            table.rows.push_back({model, outcome, h, "prediction_se",
                                  format_number(hm.prediction_se), ""});
            table.rows.push_back({model, outcome, h, "n_obs", std::to_string(hm.n_obs), ""});
            table.rows.push_back({model, outcome, h, "r_squared", format_number(hm.r_squared),
                                  ""});
            table.rows.push_back({model, outcome, h, "n_countries",
                                  std::to_string(hm.n_countries), ""});
            if (hm.tau) table.rows.push_back({model, outcome, h, "tau", format_number(*hm.tau),
                                              ""});
        }
    }
    write_dsv(table, path);
}

PredictionInputs prediction_inputs(const Calibration& calib, const ScenarioSpec& spec,
                                   double damage_percent) {
    PredictionInputs in;
    in.lcompshock = calib.lcompshock;
    in.damage = damage_percent;
    in.advanced_economy = 1.0;
    in.lag_outcome = 0.0;
    in.fb_interaction = spec.fb0;
    in.fb_lag = calib.lag_fb;
    in.nd_capacity = spec.adaptive_capacity;
    in.lag_extra = calib.extra_nd1995;
    in.decay = calib.decay;
    in.horizons = calib.horizons;
    return in;
}

namespace {

double term_multiplier(const std::string& term, const PredictionInputs& in) {
    if (term == "shock") return in.lcompshock;
    if (term == "onset") return 1.0;
    if (term == "onset_damage") return in.damage;
    if (term == "onset_ae") return in.advanced_economy;
    if (term == "lag_outcome") return in.lag_outcome;
    if (term == "onset_fb") return in.fb_interaction;
    if (term == "lag_fb") return in.fb_lag;
    if (term == "onset_ndcapacity") return in.nd_capacity;
    if (term == "lag_extra_nd1995") return in.lag_extra;
    if (term == "constant") return 1.0;
    throw ValidationError("unknown prediction term '" + term + "'");
}

}  // namespace

std::vector<double> predict_deviations(const OutcomeModel& model, const PredictionInputs& in) {
    if (model.horizons.empty())
        throw ValidationError("outcome '" + model.outcome + "' has no estimated horizons");
    std::vector<double> out;
    out.reserve(static_cast<size_t>(std::max(in.horizons, 1)));
    for (const auto& hm : model.horizons) {
        double v = 0.0;
        // Summation order is part of the contract; see kPredictionTermOrder.
        for (const auto& term : kPredictionTermOrder)
            if (const Coefficient* c = hm.find(term)) v += c->estimate * term_multiplier(term, in);
        out.push_back(v);
        if (static_cast<int>(out.size()) >= in.horizons) break;
    }
    while (static_cast<int>(out.size()) < in.horizons) out.push_back(out.back() * in.decay);
    return out;
}

PredictionBand predict_band(const OutcomeModel& model, const PredictionInputs& in, double z) {
    PredictionBand band;
    band.center = predict_deviations(model, in);
    band.lower.resize(band.center.size());
    band.upper.resize(band.center.size());
    const int estimated = static_cast<int>(model.horizons.size());
    double se = 0.0;
    for (size_t h = 0; h < band.center.size(); ++h) {
        if (static_cast<int>(h) < estimated) se = model.horizons[h].prediction_se;
        else se *= in.decay;
        band.lower[h] = band.center[h] - z * se;
        band.upper[h] = band.center[h] + z * se;
    }
    return band;
}

std::map<std::string, Channel> default_outcome_channels() {
    return {{"gdp_growth", Channel::kGrowth},
            {"primary_balance", Channel::kPrimaryBalance},
            {"interest_rate_lc", Channel::kInterest},
            {"gdp_deflator", Channel::kInflation}};
}

std::map<Channel, ShockVector> build_model_vectors(const CoefficientSet& coeffs,
                                                   const Calibration& calib,
                                                   const ScenarioSpec& spec,
                                                   double damage_percent) {
    std::map<Channel, std::string> outcome_of;
    for (const auto& [outcome, channel] : default_outcome_channels())
        outcome_of[channel] = outcome;

    const PredictionInputs in = prediction_inputs(calib, spec, damage_percent);
    std::map<Channel, ShockVector> out;
    for (Channel channel : spec.channels) {
        const std::string& outcome = outcome_of.at(channel);
        std::vector<double> dev = predict_deviations(coeffs.require(outcome), in);
        ShockVector vec;
        vec.channel = channel;
        vec.deviations.reserve(dev.size());
        for (double pp : dev) vec.deviations.push_back(pp / 100.0);
        out[channel] = vec;
    }
    return out;
}

// ----------------------------------------------------------------------------
// Estimation

FeOlsResult fe_ols(const std::vector<double>& y,
                   const std::vector<std::vector<double>>& x_cols,
                   const std::vector<int>& group,
                   const std::vector<std::string>& names) {
    const size_t n = y.size();
    const size_t k = x_cols.size();
    if (n == 0) throw ValidationError("regression needs at least one observation");
    if (k == 0) throw ValidationError("regression needs at least one regressor");
    if (names.size() != k)
        throw ValidationError("regressor name count does not match column count");
    if (group.size() != n)
        throw ValidationError("group id count does not match observation count");
    for (size_t j = 0; j < k; ++j)
        if (x_cols[j].size() != n)
            throw ValidationError("regressor '" + names[j] + "' has " +
                                  std::to_string(x_cols[j].size()) + " rows, dependent has " +
                                  std::to_string(n));

    std::map<int, int> group_index;
    for (int gid : group) group_index.emplace(gid, static_cast<int>(group_index.size()));
    const int G = static_cast<int>(group_index.size());

    Eigen::VectorXd yv(n);
    Eigen::MatrixXd X(n, k);
    for (size_t i = 0; i < n; ++i) {
        yv(i) = y[i];
        for (size_t j = 0; j < k; ++j) X(i, j) = x_cols[j][i];
    }

    Eigen::VectorXd y_group = Eigen::VectorXd::Zero(G);
    Eigen::MatrixXd x_group = Eigen::MatrixXd::Zero(G, k);
    Eigen::VectorXd count = Eigen::VectorXd::Zero(G);
    for (size_t i = 0; i < n; ++i) {
        const int g = group_index.at(group[i]);
        count(g) += 1.0;
        y_group(g) += yv(i);
        x_group.row(g) += X.row(i);
    }
    for (int g = 0; g < G; ++g) {
        y_group(g) /= count(g);
        x_group.row(g) /= count(g);
    }

    const double y_grand = yv.mean();
    const Eigen::RowVectorXd x_grand = X.colwise().mean();

    Eigen::VectorXd yd(n);
    Eigen::MatrixXd Xd(n, k);
    for (size_t i = 0; i < n; ++i) {
        const int g = group_index.at(group[i]);
        yd(i) = yv(i) - y_group(g);
        Xd.row(i) = X.row(i) - x_group.row(g);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xd);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    if (rank < static_cast<int>(k)) {
        // The permutation sorts dependent columns last.
        const auto& perm = qr.colsPermutation().indices();
        std::vector<std::string> dependent;
        for (int j = rank; j < static_cast<int>(k); ++j)
            dependent.push_back(names[static_cast<size_t>(perm(j))]);
        std::sort(dependent.begin(), dependent.end());
        std::string msg = "collinear regressors after demeaning:";
        for (const auto& name : dependent) msg += " " + name;
        msg += " (rank " + std::to_string(rank) + " of " + std::to_string(k) + ")";
        throw ComputationError(msg);
    }

    const int dof = static_cast<int>(n) - static_cast<int>(k) - G;
    if (dof <= 0)
        throw ComputationError("not enough observations: n=" + std::to_string(n) + ", k=" +
                               std::to_string(k) + ", groups=" + std::to_string(G));

    FeOlsResult res;
    res.names = names;
    Eigen::VectorXd beta = qr.solve(yd);
    Eigen::VectorXd resid = yd - Xd * beta;
    const double ssr = resid.squaredNorm();
    const double sst = yd.squaredNorm();
    const double sigma2 = ssr / dof;
    Eigen::MatrixXd cov = sigma2 * (Xd.transpose() * Xd).inverse();

    res.beta.resize(k);
    res.se.resize(k);
    for (size_t j = 0; j < k; ++j) {
        res.beta[j] = beta(j);
        res.se[j] = std::sqrt(cov(j, j));
    }
    res.constant = y_grand - x_grand * beta;
    res.prediction_se = std::sqrt(ssr / static_cast<double>(n));
    res.r_squared = sst > 0.0 ? 1.0 - ssr / sst : (ssr == 0.0 ? 1.0 : 0.0);
    res.n_obs = static_cast<int>(n);
    res.n_countries = G;
    res.dof = dof;
    return res;
}

Panel Panel::from_table(const Table& table) {
    Panel panel;
    const int c_country = table.require_column("country");
    const int c_year = table.require_column("year");
    for (size_t j = 0; j < table.columns.size(); ++j) {
        if (static_cast<int>(j) == c_country || static_cast<int>(j) == c_year) continue;
        panel.columns[table.columns[j]] = {};
    }
    for (const auto& row : table.rows) {
        panel.country.push_back(row[c_country]);
        panel.year.push_back(static_cast<int>(parse_number(row[c_year], "panel year")));
        for (size_t j = 0; j < table.columns.size(); ++j) {
            if (static_cast<int>(j) == c_country || static_cast<int>(j) == c_year) continue;
            double v = row[j].empty() ? std::numeric_limits<double>::quiet_NaN()
                                      : parse_number(row[j], "panel " + table.columns[j]);
            panel.columns[table.columns[j]].push_back(v);
        }
    }
    return panel;
}

namespace {

struct PanelIndex {
    std::map<std::string, std::map<int, size_t>> rows;  // country -> year -> row
    std::map<std::string, int> country_id;
};

PanelIndex index_panel(const Panel& panel) {
    PanelIndex idx;
    for (size_t i = 0; i < panel.size(); ++i) {
        auto [it, inserted] = idx.rows[panel.country[i]].emplace(panel.year[i], i);
        (void)it;
        if (!inserted)
            throw ValidationError("panel has duplicate row for country '" + panel.country[i] +
                                  "', year " + std::to_string(panel.year[i]));
    }
    for (const auto& [name, years] : idx.rows) {
        (void)years;
        idx.country_id.emplace(name, static_cast<int>(idx.country_id.size()));
    }
    return idx;
}

int longest_consecutive_run(const std::map<int, size_t>& years) {
    int best = 0, run = 0, prev = 0;
    bool first = true;
    for (const auto& [year, row] : years) {
        (void)row;
        run = (!first && year == prev + 1) ? run + 1 : 1;
        best = std::max(best, run);
        prev = year;
        first = false;
    }
    return best;
}

struct DesignRows {
    std::vector<double> dep;
    std::vector<std::vector<double>> cols;
    std::vector<int> group;
};

const std::vector<std::string> kDesignNames = {
    "shock",    "onset",       "onset_damage", "onset_ae",         "lag_outcome",
    "onset_fb", "lag_fb",      "onset_ndcapacity", "lag_extra_nd1995",
};

void check_estimation_inputs(const Panel& panel, const LpEstimateSpec& spec) {
    if (spec.horizons < 1) throw ValidationError("estimation needs at least one horizon");
    for (const auto& name : {spec.outcome, spec.shock, spec.onset, spec.damage, spec.advanced,
                             spec.fiscal_balance, spec.nd_capacity, spec.extra})
        if (!panel.columns.count(name))
            throw ValidationError("panel is missing column '" + name + "'");
    const auto& outcome = panel.columns.at(spec.outcome);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : outcome) {
        if (std::isnan(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo))
        throw ValidationError("outcome '" + spec.outcome + "' has zero variance");
}

void check_consecutive_spans(const PanelIndex& idx, int horizons) {
    // The longest regression spans t-1 .. t+(horizons-1).
    const int required_run = horizons + 1;
    std::vector<std::string> short_countries;
    for (const auto& [name, years] : idx.rows)
        if (longest_consecutive_run(years) < required_run) short_countries.push_back(name);
    if (!short_countries.empty()) {
        std::string msg = "countries without " + std::to_string(required_run) +
                          " consecutive years of data:";
        for (const auto& name : short_countries) msg += " " + name;
        throw ValidationError(msg);
    }
}

DesignRows build_design(const Panel& panel, const LpEstimateSpec& spec, const PanelIndex& idx,
                        int h) {
    const auto& y_col = panel.columns.at(spec.outcome);
    const auto& shock_col = panel.columns.at(spec.shock);
    const auto& onset_col = panel.columns.at(spec.onset);
    const auto& damage_col = panel.columns.at(spec.damage);
    const auto& ae_col = panel.columns.at(spec.advanced);
    const auto& fb_col = panel.columns.at(spec.fiscal_balance);
    const auto& ndc_col = panel.columns.at(spec.nd_capacity);
    const auto& extra_col = panel.columns.at(spec.extra);

    DesignRows d;
    d.cols.resize(kDesignNames.size());
    for (const auto& [country, years] : idx.rows) {
        for (const auto& [t, row] : years) {
            (void)t;
            auto lead = years.find(t + h);
            auto lag = years.find(t - 1);
            if (lead == years.end() || lag == years.end()) continue;
            const double y_lead = y_col[lead->second];
            const double y_lag = y_col[lag->second];
            const double shock = shock_col[lead->second];
            const double onset = onset_col[row];
            const double damage = damage_col[row];
            const double ae = ae_col[row];
            const double fb = fb_col[row];
            const double fb_lag = fb_col[lag->second];
            const double ndc = ndc_col[row];
            const double extra_lag = extra_col[lag->second];
            const double vals[] = {y_lead, y_lag, shock,  onset, damage,
                                   ae,     fb,    fb_lag, ndc,   extra_lag};
            bool complete = true;
            for (double v : vals)
                if (std::isnan(v)) { complete = false; break; }
            if (!complete) continue;
            d.dep.push_back(y_lead - y_lag);
            d.cols[0].push_back(shock);
            d.cols[1].push_back(onset);
            d.cols[2].push_back(onset * damage);
            d.cols[3].push_back(onset * ae);
            d.cols[4].push_back(y_lag);
            d.cols[5].push_back(onset * fb);
            d.cols[6].push_back(fb_lag);
            d.cols[7].push_back(onset * ndc);
            d.cols[8].push_back(extra_lag);
            d.group.push_back(idx.country_id.at(country));
        }
    }
    return d;
}

}  // namespace

OutcomeModel lp_estimate(const Panel& panel, const LpEstimateSpec& spec) {
    check_estimation_inputs(panel, spec);
    const PanelIndex idx = index_panel(panel);
    check_consecutive_spans(idx, spec.horizons);

    OutcomeModel om;
    om.outcome = spec.outcome;
    for (int h = 0; h < spec.horizons; ++h) {
        DesignRows d = build_design(panel, spec, idx, h);
        FeOlsResult fit = fe_ols(d.dep, d.cols, d.group, kDesignNames);
        HorizonModel hm;
        hm.horizon = h;
        for (size_t j = 0; j < kDesignNames.size(); ++j)
            hm.terms.emplace_back(kDesignNames[j], Coefficient{fit.beta[j], fit.se[j]});
        hm.terms.emplace_back("constant", Coefficient{fit.constant, 0.0});
        hm.prediction_se = fit.prediction_se;
        hm.n_obs = fit.n_obs;
        hm.r_squared = fit.r_squared;
        hm.n_countries = fit.n_countries;
        om.horizons.push_back(std::move(hm));
    }
    return om;
}

OutcomeModel qr_estimate(const Panel& panel, const LpEstimateSpec& spec, double tau) {
    check_estimation_inputs(panel, spec);
    const PanelIndex idx = index_panel(panel);
    check_consecutive_spans(idx, spec.horizons);

    OutcomeModel om;
    om.outcome = spec.outcome;
    for (int h = 0; h < spec.horizons; ++h) {
        DesignRows d = build_design(panel, spec, idx, h);
        d.cols.push_back(std::vector<double>(d.dep.size(), 1.0));
        QrResult fit = qr_fit(d.dep, d.cols, tau);

        std::set<int> groups(d.group.begin(), d.group.end());
        double ss = 0.0;
        for (size_t i = 0; i < d.dep.size(); ++i) {
            double yhat = 0.0;
            for (size_t j = 0; j < d.cols.size(); ++j) yhat += fit.beta[j] * d.cols[j][i];
            const double r = d.dep[i] - yhat;
            ss += r * r;
        }

        HorizonModel hm;
        hm.horizon = h;
        for (size_t j = 0; j < kDesignNames.size(); ++j)
            hm.terms.emplace_back(kDesignNames[j], Coefficient{fit.beta[j], 0.0});
        hm.terms.emplace_back("constant", Coefficient{fit.beta.back(), 0.0});
        hm.prediction_se = std::sqrt(ss / static_cast<double>(d.dep.size()));
        hm.n_obs = static_cast<int>(d.dep.size());
        hm.n_countries = static_cast<int>(groups.size());
        hm.tau = tau;
        om.horizons.push_back(std::move(hm));
    }
    return om;
}

// ----------------------------------------------------------------------------
// Quantile regression

double pinball_loss(const std::vector<double>& y, const std::vector<double>& yhat, double tau) {
    if (y.size() != yhat.size())
        throw ValidationError("pinball loss needs equally sized vectors");
    if (y.empty()) throw ValidationError("pinball loss needs at least one observation");
    double total = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - yhat[i];
        total += r * (tau - (r < 0.0 ? 1.0 : 0.0));
    }
    return total / static_cast<double>(y.size());
}

namespace {

void check_qr_inputs(const std::vector<double>& y,
                     const std::vector<std::vector<double>>& x_cols, double tau) {
    if (tau <= 0.0 || tau >= 1.0)
        throw ValidationError("quantile level must lie strictly between 0 and 1");
    if (y.empty()) throw ValidationError("quantile fit needs at least one observation");
    if (x_cols.empty()) throw ValidationError("quantile fit needs at least one regressor");
    for (const auto& col : x_cols)
        if (col.size() != y.size())
            throw ValidationError("quantile fit needs equally sized columns");
    if (y.size() < x_cols.size())
        throw ValidationError("quantile fit needs at least as many observations as regressors");
}

double mean_pinball(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                    const Eigen::VectorXd& beta, double tau) {
    const Eigen::VectorXd r = y - X * beta;
    double total = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i)
        total += r(i) * (tau - (r(i) < 0.0 ? 1.0 : 0.0));
    return total / static_cast<double>(r.size());
}

}  // namespace

QrResult qr_fit(const std::vector<double>& y,
                const std::vector<std::vector<double>>& x_cols,
                double tau) {
    check_qr_inputs(y, x_cols, tau);
    const size_t n = y.size();
    const size_t k = x_cols.size();

    Eigen::VectorXd yv(n);
    Eigen::MatrixXd X(n, k);
    for (size_t i = 0; i < n; ++i) {
        yv(i) = y[i];
        for (size_t j = 0; j < k; ++j) X(i, j) = x_cols[j][i];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> ols(X);
    ols.setThreshold(1e-10);
    if (static_cast<size_t>(ols.rank()) < k)
        throw ComputationError("quantile fit design matrix is rank deficient");
    Eigen::VectorXd beta = ols.solve(yv);

    QrResult best;
    best.beta.assign(k, 0.0);
    best.loss = std::numeric_limits<double>::infinity();
    int iterations = 0;

    Eigen::VectorXd resid = yv - X * beta;
    double delta = std::max(1e-6, resid.cwiseAbs().maxCoeff() * 0.1);
    for (; delta >= 1e-10; delta *= 0.1) {
        for (int iter = 0; iter < 60; ++iter) {
            ++iterations;
            resid = yv - X * beta;
            Eigen::VectorXd w(n);
            for (size_t i = 0; i < n; ++i) {
                const double asym = resid(i) >= 0.0 ? tau : 1.0 - tau;
                w(i) = asym / std::max(delta, std::abs(resid(i)));
            }
            Eigen::MatrixXd Xw = w.cwiseSqrt().asDiagonal() * X;
            Eigen::VectorXd yw = w.cwiseSqrt().asDiagonal() * yv;
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> wls(Xw);
            wls.setThreshold(1e-12);
            if (static_cast<size_t>(wls.rank()) < k) break;  // weights collapsed this stage
            Eigen::VectorXd next = wls.solve(yw);
            const double step = (next - beta).cwiseAbs().maxCoeff();
            beta = next;
            if (step < 1e-13 * (1.0 + beta.cwiseAbs().maxCoeff())) break;
        }
        const double loss = mean_pinball(yv, X, beta, tau);
        if (loss < best.loss) {
            best.loss = loss;
            for (size_t j = 0; j < k; ++j) best.beta[j] = beta(j);
        }
    }

    // A pinball optimum interpolates k observations, so polish the smoothed
    // fit with the basic solutions assembled from the rows it fits closest.
    Eigen::VectorXd bb(k);
    for (size_t j = 0; j < k; ++j) bb(static_cast<Eigen::Index>(j)) = best.beta[j];
    resid = yv - X * bb;
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    const size_t m = std::min(n, k + 4);
    std::partial_sort(order.begin(), order.begin() + static_cast<long>(m), order.end(),
                      [&](size_t a, size_t b) {
                          return std::abs(resid(static_cast<Eigen::Index>(a))) <
                                 std::abs(resid(static_cast<Eigen::Index>(b)));
                      });
    std::vector<size_t> pick(k);
    std::vector<bool> mask(m, false);
    std::fill(mask.begin(), mask.begin() + static_cast<long>(k), true);
    std::sort(mask.begin(), mask.end());
    do {
        size_t c = 0;
        for (size_t i = 0; i < m; ++i)
            if (mask[i]) pick[c++] = order[i];
        Eigen::MatrixXd A(k, k);
        Eigen::VectorXd rhs(k);
        for (size_t r = 0; r < k; ++r) {
            A.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(pick[r]));
            rhs(static_cast<Eigen::Index>(r)) = yv(static_cast<Eigen::Index>(pick[r]));
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (!lu.isInvertible()) continue;
        Eigen::VectorXd cand = lu.solve(rhs);
        ++iterations;
        const double loss = mean_pinball(yv, X, cand, tau);
        if (loss < best.loss) {
            best.loss = loss;
            for (size_t j = 0; j < k; ++j) best.beta[j] = cand(static_cast<Eigen::Index>(j));
        }
    } while (std::next_permutation(mask.begin(), mask.end()));

    best.iterations = iterations;
    return best;
}

QrResult qr_exhaustive(const std::vector<double>& y,
                       const std::vector<std::vector<double>>& x_cols,
                       double tau) {
    check_qr_inputs(y, x_cols, tau);
    const size_t n = y.size();
    const size_t k = x_cols.size();
    if (n > 16)
        throw ValidationError("exhaustive quantile search is limited to 16 observations");

    Eigen::VectorXd yv(n);
    Eigen::MatrixXd X(n, k);
    for (size_t i = 0; i < n; ++i) {
        yv(i) = y[i];
        for (size_t j = 0; j < k; ++j) X(i, j) = x_cols[j][i];
    }

    // A minimizer of the pinball objective interpolates k observations, so
    // trying every k-subset is exact.
    QrResult best;
    best.beta.assign(k, 0.0);
    best.loss = std::numeric_limits<double>::infinity();
    std::vector<size_t> pick(k);
    std::vector<bool> mask(n, false);
    std::fill(mask.begin(), mask.begin() + static_cast<long>(k), true);
    std::sort(mask.begin(), mask.end());  // lexicographically first combination
    do {
        size_t m = 0;
        for (size_t i = 0; i < n; ++i)
            if (mask[i]) pick[m++] = i;
        Eigen::MatrixXd A(k, k);
        Eigen::VectorXd b(k);
        for (size_t r = 0; r < k; ++r) {
            A.row(r) = X.row(static_cast<Eigen::Index>(pick[r]));
            b(r) = yv(static_cast<Eigen::Index>(pick[r]));
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (!lu.isInvertible()) continue;
        Eigen::VectorXd beta = lu.solve(b);
        ++best.iterations;
        const double loss = mean_pinball(yv, X, beta, tau);
        if (loss < best.loss) {
            best.loss = loss;
            for (size_t j = 0; j < k; ++j) best.beta[j] = beta(j);
        }
    } while (std::next_permutation(mask.begin(), mask.end()));
    if (!std::isfinite(best.loss))
        throw ComputationError("every observation subset was singular");
    return best;
}

CounterfactualComparison compare_scenarios(const ScenarioResult& a, const ScenarioResult& b,
                                           int from_year) {
    CounterfactualComparison cmp;
    cmp.peak_a = *std::max_element(a.path.d.begin(), a.path.d.end()) * 100.0;
    cmp.peak_b = *std::max_element(b.path.d.begin(), b.path.d.end()) * 100.0;
    cmp.peak_reduction = cmp.peak_a - cmp.peak_b;
    cmp.stabilization_a = stabilization_year(a.path, from_year);
    cmp.stabilization_b = stabilization_year(b.path, from_year);
    return cmp;
}

}  // namespace debtlab
