#include "mdccp/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "mdccp/errors.hpp"

namespace mdccp {

namespace {

/// Year prefix of an ISO-8601 date label; throws when absent.
int label_year(const std::string& label) {
    if (label.size() >= 5 && label[4] == '-') {
        int year = 0;
        for (int i = 0; i < 4; ++i) {
            if (label[i] < '0' || label[i] > '9') {
                throw DomainError("time label '" + label + "' carries no calendar year");
            }
            year = year * 10 + (label[i] - '0');
        }
        return year;
    }
    throw DomainError("time label '" + label + "' carries no calendar year");
}

ReturnPanel slice(const ReturnPanel& panel, std::size_t begin, std::size_t end) {
    ReturnPanel out;
    out.assets = panel.assets;
    out.times.assign(panel.times.begin() + begin, panel.times.begin() + end);
    out.values.resize(panel.n_assets());
    for (std::size_t a = 0; a < panel.n_assets(); ++a) {
        out.values[a].assign(panel.values[a].begin() + begin, panel.values[a].begin() + end);
    }
    return out;
}

double sample_std(std::span<const double> v) {
    const std::size_t n = v.size();
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(n - 1));
}

}  // namespace

int BacktestPlan::max_scale() const {
    if (s_set.empty()) throw ConfigError("backtest plan has an empty scale set");
    return *std::max_element(s_set.begin(), s_set.end());
}

SplitResult split(const ReturnPanel& panel, BacktestPlan::SplitRule rule, int fixed_length,
                  int min_length) {
    panel.validate();
    SplitResult res;

    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    std::vector<std::string> labels;
    if (rule == BacktestPlan::SplitRule::fixed_length) {
        if (fixed_length < 2) throw ConfigError("fixed subperiod length must be >= 2");
        if (static_cast<std::size_t>(fixed_length) > panel.length()) {
            throw InfeasibleSubperiodError(
                "fixed subperiod length " + std::to_string(fixed_length) +
                " exceeds panel length " + std::to_string(panel.length()));
        }
        std::size_t begin = 0;
        int k = 1;
        while (begin < panel.length()) {
            const std::size_t end =
                std::min(panel.length(), begin + static_cast<std::size_t>(fixed_length));
            ranges.push_back({begin, end});
            labels.push_back("P" + std::to_string(k++));
            begin = end;
        }
    } else {
        std::size_t begin = 0;
        while (begin < panel.length()) {
            const int year = label_year(panel.times[begin]);
            std::size_t end = begin + 1;
            while (end < panel.length() && label_year(panel.times[end]) == year) ++end;
            ranges.push_back({begin, end});
            labels.push_back(std::to_string(year));
            begin = end;
        }
    }

    for (std::size_t i = 0; i < ranges.size(); ++i) {
        const std::size_t len = ranges[i].second - ranges[i].first;
        if (len < static_cast<std::size_t>(min_length)) {
            res.rejected.push_back("subperiod " + labels[i] + ": length " +
                                   std::to_string(len) + " below required " +
                                   std::to_string(min_length));
            continue;
        }
        res.subpanels.push_back(slice(panel, ranges[i].first, ranges[i].second));
        res.subperiod_labels.push_back(labels[i]);
    }
    if (res.subpanels.empty()) {
        throw InfeasibleSubperiodError("no subperiod meets the minimum length " +
                                       std::to_string(min_length) +
                                       (res.rejected.empty() ? "" : "; " + res.rejected[0]));
    }
    return res;
}

double cumulative_return(std::span<const double> period_returns, bool additive) {
    if (additive) {
        double acc = 0.0;
        for (double r : period_returns) acc += r;
        return acc;
    }
    double acc = 1.0;
    for (double r : period_returns) acc *= 1.0 + r;
    return acc - 1.0;
}

namespace {

void finalize(ConfigResult& cfg, bool additive) {
    std::vector<double> rets;
    for (const auto& r : cfg.period_returns) {
        if (!r) return;  // any failed subperiod leaves the aggregates unset
        rets.push_back(*r);
    }
    if (rets.empty()) return;
    cfg.cumulative = cumulative_return(rets, additive);
    if (rets.size() >= 2) {
        const double risk = sample_std(rets);
        cfg.risk = risk;
        if (risk > 0.0) cfg.risk_adjusted = *cfg.cumulative / risk;
    }
}

}  // namespace

BacktestReport run(const ReturnPanel& panel, const BacktestPlan& plan,
                   const std::string& panel_name) {
    if (plan.q_set.empty() || plan.s_set.empty()) {
        throw ConfigError("backtest plan needs nonempty Q and S sets");
    }
    const int min_len = 2 * plan.max_scale();
    SplitResult sp = split(panel, plan.rule, plan.subperiod_length, min_len);

    BacktestReport report;
    report.panel_name = panel_name;
    report.subperiods = sp.subperiod_labels;
    report.rejected_subperiods = sp.rejected;
    report.additive_cumulative = plan.additive_cumulative;

    const std::size_t np = sp.subpanels.size();

    // M-VP baseline per target
    if (plan.run_mvp) {
        for (double u : plan.targets) {
            ConfigResult cfg;
            cfg.model = "M-VP";
            cfg.target = u;
            cfg.period_returns.resize(np);
            cfg.period_failures.resize(np);
            for (std::size_t p = 0; p < np; ++p) {
                try {
                    SolverInput in;
                    in.expected_returns = mean_returns(sp.subpanels[p]);
                    in.risk_matrix = sample_covariance(sp.subpanels[p]);
                    in.target_return = u;
                    WeightVector wv = solve_min_risk(in, plan.solver);
                    cfg.period_returns[p] = wv.weights.dot(in.expected_returns);
                } catch (const Error& e) {
                    cfg.period_failures[p] = e.error_class();
                }
            }
            finalize(cfg, plan.additive_cumulative);
            report.results.push_back(std::move(cfg));
        }
    }

    if (plan.run_mdccp) {
        // Per-cell solves are shared across categories: every category's
        // support is a subset of the full Q x S grid.
        PreferenceSpec full = build_alpha(Category::CI, plan.q_set, plan.s_set);
        for (double u : plan.targets) {
            // cells[p] : per-subperiod map of solved cells (empty map on failure)
            std::vector<std::map<Cell, WeightVector>> cells(np);
            std::vector<Eigen::VectorXd> mu(np);
            std::vector<std::string> cell_failure(np);
            for (std::size_t p = 0; p < np; ++p) {
                mu[p] = mean_returns(sp.subpanels[p]);
                try {
                    WeightField field =
                        solve_mdccp(sp.subpanels[p], full, u, plan.detrend, plan.solver);
                    cells[p] = std::move(field.cells);
                } catch (const Error& e) {
                    cell_failure[p] = e.error_class();
                }
            }
            for (Category cat : plan.categories) {
                ConfigResult cfg;
                cfg.model = "M-DCCP";
                cfg.category = cat;
                cfg.target = u;
                cfg.period_returns.resize(np);
                cfg.period_failures.resize(np);
                for (std::size_t p = 0; p < np; ++p) {
                    if (!cell_failure[p].empty()) {
                        cfg.period_failures[p] = cell_failure[p];
                        continue;
                    }
                    try {
                        PreferenceSpec spec = build_alpha(cat, plan.q_set, plan.s_set);
                        WeightField field = aggregate(cells[p], spec, mu[p]);
                        cfg.period_returns[p] = field.expected_return;
                    } catch (const Error& e) {
                        cfg.period_failures[p] = e.error_class();
                    }
                }
                finalize(cfg, plan.additive_cumulative);
                report.results.push_back(std::move(cfg));
            }
        }
    }
    return report;
}

const ConfigResult* BacktestReport::find(const std::string& model,
                                         std::optional<Category> cat, double target) const {
    for (const ConfigResult& r : results) {
        if (r.model == model && r.category == cat && r.target == target) return &r;
    }
    return nullptr;
}

std::vector<WinSummary> win_summary(std::span<const BacktestReport> reports) {
    std::vector<double> targets;
    for (const BacktestReport& rep : reports) {
        for (const ConfigResult& r : rep.results) {
            if (std::find(targets.begin(), targets.end(), r.target) == targets.end()) {
                targets.push_back(r.target);
            }
        }
    }
    std::sort(targets.begin(), targets.end());

    std::vector<WinSummary> out;
    for (double u : targets) {
        WinSummary w;
        w.target = u;
        for (const BacktestReport& rep : reports) {
            const ConfigResult* mvp = rep.find("M-VP", std::nullopt, u);
            for (const ConfigResult& r : rep.results) {
                if (r.model != "M-DCCP" || r.target != u) continue;
                ++w.total;
                if (mvp && mvp->cumulative && r.cumulative &&
                    *r.cumulative > *mvp->cumulative) {
                    ++w.wins;
                }
            }
        }
        w.percent = w.total == 0 ? 0.0 : 100.0 * static_cast<double>(w.wins) /
                                             static_cast<double>(w.total);
        out.push_back(w);
    }
    return out;
}

std::vector<double> actual_index_return(const ReturnPanel& returns,
                                        const ReturnPanel& market_values,
                                        const SplitResult& splits) {
    if (market_values.length() != returns.length() ||
        market_values.n_assets() != returns.n_assets()) {
        throw ConfigError("market-value panel is not aligned with the return panel");
    }
    // per-period value-weighted return using current-period weights, then
    // compounded within each subperiod
    std::vector<double> per_period(returns.length());
    for (std::size_t t = 0; t < returns.length(); ++t) {
        double cap_sum = 0.0, acc = 0.0;
        for (std::size_t a = 0; a < returns.n_assets(); ++a) {
            const double cap = market_values.values[a][t];
            if (cap <= 0.0) {
                throw DomainError("nonpositive market value for asset '" +
                                  returns.assets[a] + "' at time '" + returns.times[t] + "'");
            }
            cap_sum += cap;
            acc += cap * returns.values[a][t];
        }
        per_period[t] = acc / cap_sum;
    }

    std::vector<double> out;
    std::size_t offset = 0;
    for (const ReturnPanel& sub : splits.subpanels) {
        // locate the subpanel inside the full panel by its first time label
        while (offset < returns.length() && returns.times[offset] != sub.times.front()) {
            ++offset;
        }
        const std::size_t len = sub.length();
        out.push_back(cumulative_return(
            std::span<const double>(per_period).subspan(offset, len)));
        offset += len;
    }
    return out;
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : "NA"; }

void write_block(std::ostream& out, std::span<const BacktestReport> reports, double u,
                 bool risk_adjusted) {
    out << "# u = " << num(u) << (risk_adjusted ? " (risk-adjusted)" : " (cumulative)")
        << "\npanel\tM-VP";
    for (Category c : all_categories()) out << '\t' << category_name(c);
    out << '\n';
    for (const BacktestReport& rep : reports) {
        out << rep.panel_name;
        const ConfigResult* mvp = rep.find("M-VP", std::nullopt, u);
        out << '\t'
            << (mvp ? opt_num(risk_adjusted ? mvp->risk_adjusted : mvp->cumulative) : "NA");
        for (Category c : all_categories()) {
            const ConfigResult* r = rep.find("M-DCCP", c, u);
            out << '\t'
                << (r ? opt_num(risk_adjusted ? r->risk_adjusted : r->cumulative) : "NA");
        }
        out << '\n';
    }
}

}  // namespace

void write_report_table(std::ostream& out, std::span<const BacktestReport> reports) {
    std::vector<double> targets;
    for (const BacktestReport& rep : reports) {
        for (const ConfigResult& r : rep.results) {
            if (std::find(targets.begin(), targets.end(), r.target) == targets.end()) {
                targets.push_back(r.target);
            }
        }
    }
    std::sort(targets.begin(), targets.end());

    if (!reports.empty()) {
        out << "# cumulative aggregation: "
            << (reports[0].additive_cumulative ? "additive" : "compounded") << '\n';
    }
    for (double u : targets) {
        write_block(out, reports, u, false);
    }
    for (double u : targets) {
        write_block(out, reports, u, true);
    }
    out << "# win summary (M-DCCP cumulative > M-VP cumulative)\nu\twins\ttotal\tpercent\n";
    for (const WinSummary& w : win_summary(reports)) {
        out << num(w.target) << '\t' << w.wins << '\t' << w.total << '\t' << num(w.percent)
            << '\n';
    }
}

void write_report_long(std::ostream& out, std::span<const BacktestReport> reports) {
    out << "panel\tmodel\tcategory\tu\tsubperiod\texpected_return\tstatus\n";
    for (const BacktestReport& rep : reports) {
        for (const ConfigResult& r : rep.results) {
            for (std::size_t p = 0; p < r.period_returns.size(); ++p) {
                out << rep.panel_name << '\t' << r.model << '\t'
                    << (r.category ? category_name(*r.category) : "-") << '\t'
                    << num(r.target) << '\t' << rep.subperiods[p] << '\t'
                    << opt_num(r.period_returns[p]) << '\t'
                    << (r.period_failures[p].empty() ? "ok" : r.period_failures[p]) << '\n';
            }
        }
    }
}

void write_return_series(std::ostream& out, const BacktestReport& report,
                         std::span<const double> actual) {
    out << "subperiod\tmodel\tcategory\tu\texpected_return\n";
    for (const ConfigResult& r : report.results) {
        for (std::size_t p = 0; p < r.period_returns.size(); ++p) {
            out << report.subperiods[p] << '\t' << r.model << '\t'
                << (r.category ? category_name(*r.category) : "-") << '\t' << num(r.target)
                << '\t' << opt_num(r.period_returns[p]) << '\n';
        }
    }
    if (!actual.empty()) {
        for (std::size_t p = 0; p < actual.size() && p < report.subperiods.size(); ++p) {
            out << report.subperiods[p] << "\tactual\t-\t-\t" << num(actual[p]) << '\n';
        }
    }
}

}  // namespace mdccp
