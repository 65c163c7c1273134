#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdccp/mfdcca.hpp"
#include "mdccp/series.hpp"
#include "mdccp/solver.hpp"

namespace mdccp {

struct BacktestPlan {
    enum class SplitRule { calendar_year, fixed_length };

    SplitRule rule = SplitRule::calendar_year;
    int subperiod_length = 0;  ///< used when rule == fixed_length

    std::vector<double> targets{0.05, 0.15, 0.30};
    std::vector<Category> categories = all_categories();
    bool run_mvp = true;
    bool run_mdccp = true;
    std::vector<int> q_set;
    std::vector<int> s_set;
    DetrendConfig detrend;
    SolverOptions solver;

    /// false: compound per-subperiod returns; true: sum them (sensitivity mode).
    bool additive_cumulative = false;

    int max_scale() const;
};

struct SplitResult {
    std::vector<ReturnPanel> subpanels;
    std::vector<std::string> subperiod_labels;
    std::vector<std::string> rejected;  ///< human-readable reason per rejected subperiod
};

/// Partition a panel into ordered subperiods. Subperiods shorter than
/// min_length are rejected with a recorded reason; throws infeasible-subperiod
/// if no subperiod survives or a fixed length exceeds the panel.
SplitResult split(const ReturnPanel& panel, BacktestPlan::SplitRule rule,
                  int fixed_length, int min_length);

/// One (model, category, u) configuration of a report.
struct ConfigResult {
    std::string model;  ///< "M-VP" or "M-DCCP"
    std::optional<Category> category;
    double target = 0.0;
    std::vector<std::optional<double>> period_returns;  ///< per subperiod
    std::vector<std::string> period_failures;           ///< error class, empty on success
    std::optional<double> cumulative;
    std::optional<double> risk;           ///< sample std of subperiod returns
    std::optional<double> risk_adjusted;  ///< cumulative / risk; unset when risk degenerate
};

struct BacktestReport {
    std::string panel_name;
    std::vector<std::string> subperiods;
    std::vector<std::string> rejected_subperiods;
    std::vector<ConfigResult> results;
    bool additive_cumulative = false;

    const ConfigResult* find(const std::string& model, std::optional<Category> cat,
                             double target) const;
};

/// Run both models over every subperiod and configuration. Individual solve
/// failures mark their configuration; the remainder completes.
BacktestReport run(const ReturnPanel& panel, const BacktestPlan& plan,
                   const std::string& panel_name = "panel");

/// Compound (or sum) per-subperiod returns into a cumulative return.
double cumulative_return(std::span<const double> period_returns, bool additive = false);

/// Per-u win counts of M-DCCP over M-VP across categories and reports.
struct WinSummary {
    double target = 0.0;
    int wins = 0;
    int total = 0;
    double percent = 0.0;  ///< 100 * wins / total
};

std::vector<WinSummary> win_summary(std::span<const BacktestReport> reports);

/// Value-weighted index return per subperiod from a market-value panel
/// aligned with the return panel (current-period weights, compounded within
/// each subperiod).
std::vector<double> actual_index_return(const ReturnPanel& returns,
                                        const ReturnPanel& market_values,
                                        const SplitResult& splits);

/// Wide table per u block (rows = categories + M-VP baseline), cumulative and
/// risk-adjusted sections, plus win summary.
void write_report_table(std::ostream& out, std::span<const BacktestReport> reports);
/// Machine-readable long format: panel model category u subperiod value.
void write_report_long(std::ostream& out, std::span<const BacktestReport> reports);
/// Figure-style series: subperiod, model, expected return (optional actual).
void write_return_series(std::ostream& out, const BacktestReport& report,
                         std::span<const double> actual = {});

}  // namespace mdccp
