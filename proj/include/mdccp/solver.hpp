#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mdccp/mfdcca.hpp"
#include "mdccp/series.hpp"

namespace mdccp {

struct SolverOptions {
    double condition_cap = 1e12;  ///< reject risk matrices conditioned worse than this
    bool eigenvalue_floor = false;  ///< clamp eigenvalues at 1e-10 * trace / N before solving
};

struct SolverInput {
    Eigen::VectorXd expected_returns;
    Eigen::MatrixXd risk_matrix;  ///< covariance (M-VP) or F-matrix (M-DCCP)
    double target_return = 0.0;
    double risk_free_rate = 0.0;
};

/// (q, s) coordinates of one grid cell.
using Cell = std::pair<int, int>;

struct WeightVector {
    Eigen::VectorXd weights;  ///< may be negative (short positions)
    double objective = 0.0;   ///< S_p = (u - r_F) / (w' M w)
    std::optional<Cell> cell;
};

/// Minimum-risk weights under sum-to-one and target-return equality
/// constraints, via the two-multiplier Lagrange linear system.
WeightVector solve_min_risk(const SolverInput& input, const SolverOptions& opts = {});

/// Investor preference archetypes over time scales and fluctuation orders.
enum class Category { CI, CII, CIII, CIV, CV, CVI, CVII, CVIII, CIX };

const char* category_name(Category c);
std::optional<Category> parse_category(const std::string& name);
std::vector<Category> all_categories();

struct PreferenceSpec {
    Category category = Category::CI;
    std::vector<int> q_set;
    std::vector<int> s_set;
    std::map<Cell, double> alpha;  ///< support subset of q_set x s_set; sums to 1
};

/// Uniform preference weights over the cell subset selected by the category:
/// scales split at the midpoint of [s_min, s_max] into short/long, orders
/// split by sign into small (q < 0) / large (q > 0), q = 0 in neither.
PreferenceSpec build_alpha(Category category, std::vector<int> q_set, std::vector<int> s_set);

struct WeightField {
    std::map<Cell, WeightVector> cells;
    WeightVector aggregated;        ///< alpha-weighted combination
    double expected_return = 0.0;   ///< aggregated weights dotted with expected returns
};

/// Alpha-weighted combination of per-cell weight vectors. Throws
/// coverage-error if a supported cell is missing.
WeightField aggregate(const std::map<Cell, WeightVector>& cells, const PreferenceSpec& spec,
                      const Eigen::VectorXd& expected_returns);

/// Full M-DCCP solve: per supported (q, s) cell, build the F-matrix and apply
/// the closed-form minimum-risk solver, then aggregate by preference.
/// Expected returns default to in-sample means of the panel. When
/// risk_override is non-null it replaces every cell's F-matrix (the
/// covariance-substitution check path).
WeightField solve_mdccp(const ReturnPanel& panel, const PreferenceSpec& spec,
                        double target_return, const DetrendConfig& config = {},
                        const SolverOptions& opts = {}, double risk_free_rate = 0.0,
                        const Eigen::MatrixXd* risk_override = nullptr);

/// In-sample mean return per asset.
Eigen::VectorXd mean_returns(const ReturnPanel& panel);
/// Sample covariance matrix (n-1 normalization).
Eigen::MatrixXd sample_covariance(const ReturnPanel& panel);

/// Weight export: per-cell rows (q, s, asset, weight) followed by an
/// aggregated block; header lines echo the configuration.
void write_weights(std::ostream& out, const WeightField& field, const ReturnPanel& panel,
                   const PreferenceSpec& spec, double target_return, double risk_free_rate);

}  // namespace mdccp
