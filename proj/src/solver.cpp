#include "mdccp/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>

#include "mdccp/errors.hpp"

namespace mdccp {

namespace {

void check_input(const SolverInput& in) {
    const Eigen::Index n = in.expected_returns.size();
    if (n < 2) throw ConfigError("solver needs at least 2 assets");
    if (in.risk_matrix.rows() != n || in.risk_matrix.cols() != n) {
        throw ConfigError("risk matrix dimensions do not match expected returns");
    }
    const double scale = std::max(1.0, in.risk_matrix.cwiseAbs().maxCoeff());
    if ((in.risk_matrix - in.risk_matrix.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * scale) {
        throw ConfigError("risk matrix is not symmetric");
    }
}

}  // namespace

WeightVector solve_min_risk(const SolverInput& input, const SolverOptions& opts) {
    check_input(input);
    const Eigen::Index n = input.expected_returns.size();
    const Eigen::VectorXd& r = input.expected_returns;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(input.risk_matrix);
    Eigen::VectorXd evals = eig.eigenvalues();
    if (opts.eigenvalue_floor) {
        const double floor = 1e-10 * input.risk_matrix.trace() / static_cast<double>(n);
        evals = evals.cwiseMax(floor);
    }
    const double abs_max = evals.cwiseAbs().maxCoeff();
    const double abs_min = evals.cwiseAbs().minCoeff();
    if (abs_min == 0.0 || abs_max / abs_min > opts.condition_cap) {
        throw ConditioningError("risk matrix condition number " +
                                std::to_string(abs_min == 0.0
                                                   ? std::numeric_limits<double>::infinity()
                                                   : abs_max / abs_min) +
                                " exceeds cap " + std::to_string(opts.condition_cap));
    }

    // M^-1 through the eigendecomposition (shared with the conditioning check,
    // and the floor applies to the same factors it was derived from).
    const Eigen::MatrixXd inv =
        eig.eigenvectors() * evals.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd inv_one = inv * ones;
    const Eigen::VectorXd inv_r = inv * r;
    const double a = ones.dot(inv_one);
    const double b = r.dot(inv_one);
    const double d = r.dot(inv_r);

    const double det = a * d - b * b;
    if (std::abs(det) < 1e-12 * std::abs(a * d)) {
        throw DegenerateConstraintsError(
            "budget and return constraints are dependent (expected returns all equal?)");
    }

    // [a b; b d] [lambda; gamma] = [1; u]
    const double u = input.target_return;
    const double lambda = (d - b * u) / det;
    const double gamma = (a * u - b) / det;

    WeightVector out;
    out.weights = lambda * inv_one + gamma * inv_r;
    const double risk = out.weights.dot(input.risk_matrix * out.weights);
    out.objective = (u - input.risk_free_rate) / risk;
    return out;
}

const char* category_name(Category c) {
    switch (c) {
        case Category::CI: return "C-I";
        case Category::CII: return "C-II";
        case Category::CIII: return "C-III";
        case Category::CIV: return "C-IV";
        case Category::CV: return "C-V";
        case Category::CVI: return "C-VI";
        case Category::CVII: return "C-VII";
        case Category::CVIII: return "C-VIII";
        case Category::CIX: return "C-IX";
    }
    return "?";
}

std::vector<Category> all_categories() {
    return {Category::CI,  Category::CII,  Category::CIII, Category::CIV, Category::CV,
            Category::CVI, Category::CVII, Category::CVIII, Category::CIX};
}

std::optional<Category> parse_category(const std::string& name) {
    for (Category c : all_categories()) {
        if (name == category_name(c)) return c;
    }
    return std::nullopt;
}

PreferenceSpec build_alpha(Category category, std::vector<int> q_set, std::vector<int> s_set) {
    if (q_set.empty() || s_set.empty()) {
        throw EmptyPreferenceError("Q and S sets must be nonempty");
    }
    std::sort(q_set.begin(), q_set.end());
    std::sort(s_set.begin(), s_set.end());

    const int s_min = s_set.front();
    const int s_max = s_set.back();
    const int s_mid = (s_min + s_max + 1) / 2;  // ceil of the midpoint

    auto s_short = [&](int s) { return s < s_mid; };
    auto s_long = [&](int s) { return !s_short(s); };
    auto q_large = [](int q) { return q > 0; };
    auto q_small = [](int q) { return q < 0; };
    auto any_s = [](int) { return true; };
    auto any_q = [](int) { return true; };

    std::function<bool(int)> sel_s = any_s;
    std::function<bool(int)> sel_q = any_q;
    switch (category) {
        case Category::CI: break;
        case Category::CII: sel_s = s_short; break;
        case Category::CIII: sel_s = s_long; break;
        case Category::CIV: sel_q = q_large; break;
        case Category::CV: sel_q = q_small; break;
        case Category::CVI: sel_s = s_long; sel_q = q_large; break;
        case Category::CVII: sel_s = s_long; sel_q = q_small; break;
        case Category::CVIII: sel_s = s_short; sel_q = q_large; break;
        case Category::CIX: sel_s = s_short; sel_q = q_small; break;
    }

    PreferenceSpec spec;
    spec.category = category;
    spec.q_set = q_set;
    spec.s_set = s_set;
    std::vector<Cell> support;
    for (int q : q_set) {
        if (!sel_q(q)) continue;
        for (int s : s_set) {
            if (sel_s(s)) support.push_back({q, s});
        }
    }
    if (support.empty()) {
        throw EmptyPreferenceError(std::string("category ") + category_name(category) +
                                   " selects no (q, s) cells from the given Q and S");
    }
    const double w = 1.0 / static_cast<double>(support.size());
    for (const Cell& c : support) spec.alpha[c] = w;
    return spec;
}

WeightField aggregate(const std::map<Cell, WeightVector>& cells, const PreferenceSpec& spec,
                      const Eigen::VectorXd& expected_returns) {
    std::string missing;
    for (const auto& [cell, a] : spec.alpha) {
        if (!cells.count(cell)) {
            if (!missing.empty()) missing += ", ";
            missing += "(" + std::to_string(cell.first) + "," + std::to_string(cell.second) + ")";
        }
    }
    if (!missing.empty()) {
        throw CoverageError("no weight vector for supported cells: " + missing);
    }

    WeightField field;
    Eigen::VectorXd agg = Eigen::VectorXd::Zero(expected_returns.size());
    for (const auto& [cell, a] : spec.alpha) {
        const WeightVector& wv = cells.at(cell);
        agg += a * wv.weights;
        field.cells.emplace(cell, wv);
    }
    field.aggregated.weights = agg;
    field.aggregated.objective = std::numeric_limits<double>::quiet_NaN();
    field.expected_return = agg.dot(expected_returns);
    return field;
}

Eigen::VectorXd mean_returns(const ReturnPanel& panel) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(panel.n_assets()));
    for (std::size_t a = 0; a < panel.n_assets(); ++a) {
        double sum = 0.0;
        for (double v : panel.column(a)) sum += v;
        r[static_cast<Eigen::Index>(a)] = sum / static_cast<double>(panel.length());
    }
    return r;
}

Eigen::MatrixXd sample_covariance(const ReturnPanel& panel) {
    const Eigen::Index n = static_cast<Eigen::Index>(panel.n_assets());
    const std::size_t T = panel.length();
    if (T < 2) throw InsufficientDataError("covariance requires at least 2 rows");
    const Eigen::VectorXd mu = mean_returns(panel);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t t = 0; t < T; ++t) {
        Eigen::VectorXd x(n);
        for (Eigen::Index a = 0; a < n; ++a) {
            x[a] = panel.values[static_cast<std::size_t>(a)][t] - mu[a];
        }
        cov += x * x.transpose();
    }
    return cov / static_cast<double>(T - 1);
}

WeightField solve_mdccp(const ReturnPanel& panel, const PreferenceSpec& spec,
                        double target_return, const DetrendConfig& config,
                        const SolverOptions& opts, double risk_free_rate,
                        const Eigen::MatrixXd* risk_override) {
    panel.validate();

    std::optional<PairFluctuationCache> cache;
    if (risk_override == nullptr) {
        std::vector<int> scales;
        for (const auto& [cell, a] : spec.alpha) {
            if (std::find(scales.begin(), scales.end(), cell.second) == scales.end()) {
                scales.push_back(cell.second);
            }
        }
        std::sort(scales.begin(), scales.end());
        cache.emplace(panel, scales, config);
    }

    const Eigen::VectorXd r = mean_returns(panel);
    std::map<Cell, WeightVector> cells;
    for (const auto& [cell, a] : spec.alpha) {
        SolverInput in;
        in.expected_returns = r;
        in.risk_matrix = risk_override
                             ? *risk_override
                             : cache->f_matrix(static_cast<double>(cell.first),
                                               cache->scale_index(cell.second));
        in.target_return = target_return;
        in.risk_free_rate = risk_free_rate;
        try {
            WeightVector wv = solve_min_risk(in, opts);
            wv.cell = cell;
            cells.emplace(cell, std::move(wv));
        } catch (const Error& e) {
            throw Error(e.error_class(), std::string(e.what()) + " [cell q = " +
                                             std::to_string(cell.first) + ", s = " +
                                             std::to_string(cell.second) + "]");
        }
    }
    return aggregate(cells, spec, r);
}

void write_weights(std::ostream& out, const WeightField& field, const ReturnPanel& panel,
                   const PreferenceSpec& spec, double target_return, double risk_free_rate) {
    auto num = [&out](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        out << buf;
    };
    out << "# category\t" << category_name(spec.category) << '\n';
    out << "# Q\t" << spec.q_set.front() << ":" << spec.q_set.back() << '\n';
    out << "# S\t" << spec.s_set.front() << ":" << spec.s_set.back() << '\n';
    out << "# u\t";
    num(target_return);
    out << "\n# r_F\t";
    num(risk_free_rate);
    out << "\n# cells\t" << spec.alpha.size() << "\n# alpha\t";
    num(spec.alpha.empty() ? 0.0 : spec.alpha.begin()->second);
    out << '\n';
    out << "q\ts\tasset\tweight\n";
    for (const auto& [cell, wv] : field.cells) {
        for (std::size_t a = 0; a < panel.n_assets(); ++a) {
            out << cell.first << '\t' << cell.second << '\t' << panel.assets[a] << '\t';
            num(wv.weights[static_cast<Eigen::Index>(a)]);
            out << '\n';
        }
    }
    out << "# aggregated\n";
    for (std::size_t a = 0; a < panel.n_assets(); ++a) {
        out << "-\t-\t" << panel.assets[a] << '\t';
        num(field.aggregated.weights[static_cast<Eigen::Index>(a)]);
        out << '\n';
    }
    out << "# expected_return\t";
    num(field.expected_return);
    out << '\n';
}

}  // namespace mdccp
