#include "mdccp/mfdcca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "mdccp/errors.hpp"

namespace mdccp {

int DetrendConfig::window_length(int s, int T) const {
    const int l = (tau_rule == TauRule::scale_linked) ? s : T / tau;
    if (l < 1 || l >= T) {
        throw ConfigError("detrend window l = " + std::to_string(l) +
                          " out of range for series length " + std::to_string(T));
    }
    return l;
}

void DetrendConfig::validate(int T) const {
    if (tau_rule == TauRule::fixed && (tau < 2 || tau > T)) {
        throw ConfigError("fixed tau = " + std::to_string(tau) +
                          " must satisfy 2 <= tau <= T (T = " + std::to_string(T) + ")");
    }
}

std::vector<double> profile(std::span<const double> returns) {
    if (returns.size() < 2) {
        throw InsufficientDataError("profile requires at least 2 observations, got " +
                                    std::to_string(returns.size()));
    }
    double mean = 0.0;
    for (double v : returns) mean += v;
    mean /= static_cast<double>(returns.size());

    std::vector<double> prof(returns.size());
    double acc = 0.0;
    for (std::size_t z = 0; z < returns.size(); ++z) {
        acc += returns[z] - mean;
        prof[z] = acc;
    }
    return prof;
}

std::vector<double> moving_average_fit(std::span<const double> prof, int l,
                                       bool literal_normalization) {
    const int T = static_cast<int>(prof.size());
    if (l < 1 || l >= T) {
        throw ConfigError("moving-average window l = " + std::to_string(l) +
                          " must satisfy 1 <= l < T");
    }
    std::vector<double> fit(prof.size());
    double window_sum = 0.0;
    for (int k = 0; k < T; ++k) {
        window_sum += prof[k];
        if (k - l - 1 >= 0) window_sum -= prof[k - l - 1];
        const int available = std::min(k, l) + 1;  // positions k-l..k, clipped at the head
        fit[k] = literal_normalization ? window_sum / static_cast<double>(l)
                                       : window_sum / static_cast<double>(available);
    }
    return fit;
}

std::vector<Box> partition_boxes(int T, int s) {
    if (s < 3 || s > T / 2) {
        throw ScaleError("scale s = " + std::to_string(s) + " outside [3, " +
                         std::to_string(T / 2) + "] for series length " + std::to_string(T));
    }
    const int d = T / s;
    std::vector<Box> boxes;
    boxes.reserve(2 * static_cast<std::size_t>(d));
    for (int v = 0; v < d; ++v) boxes.push_back({v * s, (v + 1) * s});
    for (int v = 0; v < d; ++v) boxes.push_back({T - (v + 1) * s, T - v * s});
    return boxes;
}

double box_detrended_cov(std::span<const double> I, std::span<const double> Ifit,
                         std::span<const double> J, std::span<const double> Jfit) {
    const std::size_t s = I.size();
    if (Ifit.size() != s || J.size() != s || Jfit.size() != s) {
        throw DomainError("box segments must all have identical length");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < s; ++k) {
        acc += (I[k] - Ifit[k]) * (J[k] - Jfit[k]);
    }
    return acc / static_cast<double>(s);
}

std::vector<double> box_covariances(std::span<const double> I, std::span<const double> Ifit,
                                    std::span<const double> J, std::span<const double> Jfit,
                                    int s) {
    const int T = static_cast<int>(I.size());
    std::vector<Box> boxes = partition_boxes(T, s);
    std::vector<double> out;
    out.reserve(boxes.size());
    for (const Box& b : boxes) {
        const std::size_t n = static_cast<std::size_t>(b.end - b.begin);
        out.push_back(box_detrended_cov(I.subspan(b.begin, n), Ifit.subspan(b.begin, n),
                                        J.subspan(b.begin, n), Jfit.subspan(b.begin, n)));
    }
    return out;
}

double fluctuation_function(std::span<const double> box_values, double q,
                            bool literal_q_zero) {
    const std::size_t n = box_values.size();
    if (n == 0) throw DomainError("fluctuation function over an empty box set");

    if (q <= 0.0) {
        for (std::size_t v = 0; v < n; ++v) {
            if (box_values[v] == 0.0) {
                throw DegenerateBoxError("box " + std::to_string(v) +
                                         " has zero detrended covariance; q = " +
                                         std::to_string(q) + " is undefined");
            }
        }
    }

    if (q == 0.0) {
        double log_sum = 0.0;
        for (double v : box_values) log_sum += std::log(std::abs(v));
        const double denom = literal_q_zero ? 2.0 * static_cast<double>(n)  // printed 1/(4d)
                                            : static_cast<double>(n);       // continuous 1/(2d)
        return std::exp(log_sum / denom);
    }

    // Power mean in log space, max-shifted so extreme q stays in range.
    double max_log = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(n);
    for (std::size_t v = 0; v < n; ++v) {
        const double a = std::abs(box_values[v]);
        logs[v] = (a == 0.0) ? -std::numeric_limits<double>::infinity() : std::log(a);
        max_log = std::max(max_log, q * logs[v]);
    }
    if (!std::isfinite(max_log)) return 0.0;  // all boxes zero, q > 0
    double sum = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        const double t = q * logs[v];
        sum += std::isfinite(t) ? std::exp(t - max_log) : 0.0;
    }
    const double log_mean = max_log + std::log(sum / static_cast<double>(n));
    return std::exp(log_mean / q);
}

namespace {

struct PairContext {
    std::vector<double> profile_x;
    std::vector<double> profile_y;
};

std::vector<double> scale_box_values(const PairContext& ctx, int s, const DetrendConfig& cfg) {
    const int T = static_cast<int>(ctx.profile_x.size());
    const int l = cfg.window_length(s, T);
    std::vector<double> fx = moving_average_fit(ctx.profile_x, l, cfg.literal_normalization);
    std::vector<double> fy = moving_average_fit(ctx.profile_y, l, cfg.literal_normalization);
    return box_covariances(ctx.profile_x, fx, ctx.profile_y, fy, s);
}

bool is_constant(std::span<const double> v) {
    for (double x : v) {
        if (x != v.front()) return false;
    }
    return true;
}

}  // namespace

FluctuationSurface surface(const ReturnSeries& x, const ReturnSeries& y,
                           std::span<const double> q_grid, std::span<const int> s_grid,
                           const DetrendConfig& config) {
    if (x.length() != y.length()) {
        throw DomainError("paired series '" + x.asset_id + "' and '" + y.asset_id +
                          "' differ in length");
    }
    if (q_grid.empty() || s_grid.empty()) throw ConfigError("empty q or s grid");
    if (x.length() < 6) {
        throw InsufficientDataError("fluctuation analysis requires series length >= 6");
    }
    config.validate(static_cast<int>(x.length()));

    PairContext ctx{profile(x.values), profile(y.values)};

    FluctuationSurface surf;
    surf.asset_i = x.asset_id;
    surf.asset_j = y.asset_id;
    surf.q_grid.assign(q_grid.begin(), q_grid.end());
    surf.s_grid.assign(s_grid.begin(), s_grid.end());
    surf.values.assign(q_grid.size(), std::vector<double>(s_grid.size()));

    for (std::size_t si = 0; si < s_grid.size(); ++si) {
        std::vector<double> fv = scale_box_values(ctx, s_grid[si], config);
        for (std::size_t qi = 0; qi < q_grid.size(); ++qi) {
            try {
                surf.values[qi][si] =
                    fluctuation_function(fv, q_grid[qi], config.literal_q_zero);
            } catch (const DegenerateBoxError& e) {
                throw DegenerateBoxError(std::string(e.what()) + " [pair (" + x.asset_id +
                                         ", " + y.asset_id + "), q = " +
                                         std::to_string(q_grid[qi]) + ", s = " +
                                         std::to_string(s_grid[si]) + "]");
            }
        }
    }
    return surf;
}

HurstCurve hurst_curve(const FluctuationSurface& surf) {
    HurstCurve curve;
    curve.asset_i = surf.asset_i;
    curve.asset_j = surf.asset_j;
    curve.points.reserve(surf.q_grid.size());

    for (std::size_t qi = 0; qi < surf.q_grid.size(); ++qi) {
        HurstPoint pt;
        pt.q = surf.q_grid[qi];

        std::vector<double> lx, ly;
        for (std::size_t si = 0; si < surf.s_grid.size(); ++si) {
            const double f = surf.values[qi][si];
            if (f > 0.0 && std::isfinite(f)) {
                lx.push_back(std::log(static_cast<double>(surf.s_grid[si])));
                ly.push_back(std::log(f));
            }
        }
        if (lx.size() >= 3) {
            const double n = static_cast<double>(lx.size());
            double mx = 0.0, my = 0.0;
            for (std::size_t i = 0; i < lx.size(); ++i) {
                mx += lx[i];
                my += ly[i];
            }
            mx /= n;
            my /= n;
            double sxx = 0.0, sxy = 0.0, syy = 0.0;
            for (std::size_t i = 0; i < lx.size(); ++i) {
                sxx += (lx[i] - mx) * (lx[i] - mx);
                sxy += (lx[i] - mx) * (ly[i] - my);
                syy += (ly[i] - my) * (ly[i] - my);
            }
            pt.h = sxy / sxx;
            pt.r_squared = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
            pt.fitted = true;
        }
        curve.points.push_back(pt);
    }
    return curve;
}

Eigen::MatrixXd f_matrix(const ReturnPanel& panel, double q, int s,
                         const DetrendConfig& config) {
    PairFluctuationCache cache(panel, std::span<const int>(&s, 1), config);
    return cache.f_matrix(q, 0);
}

PairFluctuationCache::PairFluctuationCache(const ReturnPanel& panel,
                                           std::span<const int> s_grid,
                                           const DetrendConfig& config)
    : n_(panel.n_assets()),
      assets_(panel.assets),
      s_grid_(s_grid.begin(), s_grid.end()),
      literal_q_zero_(config.literal_q_zero) {
    panel.validate();
    if (s_grid_.empty()) throw ConfigError("empty scale grid");
    if (panel.length() < 6) {
        throw InsufficientDataError("fluctuation analysis requires panel length >= 6");
    }
    config.validate(static_cast<int>(panel.length()));

    std::vector<std::vector<double>> profiles(n_);
    for (std::size_t a = 0; a < n_; ++a) {
        if (is_constant(panel.column(a))) {
            throw DegenerateAssetError("asset '" + assets_[a] +
                                       "' is constant; fluctuation analysis is degenerate");
        }
        profiles[a] = profile(panel.column(a));
    }

    box_values_.resize(n_ * (n_ + 1) / 2);
    // per scale: fit every profile once, then form all unordered pair products
    for (std::size_t si = 0; si < s_grid_.size(); ++si) {
        const int s = s_grid_[si];
        const int T = static_cast<int>(panel.length());
        const int l = config.window_length(s, T);
        std::vector<std::vector<double>> fits(n_);
        for (std::size_t a = 0; a < n_; ++a) {
            fits[a] = moving_average_fit(profiles[a], l, config.literal_normalization);
        }
        for (std::size_t a = 0; a < n_; ++a) {
            for (std::size_t b = a; b < n_; ++b) {
                auto& slot = box_values_[pair_index(a, b)];
                if (slot.empty()) slot.resize(s_grid_.size());
                slot[si] = box_covariances(profiles[a], fits[a], profiles[b], fits[b], s);
            }
        }
    }
}

std::size_t PairFluctuationCache::pair_index(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    return a * n_ - a * (a + 1) / 2 + b;
}

std::size_t PairFluctuationCache::scale_index(int s) const {
    auto it = std::find(s_grid_.begin(), s_grid_.end(), s);
    if (it == s_grid_.end()) {
        throw ConfigError("scale " + std::to_string(s) + " not in cached grid");
    }
    return static_cast<std::size_t>(it - s_grid_.begin());
}

double PairFluctuationCache::fluctuation(std::size_t a, std::size_t b, double q,
                                         std::size_t si) const {
    try {
        return fluctuation_function(box_values_[pair_index(a, b)].at(si), q, literal_q_zero_);
    } catch (const DegenerateBoxError& e) {
        throw DegenerateBoxError(std::string(e.what()) + " [pair (" + assets_[a] + ", " +
                                 assets_[b] + "), q = " + std::to_string(q) + ", s = " +
                                 std::to_string(s_grid_[si]) + "]");
    }
}

Eigen::MatrixXd PairFluctuationCache::f_matrix(double q, std::size_t si) const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (std::size_t a = 0; a < n_; ++a) {
        for (std::size_t b = a; b < n_; ++b) {
            const double f = fluctuation(a, b, q, si);
            m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = f;
            m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = f;
        }
    }
    return m;
}

FluctuationSurface PairFluctuationCache::surface(std::size_t a, std::size_t b,
                                                 std::span<const double> q_grid) const {
    FluctuationSurface surf;
    surf.asset_i = assets_.at(a);
    surf.asset_j = assets_.at(b);
    surf.q_grid.assign(q_grid.begin(), q_grid.end());
    surf.s_grid = s_grid_;
    surf.values.assign(q_grid.size(), std::vector<double>(s_grid_.size()));
    for (std::size_t qi = 0; qi < q_grid.size(); ++qi) {
        for (std::size_t si = 0; si < s_grid_.size(); ++si) {
            surf.values[qi][si] = fluctuation(a, b, q_grid[qi], si);
        }
    }
    return surf;
}

namespace {

void write_num(std::ostream& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    out << buf;
}

}  // namespace

void write_surface(std::ostream& out, const FluctuationSurface& surf) {
    out << "pair_i\tpair_j\tq\ts\tF\n";
    for (std::size_t qi = 0; qi < surf.q_grid.size(); ++qi) {
        for (std::size_t si = 0; si < surf.s_grid.size(); ++si) {
            out << surf.asset_i << '\t' << surf.asset_j << '\t';
            write_num(out, surf.q_grid[qi]);
            out << '\t' << surf.s_grid[si] << '\t';
            write_num(out, surf.values[qi][si]);
            out << '\n';
        }
    }
}

void write_hurst(std::ostream& out, const HurstCurve& curve) {
    out << "pair_i\tpair_j\tq\tH\tr_squared\n";
    for (const HurstPoint& pt : curve.points) {
        out << curve.asset_i << '\t' << curve.asset_j << '\t';
        write_num(out, pt.q);
        out << '\t';
        if (pt.fitted) {
            write_num(out, pt.h);
            out << '\t';
            write_num(out, pt.r_squared);
        } else {
            out << "NA\tNA";
        }
        out << '\n';
    }
}

}  // namespace mdccp
