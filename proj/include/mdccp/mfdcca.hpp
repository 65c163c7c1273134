#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <span>
#include <vector>

#include "mdccp/series.hpp"

namespace mdccp {

/// Configuration of the adjusted-moving-average detrending step and of the
/// q = 0 branch of the fluctuation function.
struct DetrendConfig {
    enum class TauRule { scale_linked, fixed };

    TauRule tau_rule = TauRule::scale_linked;
    int tau = 0;  ///< used when tau_rule == fixed; window l = int(T / tau)

    /// false: window mean divides by the l+1 terms actually summed, so a
    /// constant signal is a fixed point. true: divide by l as the printed
    /// moving-average formula does.
    bool literal_normalization = false;

    /// false: q = 0 uses 1/(2d) in the log average, the continuous limit of
    /// the q != 0 branch. true: keep the printed 1/(4d).
    bool literal_q_zero = false;

    /// Backward window length for scale s on a series of length T.
    int window_length(int s, int T) const;

    void validate(int T) const;
};

/// Cumulative deviation sequence: running sum of mean-centered values.
std::vector<double> profile(std::span<const double> returns);

/// Backward moving-average fit of a profile with window positions k-l..k.
/// Positions near the head with fewer than l+1 available values average
/// (corrected mode) or sum-and-scale (literal mode) the available prefix.
std::vector<double> moving_average_fit(std::span<const double> prof, int l,
                                       bool literal_normalization = false);

/// Half-open index range [begin, end) of one box.
struct Box {
    int begin;
    int end;
};

/// 2d boxes of length s over [0, T): d forward boxes from the start, then d
/// backward boxes repartitioned from the end of the series (listed from the
/// tail inward). Requires 3 <= s <= T/2.
std::vector<Box> partition_boxes(int T, int s);

/// Detrended cross-covariance of one box: (1/s) * sum of residual products.
/// Sign-carrying.
double box_detrended_cov(std::span<const double> I, std::span<const double> Ifit,
                         std::span<const double> J, std::span<const double> Jfit);

/// All 2d box covariances of a pair at scale s, in partition order.
std::vector<double> box_covariances(std::span<const double> I, std::span<const double> Ifit,
                                    std::span<const double> J, std::span<const double> Jfit,
                                    int s);

/// q-order power mean of |F_v| over the 2d boxes; geometric mean at q = 0.
/// Throws degenerate-box when some |F_v| = 0 and q <= 0.
double fluctuation_function(std::span<const double> box_values, double q,
                            bool literal_q_zero = false);

/// Grid of F_ij(q, s) values for one asset pair.
struct FluctuationSurface {
    std::string asset_i;
    std::string asset_j;
    std::vector<double> q_grid;
    std::vector<int> s_grid;
    std::vector<std::vector<double>> values;  ///< values[qi][si]

    double at(std::size_t qi, std::size_t si) const { return values[qi][si]; }
};

FluctuationSurface surface(const ReturnSeries& x, const ReturnSeries& y,
                           std::span<const double> q_grid, std::span<const int> s_grid,
                           const DetrendConfig& config = {});

struct HurstPoint {
    double q = 0.0;
    double h = 0.0;
    double r_squared = 0.0;
    bool fitted = false;  ///< false when fewer than 3 usable scales existed
};

struct HurstCurve {
    std::string asset_i;
    std::string asset_j;
    std::vector<HurstPoint> points;
};

/// Per q, OLS slope of ln F over ln s with its r-squared. Scales whose F is
/// zero or non-finite are excluded; a q with fewer than 3 usable scales is
/// reported unfitted.
HurstCurve hurst_curve(const FluctuationSurface& surf);

/// Symmetric N x N matrix of F values at one (q, s) cell: self-fluctuation on
/// the diagonal, pairwise cross-fluctuation off it. Throws degenerate-asset
/// for constant series.
Eigen::MatrixXd f_matrix(const ReturnPanel& panel, double q, int s,
                         const DetrendConfig& config = {});

/// Box covariances of every unordered asset pair at every scale, computed
/// once; the cheap per-q power means are then taken on demand. Backs both
/// whole-grid surface exports and the per-cell solver loop.
class PairFluctuationCache {
public:
    PairFluctuationCache(const ReturnPanel& panel, std::span<const int> s_grid,
                         const DetrendConfig& config = {});

    /// F value for unordered pair (a, b) at scale index si.
    double fluctuation(std::size_t a, std::size_t b, double q, std::size_t si) const;

    Eigen::MatrixXd f_matrix(double q, std::size_t si) const;
    FluctuationSurface surface(std::size_t a, std::size_t b,
                               std::span<const double> q_grid) const;

    const std::vector<int>& scales() const noexcept { return s_grid_; }
    std::size_t scale_index(int s) const;

private:
    std::size_t n_;
    std::vector<std::string> assets_;
    std::vector<int> s_grid_;
    bool literal_q_zero_;
    // box_values_[pair_index(a,b)][si] = F_v list
    std::vector<std::vector<std::vector<double>>> box_values_;

    std::size_t pair_index(std::size_t a, std::size_t b) const;
};

/// Long-format export: pair_i pair_j q s F.
void write_surface(std::ostream& out, const FluctuationSurface& surf);
/// Export: pair_i pair_j q H r_squared (NA for unfitted q).
void write_hurst(std::ostream& out, const HurstCurve& curve);

}  // namespace mdccp
