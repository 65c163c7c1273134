#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mdccp {

/// One asset's aligned return observations.
struct ReturnSeries {
    std::string asset_id;
    std::vector<std::string> times;  ///< ISO-8601 dates or integer period indices
    std::vector<double> values;

    ReturnSeries() = default;
    ReturnSeries(std::string id, std::vector<std::string> t, std::vector<double> v);

    std::size_t length() const noexcept { return values.size(); }
};

/// Aligned multi-asset return panel (column-major: one value vector per asset).
struct ReturnPanel {
    std::vector<std::string> times;
    std::vector<std::string> assets;
    std::vector<std::vector<double>> values;  ///< values[a][t]

    std::size_t n_assets() const noexcept { return assets.size(); }
    std::size_t length() const noexcept { return times.size(); }

    ReturnSeries series(std::size_t a) const;
    std::span<const double> column(std::size_t a) const { return values[a]; }

    /// Throws if times are not strictly increasing, ids collide, values are
    /// not finite, or lengths disagree.
    void validate() const;
};

struct DescriptiveStats {
    double mean = 0.0;
    double median = 0.0;
    double maximum = 0.0;
    double minimum = 0.0;
    double std_dev = 0.0;
    std::optional<double> skewness;         ///< unset for constant series
    std::optional<double> excess_kurtosis;  ///< unset for constant series
};

struct LoadOptions {
    std::string missing_marker;  ///< cell content treated as missing (default: empty cell)
};

struct LoadResult {
    ReturnPanel panel;
    std::size_t dropped_rows = 0;  ///< rows removed because a cell was missing
};

/// Parse a delimiter-separated panel: header row of asset ids, first column a
/// time label, one asset per remaining column. Delimiter (comma or tab) is
/// auto-detected from the header. Rows containing a missing cell are dropped
/// and counted.
LoadResult load_panel(std::istream& in, const LoadOptions& opts = {});
LoadResult load_panel_file(const std::string& path, const LoadOptions& opts = {});

enum class ReturnMode { log_return, simple };

/// Convert a price panel to a return panel of length T-1.
ReturnPanel prices_to_returns(const ReturnPanel& prices, ReturnMode mode);

/// Sample statistics; std/skew/kurtosis use the (n-1)-normalized standard
/// deviation and kurtosis is reported in excess form (normal = 0).
DescriptiveStats describe(std::span<const double> values);
DescriptiveStats describe(const ReturnSeries& series);

/// One row per asset with the seven descriptive columns, tab-separated.
void write_stats_table(std::ostream& out, const ReturnPanel& panel);

}  // namespace mdccp
