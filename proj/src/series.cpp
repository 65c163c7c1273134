#include "mdccp/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "mdccp/errors.hpp"

namespace mdccp {

namespace {

bool parse_number(std::string_view sv, double& out) {
    // strtod via from_chars; reject trailing garbage
    const char* first = sv.data();
    const char* last = sv.data() + sv.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

bool parse_integer(std::string_view sv, long long& out) {
    const char* first = sv.data();
    const char* last = sv.data() + sv.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

/// Strictly-increasing comparison of time labels: numeric when both labels
/// are integers, lexicographic otherwise (ISO-8601 dates order correctly).
bool time_less(const std::string& a, const std::string& b) {
    long long ia = 0, ib = 0;
    if (parse_integer(a, ia) && parse_integer(b, ib)) return ia < ib;
    return a < b;
}

void check_times_increasing(const std::vector<std::string>& times, const std::string& what) {
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!time_less(times[i - 1], times[i])) {
            throw DomainError(what + ": time labels not strictly increasing at position " +
                              std::to_string(i) + " ('" + times[i - 1] + "' vs '" + times[i] +
                              "')");
        }
    }
}

void check_finite(std::span<const double> v, const std::string& what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw DomainError(what + ": non-finite value at position " + std::to_string(i));
        }
    }
}

std::string trim(std::string s) {
    auto issp = [](unsigned char c) { return c == ' ' || c == '\r' || c == '\n'; };
    while (!s.empty() && issp(s.back())) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && issp(s[b])) ++b;
    return s.substr(b);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, delim)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

}  // namespace

ReturnSeries::ReturnSeries(std::string id, std::vector<std::string> t, std::vector<double> v)
    : asset_id(std::move(id)), times(std::move(t)), values(std::move(v)) {
    if (times.size() != values.size()) {
        throw DomainError("series '" + asset_id + "': times and values length mismatch");
    }
    check_times_increasing(times, "series '" + asset_id + "'");
    check_finite(values, "series '" + asset_id + "'");
}

ReturnSeries ReturnPanel::series(std::size_t a) const {
    return ReturnSeries(assets.at(a), times, values.at(a));
}

void ReturnPanel::validate() const {
    if (assets.size() != values.size()) {
        throw DomainError("panel: asset ids and value columns disagree");
    }
    std::set<std::string> ids(assets.begin(), assets.end());
    if (ids.size() != assets.size()) {
        throw DomainError("panel: duplicate asset identifiers");
    }
    check_times_increasing(times, "panel");
    for (std::size_t a = 0; a < assets.size(); ++a) {
        if (values[a].size() != times.size()) {
            throw DomainError("panel: column '" + assets[a] + "' length mismatch");
        }
        check_finite(values[a], "panel column '" + assets[a] + "'");
    }
}

LoadResult load_panel(std::istream& in, const LoadOptions& opts) {
    std::string header;
    if (!std::getline(in, header)) {
        throw ParseError("empty input: no header row");
    }
    const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
    std::vector<std::string> cols = split_line(header, delim);
    if (cols.size() < 2) {
        throw ParseError("header row must contain a time column plus at least one asset");
    }

    ReturnPanel panel;
    panel.assets.assign(cols.begin() + 1, cols.end());
    panel.values.resize(panel.assets.size());

    std::size_t dropped = 0;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_line(line, delim);
        if (cells.size() != cols.size()) {
            throw ParseError("line " + std::to_string(lineno) + ": expected " +
                             std::to_string(cols.size()) + " cells, found " +
                             std::to_string(cells.size()));
        }
        bool missing = false;
        std::vector<double> row(panel.assets.size());
        for (std::size_t a = 0; a < panel.assets.size(); ++a) {
            const std::string& cell = cells[a + 1];
            if (cell == opts.missing_marker) {
                missing = true;
                break;
            }
            if (!parse_number(cell, row[a])) {
                throw ParseError("line " + std::to_string(lineno) + ": non-numeric cell '" +
                                 cell + "' in column '" + panel.assets[a] + "'");
            }
        }
        if (missing) {
            ++dropped;
            continue;
        }
        panel.times.push_back(cells[0]);
        for (std::size_t a = 0; a < panel.assets.size(); ++a) {
            panel.values[a].push_back(row[a]);
        }
    }

    if (panel.length() < 6) {
        throw InsufficientDataError("only " + std::to_string(panel.length()) +
                                    " complete rows survive; at least 6 required");
    }
    panel.validate();
    return {std::move(panel), dropped};
}

LoadResult load_panel_file(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open input file '" + path + "'");
    return load_panel(in, opts);
}

ReturnPanel prices_to_returns(const ReturnPanel& prices, ReturnMode mode) {
    prices.validate();
    if (prices.length() < 2) {
        throw InsufficientDataError("price panel needs at least 2 rows");
    }
    ReturnPanel out;
    out.assets = prices.assets;
    out.times.assign(prices.times.begin() + 1, prices.times.end());
    out.values.resize(prices.n_assets());
    for (std::size_t a = 0; a < prices.n_assets(); ++a) {
        const auto& p = prices.values[a];
        out.values[a].reserve(p.size() - 1);
        for (std::size_t t = 1; t < p.size(); ++t) {
            if (mode == ReturnMode::log_return) {
                if (p[t] <= 0.0 || p[t - 1] <= 0.0) {
                    throw DomainError("nonpositive price for asset '" + prices.assets[a] +
                                      "' at time '" + prices.times[p[t] <= 0.0 ? t : t - 1] +
                                      "' under log-return mode");
                }
                out.values[a].push_back(std::log(p[t] / p[t - 1]));
            } else {
                out.values[a].push_back(p[t] / p[t - 1] - 1.0);
            }
        }
    }
    return out;
}

DescriptiveStats describe(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) throw InsufficientDataError("describe requires at least 2 observations");

    DescriptiveStats st;
    double sum = 0.0;
    for (double v : values) sum += v;
    st.mean = sum / static_cast<double>(n);

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    st.minimum = sorted.front();
    st.maximum = sorted.back();
    st.median = (n % 2 == 1) ? sorted[n / 2]
                             : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    if (st.minimum == st.maximum) {
        // constant series: rounding in the mean must not fabricate moments
        st.mean = st.minimum;
        return st;
    }

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - st.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    st.std_dev = std::sqrt(m2 / static_cast<double>(n - 1));
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);

    if (st.std_dev > 0.0) {
        const double s = st.std_dev;
        st.skewness = m3 / (s * s * s);
        st.excess_kurtosis = m4 / (s * s * s * s) - 3.0;
    }
    return st;
}

DescriptiveStats describe(const ReturnSeries& series) { return describe(series.values); }

void write_stats_table(std::ostream& out, const ReturnPanel& panel) {
    out << "asset\tmean\tmedian\tmaximum\tminimum\tstd_dev\tskewness\texcess_kurtosis\n";
    auto cell = [](std::optional<double> v) {
        if (!v) return std::string("NA");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", *v);
        return std::string(buf);
    };
    for (std::size_t a = 0; a < panel.n_assets(); ++a) {
        DescriptiveStats st = describe(panel.column(a));
        out << panel.assets[a] << '\t' << cell(st.mean) << '\t' << cell(st.median) << '\t'
            << cell(st.maximum) << '\t' << cell(st.minimum) << '\t' << cell(st.std_dev) << '\t'
            << cell(st.skewness) << '\t' << cell(st.excess_kurtosis) << '\n';
    }
}

}  // namespace mdccp
