#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mdccp/errors.hpp"
#include "mdccp/mfdcca.hpp"
#include "mdccp/synth.hpp"

using namespace mdccp;

namespace {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / b.size();
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("same spec and seed reproduce bit-identical output") {
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::gaussian_iid;
    spec.length = 512;
    spec.seed = 1234;
    std::vector<ReturnSeries> a = generate(spec);
    std::vector<ReturnSeries> b = generate(spec);
    REQUIRE(a.size() == 1);
    REQUIRE(a[0].values.size() == 512);
    for (std::size_t i = 0; i < 512; ++i) CHECK(a[0].values[i] == b[0].values[i]);

    spec.seed = 1235;
    std::vector<ReturnSeries> c = generate(spec);
    std::size_t diffs = 0;
    for (std::size_t i = 0; i < 512; ++i) diffs += c[0].values[i] != a[0].values[i];
    CHECK(diffs > 500);
}

TEST_CASE("gaussian draws center near zero with unit-order spread") {
    GeneratorSpec spec;
    spec.length = 8192;
    spec.seed = 99;
    std::vector<double> v = generate(spec)[0].values;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= v.size() - 1;
    CHECK(std::abs(mean) < 0.05);
    CHECK(var == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("correlated pair hits the requested correlation") {
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::correlated_pair;
    spec.length = 8192;
    spec.seed = 7;

    spec.correlation = 1.0;
    std::vector<ReturnSeries> pair = generate(spec);
    REQUIRE(pair.size() == 2);
    for (std::size_t i = 0; i < spec.length; ++i) {
        CHECK(pair[0].values[i] == doctest::Approx(pair[1].values[i]).epsilon(1e-12));
    }

    spec.correlation = 0.7;
    pair = generate(spec);
    CHECK(correlation(pair[0].values, pair[1].values) == doctest::Approx(0.7).epsilon(0.05));

    spec.correlation = 0.0;
    pair = generate(spec);
    CHECK(std::abs(correlation(pair[0].values, pair[1].values)) < 0.05);
}

TEST_CASE("generator specs are validated") {
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::binomial_cascade;
    spec.length = 1000;  // not a power of two
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.length = 128;  // too short
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.length = 1024;
    spec.multiplier = 0.5;  // degenerate split
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.multiplier = 1.2;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.multiplier = 0.7;
    CHECK_NOTHROW(spec.validate());

    spec.kind = GeneratorSpec::Kind::correlated_pair;
    spec.correlation = 1.5;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("cascade series show decreasing generalized exponents in q") {
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::binomial_cascade;
    spec.length = 4096;
    spec.seed = 3;
    spec.multiplier = 0.7;
    ReturnSeries series = generate(spec)[0];

    std::vector<int> scales;
    for (int s = 8; s <= 256; s *= 2) scales.push_back(s);
    std::vector<double> qs{-4.0, -2.0, 0.0, 2.0, 4.0};
    HurstCurve h = hurst_curve(surface(series, series, qs, scales));
    for (std::size_t i = 1; i < qs.size(); ++i) {
        REQUIRE(h.points[i].fitted);
        CHECK(h.points[i].h < h.points[i - 1].h);
    }
    CHECK(h.points.front().h - h.points.back().h > 0.2);
}

TEST_CASE("generated panels have distinct cross-sectional means") {
    ReturnPanel panel = generate_panel(4, 512, 21);
    CHECK(panel.n_assets() == 4);
    CHECK(panel.length() == 512);
    CHECK_NOTHROW(panel.validate());
    std::vector<double> means;
    for (std::size_t a = 0; a < 4; ++a) {
        const std::vector<double>& col = panel.values[a];
        means.push_back(std::accumulate(col.begin(), col.end(), 0.0) / col.size());
    }
    for (std::size_t a = 1; a < 4; ++a) CHECK(means[a] > means[a - 1]);
}
