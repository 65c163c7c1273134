#include "mdccp/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "mdccp/errors.hpp"

namespace mdccp {

namespace {

/// Uniform double in (0, 1) from the top 53 bits of one engine draw; fixed
/// mapping so streams are identical across standard library implementations.
double uniform01(std::mt19937_64& rng) {
    while (true) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u > 0.0) return u;
    }
}

/// Box-Muller normal draw; two engine outputs per sample, no state carried.
double normal(std::mt19937_64& rng) {
    const double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::string> period_index(std::size_t n) {
    std::vector<std::string> t;
    t.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) t.push_back(std::to_string(i));
    return t;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<double> gaussian_values(std::size_t n, std::mt19937_64& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = normal(rng);
    return v;
}

/// Increments of a binomial multiplicative measure after log2(n) halvings,
/// randomized in sign.
std::vector<double> cascade_values(std::size_t n, double p, std::mt19937_64& rng) {
    std::vector<double> mass{1.0};
    while (mass.size() < n) {
        std::vector<double> next;
        next.reserve(mass.size() * 2);
        for (double m : mass) {
            const bool left_heavy = uniform01(rng) < 0.5;
            next.push_back(m * (left_heavy ? p : 1.0 - p));
            next.push_back(m * (left_heavy ? 1.0 - p : p));
        }
        mass = std::move(next);
    }
    for (double& m : mass) {
        if (uniform01(rng) < 0.5) m = -m;
    }
    return mass;
}

}  // namespace

void GeneratorSpec::validate() const {
    if (length < 6) throw ConfigError("generator length must be at least 6");
    switch (kind) {
        case Kind::binomial_cascade:
            if (!is_power_of_two(length) || length < 256) {
                throw ConfigError("cascade length must be a power of two >= 256");
            }
            if (!(multiplier > 0.5 && multiplier < 1.0)) {
                throw ConfigError("cascade multiplier must lie in (0.5, 1)");
            }
            break;
        case Kind::correlated_pair:
            if (correlation < -1.0 || correlation > 1.0) {
                throw ConfigError("correlation must lie in [-1, 1]");
            }
            break;
        case Kind::gaussian_iid:
            break;
    }
}

std::vector<ReturnSeries> generate(const GeneratorSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const auto times = period_index(spec.length);

    switch (spec.kind) {
        case GeneratorSpec::Kind::gaussian_iid:
            return {ReturnSeries("gaussian", times, gaussian_values(spec.length, rng))};
        case GeneratorSpec::Kind::binomial_cascade:
            return {ReturnSeries("cascade", times,
                                 cascade_values(spec.length, spec.multiplier, rng))};
        case GeneratorSpec::Kind::correlated_pair: {
            std::vector<double> a = gaussian_values(spec.length, rng);
            std::vector<double> noise = gaussian_values(spec.length, rng);
            const double rho = spec.correlation;
            const double resid = std::sqrt(std::max(0.0, 1.0 - rho * rho));
            std::vector<double> b(spec.length);
            for (std::size_t i = 0; i < spec.length; ++i) {
                b[i] = rho * a[i] + resid * noise[i];
            }
            return {ReturnSeries("pair_a", times, std::move(a)),
                    ReturnSeries("pair_b", times, std::move(b))};
        }
    }
    throw ConfigError("unknown generator kind");
}

ReturnPanel generate_panel(std::size_t n_assets, std::size_t length, std::uint64_t seed) {
    if (n_assets == 0) throw ConfigError("panel needs at least one asset");
    if (length < 6) throw ConfigError("panel length must be at least 6");

    ReturnPanel panel;
    panel.times = period_index(length);
    for (std::size_t a = 0; a < n_assets; ++a) {
        std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + a + 1);
        std::vector<double> v = gaussian_values(length, rng);
        // distinct per-asset location/scale so cross-sectional means differ
        const double mu = 0.002 * static_cast<double>(a + 1);
        const double sigma = 0.01 * (1.0 + 0.2 * static_cast<double>(a));
        for (double& x : v) x = mu + sigma * x;
        panel.assets.push_back("A" + std::to_string(a + 1));
        panel.values.push_back(std::move(v));
    }
    panel.validate();
    return panel;
}

}  // namespace mdccp
