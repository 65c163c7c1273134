#pragma once

#include <cstdint>
#include <vector>

#include "mdccp/series.hpp"

namespace mdccp {

/// Deterministic synthetic series with known scaling behavior. All draws go
/// through mt19937_64 with fixed transformations, so a given spec and seed
/// reproduce bit-identical output on any platform.
struct GeneratorSpec {
    enum class Kind { gaussian_iid, binomial_cascade, correlated_pair };

    Kind kind = Kind::gaussian_iid;
    std::size_t length = 4096;  ///< must be a power of two >= 256 for cascades
    std::uint64_t seed = 0;
    double multiplier = 0.6;    ///< cascade mass split p in (0.5, 1)
    double correlation = 0.0;   ///< target correlation for correlated_pair

    void validate() const;
};

/// One series for gaussian_iid and binomial_cascade, two for correlated_pair.
std::vector<ReturnSeries> generate(const GeneratorSpec& spec);

/// Panel of n_assets independent gaussian series (seed offset per asset),
/// with small deterministic per-asset mean offsets so cross-sectional
/// expected returns are never all equal.
ReturnPanel generate_panel(std::size_t n_assets, std::size_t length, std::uint64_t seed);

}  // namespace mdccp
