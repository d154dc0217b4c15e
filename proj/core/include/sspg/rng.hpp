#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "sspg/diff/tape.hpp"

namespace sspg {

using Rng = std::mt19937_64;

/// Independent generator derived from a root seed and a stream name, so that
/// components (environment, policy noise, buffer sampling) can be re-seeded
/// in isolation.
Rng substream(std::uint64_t seed, std::string_view name);

/// Matrix of independent standard-normal draws.
diff::Matrix normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols);

/// Matrix of independent U(lo, hi) draws.
diff::Matrix uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo, double hi);

/// Uniform index in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);

}  // namespace sspg
