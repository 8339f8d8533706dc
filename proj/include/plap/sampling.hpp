#pragma once

#include <random>

#include "plap/exponents.hpp"

namespace plap {

// Random admissible geometry with 2 <= n <= n_max. p is drawn from an open
// interval above the regime bound so every strict inequality holds.
inline Geometry random_geometry(std::mt19937_64& rng, int n_max = 8) {
    std::uniform_int_distribution<int> dn(2, n_max);
    const int n = dn(rng);
    std::uniform_int_distribution<int> dk(1, n - 1);
    const int k = dk(rng);
    const double lo = (k == n - 1) ? 2.0 : static_cast<double>(n - k);
    std::uniform_real_distribution<double> dp(lo + 0.05, lo + 6.0);
    return Geometry{n, k, dp(rng)};
}

}  // namespace plap
