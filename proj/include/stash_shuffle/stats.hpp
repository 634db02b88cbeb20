#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace stashshuffle {

/// Upper-tail p-value of a chi-squared statistic with the given degrees of
/// freedom: Q(df/2, x/2).
inline double chi_squared_pvalue(double statistic, double degrees_of_freedom) {
    if (statistic < 0.0) return 1.0;
    return boost::math::gamma_q(degrees_of_freedom / 2.0, statistic / 2.0);
}

/// Pearson statistic for equiprobable cells.
inline double chi_squared_statistic(const std::vector<std::uint64_t>& counts,
                                    std::uint64_t trials) {
    const double expected = static_cast<double>(trials) / static_cast<double>(counts.size());
    double stat = 0.0;
    for (std::uint64_t c : counts) {
        const double diff = static_cast<double>(c) - expected;
        stat += diff * diff / expected;
    }
    return stat;
}

inline std::uint64_t factorial(std::uint64_t n) {
    std::uint64_t f = 1;
    for (std::uint64_t i = 2; i <= n; ++i) f *= i;
    return f;
}

/// Lehmer rank of a permutation of 0..n-1, in [0, n!).
inline std::uint64_t permutation_rank(const std::vector<std::uint64_t>& perm) {
    const std::size_t n = perm.size();
    std::uint64_t rank = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t smaller_after = 0;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (perm[j] < perm[i]) ++smaller_after;
        }
        rank += smaller_after * factorial(n - 1 - i);
    }
    return rank;
}

}  // namespace stashshuffle
