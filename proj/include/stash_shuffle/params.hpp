#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stash_shuffle/errors.hpp"

namespace stashshuffle {

/// The full parameter vector of the shuffle.
///
/// Derived quantities are kept alongside the free ones so a value of this type
/// is always internally consistent:
///   bucket_size      = ceil(n_items / bucket_count)
///   drain_quota      = stash_capacity / bucket_count   (stash divides evenly)
///   effective_window = min(window, bucket_count)
///   chunk_cap        = ceil(bucket_size/bucket_count
///                           + cap_slack * sqrt(bucket_size/bucket_count)),
///                      except bucket_count == 1 where it is pinned to
///                      bucket_size (a single bucket receives everything).
struct ShuffleParams {
    std::uint64_t n_items = 0;           // N
    std::uint64_t bucket_count = 0;      // B
    std::uint64_t bucket_size = 0;       // D
    std::uint64_t chunk_cap = 0;         // C: per (input bucket, output bucket) cap
    std::uint64_t stash_capacity = 0;    // S: total stash slots
    std::uint64_t drain_quota = 0;       // K: stash-drain slots per output bucket
    std::uint64_t window = 0;            // W
    std::uint64_t queue_hedge = 0;       // Q: extra queue slots past window*bucket_size
    std::uint64_t effective_window = 0;  // L
    double cap_slack = 0.0;              // alpha

    // True when the constructor had to round stash_capacity up to the next
    // multiple of bucket_count so drain_quota stays integral.
    bool stash_rounded_up = false;

    std::uint64_t mid_bucket_slots() const { return chunk_cap * bucket_count + drain_quota; }
    std::uint64_t mid_total_slots() const { return bucket_count * mid_bucket_slots(); }
    std::uint64_t padded_items() const { return bucket_count * bucket_size; }
    std::uint64_t queue_capacity() const { return window * bucket_size + queue_hedge; }

    bool operator==(const ShuffleParams&) const = default;
};

namespace detail {

// Ceil/floor with a snap window, so formulas like N^0.7 that are meant to hit
// an integer are not thrown off by the last ulp of pow().
inline std::uint64_t ceil_snapped(double v) {
    const double r = std::round(v);
    if (std::abs(v - r) < 1e-9 * std::max(1.0, std::abs(v))) return static_cast<std::uint64_t>(r);
    return static_cast<std::uint64_t>(std::ceil(v));
}

inline std::uint64_t floor_snapped(double v) {
    const double r = std::round(v);
    if (std::abs(v - r) < 1e-9 * std::max(1.0, std::abs(v))) return static_cast<std::uint64_t>(r);
    return static_cast<std::uint64_t>(std::floor(v));
}

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

inline ShuffleParams finish(std::uint64_t n, std::uint64_t buckets, std::uint64_t cap, double slack,
                            std::uint64_t stash, std::uint64_t window, std::uint64_t hedge) {
    if (n == 0) throw ParamError("N must be positive");
    if (buckets == 0) throw ParamError("B must be positive");
    if (n < buckets) throw ParamError("N must be at least B");
    if (window == 0) throw ParamError("W must be positive");
    if (stash == 0) throw ParamError("S must be positive");

    ShuffleParams p;
    p.n_items = n;
    p.bucket_count = buckets;
    p.bucket_size = ceil_div(n, buckets);
    p.stash_rounded_up = (stash % buckets) != 0;
    p.stash_capacity = ceil_div(stash, buckets) * buckets;
    p.drain_quota = p.stash_capacity / buckets;
    p.window = window;
    p.queue_hedge = hedge;
    p.effective_window = std::min(window, buckets);
    p.chunk_cap = cap;
    p.cap_slack = slack;

    const double ratio = static_cast<double>(p.bucket_size) / static_cast<double>(buckets);
    if (buckets == 1) {
        // Degenerate single bucket: the cap can never bind below D.
        p.chunk_cap = p.bucket_size;
        p.cap_slack = 0.0;
    } else {
        if (p.chunk_cap < ceil_div(p.bucket_size, buckets))
            throw ParamError("C must be at least ceil(D/B)");
        if (p.chunk_cap >= p.bucket_size)
            throw ParamError("C must be below D, otherwise the cap never binds");
        p.cap_slack = (static_cast<double>(p.chunk_cap) - ratio) / std::sqrt(ratio);
    }
    return p;
}

}  // namespace detail

/// Derive the parameter vector from the cap slack multiplier alpha.
inline ShuffleParams derive_params(std::uint64_t n, std::uint64_t buckets, double cap_slack,
                                   std::uint64_t stash, std::uint64_t window, std::uint64_t hedge) {
    if (!(cap_slack > 0.0)) throw ParamError("alpha must be positive");
    if (buckets == 0) throw ParamError("B must be positive");
    if (n < buckets) throw ParamError("N must be at least B");
    const std::uint64_t d = detail::ceil_div(n, buckets);
    const double ratio = static_cast<double>(d) / static_cast<double>(buckets);
    const std::uint64_t cap = detail::ceil_snapped(ratio + cap_slack * std::sqrt(ratio));
    return detail::finish(n, buckets, cap, cap_slack, stash, window, hedge);
}

/// Derive the parameter vector from an explicit cap C (alpha is back-solved).
inline ShuffleParams derive_params_with_cap(std::uint64_t n, std::uint64_t buckets, std::uint64_t cap,
                                            std::uint64_t stash, std::uint64_t window,
                                            std::uint64_t hedge) {
    return detail::finish(n, buckets, cap, 0.0, stash, window, hedge);
}

/// Asymptotic preset: B=N^(1/2-e), C=(1+e)N^(2e), S=N^(1/2+2e), W=1,
/// Q=N^(1/2+e). Capacities round up; B rounds down; S then rounds up to a
/// multiple of B.
inline ShuffleParams corollary_preset(std::uint64_t n, double eps) {
    if (!(eps > 0.0) || !(eps < 1.0)) throw ParamError("eps must lie in (0, 1)");
    const double nd = static_cast<double>(n);
    const std::uint64_t buckets = detail::floor_snapped(std::pow(nd, 0.5 - eps));
    if (buckets < 1) throw ParamError("N too small for this eps: B rounds to zero");
    const std::uint64_t cap = detail::ceil_snapped((1.0 + eps) * std::pow(nd, 2.0 * eps));
    const std::uint64_t stash = detail::ceil_snapped(std::pow(nd, 0.5 + 2.0 * eps));
    const std::uint64_t hedge = detail::ceil_snapped(std::pow(nd, 0.5 + eps));
    return detail::finish(n, buckets, cap, 0.0, stash, 1, hedge);
}

/// Re-check every structural invariant. derive_params* outputs always pass;
/// this exists for values deserialized from configs.
inline void validate(const ShuffleParams& p) {
    if (p.n_items == 0 || p.bucket_count == 0) throw ParamError("N and B must be positive");
    if (p.n_items < p.bucket_count) throw ParamError("N must be at least B");
    if (p.bucket_size != detail::ceil_div(p.n_items, p.bucket_count))
        throw ParamError("D must equal ceil(N/B)");
    if (p.stash_capacity == 0 || p.stash_capacity % p.bucket_count != 0)
        throw ParamError("S must be a positive multiple of B");
    if (p.drain_quota != p.stash_capacity / p.bucket_count) throw ParamError("K must equal S/B");
    if (p.window == 0) throw ParamError("W must be positive");
    if (p.effective_window != std::min(p.window, p.bucket_count))
        throw ParamError("L must equal min(W, B)");
    if (p.bucket_count == 1) {
        if (p.chunk_cap != p.bucket_size) throw ParamError("C must equal D when B = 1");
    } else {
        if (p.chunk_cap < detail::ceil_div(p.bucket_size, p.bucket_count))
            throw ParamError("C must be at least ceil(D/B)");
        if (p.chunk_cap >= p.bucket_size) throw ParamError("C must be below D");
    }
    if (p.cap_slack < 0.0) throw ParamError("alpha must be nonnegative");
}

/// The four published parameter scenarios (10M through 200M items).
/// The 200M row's stash (170,000) is not a multiple of its bucket count and
/// gets rounded up to 171,600.
inline std::vector<std::pair<std::string, ShuffleParams>> table1_presets() {
    std::vector<std::pair<std::string, ShuffleParams>> rows;
    rows.emplace_back("10M", derive_params_with_cap(10'000'000, 1000, 25, 40'000, 2, 18'000));
    rows.emplace_back("50M", derive_params_with_cap(50'000'000, 2000, 30, 86'000, 2, 40'000));
    rows.emplace_back("100M", derive_params_with_cap(100'000'000, 3000, 30, 117'000, 2, 57'000));
    rows.emplace_back("200M", derive_params_with_cap(200'000'000, 4400, 24, 170'000, 2, 73'000));
    return rows;
}

}  // namespace stashshuffle
