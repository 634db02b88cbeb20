#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "stash_shuffle/errors.hpp"
#include "stash_shuffle/params.hpp"

namespace stashshuffle {

struct ConditionCheck {
    std::string name;
    bool ok;
};

/// A closed-form failure bound together with the side conditions it needs.
/// The value is always computed; whether it means anything is what the
/// condition list says. Bounds at or above 1 are clamped and flagged vacuous.
struct ClosedBound {
    double value = 1.0;     // clamped to [0, 1]
    double raw = 1.0;       // the formula's value before clamping
    double log_raw = 0.0;   // natural log of raw; survives underflow of raw
    bool vacuous = false;   // raw >= 1
    std::vector<ConditionCheck> conditions;

    bool conditions_met() const {
        for (const auto& c : conditions)
            if (!c.ok) return false;
        return true;
    }

    /// The bound value, or ConditionViolated naming the first failed condition.
    double require() const {
        for (const auto& c : conditions)
            if (!c.ok) throw ConditionViolated(c.name);
        return value;
    }
};

namespace detail {
inline ClosedBound finish_bound(double log_raw, std::vector<ConditionCheck> conditions) {
    ClosedBound b;
    b.log_raw = log_raw;
    b.raw = std::exp(log_raw);
    b.vacuous = log_raw >= 0.0;
    b.value = b.vacuous ? 1.0 : b.raw;
    b.conditions = std::move(conditions);
    return b;
}
}  // namespace detail

/// The analytic lower bound for the MGF threshold: t = C*B/D - 1.
inline double t_lower_bound(const ShuffleParams& p) {
    return static_cast<double>(p.chunk_cap) * static_cast<double>(p.bucket_count) /
               static_cast<double>(p.bucket_size) -
           1.0;
}

/// Stash overflow/drain bound: B^2 * exp((CB/D - 1) * (2C - S/B)), valid under
/// K >= S/B > 2C and exp(t) < 1 + (tC - ln 2) B/D at t = CB/D - 1.
inline ClosedBound f1_closed_bound(const ShuffleParams& p) {
    const double b = static_cast<double>(p.bucket_count);
    const double d = static_cast<double>(p.bucket_size);
    const double c = static_cast<double>(p.chunk_cap);
    const double stash_per_bucket =
        static_cast<double>(p.stash_capacity) / static_cast<double>(p.bucket_count);
    const double t = t_lower_bound(p);

    std::vector<ConditionCheck> conditions;
    conditions.push_back({"K >= S/B", static_cast<double>(p.drain_quota) >= stash_per_bucket});
    conditions.push_back({"S/B > 2C", stash_per_bucket > 2.0 * c});
    conditions.push_back({"C*B/D > 1", t > 0.0});
    conditions.push_back({"exp(t) < 1 + (t*C - ln2)*B/D at t = C*B/D - 1",
                          std::exp(t) < 1.0 + (t * c - std::log(2.0)) * b / d});

    const double log_raw = 2.0 * std::log(b) + t * (2.0 * c - stash_per_bucket);
    return detail::finish_bound(log_raw, std::move(conditions));
}

/// Compression failure bound: B * (exp(-2 (D W)^2 / N) + exp(-2 Q^2 / N)),
/// valid for W <= B.
inline ClosedBound f2_closed_bound(const ShuffleParams& p) {
    const double n = static_cast<double>(p.n_items);
    const double d = static_cast<double>(p.bucket_size);
    const double w = static_cast<double>(p.window);
    const double q = static_cast<double>(p.queue_hedge);

    std::vector<ConditionCheck> conditions;
    conditions.push_back({"W <= B", p.window <= p.bucket_count});

    const double e1 = -2.0 * (d * w) * (d * w) / n;
    const double e2 = -2.0 * q * q / n;
    // log(exp(e1) + exp(e2)) without losing either term to underflow
    const double hi = std::max(e1, e2);
    const double lo = std::min(e1, e2);
    const double log_sum = hi + std::log1p(std::exp(lo - hi));
    const double log_raw = std::log(static_cast<double>(p.bucket_count)) + log_sum;
    return detail::finish_bound(log_raw, std::move(conditions));
}

/// The MGF threshold t0: the largest root of
///     [1 + (e^t - 1)/B]^D = 0.5 * e^{tC},
/// i.e. the best exponent the Chernoff argument can use. In log form the
/// defining function g(t) = D*log1p((e^t - 1)/B) - tC + ln 2 is convex with
/// g(0) = ln 2 > 0, so the feasible set is an interval between two roots and
/// bisection from the minimum finds the upper one.
inline double t_zero(const ShuffleParams& p, double t_max = 64.0) {
    const double b = static_cast<double>(p.bucket_count);
    const double d = static_cast<double>(p.bucket_size);
    const double c = static_cast<double>(p.chunk_cap);
    if (!(c * b / d > 1.0)) throw NoRootError("t_zero needs C*B/D > 1");
    if (p.bucket_count < 2 || c >= d) throw NoRootError("t_zero needs 1 < B and C < D");

    const auto g = [&](double t) {
        return d * std::log1p((std::exp(t) - 1.0) / b) - t * c + std::log(2.0);
    };
    // g'(t) = 0 at exp(t) = C(B-1)/(D-C)
    const double t_min_arg = std::log(c * (b - 1.0) / (d - c));
    if (!(t_min_arg > 0.0) || t_min_arg >= t_max) throw NoRootError("no feasible interval below t_max");
    if (g(t_min_arg) > 0.0) throw NoRootError("the MGF inequality has no solution for these parameters");

    double lo = t_min_arg;
    double hi = t_min_arg;
    double span = 1.0;
    while (g(hi) <= 0.0) {
        hi += span;
        span *= 2.0;
        if (hi > t_max) {
            hi = t_max;
            if (g(hi) <= 0.0) throw NoRootError("root lies beyond the search interval");
            break;
        }
    }
    for (int iter = 0; iter < 200 && hi - lo > 1e-14 * std::max(1.0, lo); ++iter) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) <= 0.0 ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace stashshuffle
