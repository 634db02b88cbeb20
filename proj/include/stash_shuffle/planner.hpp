#pragma once

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "stash_shuffle/errors.hpp"
#include "stash_shuffle/params.hpp"
#include "stash_shuffle/rng.hpp"
#include "stash_shuffle/shuffle.hpp"

namespace stashshuffle {

inline constexpr double kMassTolerance = 1e-12;

namespace detail {

// Compensated (Kahan) accumulator; the DP conservation check needs sums that
// stay honest over thousands of steps.
struct Kahan {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

}  // namespace detail

/// Truncated pmf of a stash queue's occupancy. `pmf[x]` is the probability of
/// holding exactly x items; mass that ever pushed past `cap` sits in
/// `overflow_mass` for good (a queue that overflowed is a failed run).
struct TailDistribution {
    std::vector<double> pmf;
    double overflow_mass = 0.0;
    std::uint64_t cap = 0;
    double max_mass_error = 0.0;

    double in_support_mass() const {
        detail::Kahan k;
        for (double v : pmf) k.add(v);
        return k.sum;
    }
};

/// pmf and survival of the per-step increment Bin(1/B, D), truncated at kmax.
/// Built by the ratio recurrence from (1-1/B)^D, which keeps the relative
/// error near machine precision even for D in the tens of thousands.
struct IncrementDistribution {
    std::vector<double> pmf;  // 0..kmax
    std::vector<double> sf;   // sf[m] = Pr[increment > m], m in 0..kmax
};

inline IncrementDistribution binomial_increment(std::uint64_t d, std::uint64_t buckets,
                                                std::uint64_t kmax) {
    IncrementDistribution out;
    const double p = 1.0 / static_cast<double>(buckets);
    const double ratio = p / (1.0 - p);
    out.pmf.resize(kmax + 1, 0.0);
    out.pmf[0] = std::exp(static_cast<double>(d) * std::log1p(-p));
    for (std::uint64_t k = 0; k < kmax; ++k) {
        out.pmf[k + 1] = out.pmf[k] * (static_cast<double>(d - k) / static_cast<double>(k + 1)) * ratio;
    }
    // Tail beyond kmax, summed with the recurrence continued upward.
    detail::Kahan beyond;
    double term = out.pmf[kmax];
    for (std::uint64_t k = kmax; k < d; ++k) {
        term *= (static_cast<double>(d - k) / static_cast<double>(k + 1)) * ratio;
        beyond.add(term);
        if (term == 0.0 || term < beyond.sum * 1e-30) break;
    }
    // Normalize so every DP step preserves mass exactly; the recurrence's
    // accumulated rounding (~1e-14) would otherwise compound across B steps.
    detail::Kahan total;
    for (const double v : out.pmf) total.add(v);
    total.add(beyond.sum);
    const double scale = 1.0 / total.sum;
    for (double& v : out.pmf) v *= scale;
    out.sf.resize(kmax + 1, 0.0);
    double acc = beyond.sum * scale;
    for (std::uint64_t m = kmax + 1; m-- > 0;) {
        out.sf[m] = acc;
        acc += out.pmf[m];
    }
    return out;
}

/// Exact distribution of a single stash queue after all B distribution steps,
/// under the analysis model: independent Bin(1/B, D) arrivals per step and the
/// recurrence x' = max(0, x + arrivals - C), truncating (and permanently
/// absorbing) everything above cap = S/B.
inline TailDistribution stash_tail_distribution(const ShuffleParams& p) {
    TailDistribution dist;
    dist.cap = p.drain_quota;
    dist.pmf.assign(dist.cap + 1, 0.0);
    dist.pmf[0] = 1.0;
    if (p.chunk_cap >= p.bucket_size) return dist;  // arrivals can never exceed the cap

    const std::uint64_t cap = dist.cap;
    const std::uint64_t c = p.chunk_cap;
    const std::uint64_t kmax = std::min<std::uint64_t>(p.bucket_size, cap + c);
    const IncrementDistribution inc = binomial_increment(p.bucket_size, p.bucket_count, kmax);

    detail::Kahan overflow;
    std::vector<double> next(cap + 1);
    std::vector<detail::Kahan> cells(cap + 1);
    for (std::uint64_t step = 0; step < p.bucket_count; ++step) {
        for (auto& cell : cells) cell = detail::Kahan{};
        for (std::uint64_t x = 0; x <= cap; ++x) {
            const double px = dist.pmf[x];
            if (px == 0.0) continue;
            const std::uint64_t keep = cap + c - x;  // arrivals <= keep stay in support
            const std::uint64_t hi = std::min(keep, kmax);
            for (std::uint64_t k = 0; k <= hi; ++k) {
                const std::uint64_t xp = x + k < c ? 0 : x + k - c;
                cells[xp].add(px * inc.pmf[k]);
            }
            if (keep < p.bucket_size) overflow.add(px * inc.sf[keep]);
        }
        for (std::uint64_t x = 0; x <= cap; ++x) next[x] = cells[x].sum;
        dist.pmf.swap(next);

        detail::Kahan mass;
        for (double v : dist.pmf) mass.add(v);
        mass.add(overflow.sum);
        const double err = std::abs(mass.sum - 1.0);
        if (err > dist.max_mass_error) dist.max_mass_error = err;
        if (err > kMassTolerance) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "stash DP lost probability mass at step %llu: deviation %.3e",
                          static_cast<unsigned long long>(step), err);
            throw NumericError(buf);
        }
    }
    dist.overflow_mass = overflow.sum;
    return dist;
}

/// Probability that any stash queue either ever exceeds S/B or cannot drain
/// (ends above K), by the exact per-queue DP and a union bound over the B
/// queues. This is the tight counterpart of the closed-form Lemma-3 bound.
inline double stash_tail_exact(const ShuffleParams& p) {
    const TailDistribution dist = stash_tail_distribution(p);
    detail::Kahan fail;
    fail.add(dist.overflow_mass);
    for (std::uint64_t x = p.drain_quota + 1; x < dist.pmf.size(); ++x) fail.add(dist.pmf[x]);
    return std::min(1.0, static_cast<double>(p.bucket_count) * fail.sum);
}

namespace detail {

inline double log_choose(std::uint64_t n, std::uint64_t k) {
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

inline double log_binom_pmf(std::uint64_t k, std::uint64_t n, double p) {
    if (p <= 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return k == n ? 0.0 : -std::numeric_limits<double>::infinity();
    return log_choose(n, k) + static_cast<double>(k) * std::log(p) +
           static_cast<double>(n - k) * std::log1p(-p);
}

// Contributions below exp(-450) are beneath anything representable in the
// final probabilities (well under 2^-512) and are skipped wholesale.
inline constexpr double kLogNegligible = -450.0;

// Pr[Bin(n, p) <= k0], summed downward from the boundary by the pmf ratio.
inline double binom_cdf(std::uint64_t k0, std::uint64_t n, double p) {
    if (k0 >= n) return 1.0;
    const double lb = log_binom_pmf(k0, n, p);
    if (lb < kLogNegligible) return 0.0;
    double term = std::exp(lb);
    Kahan sum;
    sum.add(term);
    for (std::uint64_t k = k0; k-- > 0;) {
        // pmf(k) = pmf(k+1) * (k+1)(1-p) / ((n-k) p)
        term *= (static_cast<double>(k + 1) * (1.0 - p)) / (static_cast<double>(n - k) * p);
        sum.add(term);
        if (term == 0.0 || term < sum.sum * 1e-25) break;
    }
    return sum.sum;
}

// Pr[Bin(n, p) > k0], summed upward from the boundary by the pmf ratio.
inline double binom_sf(std::uint64_t k0, std::uint64_t n, double p) {
    if (k0 >= n) return 0.0;
    const double lb = log_binom_pmf(k0 + 1, n, p);
    if (lb < kLogNegligible) return 0.0;
    double term = std::exp(lb);
    Kahan sum;
    sum.add(term);
    for (std::uint64_t k = k0 + 1; k < n; ++k) {
        // pmf(k+1) = pmf(k) * (n-k) p / ((k+1)(1-p))
        term *= (static_cast<double>(n - k) * p) / (static_cast<double>(k + 1) * (1.0 - p));
        sum.add(term);
        if (term == 0.0 || term < sum.sum * 1e-25) break;
    }
    return sum.sum;
}

}  // namespace detail

/// Probability that the compression queue under- or overflows, computed from
/// the exact binomial occupancies: sum over i = L..B of
/// Pr[Bin(i/B, N) < D(i-L)] + Pr[Bin(i/B, N) > D i + Q]. The effective window
/// L = min(W, B) is used, matching what the schedule actually runs.
inline double compression_tail_exact(const ShuffleParams& p) {
    const std::uint64_t n = p.n_items;
    const std::uint64_t d = p.bucket_size;
    const std::uint64_t l = p.effective_window;
    detail::Kahan total;
    for (std::uint64_t i = l; i <= p.bucket_count; ++i) {
        const double prob = static_cast<double>(i) / static_cast<double>(p.bucket_count);
        const std::uint64_t underflow_at = d * (i - l);  // failure when Y_i < this
        const std::uint64_t overflow_at = d * i + p.queue_hedge;  // failure when Y_i > this
        if (i == p.bucket_count) {
            if (n < underflow_at) total.add(1.0);
            if (n > overflow_at) total.add(1.0);
            continue;
        }
        if (underflow_at > 0) total.add(detail::binom_cdf(underflow_at - 1, n, prob));
        total.add(detail::binom_sf(overflow_at, n, prob));
    }
    return std::min(1.0, total.sum);
}

struct FailureTally {
    std::uint64_t trials = 0;
    std::uint64_t stash_overflow = 0;
    std::uint64_t drain_failure = 0;
    std::uint64_t queue_overflow = 0;
    std::uint64_t queue_underflow = 0;

    std::uint64_t failures() const {
        return stash_overflow + drain_failure + queue_overflow + queue_underflow;
    }
    double rate() const {
        return trials == 0 ? 0.0 : static_cast<double>(failures()) / static_cast<double>(trials);
    }
};

struct MonteCarloResult {
    FailureTally tally;
    double rate = 0.0;
    double ci_low = 0.0;   // Wilson 95% interval
    double ci_high = 0.0;
};

/// Observed failure rate of the executable shuffle on random inputs, by cause.
inline MonteCarloResult monte_carlo_failure(const ShuffleParams& p, std::uint64_t trials,
                                            std::uint64_t seed, AssignMode mode,
                                            std::size_t payload_size = 8) {
    RngSuite sweep(seed);
    MonteCarloResult result;
    result.tally.trials = trials;
    for (std::uint64_t t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = sweep.trial_seed(t);
        RngSuite trial_rngs(trial_seed);
        StreamRng payload_rng = trial_rngs.stream(Stream::Payloads, 0);
        std::vector<Payload> payloads(p.n_items);
        for (auto& pl : payloads) {
            pl.resize(payload_size);
            payload_rng.fill_bytes(pl.data(), pl.size());
        }
        const RunResult run = run_shuffle(payloads, p, payload_size, trial_seed, mode);
        switch (run.outcome) {
            case ShuffleOutcome::Success: break;
            case ShuffleOutcome::StashOverflow: ++result.tally.stash_overflow; break;
            case ShuffleOutcome::DrainFailure: ++result.tally.drain_failure; break;
            case ShuffleOutcome::QueueOverflow: ++result.tally.queue_overflow; break;
            case ShuffleOutcome::QueueUnderflow: ++result.tally.queue_underflow; break;
        }
    }
    result.rate = result.tally.rate();
    // Wilson score interval, z = 1.96.
    const double z = 1.959963984540054;
    const double nt = static_cast<double>(trials);
    if (trials > 0) {
        const double center = (result.rate + z * z / (2 * nt)) / (1 + z * z / nt);
        const double half = z *
                            std::sqrt(result.rate * (1 - result.rate) / nt +
                                      z * z / (4 * nt * nt)) /
                            (1 + z * z / nt);
        result.ci_low = std::max(0.0, center - half);
        result.ci_high = std::min(1.0, center + half);
    }
    return result;
}

}  // namespace stashshuffle
