#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "stash_shuffle/oracle.hpp"
#include "stash_shuffle/planner.hpp"
#include "stash_shuffle/stats.hpp"

namespace stashshuffle {
namespace presets {

/// Tiny vector for permutation-level statistics: 5 items over 2 buckets with
/// capacities that make failure impossible (the planner confirms the exact
/// failure probability is zero).
inline ShuffleParams uniformity() { return derive_params_with_cap(5, 2, 2, 4, 2, 5); }

/// Adversarial small vector whose exact failure probability is 2 * 9/256
/// (about 0.07) in multinomial mode: a drain failure exactly when a queue's
/// two arrivals stack past K. Also the reference vector for coupled runs.
inline ShuffleParams adversarial() { return derive_params_with_cap(8, 2, 2, 4, 2, 8); }

/// Comfortable mid-size vector whose predicted failure rate is ~1e-46; used
/// for trace-invariance runs.
inline ShuffleParams oblivious() { return derive_params_with_cap(200, 4, 30, 128, 2, 200); }

/// N = 10^4 end-to-end vector for conservation/shape runs (failure ~1e-25).
inline ShuffleParams conservation() { return derive_params_with_cap(10'000, 20, 45, 1'000, 2, 2'000); }

}  // namespace presets

namespace detail {

inline std::vector<Payload> index_payloads(std::uint64_t n, std::size_t payload_size) {
    std::vector<Payload> payloads(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        payloads[i].assign(payload_size, 0);
        payloads[i][0] = static_cast<std::uint8_t>(i);
    }
    return payloads;
}

inline std::vector<Payload> random_payloads(std::uint64_t n, std::size_t payload_size,
                                            StreamRng& rng) {
    std::vector<Payload> payloads(n);
    for (auto& p : payloads) {
        p.resize(payload_size);
        rng.fill_bytes(p.data(), p.size());
    }
    return payloads;
}

}  // namespace detail

struct UniformityResult {
    std::uint64_t trials = 0;
    std::uint64_t cells = 0;
    double statistic = 0.0;
    double p_value = 0.0;
    std::uint64_t failures = 0;

    bool pass(double alpha = 0.001) const { return failures == 0 && p_value > alpha; }
};

/// Chi-square over all N! output permutations of the executable shuffle.
/// Multinomial assignment: that is the regime in which the ideal shuffle is
/// provably uniform (the separators construction measurably is not; see the
/// Monte Carlo suite for the comparison).
inline UniformityResult verify_uniform_real(std::uint64_t trials, std::uint64_t seed,
                                            const ShuffleParams& p = presets::uniformity()) {
    constexpr std::size_t kPayload = 8;
    const std::vector<Payload> payloads = detail::index_payloads(p.n_items, kPayload);
    UniformityResult result;
    result.trials = trials;
    result.cells = factorial(p.n_items);
    std::vector<std::uint64_t> counts(result.cells, 0);
    std::vector<std::uint64_t> perm(p.n_items);
    for (std::uint64_t t = 0; t < trials; ++t) {
        const RunResult run =
            run_shuffle(payloads, p, kPayload, splitmix64(seed ^ t), AssignMode::Multinomial);
        if (!run.output) {
            ++result.failures;
            continue;
        }
        for (std::uint64_t i = 0; i < p.n_items; ++i) perm[i] = (*run.output)[i][0];
        ++counts[permutation_rank(perm)];
    }
    result.statistic = chi_squared_statistic(counts, trials - result.failures);
    result.p_value = chi_squared_pvalue(result.statistic, static_cast<double>(result.cells - 1));
    return result;
}

/// The same test against the ideal oracle on its own.
inline UniformityResult verify_uniform_oracle(std::uint64_t trials, std::uint64_t seed,
                                              std::uint64_t n = 5, std::uint64_t buckets = 2) {
    std::vector<Record> input;
    for (std::uint64_t i = 0; i < n; ++i) input.push_back(Record::real(i, Payload{static_cast<std::uint8_t>(i)}));
    UniformityResult result;
    result.trials = trials;
    result.cells = factorial(n);
    std::vector<std::uint64_t> counts(result.cells, 0);
    std::vector<std::uint64_t> perm(n);
    for (std::uint64_t t = 0; t < trials; ++t) {
        RngSuite rngs(splitmix64(seed ^ t));
        const std::vector<Record> out = buckets_shuffle(input, buckets, rngs, AssignMode::Multinomial);
        for (std::uint64_t i = 0; i < n; ++i) perm[i] = out[i].tag;
        ++counts[permutation_rank(perm)];
    }
    result.statistic = chi_squared_statistic(counts, trials);
    result.p_value = chi_squared_pvalue(result.statistic, static_cast<double>(result.cells - 1));
    return result;
}

struct ObliviousnessResult {
    std::uint64_t runs = 0;
    std::uint64_t unique_fingerprints = 0;
    std::uint64_t failures = 0;
    bool prefix_checked = false;  // a failing run was found and compared
    bool prefix_ok = false;

    bool pass() const { return unique_fingerprints == 1 && failures == 0 && prefix_checked && prefix_ok; }
};

/// Trace invariance: distinct random inputs and seeds must produce one single
/// fingerprint. Separately, at a failure-prone vector, every failed trace must
/// be a prefix of the successful trace.
inline ObliviousnessResult verify_oblivious(std::uint64_t runs, std::uint64_t seed,
                                            const ShuffleParams& p = presets::oblivious()) {
    constexpr std::size_t kPayload = 16;
    ObliviousnessResult result;
    result.runs = runs;
    std::set<std::string> fingerprints;
    for (std::uint64_t t = 0; t < runs; ++t) {
        const std::uint64_t run_seed = splitmix64(seed ^ (t * 2 + 1));
        RngSuite content_rng(run_seed);
        StreamRng payload_rng = content_rng.stream(Stream::Payloads, 7);
        const std::vector<Payload> payloads = detail::random_payloads(p.n_items, kPayload, payload_rng);
        const RunResult run = run_shuffle(payloads, p, kPayload, run_seed, AssignMode::Separators);
        if (run.outcome != ShuffleOutcome::Success) {
            ++result.failures;
            continue;
        }
        fingerprints.insert(run.fingerprint);
    }
    result.unique_fingerprints = fingerprints.size();

    // Prefix property, at a vector where failures actually happen.
    const ShuffleParams adv = presets::adversarial();
    const std::vector<Payload> payloads = detail::index_payloads(adv.n_items, 8);
    std::optional<UntrustedStore> success_store;
    std::vector<std::optional<UntrustedStore>> failed_stores;
    for (std::uint64_t t = 0; t < 4000 && (!success_store || failed_stores.size() < 5); ++t) {
        std::optional<UntrustedStore> store;
        const RunResult run =
            run_shuffle(payloads, adv, 8, splitmix64(seed ^ (0xF00D + t)), AssignMode::Multinomial, &store);
        if (run.outcome == ShuffleOutcome::Success) {
            if (!success_store) success_store = std::move(store);
        } else {
            failed_stores.push_back(std::move(store));
        }
    }
    if (success_store && !failed_stores.empty()) {
        result.prefix_checked = true;
        result.prefix_ok = true;
        const auto& full = success_store->trace();
        for (const auto& fs : failed_stores) {
            const auto& partial = fs->trace();
            if (partial.size() >= full.size()) {
                result.prefix_ok = false;
                continue;
            }
            for (std::size_t i = 0; i < partial.size(); ++i) {
                if (!partial[i].same_access(full[i])) {
                    result.prefix_ok = false;
                    break;
                }
            }
        }
    }
    return result;
}

struct CouplingResult {
    std::uint64_t seeds = 0;
    std::uint64_t successes = 0;
    std::uint64_t failures = 0;
    std::uint64_t mismatches = 0;

    bool pass() const { return mismatches == 0 && successes > 0; }
};

/// Run ideal and real shuffles on shared streams across many seeds; every
/// successful real output must equal the ideal output exactly.
inline CouplingResult verify_couple(std::uint64_t seeds, std::uint64_t seed0, AssignMode mode,
                                    const ShuffleParams& p = presets::adversarial()) {
    constexpr std::size_t kPayload = 8;
    const std::vector<Payload> payloads = detail::index_payloads(p.n_items, kPayload);
    CouplingResult result;
    result.seeds = seeds;
    for (std::uint64_t t = 0; t < seeds; ++t) {
        const CoupledResult run =
            coupled_run(payloads, p, kPayload, splitmix64(seed0 ^ (t * 2 + 0xC0)), mode);
        if (!run.real.output) {
            ++result.failures;
            continue;
        }
        ++result.successes;
        if (*run.real.output != run.ideal) ++result.mismatches;
    }
    return result;
}

struct MonteCarloComparison {
    double exact = 0.0;            // stash + compression exact failure probability
    MonteCarloResult multinomial;  // the mode the model describes
    MonteCarloResult separators;   // the faithful construction, for comparison
    double standard_error = 0.0;   // binomial SE of the multinomial estimate at `exact`

    bool pass(double sigmas = 3.0) const {
        return std::abs(multinomial.rate - exact) <= sigmas * standard_error;
    }
};

/// Exact model vs executable shuffle at an adversarial vector. The multinomial
/// run is the apples-to-apples check; the separators run is reported alongside
/// to quantify the assignment-mode gap.
inline MonteCarloComparison verify_montecarlo(std::uint64_t trials, std::uint64_t seed,
                                              const ShuffleParams& p = presets::adversarial()) {
    MonteCarloComparison cmp;
    cmp.exact = std::min(1.0, stash_tail_exact(p) + compression_tail_exact(p));
    cmp.multinomial = monte_carlo_failure(p, trials, seed, AssignMode::Multinomial);
    cmp.separators = monte_carlo_failure(p, trials, splitmix64(seed + 1), AssignMode::Separators);
    cmp.standard_error = std::sqrt(cmp.exact * (1.0 - cmp.exact) / static_cast<double>(trials));
    return cmp;
}

}  // namespace stashshuffle
