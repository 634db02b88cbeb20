#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "stash_shuffle/distribute.hpp"
#include "stash_shuffle/shuffle.hpp"

namespace stashshuffle {

/// Unbounded cleartext mid array of the idealized shuffle.
struct IdealMid {
    std::vector<std::vector<Record>> buckets;
};

/// The idealized shuffle: assign every item to a bucket with the same target
/// streams as the real algorithm, then shuffle each bucket with the same
/// per-bucket streams, then concatenate. It operates on cleartext, never
/// fails, and — with multinomial assignment — its output is uniform.
inline std::vector<Record> buckets_shuffle(const std::vector<Record>& input, std::uint64_t buckets,
                                           const RngSuite& rngs, AssignMode mode) {
    const std::uint64_t n = input.size();
    const std::uint64_t d = detail::ceil_div(n, buckets);
    IdealMid mid;
    mid.buckets.resize(buckets);
    for (std::uint64_t b = 0; b < buckets; ++b) {
        StreamRng targets_rng = rngs.stream(Stream::Targets, b);
        const TargetAssignment assignment = shuffle_to_buckets(buckets, d, targets_rng, mode);
        for (std::uint64_t i = 0; i < d; ++i) {
            const std::uint64_t global = b * d + i;
            if (global >= n) break;  // padded tail positions carry no item
            mid.buckets[assignment.targets[i]].push_back(input[global]);
        }
    }
    std::vector<Record> out;
    out.reserve(n);
    for (std::uint64_t j = 0; j < buckets; ++j) {
        StreamRng shuffle_rng = rngs.stream(Stream::BucketShuffle, j);
        fisher_yates(mid.buckets[j], shuffle_rng);
        for (Record& r : mid.buckets[j]) out.push_back(std::move(r));
    }
    return out;
}

struct CoupledResult {
    std::vector<Payload> ideal;
    RunResult real;  // real.output present iff the stash shuffle succeeded
};

/// Run the ideal and the real shuffle on identical random streams. Whenever
/// the real shuffle succeeds the two outputs must be byte-identical; when it
/// fails the ideal output is still produced.
inline CoupledResult coupled_run(const std::vector<Payload>& payloads, const ShuffleParams& p,
                                 std::size_t payload_size, std::uint64_t seed, AssignMode mode) {
    std::vector<Record> records;
    records.reserve(payloads.size());
    for (std::uint64_t i = 0; i < payloads.size(); ++i) records.push_back(Record::real(i, payloads[i]));

    RngSuite rngs(seed);
    std::vector<Record> ideal_records = buckets_shuffle(records, p.bucket_count, rngs, mode);

    CoupledResult result;
    result.ideal.reserve(ideal_records.size());
    for (Record& r : ideal_records) result.ideal.push_back(std::move(r.payload));
    result.real = run_shuffle(payloads, p, payload_size, seed, mode);
    return result;
}

struct HybridResult {
    ShuffleOutcome outcome = ShuffleOutcome::Success;
    std::optional<std::vector<Record>> output;
    std::uint64_t failure_step = 0;
};

/// Lemma-style hybrid: ideal (unbounded, never failing) distribution feeding
/// the real bounded compression. Conditional on the real shuffle reaching
/// compression, this fails exactly when the real shuffle does, because the
/// per-bucket real-item counts are fixed by the target streams alone.
inline HybridResult hybrid_shuffle(const std::vector<Record>& input, const ShuffleParams& p,
                                   const RngSuite& rngs, AssignMode mode) {
    const std::uint64_t n = input.size();
    IdealMid mid;
    mid.buckets.resize(p.bucket_count);
    for (std::uint64_t b = 0; b < p.bucket_count; ++b) {
        StreamRng targets_rng = rngs.stream(Stream::Targets, b);
        const TargetAssignment assignment =
            shuffle_to_buckets(p.bucket_count, p.bucket_size, targets_rng, mode);
        for (std::uint64_t i = 0; i < p.bucket_size; ++i) {
            const std::uint64_t global = b * p.bucket_size + i;
            if (global >= n) break;
            mid.buckets[assignment.targets[i]].push_back(input[global]);
        }
    }

    HybridResult result;
    std::vector<Record> out;
    out.reserve(n);
    std::vector<Record> queue;
    std::uint64_t head = 0;  // queue front
    const std::uint64_t capacity = p.queue_capacity();
    const std::uint64_t l = p.effective_window;
    std::uint64_t step = 0;

    auto import_bucket = [&](std::uint64_t j) -> bool {
        std::vector<Record>& bucket = mid.buckets[j];
        std::sort(bucket.begin(), bucket.end(),
                  [](const Record& a, const Record& b2) { return a.tag < b2.tag; });
        StreamRng shuffle_rng = rngs.stream(Stream::BucketShuffle, j);
        fisher_yates(bucket, shuffle_rng);
        for (Record& r : bucket) {
            if (queue.size() - head >= capacity) {
                result.outcome = ShuffleOutcome::QueueOverflow;
                result.failure_step = j;
                return false;
            }
            queue.push_back(std::move(r));
        }
        return true;
    };
    auto drain = [&](std::uint64_t count) -> bool {
        if (queue.size() - head < count) {
            result.outcome = ShuffleOutcome::QueueUnderflow;
            result.failure_step = step;
            return false;
        }
        for (std::uint64_t i = 0; i < count; ++i) out.push_back(std::move(queue[head++]));
        return true;
    };

    for (std::uint64_t b = 0; b < l; ++b) {
        if (!import_bucket(b)) return result;
    }
    for (std::uint64_t b = l; b < p.bucket_count; ++b) {
        if (!drain(p.bucket_size)) return result;
        ++step;
        if (!import_bucket(b)) return result;
    }
    for (std::uint64_t t = 0; t < l; ++t) {
        const std::uint64_t count = (t + 1 == l) ? n - out.size() : p.bucket_size;
        if (!drain(count)) return result;
        ++step;
    }
    result.output = std::move(out);
    return result;
}

}  // namespace stashshuffle
