#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "stash_shuffle/accounting.hpp"
#include "stash_shuffle/crypto.hpp"
#include "stash_shuffle/errors.hpp"
#include "stash_shuffle/params.hpp"
#include "stash_shuffle/rng.hpp"
#include "stash_shuffle/store.hpp"

namespace stashshuffle {

/// How items are assigned to output buckets.
///
/// Separators permutes the D items together with B-1 bucket separators and
/// reads each item's bucket off the permutation; per-bucket counts are then a
/// uniform composition. Multinomial draws every item's bucket independently
/// and uniformly, which is the model the tail analysis (and the uniformity
/// lemma) actually assumes. The two do not have the same count distribution;
/// the planner's Monte Carlo reports both so the gap stays visible.
enum class AssignMode { Separators, Multinomial };

inline const char* assign_mode_name(AssignMode m) {
    return m == AssignMode::Separators ? "separators" : "multinomial";
}

struct TargetAssignment {
    std::vector<std::uint32_t> targets;  // one output bucket per input slot
};

inline TargetAssignment shuffle_to_buckets(std::uint64_t buckets, std::uint64_t count,
                                           StreamRng& rng, AssignMode mode) {
    TargetAssignment out;
    out.targets.resize(count);
    if (buckets <= 1) return out;
    if (mode == AssignMode::Multinomial) {
        for (auto& t : out.targets) t = static_cast<std::uint32_t>(rng.bounded(buckets));
        return out;
    }
    // Markers < count are item slots, the rest are the B-1 separators.
    std::vector<std::uint32_t> markers(count + buckets - 1);
    for (std::uint32_t i = 0; i < markers.size(); ++i) markers[i] = i;
    fisher_yates(markers, rng);
    std::uint32_t separators_seen = 0;
    for (std::uint32_t m : markers) {
        if (m >= count) {
            ++separators_seen;
        } else {
            out.targets[m] = separators_seen;
        }
    }
    return out;
}

/// Deferred items, one FIFO queue per output bucket with one shared capacity.
class Stash {
  public:
    Stash(std::uint64_t buckets, std::uint64_t capacity)
        : queues_(buckets), capacity_(capacity) {}

    bool full() const { return total_ == capacity_; }
    std::uint64_t total() const { return total_; }
    std::uint64_t capacity() const { return capacity_; }
    std::size_t queue_size(std::uint64_t bucket) const { return queues_[bucket].size(); }
    bool queue_empty(std::uint64_t bucket) const { return queues_[bucket].empty(); }

    void push(std::uint64_t bucket, Record item) {
        queues_[bucket].push_back(std::move(item));
        ++total_;
    }

    Record pop(std::uint64_t bucket) {
        Record r = std::move(queues_[bucket].front());
        queues_[bucket].pop_front();
        --total_;
        return r;
    }

  private:
    std::vector<std::deque<Record>> queues_;
    std::uint64_t total_ = 0;
    std::uint64_t capacity_;
};

/// Distribute input bucket b with a given target assignment: stash items
/// first claim chunk slots, then the bucket's D items are read in index order
/// and routed by target (capped items go to the stash), then every chunk is
/// padded to exactly C and written out. The write shape is always B chunks of
/// C ciphertexts, whatever the data did.
inline void distribute_bucket_with_targets(Stash& stash, std::uint64_t b,
                                           const TargetAssignment& assignment,
                                           UntrustedStore& store, const ShuffleParams& p,
                                           std::size_t payload_size, Keychain& keys,
                                           PrivateSpace* space = nullptr) {
    std::vector<std::vector<Record>> chunks(p.bucket_count);
    for (auto& c : chunks) c.reserve(p.chunk_cap);

    for (std::uint64_t j = 0; j < p.bucket_count; ++j) {
        while (chunks[j].size() < p.chunk_cap && !stash.queue_empty(j)) {
            chunks[j].push_back(stash.pop(j));
        }
    }

    for (std::uint64_t i = 0; i < p.bucket_size; ++i) {
        Record item = keys.in.decrypt(store.read(ArrayId::In, data_idx(p, b, i)), payload_size);
        if (space) space->add(1);
        const std::uint32_t j = assignment.targets[i];
        if (chunks[j].size() < p.chunk_cap) {
            chunks[j].push_back(std::move(item));
        } else if (!stash.full()) {
            stash.push(j, std::move(item));
        } else {
            throw ShuffleFailure(FailureKind::StashOverflow, b, j,
                                 "stash full while distributing bucket " + std::to_string(b));
        }
    }

    for (std::uint64_t j = 0; j < p.bucket_count; ++j) {
        while (chunks[j].size() < p.chunk_cap) {
            chunks[j].push_back(Record::padding(payload_size));
            if (space) space->add(1);
        }
        for (std::uint64_t i = 0; i < p.chunk_cap; ++i) {
            store.write(ArrayId::Mid, mid_idx(p, j, i, b), keys.mid.encrypt(chunks[j][i], payload_size));
        }
        if (space) space->sub(chunks[j].size());
        chunks[j].clear();
    }
}

/// Algorithm entry point: draw the bucket's target assignment from its named
/// stream, then distribute.
inline void distribute_bucket(Stash& stash, std::uint64_t b, UntrustedStore& store,
                              const ShuffleParams& p, std::size_t payload_size, Keychain& keys,
                              RngSuite& rngs, AssignMode mode, PrivateSpace* space = nullptr) {
    StreamRng targets_rng = rngs.stream(Stream::Targets, b);
    const TargetAssignment assignment =
        shuffle_to_buckets(p.bucket_count, p.bucket_size, targets_rng, mode);
    distribute_bucket_with_targets(stash, b, assignment, store, p, payload_size, keys, space);
}

/// Final drain: each output bucket receives exactly K ciphertexts, the
/// leftover stash items for that bucket (FIFO) padded with dummies. A queue
/// holding more than K items cannot drain and fails the shuffle.
inline void drain_stash(Stash& stash, UntrustedStore& store, const ShuffleParams& p,
                        std::size_t payload_size, Keychain& keys, PrivateSpace* space = nullptr) {
    for (std::uint64_t j = 0; j < p.bucket_count; ++j) {
        if (stash.queue_size(j) > p.drain_quota) {
            throw ShuffleFailure(FailureKind::DrainFailure, j, j,
                                 "stash queue " + std::to_string(j) + " exceeds the drain quota");
        }
        for (std::uint64_t i = 0; i < p.drain_quota; ++i) {
            const bool from_stash = !stash.queue_empty(j);
            Record item = from_stash ? stash.pop(j) : Record::padding(payload_size);
            if (space && !from_stash) space->add(1);
            store.write(ArrayId::Mid, mid_idx(p, j, i, p.bucket_count),
                        keys.mid.encrypt(item, payload_size));
            if (space) space->sub(1);
        }
    }
}

}  // namespace stashshuffle
