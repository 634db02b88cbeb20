#pragma once

#include <algorithm>
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

/// FIFO of real records awaiting export, capacity W*D + Q.
class CompressQueue {
  public:
    explicit CompressQueue(const ShuffleParams& p) : capacity_(p.queue_capacity()) {}

    std::size_t size() const { return items_.size(); }
    std::uint64_t capacity() const { return capacity_; }
    std::uint64_t exported() const { return exported_; }
    bool full() const { return items_.size() >= capacity_; }

    void enqueue(Record r) { items_.push_back(std::move(r)); }

    Record dequeue() {
        Record r = std::move(items_.front());
        items_.pop_front();
        ++exported_;
        return r;
    }

  private:
    std::deque<Record> items_;
    std::uint64_t capacity_;
    std::uint64_t exported_ = 0;
};

/// Import mid bucket b: read its whole C*B + K region in one contiguous scan,
/// decrypt, drop dummies, and enqueue the real records in a fresh uniform
/// order. The order is produced by sorting the reals by provenance tag and
/// applying the bucket's shuffle stream, so an ideal-model run consuming the
/// same stream produces the identical sequence.
inline void import_intermediate(std::uint64_t b, UntrustedStore& store, CompressQueue& queue,
                                const ShuffleParams& p, std::size_t payload_size, Keychain& keys,
                                RngSuite& rngs, PrivateSpace* space = nullptr) {
    const std::uint64_t region = p.mid_bucket_slots();
    const std::uint64_t base = b * region;
    if (space) space->add(region);

    std::vector<Record> reals;
    for (std::uint64_t i = 0; i < region; ++i) {
        Record item = keys.mid.decrypt(store.read(ArrayId::Mid, base + i), payload_size);
        if (!item.dummy) reals.push_back(std::move(item));
    }
    std::sort(reals.begin(), reals.end(),
              [](const Record& a, const Record& b2) { return a.tag < b2.tag; });
    StreamRng shuffle_rng = rngs.stream(Stream::BucketShuffle, b);
    fisher_yates(reals, shuffle_rng);

    if (space) {
        space->sub(region);
        space->add(reals.size());
    }
    for (Record& r : reals) {
        if (queue.full()) {
            throw ShuffleFailure(FailureKind::QueueOverflow, b, 0,
                                 "compression queue full while importing bucket " + std::to_string(b));
        }
        queue.enqueue(std::move(r));
    }
}

/// Export one batch: dequeue `count` records (D, or the remainder on the final
/// drain), re-encrypt under the output key, and append them to out.
inline void drain_queue(CompressQueue& queue, UntrustedStore& store, const ShuffleParams& p,
                        std::size_t payload_size, Keychain& keys, std::uint64_t count,
                        std::uint64_t schedule_step, PrivateSpace* space = nullptr) {
    if (count > p.bucket_size) throw IoError("drain batch larger than a bucket");
    if (queue.size() < count) {
        throw ShuffleFailure(FailureKind::QueueUnderflow, schedule_step, 0,
                             "compression queue holds " + std::to_string(queue.size()) +
                                 " records but the drain needs " + std::to_string(count));
    }
    for (std::uint64_t i = 0; i < count; ++i) {
        Record r = queue.dequeue();
        r.tag = 0;  // provenance stops at the output boundary
        store.write(ArrayId::Out, queue.exported() - 1, keys.out.encrypt(r, payload_size));
        if (space) space->sub(1);
    }
}

/// The compression schedule: import the first L buckets, then alternate
/// drain/import across the remaining buckets, then drain L more times. The
/// final drain exports whatever must remain (N minus what was exported), which
/// also strips the ingestion padding when N is not a multiple of B*D.
inline void compress(UntrustedStore& store, const ShuffleParams& p, std::size_t payload_size,
                     Keychain& keys, RngSuite& rngs, PrivateSpace* space = nullptr) {
    CompressQueue queue(p);
    const std::uint64_t l = p.effective_window;
    std::uint64_t step = 0;
    for (std::uint64_t b = 0; b < l; ++b) {
        import_intermediate(b, store, queue, p, payload_size, keys, rngs, space);
    }
    for (std::uint64_t b = l; b < p.bucket_count; ++b) {
        drain_queue(queue, store, p, payload_size, keys, p.bucket_size, step++, space);
        import_intermediate(b, store, queue, p, payload_size, keys, rngs, space);
    }
    for (std::uint64_t t = 0; t < l; ++t) {
        const bool final_drain = t + 1 == l;
        const std::uint64_t count =
            final_drain ? p.n_items - queue.exported() : p.bucket_size;
        drain_queue(queue, store, p, payload_size, keys, count, step++, space);
    }
}

}  // namespace stashshuffle
