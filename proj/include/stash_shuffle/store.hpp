#pragma once

#include <sodium.h>

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "stash_shuffle/crypto.hpp"
#include "stash_shuffle/errors.hpp"
#include "stash_shuffle/params.hpp"

namespace stashshuffle {

enum class ArrayId : std::uint8_t { In = 0, Mid = 1, Out = 2 };
enum class AccessOp : std::uint8_t { Read = 0, Write = 1 };

inline const char* array_name(ArrayId a) {
    switch (a) {
        case ArrayId::In: return "IN";
        case ArrayId::Mid: return "MID";
        case ArrayId::Out: return "OUT";
    }
    return "?";
}

inline const char* op_name(AccessOp op) { return op == AccessOp::Read ? "READ" : "WRITE"; }

struct AccessEvent {
    ArrayId array;
    AccessOp op;
    std::uint64_t index;
    std::uint64_t seq;

    bool same_access(const AccessEvent& o) const {
        return array == o.array && op == o.op && index == o.index;
    }
};

/// Input layout: bucket-major, slot b*D + i.
inline std::uint64_t data_idx(const ShuffleParams& p, std::uint64_t bucket, std::uint64_t slot) {
    if (bucket >= p.bucket_count || slot >= p.bucket_size)
        throw std::out_of_range("data_idx: bucket or slot out of range");
    return bucket * p.bucket_size + slot;
}

/// Intermediate layout: output bucket j owns a contiguous region of
/// C*B + K slots; source b < B addresses its C-slot chunk inside the region,
/// source == B addresses the K-slot stash-drain chunk.
inline std::uint64_t mid_idx(const ShuffleParams& p, std::uint64_t out_bucket, std::uint64_t slot,
                             std::uint64_t source) {
    if (out_bucket >= p.bucket_count || source > p.bucket_count)
        throw std::out_of_range("mid_idx: bucket or source out of range");
    const bool drain = source == p.bucket_count;
    if (slot >= (drain ? p.drain_quota : p.chunk_cap))
        throw std::out_of_range("mid_idx: slot out of range");
    return out_bucket * p.mid_bucket_slots() + source * p.chunk_cap + slot;
}

/// The adversary-visible side of the computation: three fixed-size ciphertext
/// arrays plus the ordered trace of every access made through read()/write().
/// The input array is filled at construction (ingestion is the host's job);
/// everything the shuffle itself does is traced.
class UntrustedStore {
  public:
    UntrustedStore(std::vector<Ciphertext> input, std::size_t mid_size, std::size_t out_size)
        : in_(std::move(input)), mid_(mid_size), out_(out_size) {}

    static UntrustedStore for_params(const ShuffleParams& p, std::vector<Ciphertext> input) {
        if (input.size() != p.padded_items())
            throw IoError("input array must hold B*D ciphertexts");
        return UntrustedStore(std::move(input), p.mid_total_slots(), p.n_items);
    }

    const Ciphertext& read(ArrayId array, std::uint64_t index) {
        record(array, AccessOp::Read, index);
        return slot(array, index);
    }

    void write(ArrayId array, std::uint64_t index, Ciphertext ct) {
        record(array, AccessOp::Write, index);
        slot(array, index) = std::move(ct);
    }

    const std::vector<AccessEvent>& trace() const { return trace_; }

    // Untraced inspection; for the host and for tests, not for the algorithm.
    const std::vector<Ciphertext>& raw(ArrayId array) const {
        switch (array) {
            case ArrayId::In: return in_;
            case ArrayId::Mid: return mid_;
            case ArrayId::Out: return out_;
        }
        return out_;
    }

    std::size_t size(ArrayId array) const { return raw(array).size(); }

  private:
    Ciphertext& slot(ArrayId array, std::uint64_t index) {
        auto& arr = const_cast<std::vector<Ciphertext>&>(raw(array));
        if (index >= arr.size()) throw std::out_of_range("untrusted array index out of range");
        return arr[index];
    }

    void record(ArrayId array, AccessOp op, std::uint64_t index) {
        trace_.push_back(AccessEvent{array, op, index, seq_++});
    }

    std::vector<Ciphertext> in_;
    std::vector<Ciphertext> mid_;
    std::vector<Ciphertext> out_;
    std::vector<AccessEvent> trace_;
    std::uint64_t seq_ = 0;
};

/// SHA-256 over the ordered (array, op, index) triples. Ciphertext contents
/// are deliberately excluded: the digest captures exactly what an observer of
/// the access pattern can see.
inline std::string trace_fingerprint(const UntrustedStore& store) {
    detail::ensure_sodium();
    crypto_hash_sha256_state st;
    crypto_hash_sha256_init(&st);
    for (const AccessEvent& e : store.trace()) {
        std::uint8_t buf[10];
        buf[0] = static_cast<std::uint8_t>(e.array);
        buf[1] = static_cast<std::uint8_t>(e.op);
        for (int i = 0; i < 8; ++i) buf[2 + i] = static_cast<std::uint8_t>(e.index >> (8 * i));
        crypto_hash_sha256_update(&st, buf, sizeof buf);
    }
    std::uint8_t digest[crypto_hash_sha256_BYTES];
    crypto_hash_sha256_final(&st, digest);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * sizeof digest);
    for (std::uint8_t b : digest) {
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 0xF]);
    }
    return out;
}

/// One line per event: seq,array,op,index
inline void write_trace(std::ostream& os, const UntrustedStore& store) {
    for (const AccessEvent& e : store.trace()) {
        os << e.seq << ',' << array_name(e.array) << ',' << op_name(e.op) << ',' << e.index << '\n';
    }
}

}  // namespace stashshuffle
