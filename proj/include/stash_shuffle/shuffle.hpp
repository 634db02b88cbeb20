#pragma once

#include <cassert>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stash_shuffle/compress.hpp"
#include "stash_shuffle/distribute.hpp"

namespace stashshuffle {

enum class ShuffleOutcome {
    Success,
    StashOverflow,
    DrainFailure,
    QueueOverflow,
    QueueUnderflow,
};

inline ShuffleOutcome outcome_of(FailureKind k) {
    switch (k) {
        case FailureKind::StashOverflow: return ShuffleOutcome::StashOverflow;
        case FailureKind::DrainFailure: return ShuffleOutcome::DrainFailure;
        case FailureKind::QueueOverflow: return ShuffleOutcome::QueueOverflow;
        case FailureKind::QueueUnderflow: return ShuffleOutcome::QueueUnderflow;
    }
    return ShuffleOutcome::Success;
}

inline const char* outcome_name(ShuffleOutcome o) {
    switch (o) {
        case ShuffleOutcome::Success: return "success";
        case ShuffleOutcome::StashOverflow: return "stash_overflow";
        case ShuffleOutcome::DrainFailure: return "drain_failure";
        case ShuffleOutcome::QueueOverflow: return "queue_overflow";
        case ShuffleOutcome::QueueUnderflow: return "queue_underflow";
    }
    return "unknown";
}

inline int outcome_exit_code(ShuffleOutcome o) {
    switch (o) {
        case ShuffleOutcome::Success: return kExitOk;
        case ShuffleOutcome::StashOverflow: return kExitStashOverflow;
        case ShuffleOutcome::DrainFailure: return kExitDrainFailure;
        case ShuffleOutcome::QueueOverflow: return kExitQueueOverflow;
        case ShuffleOutcome::QueueUnderflow: return kExitQueueUnderflow;
    }
    return kExitIo;
}

struct ExecStats {
    std::size_t peak_distribute_items = 0;
    std::size_t peak_compress_items = 0;
};

/// Encrypt N payloads into the B*D input array, padding the tail with dummies
/// so every bucket holds exactly D ciphertexts. Tags record input positions.
inline std::vector<Ciphertext> encrypt_input(const std::vector<Payload>& payloads,
                                             const ShuffleParams& p, std::size_t payload_size,
                                             Keychain& keys) {
    if (payloads.size() != p.n_items) throw IoError("payload count does not match N");
    std::vector<Ciphertext> input;
    input.reserve(p.padded_items());
    for (std::uint64_t i = 0; i < p.padded_items(); ++i) {
        Record r = i < p.n_items ? Record::real(i, payloads[i]) : Record::padding(payload_size);
        input.push_back(keys.in.encrypt(r, payload_size));
    }
    return input;
}

/// Decrypt the N output ciphertexts back to payloads (host side, untraced).
inline std::vector<Payload> decrypt_output(const UntrustedStore& store, const ShuffleParams& p,
                                           std::size_t payload_size, const Keychain& keys) {
    std::vector<Payload> out;
    out.reserve(p.n_items);
    for (std::uint64_t i = 0; i < p.n_items; ++i) {
        Record r = keys.out.decrypt(store.raw(ArrayId::Out)[i], payload_size);
        if (r.dummy) throw IntegrityError("dummy record reached the output array");
        out.push_back(std::move(r.payload));
    }
    return out;
}

/// Run both phases over an untrusted store whose input array is populated.
/// Throws ShuffleFailure on the algorithm's probabilistic failures and
/// IntegrityError if any ciphertext fails authentication.
inline void stash_shuffle(UntrustedStore& store, const ShuffleParams& p, std::size_t payload_size,
                          Keychain& keys, RngSuite& rngs, AssignMode mode,
                          ExecStats* stats = nullptr) {
    PrivateSpace distribute_space;
    Stash stash(p.bucket_count, p.stash_capacity);
    try {
        for (std::uint64_t b = 0; b < p.bucket_count; ++b) {
            distribute_bucket(stash, b, store, p, payload_size, keys, rngs, mode,
                              &distribute_space);
        }
        drain_stash(stash, store, p, payload_size, keys, &distribute_space);
    } catch (...) {
        if (stats) stats->peak_distribute_items = distribute_space.peak;
        throw;
    }
    if (stats) stats->peak_distribute_items = distribute_space.peak;
    assert(distribute_space.peak <=
           p.bucket_size + p.stash_capacity + p.bucket_count * p.chunk_cap);

    PrivateSpace compress_space;
    try {
        compress(store, p, payload_size, keys, rngs, &compress_space);
    } catch (...) {
        if (stats) stats->peak_compress_items = compress_space.peak;
        throw;
    }
    if (stats) stats->peak_compress_items = compress_space.peak;
    assert(compress_space.peak <= p.mid_bucket_slots() + p.window * p.bucket_size + p.queue_hedge);
}

struct RunResult {
    ShuffleOutcome outcome = ShuffleOutcome::Success;
    std::optional<std::vector<Payload>> output;  // present on success
    std::uint64_t failure_bucket = 0;
    std::string failure_detail;
    ExecStats stats;
    std::string fingerprint;  // of the shuffle's access trace
};

/// Convenience wrapper: payloads in, payloads out, one seed. Pass `keep` to
/// inspect the store (trace, arrays) afterwards.
inline RunResult run_shuffle(const std::vector<Payload>& payloads, const ShuffleParams& p,
                             std::size_t payload_size, std::uint64_t seed, AssignMode mode,
                             std::optional<UntrustedStore>* keep = nullptr) {
    RngSuite rngs(seed);
    Keychain keys = Keychain::derive(rngs);
    std::optional<UntrustedStore> local;
    std::optional<UntrustedStore>& holder = keep ? *keep : local;
    holder.emplace(UntrustedStore::for_params(p, encrypt_input(payloads, p, payload_size, keys)));
    UntrustedStore& store = *holder;

    RunResult result;
    try {
        stash_shuffle(store, p, payload_size, keys, rngs, mode, &result.stats);
        result.output = decrypt_output(store, p, payload_size, keys);
    } catch (const ShuffleFailure& f) {
        result.outcome = outcome_of(f.kind());
        result.failure_bucket = f.bucket();
        result.failure_detail = f.what();
    }
    result.fingerprint = trace_fingerprint(store);
    return result;
}

}  // namespace stashshuffle
