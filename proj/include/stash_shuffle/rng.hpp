#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace stashshuffle {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// One named random stream. Draws are portable: mt19937_64 is fully specified
// by the standard and the bounded draw below avoids the implementation-defined
// std::uniform_int_distribution.
class StreamRng {
  public:
    explicit StreamRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased draw in [0, n).
    std::uint64_t bounded(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = (UINT64_MAX / n) * n;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % n;
    }

    void fill_bytes(std::uint8_t* out, std::size_t len) {
        std::size_t i = 0;
        while (i < len) {
            std::uint64_t w = engine_();
            for (int b = 0; b < 8 && i < len; ++b, ++i) {
                out[i] = static_cast<std::uint8_t>(w >> (8 * b));
            }
        }
    }

  private:
    std::mt19937_64 engine_;
};

template <typename T>
void fisher_yates(std::vector<T>& items, StreamRng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::uint64_t j = rng.bounded(i);
        std::swap(items[i - 1], items[j]);
    }
}

// The named streams one master seed expands into. Real and ideal shuffles
// consume the same streams, which is what makes coupled executions line up.
enum class Stream : std::uint64_t {
    Targets = 1,        // per input bucket: target assignment
    BucketShuffle = 2,  // per output bucket: in-memory shuffle
    KeyMaterial = 3,    // per array: encryption keys
    NoncePrefix = 4,    // per array: nonce prefixes
    Payloads = 5,       // synthetic input payloads for verify suites
    Trial = 6,          // per-trial master seeds for Monte Carlo
};

class RngSuite {
  public:
    explicit RngSuite(std::uint64_t master_seed) : master_(master_seed) {}

    std::uint64_t master() const { return master_; }

    StreamRng stream(Stream kind, std::uint64_t index) const {
        std::uint64_t tag = splitmix64(static_cast<std::uint64_t>(kind) * 0x100000001B3ULL + index);
        return StreamRng(splitmix64(master_ ^ tag));
    }

    // Independent master seed for trial t of a Monte Carlo sweep.
    std::uint64_t trial_seed(std::uint64_t t) const {
        return splitmix64(master_ ^ splitmix64(static_cast<std::uint64_t>(Stream::Trial) * 0x100000001B3ULL + t));
    }

  private:
    std::uint64_t master_;
};

}  // namespace stashshuffle
