#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "stash_shuffle/record.hpp"
#include "stash_shuffle/rng.hpp"

namespace testutil {

inline std::vector<stashshuffle::Payload> index_payloads(std::uint64_t n, std::size_t size = 8) {
    std::vector<stashshuffle::Payload> out(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        out[i].assign(size, 0);
        out[i][0] = static_cast<std::uint8_t>(i);
        out[i][1] = static_cast<std::uint8_t>(i >> 8);
    }
    return out;
}

inline std::vector<stashshuffle::Payload> random_payloads(std::uint64_t n, std::size_t size,
                                                          std::uint64_t seed) {
    stashshuffle::StreamRng rng(stashshuffle::splitmix64(seed));
    std::vector<stashshuffle::Payload> out(n);
    for (auto& p : out) {
        p.resize(size);
        rng.fill_bytes(p.data(), p.size());
    }
    return out;
}

inline std::vector<stashshuffle::Payload> sorted_copy(std::vector<stashshuffle::Payload> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace testutil
