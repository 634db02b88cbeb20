#pragma once

#include <cstdint>
#include <vector>

namespace stashshuffle {

using Payload = std::vector<std::uint8_t>;

/// One item as seen inside trusted memory. The provenance tag is the item's
/// position in the padded input array; it orders a bucket's real items
/// canonically before the per-bucket shuffle and never leaves the ciphertext.
struct Record {
    bool dummy = true;
    std::uint64_t tag = 0;
    Payload payload;

    static Record real(std::uint64_t tag, Payload payload) {
        Record r;
        r.dummy = false;
        r.tag = tag;
        r.payload = std::move(payload);
        return r;
    }

    static Record padding(std::size_t payload_size) {
        Record r;
        r.dummy = true;
        r.tag = 0;
        r.payload.assign(payload_size, 0);
        return r;
    }

    bool operator==(const Record&) const = default;
};

}  // namespace stashshuffle
