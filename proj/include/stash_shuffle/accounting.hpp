#pragma once

#include <cstddef>

namespace stashshuffle {

/// Counts records resident in trusted memory, to check the paper-level
/// private-memory budget. Phases keep it honest by adding items as they enter
/// private structures and releasing them as they are written out or dropped.
struct PrivateSpace {
    std::size_t current = 0;
    std::size_t peak = 0;

    void add(std::size_t n) {
        current += n;
        if (current > peak) peak = current;
    }
    void sub(std::size_t n) { current -= n; }
};

}  // namespace stashshuffle
