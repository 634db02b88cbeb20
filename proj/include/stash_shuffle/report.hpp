#pragma once

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

#include "stash_shuffle/bounds.hpp"
#include "stash_shuffle/planner.hpp"

namespace stashshuffle {

/// Everything the planner knows about one parameter vector: the two
/// closed-form bounds (with their side conditions), the exact tail values,
/// and the combined statistical distance both ways.
struct SecurityReport {
    ShuffleParams params;
    ClosedBound f1_closed;
    ClosedBound f2_closed;
    double f1_exact = 0.0;
    double f2_exact = 0.0;
    double epsilon_closed = 1.0;
    double epsilon_exact = 0.0;
    double log2_epsilon_exact = 0.0;  // -inf when the exact distance is zero
};

inline SecurityReport theorem_distance(const ShuffleParams& p) {
    SecurityReport r;
    r.params = p;
    r.f1_closed = f1_closed_bound(p);
    r.f2_closed = f2_closed_bound(p);
    r.f1_exact = stash_tail_exact(p);
    r.f2_exact = compression_tail_exact(p);
    r.epsilon_closed = std::min(1.0, r.f1_closed.value + r.f2_closed.value);
    r.epsilon_exact = std::min(1.0, r.f1_exact + r.f2_exact);
    r.log2_epsilon_exact = std::log2(r.epsilon_exact);
    return r;
}

inline void write_report(std::ostream& os, const SecurityReport& r) {
    os << "f1_closed = " << r.f1_closed.value << '\n';
    os << "f1_closed_vacuous = " << (r.f1_closed.vacuous ? "true" : "false") << '\n';
    os << "f2_closed = " << r.f2_closed.value << '\n';
    os << "f2_closed_vacuous = " << (r.f2_closed.vacuous ? "true" : "false") << '\n';
    os << "f1_exact = " << r.f1_exact << '\n';
    os << "f2_exact = " << r.f2_exact << '\n';
    os << "epsilon_closed = " << r.epsilon_closed << '\n';
    os << "epsilon_exact = " << r.epsilon_exact << '\n';
    os << "log2_epsilon_exact = " << r.log2_epsilon_exact << '\n';
    for (const auto& c : r.f1_closed.conditions)
        os << "condition.f1." << c.name << " = " << (c.ok ? "true" : "false") << '\n';
    for (const auto& c : r.f2_closed.conditions)
        os << "condition.f2." << c.name << " = " << (c.ok ? "true" : "false") << '\n';
}

inline std::string report_text(const SecurityReport& r) {
    std::ostringstream os;
    os.precision(12);
    write_report(os, r);
    return os.str();
}

}  // namespace stashshuffle
