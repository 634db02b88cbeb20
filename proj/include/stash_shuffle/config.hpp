#pragma once

#include <cctype>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "stash_shuffle/errors.hpp"
#include "stash_shuffle/params.hpp"

namespace stashshuffle {

// Flat `key = value` text with exactly the parameter names N,B,D,C,S,K,W,Q,L,
// alpha. '#' starts a comment. Unknown keys are rejected. Derived fields are
// optional on input (checked for consistency when present) and always written
// on output. Either C or alpha must be present; C wins when both are given and
// they must agree.

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw ParamError("trailing characters after " + key);
        return v;
    } catch (const std::exception&) {
        throw ParamError("cannot parse " + key + " = '" + value + "' as an integer");
    }
}

inline double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw ParamError("trailing characters after " + key);
        return v;
    } catch (const std::exception&) {
        throw ParamError("cannot parse " + key + " = '" + value + "' as a real");
    }
}

}  // namespace detail

inline ShuffleParams parse_params(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ParamError("config line is not 'key = value': " + line);
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key != "N" && key != "B" && key != "D" && key != "C" && key != "S" && key != "K" &&
            key != "W" && key != "Q" && key != "L" && key != "alpha")
            throw ParamError("unknown config key: " + key);
        if (!kv.emplace(key, value).second) throw ParamError("duplicate config key: " + key);
    }
    for (const char* required : {"N", "B", "S", "W", "Q"}) {
        if (!kv.count(required)) throw ParamError(std::string("config is missing ") + required);
    }
    const std::uint64_t n = detail::parse_u64("N", kv.at("N"));
    const std::uint64_t b = detail::parse_u64("B", kv.at("B"));
    const std::uint64_t s = detail::parse_u64("S", kv.at("S"));
    const std::uint64_t w = detail::parse_u64("W", kv.at("W"));
    const std::uint64_t q = detail::parse_u64("Q", kv.at("Q"));

    ShuffleParams p;
    if (kv.count("C")) {
        p = derive_params_with_cap(n, b, detail::parse_u64("C", kv.at("C")), s, w, q);
        if (kv.count("alpha")) {
            const double alpha = detail::parse_real("alpha", kv.at("alpha"));
            if (std::abs(alpha - p.cap_slack) > 1e-6 * std::max(1.0, std::abs(p.cap_slack)))
                throw ParamError("C and alpha are inconsistent");
        }
    } else if (kv.count("alpha")) {
        p = derive_params(n, b, detail::parse_real("alpha", kv.at("alpha")), s, w, q);
    } else {
        throw ParamError("config needs C or alpha");
    }

    if (kv.count("D") && detail::parse_u64("D", kv.at("D")) != p.bucket_size)
        throw ParamError("D does not equal ceil(N/B)");
    if (kv.count("K") && detail::parse_u64("K", kv.at("K")) != p.drain_quota)
        throw ParamError("K does not equal S/B");
    if (kv.count("L") && detail::parse_u64("L", kv.at("L")) != p.effective_window)
        throw ParamError("L does not equal min(W, B)");
    return p;
}

inline ShuffleParams parse_params(const std::string& text) {
    std::istringstream is(text);
    return parse_params(is);
}

inline void write_params(std::ostream& os, const ShuffleParams& p) {
    os << "N = " << p.n_items << '\n';
    os << "B = " << p.bucket_count << '\n';
    os << "D = " << p.bucket_size << '\n';
    os << "C = " << p.chunk_cap << '\n';
    os << "S = " << p.stash_capacity << '\n';
    os << "K = " << p.drain_quota << '\n';
    os << "W = " << p.window << '\n';
    os << "Q = " << p.queue_hedge << '\n';
    os << "L = " << p.effective_window << '\n';
    os << "alpha = " << p.cap_slack << '\n';
}

inline std::string params_text(const ShuffleParams& p) {
    std::ostringstream os;
    os.precision(17);
    write_params(os, p);
    return os.str();
}

}  // namespace stashshuffle
