#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fc {

/// Enumeration budget: the largest table any command may materialize or scan
/// in one go (p^k dataset rows, p^{k+1} transform evaluations). Defaults to
/// 1e7; the FC_BUDGET environment variable overrides it.
inline std::uint64_t enumeration_budget() {
    if (const char* env = std::getenv("FC_BUDGET")) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end == env || !(v >= 1.0))
            throw std::runtime_error("FC_BUDGET must be a positive number, got '" +
                                     std::string(env) + "'");
        return static_cast<std::uint64_t>(v);
    }
    return 10'000'000ull;
}

/// p^e without silent overflow.
inline std::uint64_t checked_pow(std::uint64_t p, int e) {
    std::uint64_t r = 1;
    for (int i = 0; i < e; ++i) {
        if (p != 0 && r > UINT64_MAX / p) throw std::overflow_error("checked_pow overflow");
        r *= p;
    }
    return r;
}

inline void require_budget(std::uint64_t count, const std::string& what) {
    const std::uint64_t cap = enumeration_budget();
    if (count > cap)
        throw std::runtime_error(what + " needs " + std::to_string(count) +
                                 " evaluations, over the enumeration budget of " +
                                 std::to_string(cap) + " (set FC_BUDGET to raise it)");
}

}  // namespace fc
