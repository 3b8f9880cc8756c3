#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace dsrc {

/// FNV-1a 64-bit over a byte string. Stable across platforms and runs;
/// used to stamp output files with a digest of the canonical config text.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string config_digest(std::string_view canonical_text) {
    return hex64(fnv1a64(canonical_text));
}

} // namespace dsrc
