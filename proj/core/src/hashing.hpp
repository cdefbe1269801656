#pragma once

// FNV-1a content hashing for stage caches. Stable across platforms and
// runs, which is all the cache validity check needs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

namespace lesionfuse::detail {

class Fnv64 {
public:
    void update(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ull;
        }
    }
    void update(const std::string& s) { update(s.data(), s.size()); }

    std::uint64_t value() const { return state_; }

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out(16, '0');
        std::uint64_t v = state_;
        for (int i = 15; i >= 0; --i) {
            out[static_cast<std::size_t>(i)] = digits[v & 0xF];
            v >>= 4;
        }
        return out;
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ull;
};

inline std::uint64_t fnv64(const std::string& s) {
    Fnv64 h;
    h.update(s);
    return h.value();
}

// Whole-file contents into the hash; missing files contribute a marker so
// presence changes invalidate too.
inline void hash_file(Fnv64& h, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        h.update("<missing>");
        return;
    }
    char buf[1 << 14];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h.update(buf, static_cast<std::size_t>(in.gcount()));
}

}  // namespace lesionfuse::detail
