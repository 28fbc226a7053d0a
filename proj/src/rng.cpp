#include "earface/rng.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "earface/tensor.hpp"

namespace earface {

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] so log() is finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

int64_t Rng::uniform_int(int64_t lo, int64_t hi) {
    if (lo > hi) throw Error("Rng::uniform_int: empty range");
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<int64_t>(eng_());  // full 64-bit range
    uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t x;
    do {
        x = eng_();
    } while (x >= limit);
    return lo + static_cast<int64_t>(x % span);
}

std::string Rng::serialize() const {
    std::ostringstream os;
    os << eng_ << " " << (has_spare_ ? 1 : 0);
    if (has_spare_) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), " %a", spare_);
        os << buf;
    }
    return os.str();
}

Rng Rng::deserialize(const std::string& s) {
    Rng r(0);
    std::istringstream is(s);
    is >> r.eng_;
    int flag = 0;
    is >> flag;
    if (is.fail()) throw Error("Rng::deserialize: malformed state string");
    r.has_spare_ = flag != 0;
    if (r.has_spare_) {
        std::string hex;
        is >> hex;
        r.spare_ = std::strtod(hex.c_str(), nullptr);
    }
    return r;
}

uint64_t Rng::derive(uint64_t seed, std::string_view tag, uint64_t index) {
    uint64_t h = 1469598103934665603ull;
    auto mix_byte = [&h](unsigned char b) {
        h ^= b;
        h *= 1099511628211ull;
    };
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<unsigned char>(seed >> (8 * i)));
    for (char ch : tag) mix_byte(static_cast<unsigned char>(ch));
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<unsigned char>(index >> (8 * i)));
    // splitmix64 finalizer for avalanche
    h += 0x9e3779b97f4a7c15ull;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

}  // namespace earface
