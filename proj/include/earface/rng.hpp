#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace earface {

/// Deterministic RNG with explicit, serializable state.
///
/// Uniform and normal draws are generated from raw mt19937_64 output rather
/// than std::*_distribution so that the value stream is fully specified by
/// this class and survives checkpoint round trips bit-exactly.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the spare value is cached in-object.
    double normal();

    /// Uniform integer in [lo, hi], inclusive, via rejection sampling.
    int64_t uniform_int(int64_t lo, int64_t hi);

    uint64_t next_u64() { return eng_(); }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    std::string serialize() const;
    static Rng deserialize(const std::string& s);

    /// Stable seed derivation for named substreams (per-subject, per-epoch, ...).
    static uint64_t derive(uint64_t seed, std::string_view tag, uint64_t index = 0);

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace earface
