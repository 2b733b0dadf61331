#pragma once

#include <cstdint>
#include <random>

namespace hierva {

/// Deterministic RNG wrapper. std::mt19937_64 has a fully specified engine,
/// but the standard distributions do not; the bounded helpers here keep
/// generated datasets byte-identical across toolchains.
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

    uint64_t next() { return engine_(); }

    /// Uniform integer in [lo, hi], inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int64_t>(next() % span);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Derives an independent stream from the original seed; used for
    /// distractor subplots so the whole composite is reproducible.
    Rng fork(uint64_t salt) const {
        uint64_t x = seed_ ^ (salt + 0x9e3779b97f4a7c15ULL);
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return Rng(x);
    }

private:
    uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace hierva
