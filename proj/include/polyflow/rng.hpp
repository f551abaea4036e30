#pragma once

#include <cstdint>

namespace polyflow {

// SplitMix64: 64-bit splittable generator. Runs are replayed from the
// recorded seed; child streams are derived deterministically with split().
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed = 0x9e3779b97f4a7c15ULL) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n).
    uint64_t next_below(uint64_t n) { return n ? next_u64() % n : 0; }

    // Deterministic child stream, independent of how much of this stream
    // has been consumed since construction.
    SplitMix64 split(uint64_t index) const {
        SplitMix64 child(state_ ^ (0x9e3779b97f4a7c15ULL * (index + 0x632be59bd9b4e019ULL)));
        child.next_u64();
        return child;
    }

    uint64_t state() const { return state_; }

private:
    uint64_t state_;
};

}  // namespace polyflow
