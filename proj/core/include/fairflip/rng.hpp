#pragma once

#include <cstdint>
#include <string_view>

namespace fairflip {

/// Splittable deterministic generator. Every experiment derives its stream
/// from a single 64-bit seed by hashing a textual label, so serial and
/// parallel schedules see identical randomness. The core is xoshiro256**
/// seeded through splitmix64; draws are implemented by hand (no
/// std::uniform_int_distribution) so byte streams match across platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    /// Child generator for a labeled sub-experiment.
    Rng derive(std::string_view label) const {
        uint64_t h = 1469598103934665603ULL; // FNV-1a
        for (char c : label) { h ^= uint8_t(c); h *= 1099511628211ULL; }
        return Rng(mix(state_[0] ^ h));
    }
    Rng derive(uint64_t index) const { return Rng(mix(state_[0] + 0x9e3779b97f4a7c15ULL * (index + 1))); }

    uint64_t next_u64() {
        uint64_t result = rotl(state_[1] * 5, 7) * 9;
        uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform draw in [0, bound) by rejection; bound >= 1.
    uint64_t below(uint64_t bound) {
        const uint64_t limit = bound * ((~uint64_t{0}) / bound);
        uint64_t v;
        do { v = next_u64(); } while (v >= limit);
        return v % bound;
    }

    bool bit() { return next_u64() >> 63; }

    /// Bernoulli(num/den) with exact integer parameters.
    bool bernoulli(uint64_t num, uint64_t den) { return below(den) < num; }

private:
    uint64_t state_[4];

    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    static uint64_t splitmix64(uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static uint64_t mix(uint64_t v) { uint64_t x = v; return splitmix64(x); }
};

} // namespace fairflip
