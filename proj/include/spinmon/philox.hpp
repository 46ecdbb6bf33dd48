#pragma once

// Counter-based random numbers (Philox4x32-10).
//
// Every draw is a pure function of (key, counter), so trajectory workers can
// pull the same stream values no matter how they are scheduled. The key is
// derived from the 64-bit master seed; the counter packs
// (trajectory, step, operator, stream) indices.

#include <array>
#include <cmath>
#include <cstdint>

namespace spinmon {

namespace philox {

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}

// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers:
// as easy as 1, 2, 3"). Matches the Random123 reference vectors.
inline std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr,
                                     std::array<uint32_t, 2> key) {
    constexpr uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        uint32_t hi0, lo0, hi1, lo1;
        mulhilo(M0, ctr[0], hi0, lo0);
        mulhilo(M1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

// Uniform double in (0, 1] from 53 random bits; never returns 0 so it is
// safe inside log().
inline double uniform_open(uint32_t hi, uint32_t lo) {
    uint64_t bits = (static_cast<uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

// Uniform double in [0, 1).
inline double uniform_halfopen(uint32_t hi, uint32_t lo) {
    uint64_t bits = (static_cast<uint64_t>(hi) << 32) | lo;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace philox

// Stream ids keep draws for different purposes statistically disjoint.
enum class RngStream : uint32_t {
    MeasurementNoise = 0,
    InitialState = 1,
};

// One keyed block per (trajectory, step/site, op/slot, stream) tuple.
class CounterRng {
  public:
    CounterRng(uint64_t master_seed, uint64_t trajectory)
        : key_{static_cast<uint32_t>(master_seed),
               static_cast<uint32_t>(master_seed >> 32)},
          traj_(static_cast<uint32_t>(trajectory)) {}

    std::array<uint32_t, 4> raw(uint32_t a, uint32_t b, RngStream stream) const {
        return philox::block({traj_, a, b, static_cast<uint32_t>(stream)}, key_);
    }

    // Standard normal via Box-Muller; one block yields one deviate.
    double gaussian(uint32_t a, uint32_t b, RngStream stream) const {
        auto w = raw(a, b, stream);
        double u1 = philox::uniform_open(w[0], w[1]);
        double u2 = philox::uniform_halfopen(w[2], w[3]);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Two independent uniforms in [0, 1) from one block.
    std::array<double, 2> uniform_pair(uint32_t a, uint32_t b, RngStream stream) const {
        auto w = raw(a, b, stream);
        return {philox::uniform_halfopen(w[0], w[1]),
                philox::uniform_halfopen(w[2], w[3])};
    }

  private:
    std::array<uint32_t, 2> key_;
    uint32_t traj_;
};

}  // namespace spinmon
