#pragma once

#include <cstdint>
#include <random>

namespace stodec {

// Derives a per-task seed from a master seed and a task index.  The
// derivation is a splitmix64 step, so neighbouring indices give
// uncorrelated streams and the mapping is stable across platforms.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Single-owner seeded random stream.  All randomness in the project is
// drawn through this class; the standard distribution adaptors are
// avoided on purpose because their output is implementation-defined and
// would break byte-identical reruns.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in {0, ..., n-1} via the multiply-shift trick.
    int uniform_int(int n) {
        return static_cast<int>((static_cast<unsigned __int128>(next_u64()) *
                                 static_cast<unsigned __int128>(n)) >>
                                64);
    }

  private:
    std::mt19937_64 gen_;
};

} // namespace stodec
