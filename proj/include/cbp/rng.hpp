#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cbp {

// Deterministic seeded generator with platform-stable output. The stream
// is splitmix64; bounded ints use rejection so the sequence does not
// depend on any library distribution implementation. Single-owner: for
// parallel generation derive child streams with child(), never share one.
class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on {0, ..., bound-1}, unbiased via rejection.
    std::uint64_t uniform_index(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double rademacher() { return (next_u64() & 1) ? 1.0 : -1.0; }

    // Standard normal, Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Independent child stream keyed by (original seed, stream id);
    // does not depend on how much the parent has generated.
    SeededRng child(std::uint64_t stream_id) const {
        SeededRng mix(seed_ ^ (0xa0761d6478bd642fULL * (stream_id + 1)));
        mix.next_u64();
        return SeededRng(mix.next_u64());
    }

  private:
    std::uint64_t seed_;
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace cbp
