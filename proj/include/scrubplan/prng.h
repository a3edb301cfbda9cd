// xorshift64* generator used for every seeded decision in the toolchain.
#pragma once

#include <cstdint>

namespace scrubplan {

inline constexpr std::uint64_t kDefaultSeed = 0x9E3779B97F4A7C15ull;

class Prng
{
  public:
    explicit Prng(std::uint64_t seed = kDefaultSeed) { reseed(seed); }

    void reseed(std::uint64_t seed) { state_ = seed ? seed : kDefaultSeed; }

    std::uint64_t next()
    {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545F4914F6CDD1Dull;
    }

    // Uniform in [0, n) by rejection; n > 0.
    std::uint64_t below(std::uint64_t n)
    {
        const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
        std::uint64_t x;
        do
            x = next();
        while (x >= limit);
        return x % n;
    }

    // Uniform in [0, 1) with 53 bits.
    double unit() { return double(next() >> 11) * 0x1.0p-53; }

    std::uint64_t state() const { return state_; }

  private:
    std::uint64_t state_;
};

} // namespace scrubplan
