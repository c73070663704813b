#pragma once

#include <cstdint>
#include <random>

namespace tobitkf {

// SplitMix64 finalizer, used to derive independent substream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed of replicate `index` under base seed `base`:
//   splitmix64(base + 0x9E3779B97F4A7C15 * (index + 1))
std::uint64_t substream_seed(std::uint64_t base, std::uint64_t index) noexcept;

// mt19937_64 with hand-written uniform/normal transforms, so a seed produces
// the same stream with every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;

    // Standard normal via the Marsaglia polar method.
    double normal() noexcept;

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace tobitkf
