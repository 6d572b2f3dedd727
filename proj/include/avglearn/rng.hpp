#pragma once

#include <cstdint>

namespace avglearn {

// Counter-based generator: every draw is a pure function of
// (seed, stream, substream, time, slot), so parallel consumers produce
// bitwise-identical values in any evaluation order.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t stream, std::uint64_t substream, std::uint64_t t,
                       std::uint64_t slot) const {
        std::uint64_t h = mix(seed_ ^ 0x6a09e667f3bcc909ull);
        h = mix(h ^ stream);
        h = mix(h ^ substream);
        h = mix(h ^ t);
        h = mix(h ^ slot);
        return h;
    }

    // Uniform on [0, 1).
    double uniform(std::uint64_t stream, std::uint64_t substream, std::uint64_t t,
                   std::uint64_t slot) const {
        return static_cast<double>(bits(stream, substream, t, slot) >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; consumes slots 2k and 2k+1.
    double gaussian(std::uint64_t stream, std::uint64_t substream, std::uint64_t t,
                    std::uint64_t k) const;

    std::uint64_t seed() const { return seed_; }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
};

}  // namespace avglearn
