#include "avglearn/rng.hpp"

#include <cmath>
#include <numbers>

namespace avglearn {

double CounterRng::gaussian(std::uint64_t stream, std::uint64_t substream, std::uint64_t t,
                            std::uint64_t k) const {
    const double u1 = 1.0 - uniform(stream, substream, t, 2 * k);      // (0, 1]
    const double u2 = uniform(stream, substream, t, 2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace avglearn
