#include "avglearn/noise.hpp"

#include <cmath>
#include <numbers>

namespace avglearn {

Distribution Distribution::uniform(double a, double b) {
    if (!(a <= b)) throw InvalidInput("uniform distribution needs a <= b");
    return {DistKind::Uniform, a, b, 0.0};
}

Distribution Distribution::gaussian(double mean, double sd) {
    if (sd < 0.0) throw InvalidInput("gaussian sd must be nonnegative");
    return {DistKind::Gaussian, mean, sd, 0.0};
}

Distribution Distribution::two_point(double p, double x1, double x2) {
    if (p < 0.0 || p > 1.0) throw InvalidInput("two-point probability must lie in [0,1]");
    return {DistKind::TwoPoint, p, x1, x2};
}

Distribution Distribution::degenerate(double c) { return {DistKind::Degenerate, c, 0.0, 0.0}; }

double Distribution::sample(const CounterRng& rng, std::uint64_t trial, std::uint64_t t,
                            std::uint64_t coord) const {
    switch (kind) {
        case DistKind::Uniform:
            return p1 + (p2 - p1) * rng.uniform(trial, 1, t, coord);
        case DistKind::Gaussian:
            return p1 + p2 * rng.gaussian(trial, 1, t, coord);
        case DistKind::TwoPoint:
            return rng.uniform(trial, 1, t, coord) < p1 ? p2 : p3;
        case DistKind::Degenerate:
            return p1;
    }
    return 0.0;
}

double Distribution::mean() const {
    switch (kind) {
        case DistKind::Uniform: return (p1 + p2) / 2.0;
        case DistKind::Gaussian: return p1;
        case DistKind::TwoPoint: return p1 * p2 + (1.0 - p1) * p3;
        case DistKind::Degenerate: return p1;
    }
    return 0.0;
}

double Distribution::scale() const {
    switch (kind) {
        case DistKind::Uniform: return std::max(std::abs(p1), std::abs(p2));
        case DistKind::Gaussian: return std::abs(p1) + 6.0 * p2;
        case DistKind::TwoPoint: return std::max(std::abs(p2), std::abs(p3));
        case DistKind::Degenerate: return std::abs(p1);
    }
    return 0.0;
}

NoiseSpec NoiseSpec::zero() { return {}; }

NoiseSpec NoiseSpec::vanishing_scaled(Distribution d, double decay_power) {
    if (decay_power <= 0.0) throw InvalidInput("decay power must be positive");
    NoiseSpec s;
    s.kind = NoiseKind::VanishingScaled;
    s.dist = d;
    s.decay_power = decay_power;
    return s;
}

NoiseSpec NoiseSpec::iid(Distribution d) {
    NoiseSpec s;
    s.kind = NoiseKind::IID;
    s.dist = d;
    return s;
}

NoiseSpec NoiseSpec::block_alternating(double b1, double b2, int blocks, Distribution d) {
    if (!(0.0 < b1 && b1 < 1.0 && 0.0 < b2 && b2 < 1.0)) throw InvalidInput("block coefficients must lie in (0,1)");
    if (blocks < 1) throw InvalidInput("need at least one block");
    NoiseSpec s;
    s.kind = NoiseKind::BlockAlternating;
    s.dist = d;
    s.b1 = b1;
    s.b2 = b2;
    s.blocks = blocks;
    return s;
}

double NoiseSpec::value(const CounterRng& rng, std::uint64_t trial, std::uint64_t t,
                        std::uint64_t coord) const {
    switch (kind) {
        case NoiseKind::Zero:
            return 0.0;
        case NoiseKind::VanishingScaled:
            return dist.sample(rng, trial, t, coord) / std::pow(static_cast<double>(t + 1), decay_power);
        case NoiseKind::IID:
        case NoiseKind::BlockAlternating:
            return dist.sample(rng, trial, t, coord);
    }
    return 0.0;
}

std::vector<long> alternating_block_lengths(double b1, double b2, int blocks) {
    if (!(0.0 < b1 && b1 < 1.0 && 0.0 < b2 && b2 < 1.0)) throw InvalidInput("block coefficients must lie in (0,1)");
    std::vector<long> lengths;
    lengths.reserve(blocks);
    long prev = 0;
    for (int m = 1; m <= blocks; ++m) {
        const double b = (m % 2 == 1) ? b1 : b2;
        // smallest L with b^L <= 2^{-m}, lengthened where needed to keep the
        // sequence strictly increasing (a longer block only contracts more).
        const long L = static_cast<long>(std::ceil(m * std::numbers::ln2 / -std::log(b)));
        prev = std::max({1L, L, prev + 1});
        lengths.push_back(prev);
    }
    return lengths;
}

}  // namespace avglearn
