#pragma once

#include <cstdint>
#include <vector>

#include "avglearn/errors.hpp"
#include "avglearn/rng.hpp"

namespace avglearn {

enum class DistKind { Uniform, Gaussian, TwoPoint, Degenerate };

struct Distribution {
    DistKind kind = DistKind::Degenerate;
    // Uniform: a = p1, b = p2; Gaussian: mean = p1, sd = p2;
    // TwoPoint: p = p1, x1 = p2, x2 = p3; Degenerate: c = p1.
    double p1 = 0.0, p2 = 0.0, p3 = 0.0;

    static Distribution uniform(double a, double b);
    static Distribution gaussian(double mean, double sd);
    static Distribution two_point(double p, double x1, double x2);
    static Distribution degenerate(double c);

    double sample(const CounterRng& rng, std::uint64_t trial, std::uint64_t t, std::uint64_t coord) const;
    double mean() const;
    // Magnitude bound used for truncation choices (6 sigma for Gaussian).
    double scale() const;
};

enum class NoiseKind { Zero, VanishingScaled, IID, BlockAlternating };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::Zero;
    Distribution dist;
    bool per_coordinate_independent = true;
    // VanishingScaled: scale at time t is 1/(t+1)^decay_power.
    double decay_power = 2.0;
    // BlockAlternating only: schedule coefficients and block count; block m
    // has the smallest length L with b^L <= 2^{-m}.
    double b1 = 0.0, b2 = 0.0;
    int blocks = 0;

    static NoiseSpec zero();
    static NoiseSpec vanishing_scaled(Distribution d, double decay_power = 2.0);
    static NoiseSpec iid(Distribution d);
    static NoiseSpec block_alternating(double b1, double b2, int blocks, Distribution d);

    bool is_zero() const { return kind == NoiseKind::Zero; }
    // Noise value for one coordinate at one step of one trial.
    double value(const CounterRng& rng, std::uint64_t trial, std::uint64_t t, std::uint64_t coord) const;
};

// Block lengths L_1..L_m for the alternating construction: block m uses
// coefficient b1 (odd blocks) or b2 (even blocks) and the smallest L with
// b^L <= 2^{-m}.
std::vector<long> alternating_block_lengths(double b1, double b2, int blocks);

}  // namespace avglearn
