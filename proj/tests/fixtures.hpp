// Fixed matrices used across the test suites.
#pragma once

#include "avglearn/matrix.hpp"

namespace fixtures {

using avglearn::LearningRates;
using avglearn::Matrix;

// 5x5 averaging matrix with a single stubborn agent (vertex 1) and a
// 4-agent cycle feeding it; two rate choices that flip the anchoring verdict.
inline Matrix golden5() {
    return Matrix{{1.0, 0.0, 0.0, 0.0, 0.0},
                  {0.5, 0.0, 0.5, 0.0, 0.0},
                  {0.0, 0.0, 0.0, 1.0, 0.0},
                  {0.0, 0.0, 0.0, 0.0, 1.0},
                  {0.0, 0.25, 0.0, 0.0, 0.75}};
}

inline LearningRates golden5_rates_anchored() { return LearningRates{0.5, 0.0, 0.0, 0.0, 0.0}; }
inline LearningRates golden5_rates_unanchored() { return LearningRates{0.0, 0.0, 0.0, 0.0, 0.5}; }

// 4x4 proper-substochastic matrix whose only deficient row is 4; contraction
// index 3 and unit infinity norm through the third power.
inline Matrix contraction4() {
    return Matrix{{1.0 / 3.0, 2.0 / 3.0, 0.0, 0.0},
                  {0.0, 0.0, 1.0, 0.0},
                  {0.75, 0.0, 0.0, 0.25},
                  {0.0, 0.2, 0.0, 0.4}};
}

// 2x2 pair with no anchor (one defective agent, one boundary overlearner)
// whose difference is still zero-convergent.
inline Matrix no_anchor_a() { return Matrix{{0.6, 0.4}, {2.0 / 3.0, 1.0 / 3.0}}; }
inline LearningRates no_anchor_rates() { return LearningRates{0.0, 2.0 / 3.0}; }

// 2x2 pair with a huge rate-to-self-belief ratio on agent 1.
inline Matrix extreme_a() {
    const double tiny = std::ldexp(1.0, -100);
    return Matrix{{tiny, 1.0 - tiny}, {0.5, 0.5}};
}
inline LearningRates extreme_rates() { return LearningRates{0.5, 1.0 / 3.0}; }

// 3x3 non-symmetric matrix with a rate of 2 that stays contractive.
inline Matrix asym3() {
    return Matrix{{0.2, 0.0, 0.8}, {1.0, 0.0, 0.0}, {0.0, 0.2, 0.8}};
}
inline LearningRates asym3_rates() { return LearningRates{0.5, 0.0, 2.0}; }

}  // namespace fixtures
