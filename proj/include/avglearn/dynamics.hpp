#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "avglearn/matrix.hpp"
#include "avglearn/noise.hpp"
#include "avglearn/schedule.hpp"

namespace avglearn {

// Full experiment description. sigma_bar must be fixed by every A_t in the
// window (consensus vectors sigma * 1 always are); noisy runs additionally
// require a consensus sigma_bar.
struct Scenario {
    int n = 0;
    Vec sigma_bar;
    Vec x0;
    ScheduleWindow schedule;
    std::optional<NoiseSpec> noise;
    long horizon = 0;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    int trials = 1;

    void validate() const;
    bool sigma_is_consensus() const;
};

struct Trajectory {
    std::vector<Vec> states;         // X_0..X_T
    std::vector<double> errors;      // ||X_t - sigma_bar||_inf
    std::vector<double> bounds;      // theoretical bound per step; NaN where none attached
    std::optional<long> converged_at;

    bool has_bound(long t) const;
};

// One update X+ = A X + diag(E)(sigma_bar - X) + r.
Vec step(const Matrix& a, const LearningRates& e, const Vec& sigma_bar, const Vec& x,
         const Vec* r = nullptr);

// Deterministic simulation; attaches the vanishing-rates product bound or the
// two-step mixed-norm bound when the schedule family supports one.
Trajectory simulate(const Scenario& s);

// prod over [T1, t) of (1 - min_i E_k(i)).
double vanishing_bound(const ScheduleWindow& w, long T1, long t);

// Friedkin-Johnsen iteration X+ = diag(lambda) A X + (I - diag(lambda)) X0.
Trajectory fj_simulate(const LearningRates& lambda, const Matrix& a, const Vec& x0, long T);

// Solves (I - diag(lambda) A) X* = (I - diag(lambda)) X0.
Vec fj_equilibrium(const LearningRates& lambda, const Matrix& a, const Vec& x0);

}  // namespace avglearn
