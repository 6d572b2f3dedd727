#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "avglearn/dynamics.hpp"
#include "avglearn/noise.hpp"
#include "avglearn/schedule.hpp"

namespace avglearn {

struct EmpiricalDistribution {
    explicit EmpiricalDistribution(std::vector<double> samples);
    const std::vector<double>& sorted() const { return sorted_; }
    std::size_t size() const { return sorted_.size(); }
    double mean() const;

  private:
    std::vector<double> sorted_;
};

// Exact W1 between two empirical measures via the quantile-function integral;
// reduces to the sorted-difference average for equal sample counts.
double empirical_w1_1d(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

struct SmallGainReport {
    double lambda_sup = 0.0;                  // max over the window of Lambda_t
    std::optional<double> lambda_certified;   // analytic value for the constant family
    double k = 1.0;                           // 1 + Lambda
    double c = 0.0;                           // ln(1 + 1/Lambda)
    bool holds = false;
    double rho_max = 0.0;
    std::string notes;
};

enum class RhoFamily { Constant };

// Lambda_t = rho_t (1 + Lambda_{t-1}) over t = 1..T; the constant family
// rho < 1 is certified analytically as Lambda = rho/(1-rho).
SmallGainReport check_small_gain(const std::function<double(long)>& rho_at, long T,
                                 std::optional<RhoFamily> family = std::nullopt);

struct Ensemble {
    int n = 0;
    int trials = 0;
    long horizon = 0;
    std::vector<double> mean_err;  // size horizon+1
    std::vector<double> max_err;
    std::vector<long> checkpoints;
    // marginals[c][coord][trial]: state samples at checkpoint c.
    std::vector<std::vector<std::vector<double>>> marginals;
    std::vector<double> final_errors;  // per trial
    // Per-trial error curves, kept only for small ensembles.
    std::vector<std::vector<double>> per_trial_errors;
};

// Independent trials driven by the counter RNG: trial i is reproducible from
// (seed, i) alone, so results are identical for any jobs count.
Ensemble simulate_noisy(const Scenario& s, int trials, std::uint64_t seed,
                        std::vector<long> checkpoints = {}, int jobs = 1);

// Truncation depth K with b^K * scale < 1e-12.
int stationary_truncation(double b, const Distribution& dist);

// m samples of sum_{k<K} b^k gamma_k, approximating the stationary law of
// Y = bY + gamma.
EmpiricalDistribution stationary_law_sample(double b, const Distribution& dist, int truncation,
                                            int m, std::uint64_t seed);

// One-dimensional schedule alternating between coefficients b1 and b2 on
// blocks of growing length, with IID noise; the law at block ends alternates
// between the two stationary laws.
Scenario block_counterexample(double b1, double b2, int blocks, const Distribution& dist,
                              std::uint64_t seed);

struct TwoStepGains {
    std::vector<double> rho0;  // (n - tau_{2k}) / (n - tau'_{2k+1})
    std::vector<double> rho1;  // (n - tau_{2k+1}) / (n - tau'_{2k+2})
};

TwoStepGains two_step_gains(const ScheduleWindow& w);

// W1 between the cross-trial marginal laws at consecutive checkpoints.
std::vector<double> w1_time_profile(const Ensemble& ensemble, int coordinate,
                                    const std::vector<long>& checkpoints);

}  // namespace avglearn
