#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "avglearn/matrix.hpp"
#include "avglearn/schedule.hpp"

namespace avglearn {

enum class Verdict { ConvergesToTruth, ZeroConvergent, NotZeroConvergent, Inconclusive };

std::string to_string(Verdict v);

struct CertificateReport {
    Verdict verdict = Verdict::Inconclusive;
    std::string fired_rule;
    std::vector<int> anchor_set;
    std::map<std::string, double> witnesses;
    std::string notes;
};

// Per-step mixed-norm quantities: tau = learning mass, tau' = minimal
// admissible entry-bound parameter n - 1/max|B(i,j)| clamped to [0, n).
struct MixedNormStep {
    double tau = 0.0;
    double tau_prime = 0.0;
    double max_abs_entry = 0.0;
    bool admissible = false;  // 0 <= tau' < tau <= n
};

MixedNormStep mixed_norm_step(const Matrix& a, const LearningRates& e);

// Rule chain: all-anchors contraction; nonnegative B decisive anchoring test;
// closed-interval anchoring (negative diagonals allowed); spectral fallback.
CertificateReport certify_time_invariant(const Matrix& a, const LearningRates& e,
                                         double spectral_tol = kSpectralTol);

// Proper-substochastic DeGroot decay: anchoring test is decisive both ways.
CertificateReport certify_impaired(const Matrix& b);

// Vanishing-rates conditions (A1) eventual bound, (A2) vanishing,
// (A3) divergent minimum persistence (decided symbolically for recognized
// families only).
CertificateReport certify_vanishing_rates(const ScheduleWindow& w,
                                          std::optional<ScheduleKind> known_family = std::nullopt);

// Two-step contraction from the (1->inf, inf->1) norm pair.
CertificateReport certify_mixed_norm(const ScheduleWindow& w);

struct HighRatioFamily {
    Matrix a;
    LearningRates e;
    std::vector<std::complex<double>> predicted_eigs;
};

// Block construction with E(1) = (n^2-n+1) A(1,1): zero-convergent despite the
// extreme first learning rate; predicted spectrum is closed form.
HighRatioFamily build_high_ratio_example(int n);

struct OneLearnerBounds {
    double upper = 0.0;        // open upper bound for |A(i,i) - E(i)|
    double ahat_norm = 0.0;    // ||A with (i,i) zeroed||_{1->inf}
    bool smallness_ok = false; // ahat_norm < 1/(n-1)
    bool ahat_norm_ge_inv_n = false;
};

OneLearnerBounds one_learner_bounds(const Matrix& a, int learner, double tau, double tau_prime);

// (R - n^{1/n} (2R+1)^{1-1/n})^+
double fn_lower_bound(int n, double R);

struct FnThreshold {
    double exact;   // (n 2^n + 3n - 1)/2
    double simple;  // n (2^{n-1} + 2), always >= exact
};

FnThreshold fn_threshold(int n);

// Exact extremal value (R-1)^+ for n in {1, 2}.
double fn_small_exact(int n, double R);

struct ExtremalQuery {
    int n = 1;
    double R = 0.0;
    long search_budget = 20000;
};

struct ExtremalSearchResult {
    double best_rho = 0.0;
    Matrix best_a;
    LearningRates best_e;
};

// Projected random search (Dirichlet-style row samples + local coordinate
// perturbation) minimizing rho(A - diag(E)) over row-substochastic A and
// rates with E(1) = R fixed. The result is an upper estimate only.
ExtremalSearchResult fn_empirical(const ExtremalQuery& q, std::uint64_t seed);

struct SpectralVariation {
    double s_a_of_b = 0.0;
    double bound = 0.0;
    bool holds = false;
};

// Spectral variation s_A(B) against the infinity-norm perturbation bound
// n^{1/n} ||A-B||_inf^{1/n} (||A||_inf + ||B||_inf)^{1-1/n}.
SpectralVariation oe_infty_check(const Matrix& a, const Matrix& b);

// Symmetric row-stochastic A with some rate >= 2 forces an eigenvalue <= -1.
CertificateReport symmetric_overlearning_check(const Matrix& a, const LearningRates& e);

}  // namespace avglearn
