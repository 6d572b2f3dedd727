#include "avglearn/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "avglearn/graph.hpp"
#include "avglearn/rng.hpp"

namespace avglearn {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::ConvergesToTruth: return "ConvergesToTruth";
        case Verdict::ZeroConvergent: return "ZeroConvergent";
        case Verdict::NotZeroConvergent: return "NotZeroConvergent";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

MixedNormStep mixed_norm_step(const Matrix& a, const LearningRates& e) {
    const int n = a.size();
    MixedNormStep s;
    s.tau = learning_mass(a, e);
    s.max_abs_entry = mixed_norm_1_to_inf(subtract_rates(a, e));
    if (s.max_abs_entry > 0.0) s.tau_prime = std::max(0.0, n - 1.0 / s.max_abs_entry);
    s.admissible = s.tau_prime < s.tau && s.tau <= static_cast<double>(n);
    return s;
}

CertificateReport certify_time_invariant(const Matrix& a, const LearningRates& e, double spectral_tol) {
    if (a.size() != e.size()) throw InvalidScenario("rate/matrix dimension mismatch");
    if (a.row_class() != RowClass::RowStochastic) throw InvalidScenario("A must be row stochastic");
    const int n = a.size();
    const Matrix b = subtract_rates(a, e);

    CertificateReport report;
    const AnchorReport agent_sets = anchors(a, e);
    report.anchor_set = agent_sets.anchors;
    report.witnesses["n_anchors"] = static_cast<double>(agent_sets.anchors.size());

    // R1: every agent an anchor gives a strict infinity-norm contraction.
    if (static_cast<int>(agent_sets.anchors.size()) == n) {
        report.verdict = Verdict::ConvergesToTruth;
        report.fired_rule = "all_anchors_contraction";
        report.witnesses["inf_norm"] = induced_norm(b, PNorm::Infinity);
        report.witnesses["rho"] = spectral_radius(b, spectral_tol);
        return report;
    }

    // R2: nonnegative B, where the anchoring test is decisive both ways.
    bool b_nonneg = true;
    for (int i = 0; i < n && b_nonneg; ++i)
        for (int j = 0; j < n; ++j)
            if (b(i, j) < -kStochTol) {
                b_nonneg = false;
                break;
            }
    if (b_nonneg) {
        const AnchorReport full = is_condensely_anchored(a, e);
        report.verdict = full.condensely_anchored ? Verdict::ZeroConvergent : Verdict::NotZeroConvergent;
        report.fired_rule = "nonnegative_anchoring_equivalence";
        if (const auto idx = index_of_contraction(b)) report.witnesses["contraction_index"] = *idx;
        report.witnesses["rho"] = spectral_radius(b, spectral_tol);
        return report;
    }

    // R3: closed anchoring interval for every agent, anchoring still sufficient.
    bool closed_interval = true;
    for (int i = 0; i < n; ++i)
        if (e(i) > 2.0 * a(i, i) + kStochTol) {
            closed_interval = false;
            break;
        }
    if (closed_interval) {
        const AnchorReport full = is_condensely_anchored(a, e);
        if (full.condensely_anchored) {
            report.verdict = Verdict::ZeroConvergent;
            report.fired_rule = "closed_interval_anchoring";
            report.witnesses["rho"] = spectral_radius(b, spectral_tol);
            return report;
        }
    }

    // R4: spectral fallback.
    const double rho = spectral_radius(b, spectral_tol);
    report.witnesses["rho"] = rho;
    report.fired_rule = "spectral_fallback";
    if (rho < 1.0 - spectral_tol) {
        report.verdict = Verdict::ZeroConvergent;
    } else if (rho > 1.0 + spectral_tol) {
        report.verdict = Verdict::NotZeroConvergent;
    } else {
        report.verdict = Verdict::Inconclusive;
        report.notes = "spectral radius within tolerance of 1";
    }
    return report;
}

CertificateReport certify_impaired(const Matrix& b) {
    const RowClass rc = b.row_class();
    if (rc == RowClass::General) throw NotSubstochastic("matrix is not row substochastic");
    if (rc == RowClass::RowStochastic)
        throw NotProperSubstochastic("matrix is row stochastic; impaired-averaging test needs a deficient row");
    const Decomposition d = decompose_substochastic(b);
    const AnchorReport full = is_condensely_anchored(d.a, d.e);

    CertificateReport report;
    report.anchor_set = full.anchors;
    report.verdict = full.condensely_anchored ? Verdict::ZeroConvergent : Verdict::NotZeroConvergent;
    report.fired_rule = "impaired_averaging_anchoring";
    if (const auto idx = index_of_contraction(b)) report.witnesses["contraction_index"] = *idx;
    report.witnesses["n_anchors"] = static_cast<double>(full.anchors.size());
    return report;
}

namespace {

struct RateScan {
    long t1 = -1;              // smallest T1 with 0 <= E_t(i) <= A_t(i,i) for all t >= T1
    bool a2_ok = false;        // positive max-rate subsequence non-increasing toward 0
    double partial_sum = 0.0;  // sum over the window of min_i E_t(i)
    double product_bound = 1.0;
    bool geometric = false;    // max rates decay at a (near) constant ratio < 1
    double geometric_ratio = 0.0;
};

RateScan scan_rates(const ScheduleWindow& w) {
    const long T = w.horizon();
    const int n = w.dim();
    RateScan scan;
    std::vector<double> max_rate(T), min_rate(T);
    std::vector<bool> bounded(T);
    for (long t = 0; t < T; ++t) {
        const SchedulePoint p = w.at(t);
        double mx = 0.0, mn = std::numeric_limits<double>::infinity();
        bool ok = true;
        for (int i = 0; i < n; ++i) {
            mx = std::max(mx, p.e(i));
            mn = std::min(mn, p.e(i));
            if (p.e(i) > p.a(i, i) + kStochTol) ok = false;
        }
        max_rate[t] = mx;
        min_rate[t] = mn;
        bounded[t] = ok;
        scan.partial_sum += mn;
    }
    long t1 = T;
    for (long t = T - 1; t >= 0 && bounded[t]; --t) t1 = t;
    scan.t1 = (t1 < T) ? t1 : -1;
    if (scan.t1 >= 0)
        for (long t = scan.t1; t < T; ++t) scan.product_bound *= 1.0 - min_rate[t];

    // (A2): the positive entries of the max-rate sequence must be
    // non-increasing and end below where they start.
    std::vector<double> positive;
    for (long t = 0; t < T; ++t)
        if (max_rate[t] > 0.0) positive.push_back(max_rate[t]);
    if (positive.empty()) {
        scan.a2_ok = false;
    } else {
        scan.a2_ok = true;
        for (std::size_t k = 1; k < positive.size(); ++k)
            if (positive[k] > positive[k - 1] + kStochTol) {
                scan.a2_ok = false;
                break;
            }
        if (positive.back() >= positive.front() && positive.size() > 1) scan.a2_ok = false;
    }

    if (positive.size() >= 4) {
        scan.geometric = true;
        const double q0 = positive[1] / positive[0];
        for (std::size_t k = 1; k + 1 < positive.size(); ++k) {
            const double q = positive[k + 1] / positive[k];
            if (!(q < 1.0) || std::abs(q - q0) > 1e-9) {
                scan.geometric = false;
                break;
            }
        }
        if (scan.geometric) scan.geometric_ratio = q0;
    }
    return scan;
}

}  // namespace

CertificateReport certify_vanishing_rates(const ScheduleWindow& w, std::optional<ScheduleKind> known_family) {
    if (w.horizon() < 1) throw InvalidScenario("empty schedule window");
    const ScheduleKind family = known_family.value_or(w.kind());
    const RateScan scan = scan_rates(w);

    CertificateReport report;
    report.witnesses["partial_sum_min_rates"] = scan.partial_sum;
    if (scan.t1 >= 0) report.witnesses["T1"] = static_cast<double>(scan.t1);

    if (scan.t1 < 0) {
        report.verdict = Verdict::Inconclusive;
        report.fired_rule = "vanishing_rates";
        report.notes = "eventual bound 0 <= E_t(i) <= A_t(i,i) not observed at any window suffix";
        return report;
    }

    // (A3) is decided symbolically for recognized families only; a finite
    // window cannot prove an infinite sum diverges.
    bool a3_symbolic = false;
    std::string a3_reason;
    switch (family) {
        case ScheduleKind::HarmonicSplit:
            a3_symbolic = true;
            a3_reason = "odd-time rates 1/(2t-1) have divergent sum";
            break;
        case ScheduleKind::TailLog:
            a3_symbolic = true;
            a3_reason = "sum of c/((t+1)ln(t+2)) diverges by the integral test";
            break;
        case ScheduleKind::Constant: {
            const double m = w.constant_e().min();
            if (m > 0.0) {
                a3_symbolic = true;
                a3_reason = "constant positive minimum rate";
            }
            break;
        }
        default:
            break;
    }

    const bool a2 = scan.a2_ok && family != ScheduleKind::Constant;
    if (a2 && a3_symbolic) {
        report.verdict = Verdict::ConvergesToTruth;
        report.fired_rule = "vanishing_rates_persistence";
        report.witnesses["product_bound"] = scan.product_bound;
        report.notes = a3_reason;
        return report;
    }

    report.verdict = Verdict::Inconclusive;
    report.fired_rule = "vanishing_rates";
    std::ostringstream notes;
    if (!a2) notes << "rates not observed decreasing toward 0; ";
    if (!a3_symbolic) {
        notes << "minimum-persistence sum undecided for this family (window partial sum "
              << scan.partial_sum << ")";
        if (scan.geometric) {
            report.witnesses["geometric_ratio"] = scan.geometric_ratio;
            notes << "; rates decay geometrically with ratio " << scan.geometric_ratio
                  << ", so the persistence sum converges and the sufficient condition fails";
        }
    } else {
        notes << a3_reason;
    }
    report.notes = notes.str();
    return report;
}

CertificateReport certify_mixed_norm(const ScheduleWindow& w) {
    const long T = w.horizon();
    if (T < 2) throw InvalidScenario("mixed-norm certificate needs a window of at least two steps");
    const int n = w.dim();

    CertificateReport report;
    std::vector<MixedNormStep> steps(T);
    for (long t = 0; t < T; ++t) {
        const SchedulePoint p = w.at(t);
        steps[t] = mixed_norm_step(p.a, p.e);
        if (!steps[t].admissible) {
            report.verdict = Verdict::Inconclusive;
            report.fired_rule = "mixed_norm";
            std::ostringstream notes;
            notes << "step " << t << " violates tau' < tau (tau=" << steps[t].tau
                  << ", tau'=" << steps[t].tau_prime << ")";
            report.notes = notes.str();
            report.witnesses["failing_t"] = static_cast<double>(t);
            return report;
        }
    }

    double gamma0 = 0.0, gamma1 = std::numeric_limits<double>::infinity();
    for (const auto& s : steps) {
        gamma0 = std::max(gamma0, s.tau_prime);
        gamma1 = std::min(gamma1, s.tau);
    }
    report.witnesses["gamma0"] = gamma0;
    report.witnesses["gamma1"] = gamma1;
    report.witnesses["tau_first"] = steps[0].tau;
    report.witnesses["tau_prime_last"] = steps[T - 1].tau_prime;

    // Even/odd two-step products over the window.
    double product_even = 1.0, product_odd = 1.0;
    for (long s = 0; 2 * s + 1 < T; ++s)
        product_even *= (n - steps[2 * s].tau) / (n - steps[2 * s + 1].tau_prime);
    for (long s = 0; 2 * s + 2 < T; ++s)
        product_odd *= (n - steps[2 * s + 1].tau) / (n - steps[2 * s + 2].tau_prime);
    report.witnesses["two_step_product_even"] = product_even;
    report.witnesses["two_step_product_odd"] = product_odd;

    if (w.kind() == ScheduleKind::Constant) {
        report.verdict = Verdict::ConvergesToTruth;
        report.fired_rule = "mixed_norm_constant_bounds";
        report.witnesses["geometric_factor"] = (n - gamma1) / (n - gamma0);
        return report;
    }
    if (w.kind() == ScheduleKind::Example34) {
        // tau = 1/2 and tau' = t/(2t+3): two-step factors 1 - 1/(4s+2f+6),
        // whose log-sum diverges like a quarter of the harmonic series.
        report.verdict = Verdict::ConvergesToTruth;
        report.fired_rule = "mixed_norm_recognized_family";
        report.notes = "two-step factors 1 - 1/(4s+2f+6); log-product diverges to -infinity";
        return report;
    }
    if (gamma0 < gamma1) {
        report.verdict = Verdict::ConvergesToTruth;
        report.fired_rule = "mixed_norm_window_bounds";
        report.witnesses["geometric_factor"] = (n - gamma1) / (n - gamma0);
        report.notes = "gamma bounds hold across the observed window; conclusion extends to any "
                       "continuation maintaining them";
        return report;
    }
    report.verdict = Verdict::Inconclusive;
    report.fired_rule = "mixed_norm";
    report.notes = "no constant gamma bounds and family not recognized; product trajectory recorded";
    return report;
}

HighRatioFamily build_high_ratio_example(int n) {
    if (n < 2) throw InvalidInput("construction needs n >= 2");
    const double nd = n;
    Matrix a(n);
    a.set(0, 0, 1.0 / (nd * nd));
    for (int j = 1; j < n; ++j) a.set(0, j, (nd + 1.0) / (nd * nd));
    for (int i = 1; i < n; ++i) {
        a.set(i, 0, 1.0 / nd);
        a.set(i, i, (nd - 1.0) / nd);
    }
    std::vector<double> rates(n, (nd - 2.0) / nd);
    rates[0] = (nd * nd - nd + 1.0) / (nd * nd);

    if (a.row_class() != RowClass::RowStochastic)
        throw NumericalFailure("high-ratio construction failed row-stochasticity check");

    HighRatioFamily fam{std::move(a), LearningRates(std::move(rates)), {}};
    const double root = std::sqrt(0.25 + 1.0 / nd - 1.0 / (nd * nd * nd));
    for (int k = 0; k < n - 2; ++k) fam.predicted_eigs.emplace_back(1.0 / nd, 0.0);
    fam.predicted_eigs.emplace_back(1.0 / nd - 0.5 + root, 0.0);
    fam.predicted_eigs.emplace_back(1.0 / nd - 0.5 - root, 0.0);
    return fam;
}

OneLearnerBounds one_learner_bounds(const Matrix& a, int learner, double tau, double tau_prime) {
    const int n = a.size();
    if (n < 2) throw Unsupported("one-learner analysis needs n >= 2");
    if (learner < 0 || learner >= n) throw InvalidInput("learner index out of range");
    if (a.row_class() != RowClass::RowStochastic) throw InvalidInput("A must be row stochastic");
    if (!(0.0 <= tau_prime && tau_prime < tau && tau <= static_cast<double>(n)))
        throw InvalidInput("need 0 <= tau' < tau <= n");
    const double aii = a(learner, learner);
    if (aii <= 0.0) throw InfeasibleLearner("learner needs positive self-belief");

    Matrix ahat = a;
    ahat.set(learner, learner, 0.0);
    OneLearnerBounds out;
    out.ahat_norm = mixed_norm_1_to_inf(ahat);
    const double r = (std::sqrt((n - aii) * (n - aii) + 4.0) - (n - aii)) / 2.0;
    out.upper = r;
    if (out.ahat_norm > 0.0) out.upper = std::min(r, 1.0 / out.ahat_norm - n + aii);
    out.smallness_ok = out.ahat_norm < 1.0 / (n - 1.0);
    out.ahat_norm_ge_inv_n = out.ahat_norm >= 1.0 / n - 1e-15;
    return out;
}

double fn_lower_bound(int n, double R) {
    if (n < 1) throw InvalidInput("n must be positive");
    if (R < 0.0) throw InvalidInput("R must be nonnegative");
    const double nd = n;
    const double value = R - std::pow(nd, 1.0 / nd) * std::pow(2.0 * R + 1.0, 1.0 - 1.0 / nd);
    return std::max(0.0, value);
}

FnThreshold fn_threshold(int n) {
    if (n < 1) throw InvalidInput("n must be positive");
    const double nd = n;
    FnThreshold t;
    t.exact = (nd * std::ldexp(1.0, n) + 3.0 * nd - 1.0) / 2.0;
    t.simple = nd * (std::ldexp(1.0, n - 1) + 2.0);
    if (t.exact > t.simple) throw NumericalFailure("threshold bound ordering violated");
    return t;
}

double fn_small_exact(int n, double R) {
    if (n != 1 && n != 2) throw Unsupported("exact extremal value known for n in {1,2} only");
    if (R < 0.0) throw InvalidInput("R must be nonnegative");
    return std::max(0.0, R - 1.0);
}

namespace {

// Closed-form spectral radius for n <= 2, generic solver above. The 2x2
// discriminant is formed as ((a-d)/2)^2 + bc, which stays accurate near
// double roots where tr^2/4 - det cancels catastrophically.
double rho_of(const Matrix& m) {
    const int n = m.size();
    if (n == 1) return std::abs(m(0, 0));
    if (n == 2) {
        const double mid = (m(0, 0) + m(1, 1)) / 2.0;
        const double gap = (m(0, 0) - m(1, 1)) / 2.0;
        const double disc = gap * gap + m(0, 1) * m(1, 0);
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            return std::max(std::abs(mid + s), std::abs(mid - s));
        }
        return std::hypot(mid, std::sqrt(-disc));
    }
    return spectral_radius(m);
}

Matrix assemble(const std::vector<double>& a_entries, const std::vector<double>& e, int n, double R) {
    Matrix m(n, a_entries);
    m.set(0, 0, m(0, 0) - R);
    for (int i = 1; i < n; ++i) m.set(i, i, m(i, i) - e[i]);
    return m;
}

}  // namespace

ExtremalSearchResult fn_empirical(const ExtremalQuery& q, std::uint64_t seed) {
    if (q.search_budget < 1) throw InvalidInput("search budget must be positive");
    if (q.n < 1) throw InvalidInput("n must be positive");
    if (q.R < 0.0) throw InvalidInput("R must be nonnegative");
    const int n = q.n;
    CounterRng rng(seed);

    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<double> e(n, 0.0);
    std::vector<double> best_a = a;
    std::vector<double> best_e = e;
    double best_rho = std::numeric_limits<double>::infinity();
    long evals = 0;

    auto evaluate = [&](const std::vector<double>& av, const std::vector<double>& ev) {
        ++evals;
        return rho_of(assemble(av, ev, n, q.R));
    };

    auto sample_row = [&](std::vector<double>& av, int i, std::uint64_t restart) {
        const double pick = rng.uniform(restart, 0, i, 0);
        if (pick < 0.35) {
            // Polytope corner: zero row or a single unit entry.
            for (int j = 0; j < n; ++j) av[static_cast<std::size_t>(i) * n + j] = 0.0;
            const int j = static_cast<int>(rng.uniform(restart, 0, i, 1) * n) % n;
            if (pick >= 0.1) av[static_cast<std::size_t>(i) * n + j] = 1.0;
        } else {
            // Dirichlet(1,...,1) row scaled by a random total mass.
            double total = 0.0;
            for (int j = 0; j < n; ++j) {
                const double x = -std::log(1.0 - rng.uniform(restart, 1, i, j));
                av[static_cast<std::size_t>(i) * n + j] = x;
                total += x;
            }
            const double mass = (rng.uniform(restart, 0, i, 2) < 0.5)
                                    ? 1.0
                                    : rng.uniform(restart, 0, i, 3);
            for (int j = 0; j < n; ++j) av[static_cast<std::size_t>(i) * n + j] *= mass / total;
        }
    };

    std::uint64_t restart = 0;
    while (evals < q.search_budget) {
        ++restart;
        for (int i = 0; i < n; ++i) sample_row(a, i, restart);
        for (int i = 1; i < n; ++i)
            e[i] = (rng.uniform(restart, 0, n + i, 0) < 0.3) ? 0.0 : q.R * rng.uniform(restart, 0, n + i, 1);
        double current = evaluate(a, e);
        if (current < best_rho) {
            best_rho = current;
            best_a = a;
            best_e = e;
        }

        double step = 0.25;
        int stale = 0;
        std::uint64_t k = 0;
        const long local_budget = std::max<long>(64, q.search_budget / 32);
        for (long it = 0; it < local_budget && evals < q.search_budget && step > 1e-7; ++it) {
            ++k;
            const int total_coords = n * n + (n - 1);
            const int coord = static_cast<int>(rng.uniform(restart, 2, 0, k) * total_coords) % total_coords;
            const double delta = step * (2.0 * rng.uniform(restart, 3, 0, k) - 1.0);
            std::vector<double> a2 = a;
            std::vector<double> e2 = e;
            if (coord < n * n) {
                const int i = coord / n;
                const int j = coord % n;
                double v = std::max(0.0, a2[static_cast<std::size_t>(i) * n + j] + delta);
                a2[static_cast<std::size_t>(i) * n + j] = v;
                double row = 0.0;
                for (int jj = 0; jj < n; ++jj) row += a2[static_cast<std::size_t>(i) * n + jj];
                if (row > 1.0) a2[static_cast<std::size_t>(i) * n + j] = std::max(0.0, v - (row - 1.0));
            } else {
                const int i = coord - n * n + 1;
                e2[i] = std::clamp(e2[i] + delta * q.R, 0.0, q.R);
            }
            const double trial = evaluate(a2, e2);
            if (trial < current) {
                current = trial;
                a = std::move(a2);
                e = std::move(e2);
                stale = 0;
                if (current < best_rho) {
                    best_rho = current;
                    best_a = a;
                    best_e = e;
                }
            } else if (++stale >= 24) {
                step *= 0.5;
                stale = 0;
            }
        }
    }

    std::vector<double> rates = best_e;
    rates[0] = q.R;
    return {best_rho, Matrix(n, std::move(best_a)), LearningRates(std::move(rates))};
}

SpectralVariation oe_infty_check(const Matrix& a, const Matrix& b) {
    if (a.size() != b.size()) throw InvalidInput("matrix dimension mismatch");
    const int n = a.size();
    const auto spec_a = eigenvalues(a);
    const auto spec_b = eigenvalues(b);
    SpectralVariation out;
    for (const auto& mu : spec_b) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& lambda : spec_a) nearest = std::min(nearest, std::abs(lambda - mu));
        out.s_a_of_b = std::max(out.s_a_of_b, nearest);
    }
    const double diff = induced_norm(a - b, PNorm::Infinity);
    const double scale = induced_norm(a, PNorm::Infinity) + induced_norm(b, PNorm::Infinity);
    const double nd = n;
    out.bound = std::pow(nd, 1.0 / nd) * std::pow(diff, 1.0 / nd) * std::pow(scale, 1.0 - 1.0 / nd);
    out.holds = out.s_a_of_b <= out.bound + 1e-9;
    return out;
}

CertificateReport symmetric_overlearning_check(const Matrix& a, const LearningRates& e) {
    const int n = a.size();
    if (n != e.size()) throw InvalidInput("rate/matrix dimension mismatch");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(a(i, j) - a(j, i)) > kStochTol) throw NotApplicable("A is not symmetric");
    if (a.row_class() != RowClass::RowStochastic) throw InvalidInput("A must be row stochastic");
    if (e.max() < 2.0) throw NotApplicable("no agent has learning rate >= 2");

    const Matrix b = subtract_rates(a, e);
    double min_eig = std::numeric_limits<double>::infinity();
    for (const auto& lambda : eigenvalues(b)) min_eig = std::min(min_eig, lambda.real());
    // The eigenvalue shift guarantees min_eig <= -1; a solver result far above
    // that contradicts the hypothesis check and is a numerical failure.
    if (min_eig > -1.0 + 1e-6) throw NumericalFailure("eigenvalue witness inconsistent with the rate bound");

    CertificateReport report;
    report.verdict = Verdict::NotZeroConvergent;
    report.fired_rule = "symmetric_overlearning";
    report.witnesses["min_eigenvalue"] = min_eig;
    report.witnesses["rho"] = spectral_radius(b);
    return report;
}

}  // namespace avglearn
