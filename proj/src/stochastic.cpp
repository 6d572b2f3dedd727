#include "avglearn/stochastic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "avglearn/certify.hpp"

namespace avglearn {

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw InvalidInput("empirical distribution needs at least one sample");
    for (double x : sorted_)
        if (!std::isfinite(x)) throw InvalidInput("empirical distribution has non-finite samples");
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalDistribution::mean() const {
    double s = 0.0;
    for (double x : sorted_) s += x;
    return s / static_cast<double>(sorted_.size());
}

double empirical_w1_1d(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    const auto& xs = a.sorted();
    const auto& ys = b.sorted();
    const std::size_t m = xs.size();
    const std::size_t k = ys.size();
    // Integral of |Fa^{-1} - Fb^{-1}| over [0,1); segment boundaries are
    // compared exactly via cross-multiplication.
    std::size_t i = 0, j = 0;
    double q = 0.0, w1 = 0.0;
    while (i < m && j < k) {
        const unsigned long long lhs = static_cast<unsigned long long>(i + 1) * k;
        const unsigned long long rhs = static_cast<unsigned long long>(j + 1) * m;
        const double qn = lhs <= rhs ? static_cast<double>(i + 1) / static_cast<double>(m)
                                     : static_cast<double>(j + 1) / static_cast<double>(k);
        w1 += (qn - q) * std::abs(xs[i] - ys[j]);
        q = qn;
        if (lhs <= rhs) ++i;
        if (lhs >= rhs) ++j;
    }
    return w1;
}

SmallGainReport check_small_gain(const std::function<double(long)>& rho_at, long T,
                                 std::optional<RhoFamily> family) {
    if (T < 1) throw InvalidScenario("small-gain check needs a horizon of at least 1");
    SmallGainReport report;

    if (family == RhoFamily::Constant) {
        const double rho = rho_at(1);
        if (rho < 0.0) throw InvalidScenario("rho must be nonnegative");
        report.rho_max = rho;
        if (rho < 1.0) {
            const double lambda = rho / (1.0 - rho);
            report.lambda_certified = lambda;
            report.lambda_sup = lambda;
            report.holds = true;
            report.notes = "constant family certified analytically";
        } else {
            report.lambda_sup = std::numeric_limits<double>::infinity();
            report.holds = false;
            report.notes = "constant rho >= 1: geometric tail diverges";
        }
    } else {
        std::vector<double> lambda(T + 1, 0.0);
        for (long t = 1; t <= T; ++t) {
            const double rho = rho_at(t);
            if (rho < 0.0) throw InvalidScenario("rho must be nonnegative");
            report.rho_max = std::max(report.rho_max, rho);
            lambda[t] = rho * (1.0 + lambda[t - 1]);
            report.lambda_sup = std::max(report.lambda_sup, lambda[t]);
        }
        // Windowed evidence of boundedness: no materially new maximum appears
        // in the last quarter of the window.
        const long split = std::max<long>(1, (3 * T) / 4);
        double early = 0.0, late = 0.0;
        for (long t = 1; t <= split; ++t) early = std::max(early, lambda[t]);
        for (long t = split + 1; t <= T; ++t) late = std::max(late, lambda[t]);
        report.holds = late <= early * (1.0 + 1e-3) + 1e-9;
        report.notes = report.holds ? "windowed sup stable; finite-window evidence only"
                                    : "Lambda_t still growing at the window tail";
    }

    const double lambda = report.lambda_certified.value_or(report.lambda_sup);
    if (std::isfinite(lambda)) {
        report.k = 1.0 + lambda;
        report.c = lambda > 0.0 ? std::log(1.0 + 1.0 / lambda) : std::numeric_limits<double>::infinity();
    } else {
        report.k = std::numeric_limits<double>::infinity();
        report.c = 0.0;
    }
    return report;
}

namespace {

struct ChunkResult {
    std::vector<double> sum_err;  // per step
    std::vector<double> max_err;
};

constexpr int kChunk = 64;

}  // namespace

Ensemble simulate_noisy(const Scenario& s, int trials, std::uint64_t seed,
                        std::vector<long> checkpoints, int jobs) {
    s.validate();
    if (!s.noise) throw InvalidScenario("noisy simulation requires a noise spec");
    if (s.schedule.kind() == ScheduleKind::Fj)
        throw InvalidScenario("fj comparison mode is deterministic only");
    if (trials < 1) throw InvalidScenario("need at least one trial");
    if (jobs < 1) jobs = 1;
    const int n = s.n;
    const long T = s.horizon;

    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
    for (long c : checkpoints)
        if (c < 0 || c > T) throw InvalidInput("checkpoint beyond horizon");

    Ensemble ens;
    ens.n = n;
    ens.trials = trials;
    ens.horizon = T;
    ens.checkpoints = checkpoints;
    ens.mean_err.assign(T + 1, 0.0);
    ens.max_err.assign(T + 1, 0.0);
    ens.marginals.assign(checkpoints.size(),
                         std::vector<std::vector<double>>(n, std::vector<double>(trials, 0.0)));
    ens.final_errors.assign(trials, 0.0);
    const bool keep_curves =
        static_cast<long long>(trials) * static_cast<long long>(T + 1) <= (1ll << 23);
    if (keep_curves) ens.per_trial_errors.assign(trials, std::vector<double>(T + 1, 0.0));

    const CounterRng rng(seed);
    const int num_chunks = (trials + kChunk - 1) / kChunk;
    std::vector<ChunkResult> chunks(num_chunks);

    auto run_chunk = [&](int chunk) {
        ChunkResult& res = chunks[chunk];
        res.sum_err.assign(T + 1, 0.0);
        res.max_err.assign(T + 1, 0.0);
        const int lo = chunk * kChunk;
        const int hi = std::min(trials, lo + kChunk);
        Vec x(n), r(n);
        for (int trial = lo; trial < hi; ++trial) {
            x = s.x0;
            std::size_t next_cp = 0;
            for (long t = 0; t <= T; ++t) {
                double err = 0.0;
                for (int i = 0; i < n; ++i) err = std::max(err, std::abs(x[i] - s.sigma_bar[i]));
                res.sum_err[t] += err;
                res.max_err[t] = std::max(res.max_err[t], err);
                if (keep_curves) ens.per_trial_errors[trial][t] = err;
                if (t == T) ens.final_errors[trial] = err;
                while (next_cp < checkpoints.size() && checkpoints[next_cp] == t) {
                    for (int i = 0; i < n; ++i) ens.marginals[next_cp][i][trial] = x[i];
                    ++next_cp;
                }
                if (t == T) break;
                const SchedulePoint p = s.schedule.at(t);
                for (int i = 0; i < n; ++i)
                    r[i] = s.noise->value(rng, static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(t), i);
                x = step(p.a, p.e, s.sigma_bar, x, &r);
            }
        }
    };

    if (jobs == 1) {
        for (int c = 0; c < num_chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> workers;
        std::atomic<int> next{0};
        const int nw = std::min(jobs, num_chunks);
        workers.reserve(nw);
        for (int w = 0; w < nw; ++w)
            workers.emplace_back([&] {
                for (int c = next.fetch_add(1); c < num_chunks; c = next.fetch_add(1)) run_chunk(c);
            });
        for (auto& w : workers) w.join();
    }

    // Deterministic reduction in chunk order; results are independent of jobs.
    for (long t = 0; t <= T; ++t) {
        double sum = 0.0, mx = 0.0;
        for (const auto& c : chunks) {
            sum += c.sum_err[t];
            mx = std::max(mx, c.max_err[t]);
        }
        ens.mean_err[t] = sum / trials;
        ens.max_err[t] = mx;
    }
    return ens;
}

int stationary_truncation(double b, const Distribution& dist) {
    if (!(0.0 < b && b < 1.0)) throw InvalidInput("b must lie in (0,1)");
    const double scale = dist.scale();
    if (scale <= 0.0) return 1;
    return std::max(1, static_cast<int>(std::ceil(std::log(scale / 1e-12) / std::log(1.0 / b))) + 1);
}

EmpiricalDistribution stationary_law_sample(double b, const Distribution& dist, int truncation, int m,
                                            std::uint64_t seed) {
    if (!(0.0 < b && b < 1.0)) throw InvalidInput("b must lie in (0,1)");
    if (truncation < 1 || m < 1) throw InvalidInput("truncation and sample count must be positive");
    if (dist.scale() > 0.0 && std::pow(b, truncation) * dist.scale() >= 1e-12)
        throw InvalidInput("truncation too shallow for the requested tail bound");
    const CounterRng rng(seed);
    std::vector<double> samples(m, 0.0);
    for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        double bk = 1.0;
        for (int k = 0; k < truncation; ++k) {
            acc += bk * dist.sample(rng, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k), 0);
            bk *= b;
        }
        samples[i] = acc;
    }
    return EmpiricalDistribution(std::move(samples));
}

Scenario block_counterexample(double b1, double b2, int blocks, const Distribution& dist,
                              std::uint64_t seed) {
    if (!(0.0 < b1 && b1 < 1.0 && 0.0 < b2 && b2 < 1.0)) throw InvalidInput("coefficients must lie in (0,1)");
    const std::vector<long> lengths = alternating_block_lengths(b1, b2, blocks);
    std::vector<Matrix> a_seq;
    std::vector<LearningRates> e_seq;
    for (int m = 1; m <= blocks; ++m) {
        const double b = (m % 2 == 1) ? b1 : b2;
        for (long k = 0; k < lengths[m - 1]; ++k) {
            a_seq.push_back(Matrix{{1.0}});
            e_seq.push_back(LearningRates{1.0 - b});
        }
    }
    Scenario s;
    s.n = 1;
    s.sigma_bar = {0.0};
    s.x0 = {0.0};
    s.horizon = static_cast<long>(a_seq.size());
    s.schedule = ScheduleWindow::sequence(std::move(a_seq), std::move(e_seq));
    s.noise = NoiseSpec::block_alternating(b1, b2, blocks, dist);
    s.seed = seed;
    return s;
}

TwoStepGains two_step_gains(const ScheduleWindow& w) {
    const long T = w.horizon();
    if (T < 1) throw InvalidScenario("empty schedule window");
    const int n = w.dim();
    std::vector<MixedNormStep> steps(T);
    for (long t = 0; t < T; ++t) {
        const SchedulePoint p = w.at(t);
        steps[t] = mixed_norm_step(p.a, p.e);
        if (!steps[t].admissible) {
            std::ostringstream os;
            os << "step " << t << " violates tau' < tau";
            throw InvalidScenario(os.str());
        }
    }
    TwoStepGains gains;
    for (long k = 0; 2 * k + 1 < T; ++k) {
        const double gain = (n - steps[2 * k].tau) / (n - steps[2 * k + 1].tau_prime);
        const double direct = induced_norm(w.b_at(2 * k + 1) * w.b_at(2 * k), PNorm::Infinity);
        if (direct > gain + 1e-9) throw NumericalFailure("two-step gain bound violated");
        gains.rho0.push_back(gain);
    }
    for (long k = 0; 2 * k + 2 < T; ++k)
        gains.rho1.push_back((n - steps[2 * k + 1].tau) / (n - steps[2 * k + 2].tau_prime));
    return gains;
}

std::vector<double> w1_time_profile(const Ensemble& ensemble, int coordinate,
                                    const std::vector<long>& checkpoints) {
    if (ensemble.trials < 1000) throw InvalidInput("time profile needs at least 1000 trials");
    if (coordinate < 0 || coordinate >= ensemble.n) throw InvalidInput("coordinate out of range");
    if (checkpoints.size() < 2) throw InvalidInput("need at least two checkpoints");

    auto marginal_at = [&](long t) -> const std::vector<double>& {
        for (std::size_t c = 0; c < ensemble.checkpoints.size(); ++c)
            if (ensemble.checkpoints[c] == t) return ensemble.marginals[c][coordinate];
        throw InvalidInput("checkpoint beyond horizon or not recorded");
    };

    std::vector<double> profile;
    profile.reserve(checkpoints.size() - 1);
    for (std::size_t k = 0; k + 1 < checkpoints.size(); ++k) {
        EmpiricalDistribution a(marginal_at(checkpoints[k]));
        EmpiricalDistribution b(marginal_at(checkpoints[k + 1]));
        profile.push_back(empirical_w1_1d(a, b));
    }
    return profile;
}

}  // namespace avglearn
