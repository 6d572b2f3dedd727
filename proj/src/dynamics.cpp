#include "avglearn/dynamics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "avglearn/certify.hpp"

namespace avglearn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec sub(const Vec& a, const Vec& b) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

}  // namespace

bool Scenario::sigma_is_consensus() const {
    for (std::size_t i = 1; i < sigma_bar.size(); ++i)
        if (sigma_bar[i] != sigma_bar[0]) return false;
    return true;
}

void Scenario::validate() const {
    if (n < 1) throw InvalidScenario("dimension must be positive");
    if (static_cast<int>(sigma_bar.size()) != n || static_cast<int>(x0.size()) != n)
        throw InvalidScenario("sigma_bar/x0 dimension mismatch");
    if (schedule.dim() != n) throw InvalidScenario("schedule dimension mismatch");
    if (horizon < 1) throw InvalidScenario("horizon must be positive");
    if (tol <= 0.0) throw InvalidScenario("tolerance must be positive");
    if (horizon > schedule.horizon()) throw InvalidScenario("horizon exceeds schedule window");
    for (double v : sigma_bar)
        if (!std::isfinite(v)) throw InvalidScenario("sigma_bar has non-finite entries");
    for (double v : x0)
        if (!std::isfinite(v)) throw InvalidScenario("x0 has non-finite entries");
    if (noise && !noise->is_zero() && !sigma_is_consensus())
        throw InvalidScenario("noisy runs require a consensus sigma_bar");
    if (noise && !noise->per_coordinate_independent)
        throw InvalidScenario("dependent noise coordinates are unsupported");
    if (schedule.kind() == ScheduleKind::Fj) return;  // fj mode has no fixed-point requirement
    // General sigma_bar is accepted only when every queried A_t fixes it.
    if (!sigma_is_consensus()) {
        const long probes = std::min<long>(horizon, 64);
        for (long t = 0; t < probes; ++t) {
            const Vec image = schedule.at(t).a.apply(sigma_bar);
            if (inf_norm(sub(image, sigma_bar)) >= 1e-12)
                throw InvalidScenario("sigma_bar is not fixed by A_t at step " + std::to_string(t));
        }
    }
}

Vec step(const Matrix& a, const LearningRates& e, const Vec& sigma_bar, const Vec& x, const Vec* r) {
    const int n = a.size();
    if (e.size() != n || static_cast<int>(sigma_bar.size()) != n || static_cast<int>(x.size()) != n ||
        (r && static_cast<int>(r->size()) != n))
        throw InvalidScenario("step dimension mismatch");
    Vec out = a.apply(x);
    for (int i = 0; i < n; ++i) {
        out[i] += e(i) * (sigma_bar[i] - x[i]);
        if (r) out[i] += (*r)[i];
    }
    return out;
}

double vanishing_bound(const ScheduleWindow& w, long T1, long t) {
    if (T1 < 0 || t < T1 || t > w.horizon()) throw InvalidScenario("bound window out of range");
    double product = 1.0;
    for (long k = T1; k < t; ++k) product *= 1.0 - w.at(k).e.min();
    return product;
}

namespace {

// Smallest T1 from which 0 <= E_t(i) <= A_t(i,i) holds through the window; -1 if none.
long find_t1(const ScheduleWindow& w, long horizon) {
    long t1 = horizon;
    for (long t = horizon - 1; t >= 0; --t) {
        const SchedulePoint p = w.at(t);
        bool ok = true;
        for (int i = 0; i < w.dim() && ok; ++i) ok = p.e(i) <= p.a(i, i) + kStochTol;
        if (!ok) break;
        t1 = t;
    }
    return t1 < horizon ? t1 : -1;
}

void attach_bounds(const Scenario& s, Trajectory& traj) {
    const long T = s.horizon;
    const ScheduleKind kind = s.schedule.kind();
    traj.bounds.assign(T + 1, kNaN);

    if (kind == ScheduleKind::Example34 || kind == ScheduleKind::Sequence) {
        // Two-step mixed-norm bound when every step is admissible.
        std::vector<MixedNormStep> steps(T);
        bool ok = true;
        for (long t = 0; t < T && ok; ++t) {
            const SchedulePoint p = s.schedule.at(t);
            steps[t] = mixed_norm_step(p.a, p.e);
            ok = steps[t].admissible;
        }
        if (ok) {
            const int n = s.n;
            traj.bounds[0] = traj.errors[0];
            if (T >= 1) traj.bounds[1] = traj.errors[1];
            for (long t = 2; t <= T; ++t) {
                const long f = t % 2;
                double product = 1.0;
                for (long u = f; u + 1 < t; u += 2)
                    product *= (n - steps[u].tau) / (n - steps[u + 1].tau_prime);
                traj.bounds[t] = product * traj.errors[f];
            }
            return;
        }
    }
    if (kind == ScheduleKind::HarmonicSplit || kind == ScheduleKind::TailLog ||
        kind == ScheduleKind::Sequence || kind == ScheduleKind::Constant) {
        const long t1 = find_t1(s.schedule, T);
        if (t1 < 0) return;
        double product = 1.0;
        traj.bounds[t1] = traj.errors[t1];
        for (long t = t1; t < T; ++t) {
            product *= 1.0 - s.schedule.at(t).e.min();
            traj.bounds[t + 1] = product * traj.errors[t1];
        }
    }
}

}  // namespace

Trajectory simulate(const Scenario& s) {
    s.validate();
    if (s.noise && !s.noise->is_zero())
        throw InvalidScenario("deterministic simulation requires a zero noise spec");
    if (s.schedule.kind() == ScheduleKind::Fj)
        return fj_simulate(s.schedule.constant_e(), s.schedule.constant_a(), s.x0, s.horizon);

    Trajectory traj;
    traj.states.reserve(s.horizon + 1);
    traj.errors.reserve(s.horizon + 1);
    traj.states.push_back(s.x0);
    traj.errors.push_back(inf_norm(sub(s.x0, s.sigma_bar)));
    const bool consensus = s.sigma_is_consensus();
    for (long t = 0; t < s.horizon; ++t) {
        const SchedulePoint p = s.schedule.at(t);
        if (!consensus && inf_norm(sub(p.a.apply(s.sigma_bar), s.sigma_bar)) >= 1e-12)
            throw InvalidScenario("sigma_bar is not fixed by A_t at step " + std::to_string(t));
        traj.states.push_back(step(p.a, p.e, s.sigma_bar, traj.states.back()));
        traj.errors.push_back(inf_norm(sub(traj.states.back(), s.sigma_bar)));
    }
    for (long t = 0; t <= s.horizon; ++t) {
        if (traj.errors[t] < s.tol) {
            traj.converged_at = t;
            break;
        }
    }
    attach_bounds(s, traj);
    return traj;
}

bool Trajectory::has_bound(long t) const {
    return t >= 0 && t < static_cast<long>(bounds.size()) && !std::isnan(bounds[t]);
}

Trajectory fj_simulate(const LearningRates& lambda, const Matrix& a, const Vec& x0, long T) {
    const int n = a.size();
    if (lambda.size() != n || static_cast<int>(x0.size()) != n) throw InvalidScenario("dimension mismatch");
    if (a.row_class() != RowClass::RowStochastic) throw InvalidScenario("A must be row stochastic");
    for (int i = 0; i < n; ++i)
        if (lambda(i) > 1.0) throw InvalidScenario("susceptibilities must lie in [0,1]");
    if (T < 0) throw InvalidScenario("horizon must be nonnegative");

    Trajectory traj;
    traj.states.push_back(x0);
    Vec x = x0;
    for (long t = 0; t < T; ++t) {
        const Vec ax = a.apply(x);
        for (int i = 0; i < n; ++i) x[i] = lambda(i) * ax[i] + (1.0 - lambda(i)) * x0[i];
        traj.states.push_back(x);
    }
    // Errors tracked against the most recent state's displacement per step.
    traj.errors.resize(traj.states.size(), 0.0);
    for (std::size_t t = 1; t < traj.states.size(); ++t)
        traj.errors[t] = inf_norm(sub(traj.states[t], traj.states[t - 1]));
    traj.bounds.assign(traj.states.size(), kNaN);
    return traj;
}

Vec fj_equilibrium(const LearningRates& lambda, const Matrix& a, const Vec& x0) {
    const int n = a.size();
    if (lambda.size() != n || static_cast<int>(x0.size()) != n) throw InvalidScenario("dimension mismatch");
    for (int i = 0; i < n; ++i)
        if (lambda(i) > 1.0) throw InvalidScenario("susceptibilities must lie in [0,1]");

    Eigen::MatrixXd system(n, n);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) system(i, j) = (i == j ? 1.0 : 0.0) - lambda(i) * a(i, j);
        rhs(i) = (1.0 - lambda(i)) * x0[i];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    if (!lu.isInvertible()) throw SingularEquilibrium("I - diag(lambda) A is singular");
    const Eigen::VectorXd sol = lu.solve(rhs);
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = sol(i);
    return out;
}

}  // namespace avglearn
