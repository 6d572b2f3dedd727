#include "avglearn/schedule.hpp"

#include <cmath>
#include <string>

namespace avglearn {

namespace {

void require_stochastic(const Matrix& a, long t) {
    if (a.row_class() != RowClass::RowStochastic)
        throw InvalidScenario("schedule matrix at step " + std::to_string(t) + " is not row stochastic");
}

}  // namespace

ScheduleWindow ScheduleWindow::constant(Matrix a, LearningRates e, long horizon) {
    if (horizon < 1) throw InvalidScenario("horizon must be positive");
    if (a.size() != e.size()) throw InvalidScenario("rate/matrix dimension mismatch");
    require_stochastic(a, 0);
    ScheduleWindow w;
    w.kind_ = ScheduleKind::Constant;
    w.horizon_ = horizon;
    w.dim_ = a.size();
    w.a_seq_.push_back(std::move(a));
    w.e_seq_.push_back(std::move(e));
    return w;
}

ScheduleWindow ScheduleWindow::sequence(std::vector<Matrix> a, std::vector<LearningRates> e) {
    if (a.empty() || a.size() != e.size()) throw InvalidScenario("sequence schedule needs matching nonempty A/E lists");
    const int n = a[0].size();
    for (std::size_t t = 0; t < a.size(); ++t) {
        if (a[t].size() != n || e[t].size() != n) throw InvalidScenario("sequence schedule dimension mismatch");
        require_stochastic(a[t], static_cast<long>(t));
    }
    ScheduleWindow w;
    w.kind_ = ScheduleKind::Sequence;
    w.horizon_ = static_cast<long>(a.size());
    w.dim_ = n;
    w.a_seq_ = std::move(a);
    w.e_seq_ = std::move(e);
    return w;
}

ScheduleWindow ScheduleWindow::example34(long horizon) {
    if (horizon < 1) throw InvalidScenario("horizon must be positive");
    ScheduleWindow w;
    w.kind_ = ScheduleKind::Example34;
    w.horizon_ = horizon;
    w.dim_ = 2;
    return w;
}

ScheduleWindow ScheduleWindow::harmonic_split(int n, long horizon) {
    if (horizon < 1) throw InvalidScenario("horizon must be positive");
    if (n < 2) throw InvalidScenario("harmonic_split needs n >= 2");
    ScheduleWindow w;
    w.kind_ = ScheduleKind::HarmonicSplit;
    w.horizon_ = horizon;
    w.dim_ = n;
    return w;
}

ScheduleWindow ScheduleWindow::tail_log(long horizon, long T, double c) {
    if (horizon < 1) throw InvalidScenario("horizon must be positive");
    if (T < 0 || c <= 0.0) throw InvalidScenario("tail_log needs T >= 0 and c > 0");
    ScheduleWindow w;
    w.kind_ = ScheduleKind::TailLog;
    w.horizon_ = horizon;
    w.dim_ = 2;
    w.tail_T_ = T;
    w.tail_c_ = c;
    return w;
}

ScheduleWindow ScheduleWindow::fj(Matrix a, LearningRates lambda, long horizon) {
    if (horizon < 1) throw InvalidScenario("horizon must be positive");
    if (a.size() != lambda.size()) throw InvalidScenario("rate/matrix dimension mismatch");
    require_stochastic(a, 0);
    for (int i = 0; i < lambda.size(); ++i)
        if (lambda(i) > 1.0) throw InvalidScenario("fj susceptibilities must lie in [0,1]");
    ScheduleWindow w;
    w.kind_ = ScheduleKind::Fj;
    w.horizon_ = horizon;
    w.dim_ = a.size();
    w.a_seq_.push_back(std::move(a));
    w.e_seq_.push_back(std::move(lambda));
    return w;
}

SchedulePoint ScheduleWindow::at(long t) const {
    if (t < 0 || t >= horizon_) throw InvalidScenario("schedule queried outside window");
    switch (kind_) {
        case ScheduleKind::Constant:
        case ScheduleKind::Fj:
            return {a_seq_[0], e_seq_[0]};
        case ScheduleKind::Sequence:
            return {a_seq_[static_cast<std::size_t>(t)], e_seq_[static_cast<std::size_t>(t)]};
        case ScheduleKind::Example34: {
            const double at = static_cast<double>(t + 3) / (3.0 * static_cast<double>(t + 2));
            Matrix a{{at, 1.0 - at}, {0.5, 0.5}};
            require_stochastic(a, t);
            return {std::move(a), LearningRates{0.0, 0.5}};
        }
        case ScheduleKind::HarmonicSplit: {
            const int n = dim_;
            if (t % 2 == 0) {
                Matrix a(n);
                for (int i = 0; i < n; ++i) a.set(i, (i + 1) % n, 1.0);
                require_stochastic(a, t);
                return {std::move(a), LearningRates(n)};
            }
            Matrix a(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) a.set(i, j, (i == j ? 0.5 : 0.0) + 0.5 / n);
            require_stochastic(a, t);
            const double rate = 1.0 / static_cast<double>(2 * t - 1);
            return {std::move(a), LearningRates(std::vector<double>(n, rate))};
        }
        case ScheduleKind::TailLog: {
            Matrix a{{0.75, 0.25}, {0.25, 0.75}};
            require_stochastic(a, t);
            if (t <= tail_T_) return {std::move(a), LearningRates(2)};
            const double rate = tail_c_ / (static_cast<double>(t + 1) * std::log(static_cast<double>(t + 2)));
            return {std::move(a), LearningRates{rate, rate}};
        }
    }
    throw InvalidScenario("unknown schedule kind");
}

Matrix ScheduleWindow::b_at(long t) const {
    const SchedulePoint p = at(t);
    return subtract_rates(p.a, p.e);
}

}  // namespace avglearn
