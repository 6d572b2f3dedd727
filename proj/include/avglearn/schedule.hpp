#pragma once

#include <vector>

#include "avglearn/matrix.hpp"

namespace avglearn {

enum class ScheduleKind { Constant, Sequence, Example34, HarmonicSplit, TailLog, Fj };

struct SchedulePoint {
    Matrix a;
    LearningRates e;
};

// Time-indexed (A_t, E_t) source over 0..horizon-1, either generated from a
// named family or backed by explicit sequences. Every generated A_t is
// validated row stochastic.
class ScheduleWindow {
  public:
    static ScheduleWindow constant(Matrix a, LearningRates e, long horizon);
    static ScheduleWindow sequence(std::vector<Matrix> a, std::vector<LearningRates> e);
    // Two agents, first-row self-weight a_t = (t+3)/(3(t+2)), second row (1/2, 1/2),
    // rates (0, 1/2).
    static ScheduleWindow example34(long horizon);
    // Even t: cyclic shift with zero diagonal and zero rates; odd t: symmetric
    // mixing I/2 + J/(2n) with rates 1/(2t-1) on every agent.
    static ScheduleWindow harmonic_split(int n, long horizon);
    // Zero rates through step T, then c/((t+1) ln(t+2)) on every agent over a
    // fixed mixing matrix.
    static ScheduleWindow tail_log(long horizon, long T, double c);
    // Friedkin-Johnsen comparison mode: holds (A, lambda); not a consensus
    // schedule, stepping is handled by fj_simulate.
    static ScheduleWindow fj(Matrix a, LearningRates lambda, long horizon);

    SchedulePoint at(long t) const;
    Matrix b_at(long t) const;  // A_t - diag(E_t)

    ScheduleKind kind() const { return kind_; }
    long horizon() const { return horizon_; }
    int dim() const { return dim_; }

    long tail_log_start() const { return tail_T_; }
    double tail_log_c() const { return tail_c_; }
    const Matrix& constant_a() const { return a_seq_[0]; }
    const LearningRates& constant_e() const { return e_seq_[0]; }

  private:
    ScheduleKind kind_ = ScheduleKind::Constant;
    long horizon_ = 0;
    int dim_ = 0;
    std::vector<Matrix> a_seq_;
    std::vector<LearningRates> e_seq_;
    long tail_T_ = 0;
    double tail_c_ = 0.0;
};

}  // namespace avglearn
