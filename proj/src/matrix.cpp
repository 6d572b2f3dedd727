#include "avglearn/matrix.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>

namespace avglearn {

double inf_norm(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double one_norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

Matrix::Matrix(int n) : n_(n), entries_(static_cast<std::size_t>(n) * n, 0.0) {
    if (n <= 0) throw InvalidMatrix("matrix dimension must be positive");
}

Matrix::Matrix(int n, std::vector<double> entries) : n_(n), entries_(std::move(entries)) {
    if (n <= 0) throw InvalidMatrix("matrix dimension must be positive");
    if (entries_.size() != static_cast<std::size_t>(n) * n)
        throw InvalidMatrix("entry count does not match dimension");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    n_ = static_cast<int>(rows.size());
    if (n_ == 0) throw InvalidMatrix("matrix dimension must be positive");
    entries_.reserve(static_cast<std::size_t>(n_) * n_);
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != n_) throw InvalidMatrix("matrix rows must have equal length");
        entries_.insert(entries_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(int n) {
    Matrix m(n);
    for (int i = 0; i < n; ++i) m.entries_[static_cast<std::size_t>(i) * n + i] = 1.0;
    return m;
}

Matrix Matrix::zero(int n) { return Matrix(n); }

void Matrix::set(int i, int j, double v) {
    entries_[static_cast<std::size_t>(i) * n_ + j] = v;
    class_valid_ = false;
}

double Matrix::row_sum(int i) const {
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += (*this)(i, j);
    return s;
}

double Matrix::trace() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += (*this)(i, i);
    return s;
}

bool Matrix::all_finite() const {
    return std::all_of(entries_.begin(), entries_.end(), [](double x) { return std::isfinite(x); });
}

RowClass Matrix::row_class(double stoch_tol) const {
    if (!class_valid_ || class_tol_ != stoch_tol) {
        class_ = classify_rows(*this, stoch_tol);
        class_tol_ = stoch_tol;
        class_valid_ = true;
    }
    return class_;
}

Vec Matrix::apply(const Vec& v) const {
    if (static_cast<int>(v.size()) != n_) throw InvalidInput("vector/matrix dimension mismatch");
    Vec out(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        double s = 0.0;
        for (int j = 0; j < n_; ++j) s += (*this)(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.n_ != b.n_) throw InvalidInput("matrix dimension mismatch");
    const int n = a.n_;
    Matrix c(n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < n; ++j) c.entries_[static_cast<std::size_t>(i) * n + j] += aik * b(k, j);
        }
    }
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.n_ != b.n_) throw InvalidInput("matrix dimension mismatch");
    Matrix c = a;
    for (std::size_t k = 0; k < c.entries_.size(); ++k) c.entries_[k] -= b.entries_[k];
    c.class_valid_ = false;
    return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.n_ != b.n_) throw InvalidInput("matrix dimension mismatch");
    Matrix c = a;
    for (std::size_t k = 0; k < c.entries_.size(); ++k) c.entries_[k] += b.entries_[k];
    c.class_valid_ = false;
    return c;
}

LearningRates::LearningRates(std::vector<double> rates) : rates_(std::move(rates)) {
    for (double r : rates_) {
        if (!std::isfinite(r) || r < 0.0) throw InvalidInput("learning rates must be finite and nonnegative");
    }
}

void LearningRates::set(int i, double v) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidInput("learning rates must be finite and nonnegative");
    rates_[i] = v;
}

double LearningRates::max() const {
    double m = 0.0;
    for (double r : rates_) m = std::max(m, r);
    return m;
}

double LearningRates::min() const {
    double m = std::numeric_limits<double>::infinity();
    for (double r : rates_) m = std::min(m, r);
    return rates_.empty() ? 0.0 : m;
}

Matrix subtract_rates(const Matrix& a, const LearningRates& e) {
    if (a.size() != e.size()) throw InvalidInput("rate/matrix dimension mismatch");
    Matrix b = a;
    for (int i = 0; i < a.size(); ++i) b.set(i, i, a(i, i) - e(i));
    return b;
}

RowClass classify_rows(const Matrix& m, double stoch_tol) {
    if (stoch_tol <= 0.0) throw InvalidInput("stoch_tol must be positive");
    if (!m.all_finite()) throw InvalidMatrix("matrix has non-finite entries");
    const int n = m.size();
    bool nonneg = true;
    for (int i = 0; i < n && nonneg; ++i)
        for (int j = 0; j < n; ++j)
            if (m(i, j) < -stoch_tol) {
                nonneg = false;
                break;
            }
    if (!nonneg) return RowClass::General;

    bool any_deficient = false;
    for (int i = 0; i < n; ++i) {
        const double s = m.row_sum(i);
        if (s > 1.0 + stoch_tol) return RowClass::General;
        if (s < 1.0 - stoch_tol) any_deficient = true;
    }
    return any_deficient ? RowClass::ProperSubstochastic : RowClass::RowStochastic;
}

Decomposition decompose_substochastic(const Matrix& b, double stoch_tol) {
    const RowClass rc = b.row_class(stoch_tol);
    if (rc == RowClass::General) throw NotSubstochastic("matrix is not row substochastic");
    const int n = b.size();
    Matrix a = b;
    std::vector<double> rates(n, 0.0);
    constexpr double kInf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double bii = b(i, i);
        const double deficiency = 1.0 - b.row_sum(i);
        if (std::abs(deficiency) <= stoch_tol) continue;
        // Pick (A(i,i), E(i)) near (B(i,i)+d, d) so that A(i,i) - E(i)
        // reproduces B(i,i) bit-for-bit; ulp nudges keep row sums within tol.
        double aii = bii + deficiency;
        double e = aii - bii;
        if (aii - e != bii) {
            const double e_candidates[] = {e,
                                           deficiency,
                                           std::nextafter(e, kInf),
                                           std::nextafter(e, -kInf),
                                           std::nextafter(std::nextafter(e, kInf), kInf),
                                           std::nextafter(std::nextafter(e, -kInf), -kInf)};
            bool fixed = false;
            for (double ec : e_candidates) {
                const double base = bii + ec;
                for (double ac : {base, std::nextafter(base, kInf), std::nextafter(base, -kInf)}) {
                    if (ac - ec == bii) {
                        aii = ac;
                        e = ec;
                        fixed = true;
                        break;
                    }
                }
                if (fixed) break;
            }
        }
        a.set(i, i, aii);
        rates[i] = std::max(0.0, e);
    }
    return {std::move(a), LearningRates(std::move(rates))};
}

double induced_norm(const Matrix& m, PNorm p) {
    if (!m.all_finite()) throw InvalidMatrix("matrix has non-finite entries");
    const int n = m.size();
    double best = 0.0;
    if (p == PNorm::Infinity) {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += std::abs(m(i, j));
            best = std::max(best, s);
        }
    } else {
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += std::abs(m(i, j));
            best = std::max(best, s);
        }
    }
    return best;
}

double mixed_norm_1_to_inf(const Matrix& m) {
    double best = 0.0;
    for (double x : m.entries()) best = std::max(best, std::abs(x));
    return best;
}

double mixed_norm_inf_to_1(const Matrix& m, int enumeration_cap) {
    const int n = m.size();
    if (n > enumeration_cap)
        throw DimensionTooLarge("exact infinity->1 norm enumerates 2^(n-1) sign vectors; dimension above cap");
    // w = M v, starting from v = all ones; Gray-code flips keep the update O(n).
    Vec w(n);
    for (int i = 0; i < n; ++i) w[i] = m.row_sum(i);
    std::vector<int> sign(n, 1);
    double best = one_norm(w);
    const std::uint64_t total = n >= 1 ? (1ull << (n - 1)) : 1ull;
    for (std::uint64_t k = 1; k < total; ++k) {
        const int j = 1 + std::countr_zero(k);  // v[0] stays +1
        const double step = -2.0 * sign[j];
        for (int i = 0; i < n; ++i) w[i] += step * m(i, j);
        sign[j] = -sign[j];
        best = std::max(best, one_norm(w));
    }
    return best;
}

std::vector<std::complex<double>> eigenvalues(const Matrix& m) {
    if (!m.all_finite()) throw InvalidMatrix("matrix has non-finite entries");
    const int n = m.size();
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = m(i, j);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw NumericalFailure("eigenvalue iteration did not converge");
    std::vector<std::complex<double>> out(n);
    for (int i = 0; i < n; ++i) out[i] = solver.eigenvalues()(i);
    return out;
}

double spectral_radius(const Matrix& m, double tol) {
    if (tol <= 0.0) throw InvalidInput("tol must be positive");
    double rho = 0.0;
    for (const auto& lambda : eigenvalues(m)) rho = std::max(rho, std::abs(lambda));
    return rho;
}

namespace {

double matrix_inf_norm_diff(const Matrix& a, const Matrix& b) {
    double best = 0.0;
    const int n = a.size();
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += std::abs(a(i, j) - b(i, j));
        best = std::max(best, s);
    }
    return best;
}

double max_abs_entry(const Matrix& m) {
    double best = 0.0;
    for (double x : m.entries()) best = std::max(best, std::abs(x));
    return best;
}

// Probe the near-limit power by repeated squaring. For rho < 1 the squared
// sequence collapses to zero doubly fast, which separates genuinely zero
// limits from small nonzero projections. The squared matrix itself is NOT a
// usable limit: rounding along the eigenvalue-1 eigenspace doubles per
// squaring, so only the zero/nonzero verdict is read off.
bool squaring_probe_is_zero(Matrix p, double tol, double divergence_cap) {
    for (int j = 0; j < 40; ++j) {
        if (max_abs_entry(p) < tol) return true;
        Matrix q = p * p;
        if (!q.all_finite() || max_abs_entry(q) > divergence_cap) break;
        if (matrix_inf_norm_diff(q, p) == 0.0) break;
        p = std::move(q);
    }
    return max_abs_entry(p) < tol;
}

// Sequential polish once the successive-difference test has fired: keep
// multiplying while the residual still shrinks, stopping at the rounding
// floor. Right-multiplication preserves row structure to machine precision,
// unlike squaring.
Matrix polish_limit(Matrix cur, const Matrix& m, double last_diff) {
    double best = last_diff;
    for (int extra = 0; extra < 4000; ++extra) {
        Matrix next = cur * m;
        const double diff = matrix_inf_norm_diff(next, cur);
        cur = std::move(next);
        if (diff <= 1e-15) break;
        if (diff >= best) break;
        best = diff;
    }
    return cur;
}

}  // namespace

PowerLimitResult matrix_power_limit(const Matrix& m, double tol, long max_iter) {
    if (tol <= 0.0) throw InvalidInput("tol must be positive");
    if (max_iter < 1) throw InvalidInput("max_iter must be at least 1");
    const int n = m.size();
    const double divergence_cap = 1.0 / tol;
    constexpr int kWindow = 8;

    Matrix p = m;
    std::deque<Matrix> window;
    for (long k = 1; k <= max_iter; ++k) {
        if (max_abs_entry(p) > divergence_cap) return {PowerLimitKind::Diverging, std::nullopt, k, 0};
        if (max_abs_entry(p) < tol) return {PowerLimitKind::ZeroConvergent, Matrix::zero(n), k, 0};

        Matrix next = p * m;
        if (!next.all_finite()) return {PowerLimitKind::Diverging, std::nullopt, k, 0};
        const double diff = matrix_inf_norm_diff(next, p);
        if (diff < tol) {
            if (squaring_probe_is_zero(next, tol, divergence_cap))
                return {PowerLimitKind::ZeroConvergent, Matrix::zero(n), k, 0};
            return {PowerLimitKind::Converged, polish_limit(std::move(next), m, diff), k, 0};
        }
        // Cycle detection against the stored window (period 2..kWindow).
        // Requiring a macroscopic successive difference keeps slowly decaying
        // spirals, whose small iterates can match across the window, from
        // being reported as oscillation.
        if (diff > std::sqrt(tol)) {
            int period = 2;
            for (auto it = window.rbegin(); it != window.rend(); ++it, ++period) {
                if (matrix_inf_norm_diff(next, *it) < tol)
                    return {PowerLimitKind::Oscillating, std::nullopt, k, period};
            }
        }
        window.push_back(p);
        if (static_cast<int>(window.size()) > kWindow - 1) window.pop_front();
        p = std::move(next);
    }
    return {PowerLimitKind::Inconclusive, std::nullopt, max_iter, 0};
}

double learning_mass(const Matrix& a, const LearningRates& e) {
    if (a.size() != e.size()) throw InvalidInput("rate/matrix dimension mismatch");
    double mass = a.trace();
    for (int i = 0; i < a.size(); ++i) mass -= std::abs(a(i, i) - e(i));
    return mass;
}

}  // namespace avglearn
