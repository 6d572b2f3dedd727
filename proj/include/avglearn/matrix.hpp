#pragma once

#include <complex>
#include <initializer_list>
#include <optional>
#include <vector>

#include "avglearn/errors.hpp"

namespace avglearn {

// Default tolerance for row-sum / nonnegativity classification.
inline constexpr double kStochTol = 1e-12;
// Default tolerance for spectral-radius queries.
inline constexpr double kSpectralTol = 1e-9;

using Vec = std::vector<double>;

double inf_norm(const Vec& v);
double one_norm(const Vec& v);

enum class RowClass { RowStochastic, ProperSubstochastic, General };

// Dense real square matrix, row-major, with cached row classification.
class Matrix {
  public:
    Matrix() = default;
    explicit Matrix(int n);
    Matrix(int n, std::vector<double> entries);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(int n);
    static Matrix zero(int n);

    int size() const { return n_; }
    double operator()(int i, int j) const { return entries_[static_cast<std::size_t>(i) * n_ + j]; }
    void set(int i, int j, double v);
    const std::vector<double>& entries() const { return entries_; }

    double row_sum(int i) const;
    double trace() const;
    bool all_finite() const;

    // Classification is computed on first use and cached for the given tolerance.
    RowClass row_class(double stoch_tol = kStochTol) const;

    Vec apply(const Vec& v) const;

    friend Matrix operator*(const Matrix& a, const Matrix& b);
    friend Matrix operator-(const Matrix& a, const Matrix& b);
    friend Matrix operator+(const Matrix& a, const Matrix& b);
    bool operator==(const Matrix& o) const { return n_ == o.n_ && entries_ == o.entries_; }

  private:
    int n_ = 0;
    std::vector<double> entries_;
    mutable bool class_valid_ = false;
    mutable double class_tol_ = 0.0;
    mutable RowClass class_ = RowClass::General;
};

// Diagonal of the learning-rate matrix; all entries nonnegative.
class LearningRates {
  public:
    LearningRates() = default;
    explicit LearningRates(int n) : rates_(n, 0.0) {}
    explicit LearningRates(std::vector<double> rates);
    LearningRates(std::initializer_list<double> rates) : LearningRates(std::vector<double>(rates)) {}

    int size() const { return static_cast<int>(rates_.size()); }
    double operator()(int i) const { return rates_[i]; }
    void set(int i, double v);
    const std::vector<double>& values() const { return rates_; }
    double max() const;
    double min() const;

  private:
    std::vector<double> rates_;
};

// A - diag(E).
Matrix subtract_rates(const Matrix& a, const LearningRates& e);

RowClass classify_rows(const Matrix& m, double stoch_tol = kStochTol);

struct Decomposition {
    Matrix a;
    LearningRates e;
};

// Unique split B = A - diag(E) with A row stochastic, E >= 0.
// The returned pair reproduces B bit-for-bit under subtract_rates for inputs
// of sane magnitude (see decompose fixup in the implementation).
Decomposition decompose_substochastic(const Matrix& b, double stoch_tol = kStochTol);

enum class PNorm { One, Infinity };

double induced_norm(const Matrix& m, PNorm p);

// max_{i,j} |M(i,j)|
double mixed_norm_1_to_inf(const Matrix& m);

// Exact max over sign vectors v in {+-1}^n of ||Mv||_1.
// Enumerates 2^{n-1} vectors (v(1) fixed to +1 by symmetry); refuses above the cap.
double mixed_norm_inf_to_1(const Matrix& m, int enumeration_cap = 22);

// All eigenvalues of a general real square matrix.
std::vector<std::complex<double>> eigenvalues(const Matrix& m);

double spectral_radius(const Matrix& m, double tol = kSpectralTol);

enum class PowerLimitKind { Converged, ZeroConvergent, Oscillating, Diverging, Inconclusive };

struct PowerLimitResult {
    PowerLimitKind kind = PowerLimitKind::Inconclusive;
    std::optional<Matrix> limit;  // present for Converged and ZeroConvergent
    long iterations = 0;
    int cycle_length = 0;  // set when Oscillating
};

PowerLimitResult matrix_power_limit(const Matrix& m, double tol = 1e-9, long max_iter = 100000);

// tr(A) - sum_i |A(i,i) - E(i)|.
double learning_mass(const Matrix& a, const LearningRates& e);

}  // namespace avglearn
