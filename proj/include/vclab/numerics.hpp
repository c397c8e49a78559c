#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace vclab {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Per-trial random stream. Identical (master_seed, stream_index) pairs
/// produce identical sequences; the pair is hashed through std::seed_seq so
/// neighbouring indices give decorrelated engines.
class Rng {
public:
    Rng(std::uint64_t master_seed, std::uint64_t stream_index);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    // Uniform integer in [0, bound).
    std::size_t below(std::size_t bound);

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Small dense row-major matrix. Sizes in this project are k x k and k x n
/// with k, n in the tens at most.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t size);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> data() const { return data_; }

    Matrix operator*(const Matrix& rhs) const;
    Matrix transposed() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);

// Largest absolute entry of a - b; matrices must have equal shape.
double max_abs_diff(const Matrix& a, const Matrix& b);

/// ln Gamma(x) for x > 0. Throws DomainError otherwise.
double log_gamma(double x);

/// Complementary error function.
double erfc(double x);

struct WeightedLog {
    double log_value;  // may be -inf (a zero count)
    double weight;     // must be > 0
};

/// log(sum_i weight_i * exp(log_value_i)), shifted by the largest term.
/// Returns -inf when every term is -inf (or the list is empty).
double log_sum_exp(std::span<const WeightedLog> terms);

struct RootBracket {
    double root;
    double lo;
    double hi;
};

/// Bisection on a sign-changing bracket; stops once hi - lo <= tol or f hits
/// exactly zero. Throws BracketError if f(lo) and f(hi) share a sign.
RootBracket bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

inline double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                          double tol) {
    return bisect(f, lo, hi, tol).root;
}

inline constexpr double kCholeskyPivotTolerance = 1e-10;

/// Lower-triangular L with L * L^T = gram. Semidefinite input is accepted:
/// pivots in [-1e-10, 1e-10] are clamped to zero and the column below them
/// is zeroed. Throws NotPositiveSemidefinite for a pivot below -1e-10 and
/// DimensionError for a non-square or asymmetric input.
Matrix cholesky(const Matrix& gram);

/// k x n matrix with orthonormal rows, distributed uniformly over the
/// Stiefel manifold (Gaussian rows, then modified Gram-Schmidt).
Matrix sample_orthonormal_frame(std::size_t n, std::size_t k, Rng& rng);

/// Uniform point on S^{n-1}, written into out (size n).
void sample_unit_vector(std::span<double> out, Rng& rng);

}  // namespace vclab
