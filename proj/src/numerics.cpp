#include "vclab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vclab/errors.hpp"

namespace vclab {

Rng::Rng(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed), stream_index_(stream_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(stream_index),
                      static_cast<std::uint32_t>(stream_index >> 32)};
    engine_.seed(seq);
}

std::size_t Rng::below(std::size_t bound) {
    std::uniform_int_distribution<std::size_t> dist(0, bound - 1);
    return dist(engine_);
}

Matrix Matrix::identity(std::size_t size) {
    Matrix m(size, size);
    for (std::size_t i = 0; i < size; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    if (cols_ != rhs.rows_) throw DimensionError("matrix product: inner dimensions differ");
    Matrix out(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t l = 0; l < cols_; ++l) {
            const double a = (*this)(i, l);
            if (a == 0.0) continue;
            for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(l, j);
        }
    return out;
}

Matrix Matrix::transposed() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("max_abs_diff: shape mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

double log_gamma(double x) {
    if (!(x > 0.0)) {
        std::ostringstream msg;
        msg << "log_gamma: argument must be positive, got " << x;
        throw DomainError(msg.str());
    }
    return std::lgamma(x);
}

double erfc(double x) { return std::erfc(x); }

double log_sum_exp(std::span<const WeightedLog> terms) {
    double shift = kNegInf;
    for (const auto& t : terms) shift = std::max(shift, t.log_value);
    if (shift == kNegInf) return kNegInf;
    double acc = 0.0;
    for (const auto& t : terms) {
        if (t.log_value == kNegInf) continue;
        acc += t.weight * std::exp(t.log_value - shift);
    }
    return shift + std::log(acc);
}

RootBracket bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (lo > hi) std::swap(lo, hi);
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return {lo, lo, lo};
    if (fhi == 0.0) return {hi, hi, hi};
    if ((flo > 0.0) == (fhi > 0.0)) {
        std::ostringstream msg;
        msg << "bisect: f has the same sign at both ends of [" << lo << ", " << hi << "]";
        throw BracketError(msg.str());
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // bracket at floating-point resolution
        const double fm = f(mid);
        if (fm == 0.0) return {mid, mid, mid};
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return {0.5 * (lo + hi), lo, hi};
}

Matrix cholesky(const Matrix& gram) {
    const std::size_t k = gram.rows();
    if (gram.cols() != k) throw DimensionError("cholesky: matrix is not square");
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(gram(i, j) - gram(j, i)) > 1e-12)
                throw DimensionError("cholesky: matrix is not symmetric");

    Matrix lower(k, k);
    for (std::size_t j = 0; j < k; ++j) {
        double pivot = gram(j, j);
        for (std::size_t l = 0; l < j; ++l) pivot -= lower(j, l) * lower(j, l);
        if (pivot < -kCholeskyPivotTolerance) {
            std::ostringstream msg;
            msg << "cholesky: negative pivot " << pivot << " at column " << j;
            throw NotPositiveSemidefinite(msg.str());
        }
        if (pivot <= kCholeskyPivotTolerance) {
            // Rank-deficient direction: the remaining rows must already be
            // explained by earlier columns, so this column stays zero.
            for (std::size_t i = j + 1; i < k; ++i) {
                double r = gram(i, j);
                for (std::size_t l = 0; l < j; ++l) r -= lower(i, l) * lower(j, l);
                if (std::abs(r) > 1e-8) {
                    std::ostringstream msg;
                    msg << "cholesky: inconsistent semidefinite matrix at (" << i << ", " << j
                        << ")";
                    throw NotPositiveSemidefinite(msg.str());
                }
            }
            continue;
        }
        const double d = std::sqrt(pivot);
        lower(j, j) = d;
        for (std::size_t i = j + 1; i < k; ++i) {
            double r = gram(i, j);
            for (std::size_t l = 0; l < j; ++l) r -= lower(i, l) * lower(j, l);
            lower(i, j) = r / d;
        }
    }
    return lower;
}

void sample_unit_vector(std::span<double> out, Rng& rng) {
    for (;;) {
        double norm2 = 0.0;
        for (auto& x : out) {
            x = rng.normal();
            norm2 += x * x;
        }
        if (norm2 > 1e-300) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (auto& x : out) x *= inv;
            return;
        }
    }
}

Matrix sample_orthonormal_frame(std::size_t n, std::size_t k, Rng& rng) {
    if (k > n) {
        std::ostringstream msg;
        msg << "sample_orthonormal_frame: " << k << " rows do not fit in dimension " << n;
        throw DimensionError(msg.str());
    }
    Matrix frame(k, n);
    for (std::size_t r = 0; r < k; ++r) {
        auto row = frame.row(r);
        for (;;) {
            for (auto& x : row) x = rng.normal();
            // Two passes of modified Gram-Schmidt keep rows orthogonal to ~1e-15.
            for (int pass = 0; pass < 2; ++pass)
                for (std::size_t q = 0; q < r; ++q) {
                    const auto prev = frame.row(q);
                    const double c = dot(row, prev);
                    for (std::size_t i = 0; i < n; ++i) row[i] -= c * prev[i];
                }
            const double norm = std::sqrt(dot(row, row));
            if (norm > 1e-8) {
                for (auto& x : row) x /= norm;
                break;
            }
        }
    }
    return frame;
}

}  // namespace vclab
