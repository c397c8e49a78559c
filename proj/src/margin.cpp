#include <algorithm>
#include <cmath>

#include "vclab/errors.hpp"
#include "vclab/montecarlo.hpp"

namespace vclab {

namespace {

constexpr double kWeightFloor = 1e-15;

// Solves the dense system a x = b in place (a is size x size, row-major)
// with partial pivoting. Returns false when a pivot vanishes.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t size) {
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    const double floor = 1e-14 * std::max(scale, 1.0);
    for (std::size_t col = 0; col < size; ++col) {
        std::size_t best = col;
        for (std::size_t r = col + 1; r < size; ++r)
            if (std::abs(a[r * size + col]) > std::abs(a[best * size + col])) best = r;
        if (std::abs(a[best * size + col]) < floor) return false;
        if (best != col) {
            for (std::size_t c = 0; c < size; ++c) std::swap(a[col * size + c], a[best * size + c]);
            std::swap(b[col], b[best]);
        }
        const double pivot = a[col * size + col];
        for (std::size_t r = col + 1; r < size; ++r) {
            const double f = a[r * size + col] / pivot;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < size; ++c) a[r * size + c] -= f * a[col * size + c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = size; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < size; ++c) s -= a[i * size + c] * b[c];
        b[i] = s / a[i * size + i];
    }
    return true;
}

}  // namespace

// Minimum-norm point of the affine hull of the active points:
//   [G 1; 1^T 0] [mu; nu] = [0; 1],  G_ij = z_i . z_j.
bool MarginSolver::affine_minimizer(std::size_t dim) {
    const std::size_t s = active_.size();
    const std::size_t size = s + 1;
    system_.assign(size * size, 0.0);
    trial_.assign(size, 0.0);
    for (std::size_t i = 0; i < s; ++i) {
        const double* zi = signed_.data() + active_[i] * dim;
        for (std::size_t j = i; j < s; ++j) {
            const double* zj = signed_.data() + active_[j] * dim;
            double g = 0.0;
            for (std::size_t c = 0; c < dim; ++c) g += zi[c] * zj[c];
            system_[i * size + j] = g;
            system_[j * size + i] = g;
        }
        system_[i * size + s] = 1.0;
        system_[s * size + i] = 1.0;
    }
    trial_[s] = 1.0;
    if (!solve_dense(system_, trial_, size)) return false;
    trial_.resize(s);
    return true;
}

double MarginSolver::solve(std::span<const double> points, std::size_t dim,
                           std::span<const int> signs) {
    const std::size_t m = signs.size();
    if (m == 0 || dim == 0) throw DomainError("max_margin: need at least one point");
    if (points.size() != m * dim) throw DimensionError("max_margin: points/signs size mismatch");

    signed_.resize(m * dim);
    double max_norm2 = 0.0;
    double min_norm2 = std::numeric_limits<double>::infinity();
    std::size_t start = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double norm2 = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const double v = signs[i] * points[i * dim + c];
            signed_[i * dim + c] = v;
            norm2 += v * v;
        }
        max_norm2 = std::max(max_norm2, norm2);
        if (norm2 < min_norm2) {
            min_norm2 = norm2;
            start = i;
        }
    }
    direction_.assign(dim, 0.0);
    if (max_norm2 == 0.0) return 0.0;

    active_.assign(1, start);
    weights_.assign(1, 1.0);
    x_.assign(signed_.begin() + start * dim, signed_.begin() + (start + 1) * dim);

    const auto rebuild_x = [&] {
        std::fill(x_.begin(), x_.end(), 0.0);
        for (std::size_t i = 0; i < active_.size(); ++i) {
            const double* z = signed_.data() + active_[i] * dim;
            for (std::size_t c = 0; c < dim; ++c) x_[c] += weights_[i] * z[c];
        }
    };

    const double gap_tol = 1e-13 * max_norm2;
    const double zero_tol = 1e-24 * max_norm2;
    const std::size_t max_major = 50 * (m + dim) + 100;
    for (std::size_t iter = 0; iter < max_major; ++iter) {
        double xx = 0.0;
        for (double v : x_) xx += v * v;
        if (xx <= zero_tol) return 0.0;  // origin lies in the hull

        std::size_t entering = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            double zx = 0.0;
            const double* z = signed_.data() + i * dim;
            for (std::size_t c = 0; c < dim; ++c) zx += z[c] * x_[c];
            if (zx < best) {
                best = zx;
                entering = i;
            }
        }
        if (xx - best <= gap_tol) break;
        if (std::find(active_.begin(), active_.end(), entering) != active_.end()) break;
        if (active_.size() > dim) break;

        active_.push_back(entering);
        weights_.push_back(0.0);

        bool stalled = false;
        for (std::size_t minor = 0; minor <= dim + 1; ++minor) {
            if (!affine_minimizer(dim)) {
                stalled = true;
                break;
            }
            const bool interior = std::all_of(trial_.begin(), trial_.end(),
                                              [](double mu) { return mu > kWeightFloor; });
            if (interior) {
                weights_ = trial_;
                rebuild_x();
                break;
            }
            // Move towards the affine minimizer until a weight hits zero.
            double step = 1.0;
            std::size_t leaving = 0;
            for (std::size_t i = 0; i < trial_.size(); ++i) {
                if (trial_[i] > kWeightFloor) continue;
                const double denom = weights_[i] - trial_[i];
                const double t = denom > 0.0 ? weights_[i] / denom : 0.0;
                if (t < step) {
                    step = t;
                    leaving = i;
                }
            }
            for (std::size_t i = 0; i < weights_.size(); ++i)
                weights_[i] = (1.0 - step) * weights_[i] + step * trial_[i];
            weights_[leaving] = 0.0;
            std::size_t kept = 0;
            double total = 0.0;
            for (std::size_t i = 0; i < weights_.size(); ++i) {
                if (weights_[i] <= kWeightFloor) continue;
                active_[kept] = active_[i];
                weights_[kept] = weights_[i];
                total += weights_[i];
                ++kept;
            }
            active_.resize(kept);
            weights_.resize(kept);
            for (auto& w : weights_) w /= total;
            rebuild_x();
        }
        if (stalled) break;
    }

    double xx = 0.0;
    for (double v : x_) xx += v * v;
    if (xx <= zero_tol) return 0.0;
    const double inv = 1.0 / std::sqrt(xx);
    for (std::size_t c = 0; c < dim; ++c) direction_[c] = x_[c] * inv;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        double v = 0.0;
        const double* z = signed_.data() + i * dim;
        for (std::size_t c = 0; c < dim; ++c) v += z[c] * direction_[c];
        worst = std::min(worst, v);
    }
    if (worst <= kMarginTolerance) {
        std::fill(direction_.begin(), direction_.end(), 0.0);
        return 0.0;
    }
    return worst;
}

double max_margin(std::span<const double> points, std::size_t dim, std::span<const int> signs) {
    MarginSolver solver;
    return solver.solve(points, dim, signs);
}

bool linearly_separable(std::span<const double> points, std::size_t dim,
                        std::span<const int> signs) {
    return max_margin(points, dim, signs) > kMarginTolerance;
}

}  // namespace vclab
