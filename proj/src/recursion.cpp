#include "vclab/recursion.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "vclab/csv.hpp"
#include "vclab/errors.hpp"

namespace vclab {

BigInt cover_count_exact(int n, int p) {
    if (n < 1 || p < 1) throw DomainError("cover_count_exact: need n >= 1 and p >= 1");
    BigInt total = 0;
    BigInt binom = 1;  // binom(p - 1, l), starting at l = 0
    for (int l = 0; l < n && l <= p - 1; ++l) {
        total += binom;
        binom = binom * (p - 1 - l) / (l + 1);
    }
    return 2 * total;
}

CountTable::CountTable(ThetaCoefficients theta, int n_max, int p_max)
    : theta_(std::move(theta)), n_max_(n_max), p_max_(p_max) {
    if (n_max < 1 || p_max < 1) throw DomainError("count table: need n_max >= 1 and p_max >= 1");
    log_counts_.assign(static_cast<std::size_t>(n_max) * p_max, kNegInf);
    const auto at = [&](int n, int p) -> double& {
        return log_counts_[static_cast<std::size_t>(n - 1) * p_max_ + (p - 1)];
    };
    for (int n = 1; n <= n_max; ++n) at(n, 1) = std::log(2.0);

    std::vector<WeightedLog> terms;
    terms.reserve(theta_.theta.size());
    for (int p = 1; p < p_max; ++p) {
        for (int n = 1; n <= n_max; ++n) {
            terms.clear();
            for (std::size_t l = 0; l < theta_.theta.size(); ++l) {
                const int source = n - static_cast<int>(l);
                if (source <= 0) break;
                if (theta_.theta[l] <= 0.0) continue;
                terms.push_back({at(source, p), theta_.theta[l]});
            }
            at(n, p + 1) = log_sum_exp(terms);
        }
    }
}

double CountTable::log_count(int n, int p) const {
    if (n <= 0) return kNegInf;
    if (n > n_max_ || p < 1 || p > p_max_) {
        std::ostringstream msg;
        msg << "count table: (n, p) = (" << n << ", " << p << ") outside 1.." << n_max_
            << " x 1.." << p_max_;
        throw OutOfGrid(msg.str());
    }
    return log_counts_[static_cast<std::size_t>(n - 1) * p_max_ + (p - 1)];
}

double CountTable::interpolated_log_count(int n, double alpha) const {
    const double p = alpha * n;
    if (p < 1.0 || p > p_max_) {
        std::ostringstream msg;
        msg << "count table: load " << alpha << " at n = " << n << " needs p = " << p
            << " outside 1.." << p_max_;
        throw OutOfGrid(msg.str());
    }
    const int lower = std::min(static_cast<int>(std::floor(p)), p_max_ - 1);
    const double frac = p - lower;
    if (p_max_ == 1) return log_count(n, 1);
    const double a = log_count(n, lower);
    const double b = log_count(n, lower + 1);
    if (frac == 0.0) return a;
    if (frac == 1.0) return b;
    return (1.0 - frac) * a + frac * b;
}

std::uint64_t CountTable::checksum() const {
    std::uint64_t hash = 1469598103934665603ull;
    for (double v : log_counts_) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof v);
        for (unsigned char b : bytes) {
            hash ^= b;
            hash *= 1099511628211ull;
        }
    }
    return hash;
}

CountTable build_count_table(const ThetaCoefficients& theta, int n_max, int p_max) {
    return CountTable(theta, n_max, p_max);
}

double vc_entropy(const CountTable& table, int n, int p) {
    if (n < 1) {
        std::ostringstream msg;
        msg << "vc_entropy: dimension " << n << " outside the grid";
        throw OutOfGrid(msg.str());
    }
    return table.log_count(n, p);
}

double crossing_load(const CountTable& table, int n1, int n2, AlphaWindow window) {
    if (n1 == n2) throw DomainError("crossing_load: the two dimensions must differ");
    if (n1 < 1 || n2 < 1) throw DomainError("crossing_load: dimensions must be positive");
    if (!(window.lo < window.hi)) throw DomainError("crossing_load: empty load window");
    if (window.lo * std::min(n1, n2) < 1.0)
        throw DomainError("crossing_load: window must start at p >= 1 for both curves");

    const auto gap = [&](double alpha) {
        return table.interpolated_log_count(n1, alpha) - table.interpolated_log_count(n2, alpha);
    };

    // Sample finely enough that every integer column of the larger n is seen.
    const int steps = std::max(64, static_cast<int>(std::ceil((window.hi - window.lo) *
                                                              std::max(n1, n2) * 2.0)));
    const double h = (window.hi - window.lo) / steps;
    double prev_alpha = window.lo;
    double prev = gap(prev_alpha);
    double found_lo = 0.0, found_hi = 0.0;
    bool found = false;
    for (int i = 1; i <= steps; ++i) {
        const double alpha = i == steps ? window.hi : window.lo + i * h;
        const double g = gap(alpha);
        const bool sign_change = std::isfinite(prev) && std::isfinite(g) &&
                                 ((prev > 0.0 && g <= 0.0) || (prev < 0.0 && g >= 0.0));
        if (sign_change) {
            found = true;
            found_lo = prev_alpha;
            found_hi = alpha;
        }
        prev_alpha = alpha;
        prev = g;
    }
    if (!found) {
        std::ostringstream msg;
        msg << "crossing_load: entropy curves for n = " << n1 << " and n = " << n2
            << " do not cross on [" << window.lo << ", " << window.hi << "]";
        throw NoCrossing(msg.str());
    }
    return bisect_root(gap, found_lo, found_hi, 1e-4);
}

double crossing_load(const ThetaCoefficients& theta, int n1, int n2, AlphaWindow window) {
    if (n1 < 1 || n2 < 1) throw DomainError("crossing_load: dimensions must be positive");
    const int n_max = std::max(n1, n2);
    const int p_max = static_cast<int>(std::ceil(window.hi * n_max)) + 1;
    return crossing_load(build_count_table(theta, n_max, p_max), n1, n2, window);
}

void write_table_csv(std::ostream& out, const CountTable& table) {
    out << "n,p,alpha,log_count\n";
    for (int n = 1; n <= table.n_max(); ++n)
        for (int p = 1; p <= table.p_max(); ++p)
            out << n << ',' << p << ',' << csv::number(static_cast<double>(p) / n) << ','
                << csv::number(table.log_count(n, p)) << '\n';
}

nlohmann::json table_summary(const CountTable& table) {
    std::ostringstream hex;
    hex << std::hex << table.checksum();
    return {{"theta", table.theta().theta},
            {"n_max", table.n_max()},
            {"p_max", table.p_max()},
            {"checksum", hex.str()}};
}

}  // namespace vclab
