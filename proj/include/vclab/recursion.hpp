#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "vclab/structure.hpp"

namespace vclab {

using BigInt = boost::multiprecision::cpp_int;

/// Cover's count of homogeneous linear dichotomies of p points in general
/// position in R^n: 2 * sum_{l < n} binom(p - 1, l).
BigInt cover_count_exact(int n, int p);

/// log C_{n,p} of the mean admissible-dichotomy count on the grid
/// 1 <= n <= n_max, 1 <= p <= p_max, built from
///   C_{n,p+1} = sum_l theta_l C_{n-l,p},   C_{n>=1,1} = 2,   C_{n<=0,p} = 0.
/// Entries are natural logs; -inf is an exact zero. Immutable once built.
class CountTable {
public:
    CountTable(ThetaCoefficients theta, int n_max, int p_max);

    const ThetaCoefficients& theta() const { return theta_; }
    int n_max() const { return n_max_; }
    int p_max() const { return p_max_; }

    // Unchecked for n <= 0 (returns -inf); throws OutOfGrid past the bounds.
    double log_count(int n, int p) const;

    // Linear interpolation of log C between the integer columns around
    // p = alpha * n. Requires 1 <= alpha * n <= p_max.
    double interpolated_log_count(int n, double alpha) const;

    // FNV-1a over the raw bytes of the table, for the JSON summary.
    std::uint64_t checksum() const;

private:
    ThetaCoefficients theta_;
    int n_max_;
    int p_max_;
    std::vector<double> log_counts_;  // (n - 1) * p_max + (p - 1)
};

CountTable build_count_table(const ThetaCoefficients& theta, int n_max, int p_max);

/// H_{n,p} = log C_{n,p}. Throws OutOfGrid outside 1..n_max x 1..p_max.
double vc_entropy(const CountTable& table, int n, int p);

struct AlphaWindow {
    double lo;
    double hi;
};

/// Load where the entropy curves H_{n1, alpha n1} and H_{n2, alpha n2} meet.
/// Scans the window for the last sign change of their difference and
/// bisects it to width 1e-4. Throws NoCrossing if the difference keeps one
/// sign and DomainError for n1 == n2 or a window that starts below p = 1.
double crossing_load(const ThetaCoefficients& theta, int n1, int n2, AlphaWindow window);

/// Same, reusing a table that already covers both curves.
double crossing_load(const CountTable& table, int n1, int n2, AlphaWindow window);

/// CSV with header n,p,alpha,log_count.
void write_table_csv(std::ostream& out, const CountTable& table);

/// {theta, n_max, p_max, checksum}.
nlohmann::json table_summary(const CountTable& table);

}  // namespace vclab
