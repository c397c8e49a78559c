#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vclab/numerics.hpp"
#include "vclab/structure.hpp"

namespace vclab {

/// p multiplets of k unit vectors in R^n, stored contiguously; the flat point
/// index of (mu, a) is mu * k + a.
class Dataset {
public:
    Dataset(StructureSpec spec, std::size_t n, std::size_t p, std::vector<double> coords);

    const StructureSpec& spec() const { return spec_; }
    std::size_t dim() const { return n_; }
    std::size_t multiplets() const { return p_; }
    std::size_t points_per_multiplet() const { return spec_.k(); }
    std::size_t num_points() const { return p_ * spec_.k(); }

    std::span<const double> point(std::size_t index) const {
        return {coords_.data() + index * n_, n_};
    }
    std::span<const double> point(std::size_t mu, std::size_t a) const {
        return point(mu * spec_.k() + a);
    }
    std::span<const double> coords() const { return coords_; }

    // Applies x -> R x to every point (R is n x n).
    Dataset rotated(const Matrix& rotation) const;

private:
    StructureSpec spec_;
    std::size_t n_;
    std::size_t p_;
    std::vector<double> coords_;
};

Dataset sample_dataset(const StructureSpec& spec, std::size_t n, std::size_t p, Rng& rng);

/// Values of max_margin within this distance of zero are reported as 0.
inline constexpr double kMarginTolerance = 1e-9;

/// Minimum-norm-point (Wolfe) solver for the hard-margin problem
///   max_{|w| <= 1} min_i sigma_i (w . xi_i),
/// whose value is the distance from the origin to the convex hull of the
/// signed points when that is positive and 0 otherwise. Keeps scratch
/// buffers between calls, so one instance per thread.
class MarginSolver {
public:
    /// points: m x n row-major; signs: +1/-1 per row.
    double solve(std::span<const double> points, std::size_t dim, std::span<const int> signs);

    // Witness direction of the last positive solve (unit norm).
    std::span<const double> direction() const { return direction_; }

private:
    bool affine_minimizer(std::size_t dim);

    std::vector<double> signed_;     // m x n
    std::vector<std::size_t> active_;
    std::vector<double> weights_;
    std::vector<double> trial_;
    std::vector<double> x_;
    std::vector<double> system_;
    std::vector<double> direction_;
};

double max_margin(std::span<const double> points, std::size_t dim, std::span<const int> signs);

bool linearly_separable(std::span<const double> points, std::size_t dim,
                        std::span<const int> signs);

enum class ProbeKind {
    exact_enumeration,  // every sign vector tested
    early_exit,         // stopped at the first feasible sign vector
    arrangement,        // exact, by walking the vertices of the hyperplane arrangement
    random_classifiers, // lower bound from sampled weight vectors
};

std::string to_string(ProbeKind kind);

struct SatProbe {
    std::uint64_t count = 0;  // admissible realizable dichotomies found
    bool sat = false;
    ProbeKind kind = ProbeKind::exact_enumeration;
    double margin_used = 0.0;

    // True when count is the exact number of admissible dichotomies.
    bool exact() const {
        return kind == ProbeKind::exact_enumeration || kind == ProbeKind::arrangement;
    }
};

inline constexpr std::size_t kDefaultEnumerationBudget = 22;

/// Enumerates sign vectors with sigma^1 = +1, gives each multiplet's points
/// the multiplet's sign and counts those with max_margin > margin + tau;
/// count = 2 x feasible. Throws BudgetExceeded when p > budget.
SatProbe count_admissible_dichotomies(const Dataset& dataset, double margin,
                                      std::size_t budget = kDefaultEnumerationBudget);

/// Same enumeration, stopping at the first feasible sign vector.
SatProbe admissible_exists(const Dataset& dataset, double margin,
                           std::size_t budget = kDefaultEnumerationBudget);

/// Exact count (or existence, with stop_at_first) by enumerating the regions
/// of the central hyperplane arrangement {w : w . xi_i = 0}: every region of
/// an essential arrangement touches a line cut out by n - 1 of the
/// hyperplanes, so walking those lines and their 2^(n-1) neighbouring
/// orthants visits every realizable sign pattern. Cost grows like
/// binom(kp, n - 1), which is polynomial in p for fixed n. For margin > 0
/// each admissible pattern found is confirmed with the margin solver.
/// Falls back to sign enumeration when fewer than n distinct points exist.
SatProbe arrangement_probe(const Dataset& dataset, double margin, bool stop_at_first);

/// Samples weight vectors uniformly on the sphere and records the distinct
/// admissible labelings they induce (a labeling counts only when it is
/// constant on every multiplet and every |w . xi| > margin). The negated
/// labeling is recorded alongside each hit since -w realizes it.
SatProbe random_classifier_probe(const Dataset& dataset, std::size_t num_weights, Rng& rng,
                                 double margin = 0.0);

enum class Probe {
    automatic,     // cheaper of enumeration (within budget) and arrangement
    enumeration,
    arrangement,
    random_classifiers,
};

std::string to_string(Probe probe);
Probe probe_from_string(const std::string& name);

struct TrialOptions {
    Probe probe = Probe::automatic;
    std::size_t budget = kDefaultEnumerationBudget;
    std::size_t num_weights = 100000;  // random-classifier probe only
    unsigned threads = 0;              // 0: hardware concurrency
};

/// Mean and standard error of the admissible-dichotomy count over trials;
/// trial t draws its dataset from Rng(master_seed, t).
Estimate estimate_mean_count(const StructureSpec& spec, std::size_t n, std::size_t p,
                             std::size_t trials, std::uint64_t master_seed, double margin = 0.0,
                             const TrialOptions& options = {});

enum class ScanMode { pairs, margin };

std::string to_string(ScanMode mode);

/// What a phase scan samples: multiplets with a fixed structure at zero
/// margin, or unstructured points at margin kappa. The margin is given in
/// the annealed-theory normalization, so a unit-norm separator must clear
/// kappa / sqrt(n) on every pattern.
struct ScanTarget {
    ScanMode mode;
    StructureSpec structure;
    double kappa = 0.0;

    static ScanTarget pairs(StructureSpec structure);
    static ScanTarget margin(double kappa);

    double parameter() const;  // rho for a pair structure, kappa in margin mode
    double effective_margin(std::size_t n) const;
};

struct PhasePoint {
    double alpha;
    std::size_t p;
    std::size_t trials;
    double sat_fraction;
    double std_error;
    double mean_count;       // NaN unless counts were requested
    double count_std_error;  // NaN unless counts were requested
};

struct ScanOptions {
    TrialOptions trials;
    bool with_counts = false;
    // Called after each load with (index, point); may be empty.
    std::function<void(std::size_t, const PhasePoint&)> progress;
};

/// For each load, p = round(alpha n) and the fraction of trials whose
/// dataset admits at least one realizable admissible dichotomy. Load i
/// trial t uses Rng(master_seed, (i << 32) | t).
std::vector<PhasePoint> sat_fraction_scan(const ScanTarget& target, std::size_t n,
                                          std::span<const double> alpha_grid, std::size_t trials,
                                          std::uint64_t master_seed,
                                          const ScanOptions& options = {});

struct Crossover {
    double alpha;
    double std_error;
};

/// First load where the sat fraction falls through `level`, linearly
/// interpolated between neighbouring scan points, with a delta-method
/// error. Throws NoCrossing when the fraction never falls through.
Crossover crossover_load(std::span<const PhasePoint> points, double level = 0.5);

/// Runs body(i) for i in [0, count) on a pool of worker threads. Results
/// must be written to per-index slots so reductions stay in index order.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace vclab
