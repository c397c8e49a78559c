#include "vclab/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "vclab/errors.hpp"

namespace vclab {

Dataset::Dataset(StructureSpec spec, std::size_t n, std::size_t p, std::vector<double> coords)
    : spec_(std::move(spec)), n_(n), p_(p), coords_(std::move(coords)) {
    if (coords_.size() != p_ * spec_.k() * n_)
        throw DimensionError("dataset: coordinate buffer does not match p * k * n");
}

Dataset Dataset::rotated(const Matrix& rotation) const {
    if (rotation.rows() != n_ || rotation.cols() != n_)
        throw DimensionError("dataset: rotation must be n x n");
    std::vector<double> out(coords_.size(), 0.0);
    for (std::size_t i = 0; i < num_points(); ++i) {
        const auto src = point(i);
        for (std::size_t r = 0; r < n_; ++r) out[i * n_ + r] = dot(rotation.row(r), src);
    }
    return Dataset(spec_, n_, p_, std::move(out));
}

Dataset sample_dataset(const StructureSpec& spec, std::size_t n, std::size_t p, Rng& rng) {
    if (p < 1) throw DomainError("sample_dataset: need at least one multiplet");
    if (n < spec.k()) throw DimensionError("sample_dataset: dimension n must be at least k");
    std::vector<double> coords;
    coords.reserve(p * spec.k() * n);
    for (std::size_t mu = 0; mu < p; ++mu) {
        const Matrix multiplet = sample_multiplet(spec, n, rng);
        coords.insert(coords.end(), multiplet.data().begin(), multiplet.data().end());
    }
    return Dataset(spec, n, p, std::move(coords));
}

std::string to_string(ProbeKind kind) {
    switch (kind) {
        case ProbeKind::exact_enumeration: return "exact-enumeration";
        case ProbeKind::early_exit: return "early-exit";
        case ProbeKind::arrangement: return "arrangement";
        case ProbeKind::random_classifiers: return "random-classifiers";
    }
    return "unknown";
}

namespace {

SatProbe enumerate_sign_vectors(const Dataset& dataset, double margin, std::size_t budget,
                                bool stop_at_first) {
    const std::size_t p = dataset.multiplets();
    const std::size_t k = dataset.points_per_multiplet();
    if (p > budget) {
        std::ostringstream msg;
        msg << "sign enumeration over p = " << p << " multiplets exceeds the budget of " << budget
            << "; use the arrangement or random-classifier probe";
        throw BudgetExceeded(msg.str());
    }
    if (p >= 63) throw BudgetExceeded("sign enumeration: p too large for a 64-bit counter");
    if (margin < 0.0) throw DomainError("margin must be nonnegative");

    SatProbe probe;
    probe.margin_used = margin;
    probe.kind = ProbeKind::exact_enumeration;
    MarginSolver solver;
    std::vector<int> signs(dataset.num_points());
    std::uint64_t feasible = 0;
    const std::uint64_t total = std::uint64_t{1} << (p - 1);
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        // sigma^1 = +1; bit mu - 1 of mask flips multiplet mu.
        for (std::size_t mu = 0; mu < p; ++mu) {
            const int s = mu > 0 && (mask >> (mu - 1)) & 1u ? -1 : 1;
            for (std::size_t a = 0; a < k; ++a) signs[mu * k + a] = s;
        }
        if (solver.solve(dataset.coords(), dataset.dim(), signs) > margin + kMarginTolerance) {
            ++feasible;
            if (stop_at_first) {
                probe.count = 2 * feasible;
                probe.sat = true;
                probe.kind = ProbeKind::early_exit;
                return probe;
            }
        }
    }
    probe.count = 2 * feasible;
    probe.sat = feasible > 0;
    return probe;
}

struct KeyHash {
    std::size_t operator()(const std::vector<std::uint64_t>& key) const {
        std::uint64_t h = 1469598103934665603ull;
        for (auto word : key) {
            h ^= word;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

}  // namespace

SatProbe count_admissible_dichotomies(const Dataset& dataset, double margin, std::size_t budget) {
    return enumerate_sign_vectors(dataset, margin, budget, false);
}

SatProbe admissible_exists(const Dataset& dataset, double margin, std::size_t budget) {
    return enumerate_sign_vectors(dataset, margin, budget, true);
}

SatProbe random_classifier_probe(const Dataset& dataset, std::size_t num_weights, Rng& rng,
                                 double margin) {
    if (num_weights < 1) throw DomainError("random_classifier_probe: need at least one weight");
    const std::size_t n = dataset.dim();
    const std::size_t k = dataset.points_per_multiplet();
    const std::size_t p = dataset.multiplets();
    const std::size_t words = (p + 63) / 64;

    std::unordered_set<std::vector<std::uint64_t>, KeyHash> seen;
    std::vector<double> w(n);
    std::vector<std::uint64_t> key(words), negated(words);
    for (std::size_t t = 0; t < num_weights; ++t) {
        sample_unit_vector(w, rng);
        std::fill(key.begin(), key.end(), 0);
        bool admissible = true;
        for (std::size_t mu = 0; mu < p && admissible; ++mu) {
            int sign = 0;
            for (std::size_t a = 0; a < k; ++a) {
                const double h = dot(dataset.point(mu, a), w);
                if (std::abs(h) <= margin) {
                    admissible = false;
                    break;
                }
                const int s = h > 0.0 ? 1 : -1;
                if (sign == 0) {
                    sign = s;
                } else if (sign != s) {
                    admissible = false;
                    break;
                }
            }
            if (sign > 0) key[mu / 64] |= std::uint64_t{1} << (mu % 64);
        }
        if (!admissible) continue;
        for (std::size_t i = 0; i < words; ++i) negated[i] = ~key[i];
        if (p % 64 != 0) negated.back() &= (std::uint64_t{1} << (p % 64)) - 1;
        seen.insert(key);
        seen.insert(negated);
    }
    SatProbe probe;
    probe.count = seen.size();
    probe.sat = probe.count > 0;
    probe.kind = ProbeKind::random_classifiers;
    probe.margin_used = margin;
    return probe;
}

std::string to_string(Probe probe) {
    switch (probe) {
        case Probe::automatic: return "auto";
        case Probe::enumeration: return "enumeration";
        case Probe::arrangement: return "arrangement";
        case Probe::random_classifiers: return "random-classifier";
    }
    return "unknown";
}

Probe probe_from_string(const std::string& name) {
    if (name == "auto") return Probe::automatic;
    if (name == "enumeration") return Probe::enumeration;
    if (name == "arrangement") return Probe::arrangement;
    if (name == "random-classifier") return Probe::random_classifiers;
    throw ValidationError("unknown probe '" + name +
                          "' (expected auto, enumeration, arrangement or random-classifier)");
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= count) return;
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next.store(count);
                        return;
                    }
                }
            });
    }
    if (failure) std::rethrow_exception(failure);
}

namespace {

// One trial's probe, chosen by the options.
SatProbe run_probe(const Dataset& dataset, double margin, bool need_count,
                   const TrialOptions& options, Rng& rng) {
    switch (options.probe) {
        case Probe::enumeration:
            return need_count ? count_admissible_dichotomies(dataset, margin, options.budget)
                              : admissible_exists(dataset, margin, options.budget);
        case Probe::arrangement:
            return arrangement_probe(dataset, margin, !need_count);
        case Probe::random_classifiers:
            return random_classifier_probe(dataset, options.num_weights, rng, margin);
        case Probe::automatic:
            break;
    }
    // Pick the cheaper exact route: 2^(p-1) sign vectors against at most
    // 2 binom(kp, n-1) 2^(n-1) arrangement candidates.
    const double p = static_cast<double>(dataset.multiplets());
    const double kp = static_cast<double>(dataset.num_points());
    const double r = static_cast<double>(dataset.dim()) - 1.0;
    const double log_enumeration = (p - 1.0) * std::log(2.0);
    const double log_arrangement =
        kp < r ? 0.0
               : std::log(2.0) + std::lgamma(kp + 1.0) - std::lgamma(r + 1.0) -
                     std::lgamma(kp - r + 1.0) + r * std::log(2.0);
    if (dataset.multiplets() > options.budget || log_arrangement < log_enumeration)
        return arrangement_probe(dataset, margin, !need_count);
    return need_count ? count_admissible_dichotomies(dataset, margin, options.budget)
                      : admissible_exists(dataset, margin, options.budget);
}

Estimate mean_and_error(const std::vector<double>& values) {
    const double count = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= count;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var = values.size() > 1 ? var / (count - 1.0) : 0.0;
    return {mean, std::sqrt(var / count)};
}

}  // namespace

Estimate estimate_mean_count(const StructureSpec& spec, std::size_t n, std::size_t p,
                             std::size_t trials, std::uint64_t master_seed, double margin,
                             const TrialOptions& options) {
    if (trials < 2) throw DomainError("estimate_mean_count: need at least two trials");
    std::vector<double> counts(trials);
    parallel_for(trials, options.threads, [&](std::size_t t) {
        Rng rng(master_seed, t);
        const Dataset dataset = sample_dataset(spec, n, p, rng);
        counts[t] = static_cast<double>(run_probe(dataset, margin, true, options, rng).count);
    });
    return mean_and_error(counts);
}

std::string to_string(ScanMode mode) { return mode == ScanMode::pairs ? "pairs" : "margin"; }

ScanTarget ScanTarget::pairs(StructureSpec structure) {
    return ScanTarget{ScanMode::pairs, std::move(structure), 0.0};
}

ScanTarget ScanTarget::margin(double kappa) {
    if (!(kappa >= 0.0)) throw ValidationError("margin scan: field 'kappa' must be nonnegative");
    return ScanTarget{ScanMode::margin, StructureSpec::unstructured(), kappa};
}

double ScanTarget::parameter() const {
    if (mode == ScanMode::margin) return kappa;
    // An unstructured target behaves like rho = 1.
    return structure.k() == 1 ? 1.0 : structure.gram()(0, 1);
}

double ScanTarget::effective_margin(std::size_t n) const {
    return mode == ScanMode::margin ? kappa / std::sqrt(static_cast<double>(n)) : 0.0;
}

std::vector<PhasePoint> sat_fraction_scan(const ScanTarget& target, std::size_t n,
                                          std::span<const double> alpha_grid, std::size_t trials,
                                          std::uint64_t master_seed, const ScanOptions& options) {
    if (trials < 1) throw ValidationError("sat_fraction_scan: field 'trials' must be at least 1");
    if (alpha_grid.empty()) throw ValidationError("sat_fraction_scan: empty load grid");
    const double margin = target.effective_margin(n);

    std::vector<PhasePoint> out;
    out.reserve(alpha_grid.size());
    for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
        const double alpha = alpha_grid[i];
        const long rounded = std::lround(alpha * static_cast<double>(n));
        if (rounded < 1) {
            std::ostringstream msg;
            msg << "sat_fraction_scan: load " << alpha << " gives p < 1 at n = " << n;
            throw ValidationError(msg.str());
        }
        const auto p = static_cast<std::size_t>(rounded);
        std::vector<double> sat(trials), counts(trials);
        parallel_for(trials, options.trials.threads, [&](std::size_t t) {
            Rng rng(master_seed, (static_cast<std::uint64_t>(i) << 32) | t);
            const Dataset dataset = sample_dataset(target.structure, n, p, rng);
            const SatProbe probe = run_probe(dataset, margin, options.with_counts, options.trials, rng);
            sat[t] = probe.sat ? 1.0 : 0.0;
            counts[t] = static_cast<double>(probe.count);
        });
        const Estimate fraction = mean_and_error(sat);
        PhasePoint point{alpha,
                         p,
                         trials,
                         fraction.value,
                         std::sqrt(fraction.value * (1.0 - fraction.value) /
                                   static_cast<double>(trials)),
                         std::numeric_limits<double>::quiet_NaN(),
                         std::numeric_limits<double>::quiet_NaN()};
        if (options.with_counts) {
            const Estimate c = mean_and_error(counts);
            point.mean_count = c.value;
            point.count_std_error = c.std_error;
        }
        out.push_back(point);
        if (options.progress) options.progress(i, point);
    }
    return out;
}

Crossover crossover_load(std::span<const PhasePoint> points, double level) {
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const auto& a = points[i];
        const auto& b = points[i + 1];
        if (!(a.sat_fraction >= level && b.sat_fraction < level)) continue;
        const double drop = a.sat_fraction - b.sat_fraction;
        const double width = b.alpha - a.alpha;
        const double t = (a.sat_fraction - level) / drop;
        const double da = width * (level - b.sat_fraction) / (drop * drop);
        const double db = width * (a.sat_fraction - level) / (drop * drop);
        const double var = da * da * a.std_error * a.std_error + db * db * b.std_error * b.std_error;
        return {a.alpha + t * width, std::sqrt(var)};
    }
    throw NoCrossing("crossover_load: sat fraction never falls through the requested level");
}

}  // namespace vclab
