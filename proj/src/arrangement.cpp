#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "vclab/errors.hpp"
#include "vclab/montecarlo.hpp"

namespace vclab {

namespace {

constexpr double kDuplicateTolerance = 1e-12;
constexpr double kIncidenceTolerance = 1e-12;

// Multiplet sign vector packed as bits (1 = +1).
using SignKey = std::vector<std::uint64_t>;

struct SignKeyHash {
    std::size_t operator()(const SignKey& key) const {
        std::uint64_t h = 1469598103934665603ull;
        for (auto word : key) {
            h ^= word;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

// Unit normal to the span of `rows` (r = dim - 1 vectors of length dim).
// Returns false when the rows are linearly dependent.
bool normal_of(const std::vector<std::span<const double>>& rows, std::size_t dim,
               std::vector<double>& basis, std::vector<double>& out) {
    out.assign(dim, 0.0);
    if (dim == 1) {
        out[0] = 1.0;
        return true;
    }
    if (dim == 3) {
        const auto& a = rows[0];
        const auto& b = rows[1];
        out[0] = a[1] * b[2] - a[2] * b[1];
        out[1] = a[2] * b[0] - a[0] * b[2];
        out[2] = a[0] * b[1] - a[1] * b[0];
        const double norm = std::sqrt(dot(out, out));
        if (norm < 1e-9) return false;
        for (auto& v : out) v /= norm;
        return true;
    }
    const std::size_t r = rows.size();
    basis.assign(r * dim, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        std::span<double> bi(basis.data() + i * dim, dim);
        std::copy(rows[i].begin(), rows[i].end(), bi.begin());
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t q = 0; q < i; ++q) {
                std::span<const double> bq(basis.data() + q * dim, dim);
                const double c = dot(bi, bq);
                for (std::size_t j = 0; j < dim; ++j) bi[j] -= c * bq[j];
            }
        const double norm = std::sqrt(dot(bi, bi));
        if (norm < 1e-9) return false;
        for (auto& v : bi) v /= norm;
    }
    // The coordinate axis with the largest residual gives a stable complement.
    double best = -1.0;
    std::vector<double> candidate(dim);
    for (std::size_t axis = 0; axis < dim; ++axis) {
        std::fill(candidate.begin(), candidate.end(), 0.0);
        candidate[axis] = 1.0;
        for (std::size_t q = 0; q < r; ++q) {
            std::span<const double> bq(basis.data() + q * dim, dim);
            const double c = bq[axis];
            for (std::size_t j = 0; j < dim; ++j) candidate[j] -= c * bq[j];
        }
        const double norm2 = dot(candidate, candidate);
        if (norm2 > best) {
            best = norm2;
            out = candidate;
        }
    }
    const double norm = std::sqrt(best);
    for (auto& v : out) v /= norm;
    return true;
}

}  // namespace

SatProbe arrangement_probe(const Dataset& dataset, double margin, bool stop_at_first) {
    const std::size_t n = dataset.dim();
    const std::size_t k = dataset.points_per_multiplet();
    const std::size_t p = dataset.multiplets();

    // Coincident points of one multiplet (rho = 1) cut the same hyperplane.
    std::vector<std::size_t> unique;
    std::vector<std::vector<std::size_t>> members(p);
    for (std::size_t mu = 0; mu < p; ++mu)
        for (std::size_t a = 0; a < k; ++a) {
            const std::size_t idx = mu * k + a;
            const auto pt = dataset.point(idx);
            bool duplicate = false;
            for (std::size_t other : members[mu]) {
                const auto q = dataset.point(other);
                double diff = 0.0;
                for (std::size_t j = 0; j < n; ++j) diff = std::max(diff, std::abs(pt[j] - q[j]));
                if (diff < kDuplicateTolerance) {
                    duplicate = true;
                    break;
                }
            }
            if (duplicate) continue;
            members[mu].push_back(idx);
            unique.push_back(idx);
        }

    if (unique.size() < n) {
        // Not an essential arrangement; p is necessarily small here.
        return stop_at_first ? admissible_exists(dataset, margin, std::max<std::size_t>(p, 1))
                             : count_admissible_dichotomies(dataset, margin,
                                                            std::max<std::size_t>(p, 1));
    }

    SatProbe probe;
    probe.kind = ProbeKind::arrangement;
    probe.margin_used = margin;

    const std::size_t words = (p + 63) / 64;
    std::unordered_set<SignKey, SignKeyHash> found;
    std::unordered_set<SignKey, SignKeyHash> rejected;
    MarginSolver solver;
    std::vector<int> point_signs(dataset.num_points());
    const bool verify = stop_at_first || margin > 0.0;

    // Returns true when the caller may stop.
    const auto consider = [&](const SignKey& key) {
        if (found.count(key) || rejected.count(key)) return false;
        if (verify) {
            for (std::size_t mu = 0; mu < p; ++mu) {
                const int s = (key[mu / 64] >> (mu % 64)) & 1u ? 1 : -1;
                for (std::size_t a = 0; a < k; ++a) point_signs[mu * k + a] = s;
            }
            const double value = solver.solve(dataset.coords(), n, point_signs);
            if (!(value > margin + kMarginTolerance)) {
                rejected.insert(key);
                return false;
            }
        }
        found.insert(key);
        return stop_at_first;
    };

    const std::size_t r = n - 1;
    const std::size_t u = unique.size();
    std::vector<std::size_t> combo(r);
    for (std::size_t i = 0; i < r; ++i) combo[i] = i;
    std::vector<std::span<const double>> rows(r);
    std::vector<double> basis, normal, vertex(n);
    std::vector<std::size_t> incident(r);
    std::vector<int> fixed(p);
    std::vector<std::size_t> free_multiplets;
    SignKey key(words);

    for (;;) {
        for (std::size_t i = 0; i < r; ++i) {
            incident[i] = unique[combo[i]];
            rows[i] = dataset.point(incident[i]);
        }
        if (normal_of(rows, n, basis, normal)) {
            for (int orient : {1, -1}) {
                for (std::size_t j = 0; j < n; ++j) vertex[j] = orient * normal[j];
                bool admissible = true;
                bool degenerate = false;
                free_multiplets.clear();
                for (std::size_t mu = 0; mu < p && admissible && !degenerate; ++mu) {
                    int f = 0;
                    for (std::size_t idx : members[mu]) {
                        if (std::find(incident.begin(), incident.end(), idx) != incident.end())
                            continue;
                        const double h = dot(dataset.point(idx), vertex);
                        if (std::abs(h) < kIncidenceTolerance) {
                            degenerate = true;
                            break;
                        }
                        const int s = h > 0.0 ? 1 : -1;
                        if (f == 0) {
                            f = s;
                        } else if (f != s) {
                            admissible = false;
                            break;
                        }
                    }
                    fixed[mu] = f;
                    if (f == 0) free_multiplets.push_back(mu);
                }
                // A degenerate line (another hyperplane through it) is skipped;
                // its regions are reached from their other vertices.
                if (!admissible || degenerate) continue;

                std::fill(key.begin(), key.end(), 0);
                for (std::size_t mu = 0; mu < p; ++mu)
                    if (fixed[mu] > 0) key[mu / 64] |= std::uint64_t{1} << (mu % 64);
                const std::size_t choices = std::size_t{1} << free_multiplets.size();
                for (std::size_t c = 0; c < choices; ++c) {
                    SignKey candidate = key;
                    for (std::size_t f = 0; f < free_multiplets.size(); ++f)
                        if (c & (std::size_t{1} << f)) {
                            const std::size_t mu = free_multiplets[f];
                            candidate[mu / 64] |= std::uint64_t{1} << (mu % 64);
                        }
                    if (consider(candidate)) {
                        probe.count = found.size();
                        probe.sat = true;
                        probe.kind = ProbeKind::early_exit;
                        return probe;
                    }
                }
            }
        }
        // Next combination of r indices out of u.
        if (r == 0) break;
        std::size_t i = r;
        while (i > 0 && combo[i - 1] == u - r + (i - 1)) --i;
        if (i == 0) break;
        ++combo[i - 1];
        for (std::size_t j = i; j < r; ++j) combo[j] = combo[j - 1] + 1;
    }

    probe.count = found.size();
    probe.sat = probe.count > 0;
    return probe;
}

}  // namespace vclab
