#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "vclab/errors.hpp"
#include "vclab/montecarlo.hpp"
#include "vclab/recursion.hpp"

using namespace vclab;

namespace {

// Brute-force margin in n <= 3: best min_i z_i . w over a dense set of unit
// directions. A lower bound that converges to the true value from below.
double dense_direction_margin(const std::vector<double>& pts, std::size_t n,
                              const std::vector<int>& signs) {
    const std::size_t m = signs.size();
    double best = -1e300;
    const auto eval = [&](const double* w) {
        double worst = 1e300;
        for (std::size_t i = 0; i < m; ++i) {
            double v = 0.0;
            for (std::size_t c = 0; c < n; ++c) v += signs[i] * pts[i * n + c] * w[c];
            worst = std::min(worst, v);
        }
        best = std::max(best, worst);
    };
    if (n == 2) {
        for (int i = 0; i < 200000; ++i) {
            const double t = 2.0 * std::numbers::pi * i / 200000;
            const double w[2] = {std::cos(t), std::sin(t)};
            eval(w);
        }
    } else {
        for (int i = 0; i <= 600; ++i)
            for (int j = 0; j < 1200; ++j) {
                const double th = std::numbers::pi * i / 600;
                const double ph = 2.0 * std::numbers::pi * j / 1200;
                const double w[3] = {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                                     std::cos(th)};
                eval(w);
            }
    }
    return std::max(best, 0.0);
}

Dataset fixed_dataset(const StructureSpec& spec, std::size_t n, std::size_t p,
                      std::uint64_t seed) {
    Rng rng(seed, 0);
    return sample_dataset(spec, n, p, rng);
}

}  // namespace

TEST_CASE("max margin examples") {
    const std::vector<double> one{1.0, 0.0};
    CHECK(max_margin(one, 2, std::vector<int>{1}) == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<double> axes{1.0, 0.0, 0.0, 1.0};
    CHECK(max_margin(axes, 2, std::vector<int>{1, 1}) ==
          doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
    CHECK(max_margin(axes, 2, std::vector<int>{1, -1}) ==
          doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));

    std::vector<double> star;
    for (double deg : {0.0, 120.0, 240.0}) {
        star.push_back(std::cos(deg * std::numbers::pi / 180.0));
        star.push_back(std::sin(deg * std::numbers::pi / 180.0));
    }
    CHECK(max_margin(star, 2, std::vector<int>{1, 1, 1}) == 0.0);
    CHECK_FALSE(linearly_separable(star, 2, std::vector<int>{1, 1, 1}));
    CHECK(linearly_separable(star, 2, std::vector<int>{1, 1, -1}));

    // Antipodal points with equal labels.
    const std::vector<double> anti{1.0, 0.0, -1.0, 0.0};
    CHECK(max_margin(anti, 2, std::vector<int>{1, 1}) == 0.0);

    CHECK_THROWS_AS(max_margin(one, 2, std::vector<int>{}), DomainError);
    CHECK_THROWS_AS(max_margin(one, 2, std::vector<int>{1, 1}), DimensionError);
}

TEST_CASE("max margin matches a dense direction search") {
    for (std::size_t n : {2u, 3u})
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            Rng rng(seed, n);
            const std::size_t m = 2 + rng.below(5);
            std::vector<double> pts(m * n);
            std::vector<int> signs(m);
            for (std::size_t i = 0; i < m; ++i) {
                sample_unit_vector(std::span<double>(pts.data() + i * n, n), rng);
                signs[i] = rng.uniform() < 0.5 ? -1 : 1;
            }
            MarginSolver solver;
            const double value = solver.solve(pts, n, signs);
            const double dense = dense_direction_margin(pts, n, signs);
            CHECK(value >= dense - 1e-12);
            CHECK(value <= dense + (n == 2 ? 5e-5 : 6e-3));
            if (value > 0.0) {
                const auto w = solver.direction();
                double worst = 1e300;
                for (std::size_t i = 0; i < m; ++i)
                    worst = std::min(worst, signs[i] * dot(std::span<const double>(pts.data() + i * n, n), w));
                CHECK(worst == doctest::Approx(value).epsilon(1e-9));
            }
        }
}

TEST_CASE("enumeration examples") {
    // Coincident pairs behave like p single points in general position.
    const auto twins = fixed_dataset(StructureSpec::pair(1.0), 2, 2, 3);
    CHECK(count_admissible_dichotomies(twins, 0.0).count == 4);

    const auto singles = fixed_dataset(StructureSpec::unstructured(), 2, 3, 4);
    CHECK(count_admissible_dichotomies(singles, 0.0).count == 6);

    // n >= kp: every dichotomy is realizable.
    const auto roomy = fixed_dataset(StructureSpec::pair(0.3), 8, 4, 5);
    const auto probe = count_admissible_dichotomies(roomy, 0.0);
    CHECK(probe.count == 16);
    CHECK(probe.exact());
    CHECK(probe.kind == ProbeKind::exact_enumeration);

    const auto big = fixed_dataset(StructureSpec::pair(0.3), 3, 30, 6);
    CHECK_THROWS_AS(count_admissible_dichotomies(big, 0.0), BudgetExceeded);
    CHECK_THROWS_AS(count_admissible_dichotomies(roomy, -0.1), DomainError);
}

TEST_CASE("orthogonal pairs in the plane leave one completion per sign") {
    // Two orthogonal pairs in R^2: mean-field gives 3, the exact count is 2.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto ds = fixed_dataset(StructureSpec::pair(0.0), 2, 2, seed);
        CHECK(count_admissible_dichotomies(ds, 0.0).count == 2);
    }
}

TEST_CASE("count invariants") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto ds = fixed_dataset(StructureSpec::pair(0.4), 3, 7, seed);
        const auto exact = count_admissible_dichotomies(ds, 0.0);
        CHECK(exact.count % 2 == 0);
        CHECK(exact.count <= 128);

        Rng rotation_rng(seed, 99);
        const Matrix rotation = sample_orthonormal_frame(3, 3, rotation_rng);
        CHECK(count_admissible_dichotomies(ds.rotated(rotation), 0.0).count == exact.count);

        CHECK(count_admissible_dichotomies(ds, 0.05).count <= exact.count);
        CHECK(count_admissible_dichotomies(ds, 0.2).count <=
              count_admissible_dichotomies(ds, 0.05).count);

        Rng rng(seed, 7);
        const auto random = random_classifier_probe(ds, 20000, rng);
        CHECK(random.count <= exact.count);
        CHECK(random.kind == ProbeKind::random_classifiers);
        CHECK_FALSE(random.exact());
    }
}

TEST_CASE("count grows with the overlap at matched seeds") {
    // Same frames, so only the template changes.
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        for (double rho : {0.0, 0.5, 0.9, 1.0}) {
            const auto ds = fixed_dataset(StructureSpec::pair(rho), 3, 6, seed);
            const auto count = count_admissible_dichotomies(ds, 0.0).count;
            if (rho == 1.0) CHECK(count == cover_count_exact(3, 6).convert_to<std::uint64_t>());
        }
    }
    // On average the count increases with rho.
    const auto low = estimate_mean_count(StructureSpec::pair(0.1), 3, 6, 200, 11);
    const auto high = estimate_mean_count(StructureSpec::pair(0.8), 3, 6, 200, 11);
    CHECK(high.value > low.value + 3.0 * std::hypot(low.std_error, high.std_error));
}

TEST_CASE("single points reproduce Cover's count") {
    for (std::size_t n = 1; n <= 4; ++n)
        for (std::size_t p = 1; p <= 8; ++p) {
            const auto ds = fixed_dataset(StructureSpec::unstructured(), std::max<std::size_t>(n, 1),
                                          p, 31 * n + p);
            const auto expected = cover_count_exact(n, p).convert_to<std::uint64_t>();
            CHECK(count_admissible_dichotomies(ds, 0.0).count == expected);
            CHECK(arrangement_probe(ds, 0.0, false).count == expected);
        }
}

TEST_CASE("arrangement probe agrees with enumeration") {
    for (double rho : {0.0, 0.5, 0.9, 1.0})
        for (std::size_t n : {2u, 3u, 4u})
            for (std::size_t p : {2u, 5u, 9u})
                for (std::uint64_t seed = 0; seed < 4; ++seed) {
                    const auto ds = fixed_dataset(StructureSpec::pair(rho), n, p, seed * 13 + p);
                    const auto enumerated = count_admissible_dichotomies(ds, 0.0);
                    const auto walked = arrangement_probe(ds, 0.0, false);
                    CHECK(walked.count == enumerated.count);
                    CHECK(walked.exact());
                    CHECK(arrangement_probe(ds, 0.0, true).sat == enumerated.sat);
                    CHECK(admissible_exists(ds, 0.0).sat == enumerated.sat);
                    const auto with_margin = arrangement_probe(ds, 0.1, false);
                    CHECK(with_margin.count == count_admissible_dichotomies(ds, 0.1).count);
                }
    // Triplets too.
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto ds = fixed_dataset(StructureSpec::equicorrelated(3, 0.6), 3, 6, seed);
        CHECK(arrangement_probe(ds, 0.0, false).count ==
              count_admissible_dichotomies(ds, 0.0).count);
    }
}

TEST_CASE("mean count is reproducible and thread independent") {
    TrialOptions one;
    one.threads = 1;
    TrialOptions many;
    many.threads = 3;
    const auto a = estimate_mean_count(StructureSpec::pair(0.5), 3, 5, 40, 2024, 0.0, one);
    const auto b = estimate_mean_count(StructureSpec::pair(0.5), 3, 5, 40, 2024, 0.0, many);
    CHECK(a.value == b.value);
    CHECK(a.std_error == b.std_error);
    CHECK_THROWS_AS(estimate_mean_count(StructureSpec::pair(0.5), 3, 5, 1, 1), DomainError);
}

TEST_CASE("probe names") {
    for (Probe p : {Probe::automatic, Probe::enumeration, Probe::arrangement,
                    Probe::random_classifiers})
        CHECK(probe_from_string(to_string(p)) == p);
    CHECK_THROWS_AS(probe_from_string("magic"), ValidationError);
}

TEST_CASE("sat fraction scan") {
    const std::vector<double> grid{1.0, 2.0, 4.0, 8.0, 16.0};
    const auto points = sat_fraction_scan(ScanTarget::pairs(StructureSpec::pair(0.2)), 3, grid, 60, 9);
    REQUIRE(points.size() == grid.size());
    CHECK(points.front().sat_fraction == 1.0);
    CHECK(points.back().sat_fraction < 0.5);
    for (std::size_t i = 1; i < points.size(); ++i)
        CHECK(points[i].sat_fraction <= points[i - 1].sat_fraction + 0.1);
    CHECK(points[2].p == 12);
    CHECK(std::isnan(points[0].mean_count));

    const auto crossover = crossover_load(points);
    CHECK(crossover.alpha > 2.0);
    CHECK(crossover.alpha < 16.0);
    CHECK(crossover.std_error > 0.0);

    const std::vector<PhasePoint> flat{{1.0, 3, 10, 1.0, 0.0, 0.0, 0.0},
                                       {2.0, 6, 10, 0.9, 0.1, 0.0, 0.0}};
    CHECK_THROWS_AS(crossover_load(flat), NoCrossing);

    ScanOptions with_counts;
    with_counts.with_counts = true;
    const std::vector<double> small{1.0};
    const auto counted =
        sat_fraction_scan(ScanTarget::pairs(StructureSpec::pair(0.2)), 3, small, 10, 9, with_counts);
    CHECK(counted[0].mean_count > 0.0);

    const auto margin_scan = sat_fraction_scan(ScanTarget::margin(0.5), 3, grid, 30, 9);
    CHECK(margin_scan.front().sat_fraction >= margin_scan.back().sat_fraction);
    CHECK(ScanTarget::margin(0.5).effective_margin(4) == doctest::Approx(0.25));
    CHECK_THROWS_AS(ScanTarget::margin(-1.0), ValidationError);
    CHECK_THROWS_AS(sat_fraction_scan(ScanTarget::margin(0.5), 3, grid, 0, 9), ValidationError);
}

TEST_CASE("parallel_for rethrows worker failures") {
    std::vector<int> slots(50, 0);
    parallel_for(slots.size(), 4, [&](std::size_t i) { slots[i] = static_cast<int>(i); });
    for (std::size_t i = 0; i < slots.size(); ++i) CHECK(slots[i] == static_cast<int>(i));
    CHECK_THROWS_AS(parallel_for(10, 2,
                                 [](std::size_t i) {
                                     if (i == 7) throw DomainError("boom");
                                 }),
                    DomainError);
}
