// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "vclab/asymptotics.hpp"
#include "vclab/errors.hpp"
#include "vclab/montecarlo.hpp"
#include "vclab/recursion.hpp"

using namespace vclab;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double time_limit_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > time_limit_s) {
        o.pass = false;
        o.detail += " [over time limit]";
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d: %s (%.2fs / %.0fs) %s\n", o.pass ? "PASS" : "FAIL", id, title,
                elapsed, time_limit_s, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v, int digits = 6) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

// Load grid alpha = p / n for p = 1..p_max.
std::vector<double> integer_loads(std::size_t n, std::size_t p_max) {
    std::vector<double> out;
    for (std::size_t p = 1; p <= p_max; ++p) out.push_back(static_cast<double>(p) / n);
    return out;
}

Crossover scan_crossover(const ScanTarget& target, std::size_t n, std::size_t p_max,
                         std::size_t trials, std::uint64_t seed) {
    const auto grid = integer_loads(n, p_max);
    const auto points = sat_fraction_scan(target, n, grid, trials, seed);
    return crossover_load(points);
}

}  // namespace

int main() {
    criterion(1, "Cover baseline C(n, 2n) = 2^(2n-1)", 1.0, [] {
        for (int n = 1; n <= 12; ++n) {
            const BigInt c = cover_count_exact(n, 2 * n);
            const BigInt total = BigInt(1) << (2 * n);
            if (c != (BigInt(1) << (2 * n - 1)) || c * 2 != total)
                return Outcome{false, "n=" + std::to_string(n)};
        }
        return Outcome{true, "n=1..12, realizable fraction exactly 1/2"};
    });

    criterion(2, "recursion with theta=(1,1) equals Cover", 1.0, [] {
        const auto table = build_count_table(make_theta({1.0, 1.0}), 60, 60);
        double worst = 0.0;
        for (int n = 1; n <= 60; ++n)
            for (int p = 1; p <= 60; ++p) {
                const double exact = cover_count_exact(n, p).convert_to<double>();
                const double value = std::exp(table.log_count(n, p));
                worst = std::max(worst, std::abs(value - exact) / exact);
            }
        return Outcome{worst <= 1e-10, "max relative error " + fmt(worst, 3)};
    });

    criterion(3, "brute-force mean count within 3 stderr of the recursion", 120.0, [] {
        bool ok = true;
        std::ostringstream detail;
        int misses = 0;
        for (double rho : {0.0, 0.5}) {
            const auto spec = StructureSpec::pair(rho);
            const auto table = build_count_table(theta_coefficients(spec), 3, 4);
            for (std::size_t n : {2u, 3u})
                for (std::size_t p : {2u, 3u, 4u}) {
                    const auto est = estimate_mean_count(spec, n, p, 500, 1000 + 10 * n + p);
                    const double predicted = std::exp(table.log_count(static_cast<int>(n), static_cast<int>(p)));
                    const double gap = std::abs(est.value - predicted);
                    if (!(gap <= 3.0 * est.std_error)) {
                        ok = false;
                        ++misses;
                        detail << " rho=" << rho << ",n=" << n << ",p=" << p << ": "
                               << fmt(est.value, 4) << "+-" << fmt(est.std_error, 2) << " vs "
                               << fmt(predicted, 4) << ";";
                    }
                }
        }
        return Outcome{ok, ok ? "12/12 cells within 3 stderr"
                              : std::to_string(misses) + "/12 cells off:" + detail.str()};
    });

    criterion(4, "recursion crossing (40,20) tracks alpha*", 10.0, [] {
        bool ok = true;
        std::ostringstream detail;
        for (double rho : {0.0, 0.4, 0.8}) {
            const double psi = psi2(rho);
            const double star = transition_load(psi, 1.0).alpha_star;
            const double cross =
                crossing_load(make_theta({psi, 1.0, 1.0 - psi}), 40, 20, {1.0, 3.0 * star + 5.0});
            const double rel = std::abs(cross - star) / star;
            ok = ok && rel <= 0.10;
            detail << "rho=" << rho << ": " << fmt(cross, 5) << " vs " << fmt(star, 5) << " ("
                   << fmt(100 * rel, 3) << "%); ";
        }
        const double at_zero = transition_load(0.5, 1.0).alpha_star;
        ok = ok && std::abs(at_zero - 4.86) <= 0.01;
        detail << "alpha*(0)=" << fmt(at_zero, 7);
        return Outcome{ok, detail.str()};
    });

    criterion(5, "annealed pair threshold is a lower bound", 1.0, [] {
        bool ok = true;
        for (double rho : {0.0, 0.2, 0.4, 0.6, 0.8})
            ok = ok && annealed_threshold_pairs(rho).alpha_star <
                           transition_load(psi2(rho), 1.0).alpha_star;
        const double value = annealed_threshold_pairs(0.0).alpha_star;
        const double closed = (1.0 + std::log(2.0 * std::numbers::pi)) / (2.0 * std::log(2.0));
        ok = ok && std::abs(value - closed) <= 1e-12;
        return Outcome{ok, "alpha2*(0)=" + fmt(value, 15) + ", |diff|=" + fmt(std::abs(value - closed), 2)};
    });

    criterion(6, "entropy non-monotonic for pairs, monotonic for points", 1.0, [] {
        const int n = 5, p_max = 400;
        const auto pairs = build_count_table(theta_coefficients(StructureSpec::pair(0.5)), n, p_max);
        const auto points = build_count_table(theta_coefficients(StructureSpec::unstructured()), n, p_max);
        int argmax = 1;
        for (int p = 1; p <= p_max; ++p)
            if (vc_entropy(pairs, n, p) > vc_entropy(pairs, n, argmax)) argmax = p;
        const bool interior = argmax > 1 && argmax < p_max;
        const double tail = vc_entropy(pairs, n, p_max);
        bool increasing = true;
        for (int p = 2; p <= p_max; ++p)
            increasing = increasing && vc_entropy(points, n, p) > vc_entropy(points, n, p - 1);
        return Outcome{interior && tail < std::log(2.0) && increasing,
                       "argmax p=" + std::to_string(argmax) + ", H(" + std::to_string(p_max) +
                           ")=" + fmt(tail, 4) + ", k=1 strictly increasing=" +
                           (increasing ? "yes" : "no")};
    });

    criterion(7, "finite-size scaling slope and collapse", 5.0, [] {
        const double star = transition_load(0.5, 1.0).alpha_star;
        std::vector<double> log_n, log_c;
        for (int n = 50; n <= 400; n += 10) {
            log_n.push_back(std::log(n));
            log_c.push_back(asymptotic_log_count(star, n, 0.5, 1.0));
        }
        const double slope = fit_slope(log_n, log_c);
        std::vector<CurvePoint> curve;
        for (double n : {50.0, 100.0, 200.0})
            for (int i = 0; i <= 80; ++i) {
                const double alpha = star * (1.0 + (-4.0 + 0.1 * i) / n);
                curve.push_back({n, alpha, asymptotic_log_count(alpha, n, 0.5, 1.0)});
            }
        const double score = fss_rescale(curve, star).score;
        const double control = fss_rescale(curve, star, {0.0, 1.0}).score;
        const bool ok = slope >= -0.55 && slope <= -0.45 && score * 5.0 <= control;
        return Outcome{ok, "slope=" + fmt(slope, 5) + ", score=" + fmt(score, 3) +
                               ", control=" + fmt(control, 3) + " (x" + fmt(control / score, 3) + ")"};
    });

    criterion(8, "Monte Carlo phase probe at n=3", 600.0, [] {
        const std::size_t n = 3, trials = 1000;
        const double star = transition_load(psi2(0.5), 1.0).alpha_star;
        const std::vector<double> ends{1.0, 3.0 * star};
        const auto edge = sat_fraction_scan(ScanTarget::pairs(StructureSpec::pair(0.5)), n, ends,
                                            trials, 801);
        bool ok = edge[0].sat_fraction >= 0.95 && edge[1].sat_fraction <= 0.05;
        std::ostringstream detail;
        detail << "sat(1)=" << edge[0].sat_fraction << ", sat(" << fmt(ends[1], 4)
               << ", p=" << edge[1].p << ")=" << edge[1].sat_fraction << "; crossovers";
        double previous = 0.0;
        std::uint64_t seed = 810;
        for (double rho : {0.2, 0.5, 0.8}) {
            const auto c = scan_crossover(ScanTarget::pairs(StructureSpec::pair(rho)), n, 60, trials, ++seed);
            ok = ok && std::isfinite(c.alpha) && c.alpha > previous;
            previous = c.alpha;
            detail << ' ' << rho << ':' << fmt(c.alpha, 4) << "+-" << fmt(c.std_error, 2);
        }
        return Outcome{ok, detail.str()};
    });

    criterion(9, "margin probe ordering at n=3", 600.0, [] {
        const std::size_t n = 3, trials = 1000;
        const auto half = scan_crossover(ScanTarget::margin(0.5), n, 30, trials, 901);
        const auto one = scan_crossover(ScanTarget::margin(1.0), n, 30, trials, 902);
        const double sep = (half.alpha - one.alpha) / std::hypot(half.std_error, one.std_error);
        bool decreasing = true;
        double previous = std::numeric_limits<double>::infinity();
        for (double kappa : {0.25, 0.5, 1.0, 2.0}) {
            const double a = annealed_threshold_margin(kappa).alpha_star;
            decreasing = decreasing && a < previous;
            previous = a;
        }
        return Outcome{sep >= 3.0 && decreasing,
                       "kappa=0.5: " + fmt(half.alpha, 4) + "+-" + fmt(half.std_error, 2) +
                           ", kappa=1: " + fmt(one.alpha, 4) + "+-" + fmt(one.std_error, 2) +
                           " (" + fmt(sep, 3) + " sigma), annealed decreasing=" +
                           (decreasing ? "yes" : "no")};
    });

    criterion(10, "invariant suites", 60.0, [] {
        int checks = 0;
        std::string broken;
        const auto expect = [&](bool cond, const std::string& what) {
            ++checks;
            if (!cond && broken.empty()) broken = what;
        };
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            Rng rng(4242, seed);
            const double rho = 0.1 * static_cast<double>(seed % 10);
            const auto ds = sample_dataset(StructureSpec::pair(rho), 3, 8, rng);
            const auto exact = count_admissible_dichotomies(ds, 0.0);
            expect(exact.count % 2 == 0, "negation evenness");
            const Matrix rotation = sample_orthonormal_frame(3, 3, rng);
            expect(count_admissible_dichotomies(ds.rotated(rotation), 0.0).count == exact.count,
                   "rotation invariance");
            std::uint64_t previous = exact.count;
            for (double margin : {0.02, 0.05, 0.1, 0.2}) {
                const auto c = count_admissible_dichotomies(ds, margin).count;
                expect(c <= previous, "margin monotonicity");
                previous = c;
            }
            // Dropping a multiplet relaxes the constraints.
            std::vector<double> fewer(ds.coords().begin(), ds.coords().end() - 2 * 3);
            const Dataset smaller(ds.spec(), 3, 7, fewer);
            const auto sub = count_admissible_dichotomies(smaller, 0.0).count;
            expect(exact.count <= 2 * sub && (exact.sat <= (sub > 0)), "multiplet monotonicity");
        }
        for (double rho = -0.99; rho < 1.0; rho += 0.01) {
            const double arctan_form =
                2.0 / std::numbers::pi * std::atan(std::sqrt((1.0 + rho) / (1.0 - rho)));
            expect(std::abs(psi2(rho) - arctan_form) <= 1e-12 &&
                       std::abs(psi2(rho) - (0.5 + std::asin(rho) / std::numbers::pi)) <= 1e-12,
                   "psi2 identity");
        }
        for (double theta0 : {0.3, 0.5, 0.8})
            for (double n : {2.0, 10.0, 100.0})
                for (double alpha : {0.5, 2.0, 9.0}) {
                    const double direct = asymptotic_log_count(alpha, n, theta0, 1.0);
                    const double pole = AsymptoticForm{theta0, 1.0, n}.log_count(alpha);
                    expect(std::abs(direct - pole) <= 1e-9 * std::max(1.0, std::abs(direct)),
                           "pole form equality");
                }
        return Outcome{broken.empty(), broken.empty() ? std::to_string(checks) + " checks"
                                                      : "broken: " + broken};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
