#include "vclab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "vclab/errors.hpp"
#include "vclab/numerics.hpp"

namespace vclab {

namespace {

// (log 2pi + 1) / 2, the weight-space entropy of the annealed volume.
const double kAnnealedEntropy = 0.5 * (std::log(2.0 * std::numbers::pi) + 1.0);

void check_thetas(double theta0, double theta1) {
    if (!(theta0 > 0.0 && theta0 <= 1.0))
        throw DomainError("theta0 must lie in (0, 1]");
    if (!(theta1 > 0.0)) throw DomainError("theta1 must be positive");
}

}  // namespace

double AsymptoticForm::log_finite_part() const {
    return std::log(2.0) + (n - 1.0) * std::log(theta1) - 2.0 * n * std::log(theta0);
}

double AsymptoticForm::log_count(double alpha) const {
    const double p = alpha * n;
    const double r = pole_order();
    const double log_binom = std::lgamma(p + r) - std::lgamma(r) - std::lgamma(p + 1.0);
    return log_finite_part() - (p + r) * std::log(pole_location()) + log_binom;
}

double asymptotic_log_count(double alpha, double n, double theta0, double theta1) {
    if (!(alpha > 0.0)) throw DomainError("asymptotic_log_count: load must be positive");
    if (!(n >= 1.0)) throw DomainError("asymptotic_log_count: n must be at least 1");
    check_thetas(theta0, theta1);
    const double p = alpha * n;
    return std::log(2.0) + log_gamma(p + n) - log_gamma(n) - log_gamma(p + 1.0) +
           (n - 1.0) * std::log(theta1) + (alpha - 1.0) * n * std::log(theta0);
}

double entropic_term(double alpha) {
    if (alpha < 0.0) throw DomainError("entropic_term: load must be nonnegative");
    if (alpha == 0.0) return 0.0;
    return (alpha + 1.0) * std::log1p(alpha) - alpha * std::log(alpha);
}

double transition_function(double alpha, double theta0, double theta1) {
    return entropic_term(alpha) + (alpha - 1.0) * std::log(theta0) + std::log(theta1);
}

std::string to_string(TransitionMethod method) {
    switch (method) {
        case TransitionMethod::combinatorial: return "combinatorial";
        case TransitionMethod::annealed_pairs: return "annealed-pairs";
        case TransitionMethod::annealed_margin: return "annealed-margin";
        case TransitionMethod::crossing_numeric: return "crossing-numeric";
        case TransitionMethod::montecarlo_fit: return "montecarlo-fit";
    }
    return "unknown";
}

nlohmann::json to_json(const TransitionResult& result) {
    return {{"alpha_star", result.alpha_star},
            {"method", to_string(result.method)},
            {"residual", result.residual},
            {"bracket", {result.bracket_lo, result.bracket_hi}}};
}

TransitionResult transition_load(double theta0, double theta1) {
    check_thetas(theta0, theta1);
    if (theta0 >= 1.0)
        throw NoTransition("transition_load: theta0 = 1 (unstructured limit) has no transition");
    const auto f = [&](double a) { return transition_function(a, theta0, theta1); };
    const double peak = theta0 / (1.0 - theta0);
    if (!(f(peak) > 0.0))
        throw NoTransition("transition_load: growth rate is not positive at its maximum");
    double hi = 2.0 * peak + 1.0;
    while (f(hi) >= 0.0) {
        hi *= 2.0;
        if (!std::isfinite(hi)) throw NoTransition("transition_load: no sign change found");
    }
    const auto root = bisect(f, peak, hi, 1e-12 * std::max(1.0, peak));
    return {root.root, TransitionMethod::combinatorial, root.lo, root.hi,
            std::abs(f(root.root))};
}

TransitionResult transition_load_smaller(double theta0, double theta1) {
    check_thetas(theta0, theta1);
    if (theta0 >= 1.0) throw NoTransition("transition_load_smaller: theta0 = 1");
    const auto f = [&](double a) { return transition_function(a, theta0, theta1); };
    const double peak = theta0 / (1.0 - theta0);
    // f(0+) = log theta1 - log theta0.
    const double lo = std::min(1e-300, peak);
    if (!(f(peak) > 0.0) || f(lo) >= 0.0)
        throw NoTransition("transition_load_smaller: no root below the stationary point");
    const auto root = bisect(f, lo, peak, 1e-12 * std::max(1.0, peak));
    return {root.root, TransitionMethod::combinatorial, root.lo, root.hi,
            std::abs(f(root.root))};
}

double annealed_free_entropy_pairs(double alpha, double rho) {
    return kAnnealedEntropy + alpha * std::log(0.5 + std::asin(rho) / std::numbers::pi);
}

TransitionResult annealed_threshold_pairs(double rho) {
    if (!(rho >= -1.0 && rho <= 1.0))
        throw DomainError("annealed_threshold_pairs: overlap must lie in [-1, 1)");
    if (rho == 1.0)
        throw NoTransition("annealed_threshold_pairs: threshold diverges at rho = 1");
    if (rho == -1.0)
        throw DomainError("annealed_threshold_pairs: antipodal pairs are never admissible");
    const double log_psi = std::log(0.5 + std::asin(rho) / std::numbers::pi);
    const double alpha = -kAnnealedEntropy / log_psi;
    return {alpha, TransitionMethod::annealed_pairs, alpha, alpha,
            std::abs(annealed_free_entropy_pairs(alpha, rho))};
}

double annealed_free_entropy_margin(double alpha, double kappa) {
    return kAnnealedEntropy + alpha * std::log(erfc(kappa));
}

TransitionResult annealed_threshold_margin(double kappa) {
    if (kappa < 0.0) throw DomainError("annealed_threshold_margin: margin must be nonnegative");
    if (kappa == 0.0)
        throw NoTransition("annealed_threshold_margin: threshold diverges at kappa = 0");
    const double alpha = -kAnnealedEntropy / std::log(erfc(kappa));
    return {alpha, TransitionMethod::annealed_margin, alpha, alpha,
            std::abs(annealed_free_entropy_margin(alpha, kappa))};
}

namespace {

double interpolate(const std::vector<RescaledPoint>& curve, double x) {
    auto it = std::lower_bound(curve.begin(), curve.end(), x,
                               [](const RescaledPoint& p, double v) { return p.x < v; });
    if (it == curve.begin()) return it->log_y;
    if (it == curve.end()) return curve.back().log_y;
    const auto& right = *it;
    const auto& left = *(it - 1);
    if (right.x == left.x) return right.log_y;
    const double t = (x - left.x) / (right.x - left.x);
    return (1.0 - t) * left.log_y + t * right.log_y;
}

}  // namespace

Collapse fss_rescale(std::span<const CurvePoint> curve, double alpha_star,
                     ScalingExponents exponents) {
    if (!(alpha_star > 0.0)) throw DomainError("fss_rescale: alpha_star must be positive");
    Collapse out;
    std::map<double, std::vector<RescaledPoint>> by_n;
    for (const auto& pt : curve) {
        if (!std::isfinite(pt.log_count)) throw DomainError("fss_rescale: counts must be finite");
        const double reduced = (pt.alpha - alpha_star) / alpha_star;
        RescaledPoint r{pt.n, reduced * std::pow(pt.n, 1.0 / exponents.nu),
                        exponents.beta / exponents.nu * std::log(pt.n) + pt.log_count};
        out.points.push_back(r);
        by_n[pt.n].push_back(r);
    }
    for (auto& [n, pts] : by_n)
        std::sort(pts.begin(), pts.end(),
                  [](const RescaledPoint& a, const RescaledPoint& b) { return a.x < b.x; });

    constexpr int kSamples = 201;
    double total = 0.0;
    int pairs = 0;
    for (auto a = by_n.begin(); a != by_n.end(); ++a)
        for (auto b = std::next(a); b != by_n.end(); ++b) {
            const double lo = std::max(a->second.front().x, b->second.front().x);
            const double hi = std::min(a->second.back().x, b->second.back().x);
            if (!(hi > lo)) continue;
            double acc = 0.0;
            for (int i = 0; i < kSamples; ++i) {
                const double x = lo + (hi - lo) * i / (kSamples - 1);
                const double d = interpolate(a->second, x) - interpolate(b->second, x);
                acc += d * d;
            }
            total += acc / kSamples;
            ++pairs;
        }
    out.score = pairs > 0 ? total / pairs : std::numeric_limits<double>::quiet_NaN();
    return out;
}

double fit_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw DomainError("fit_slope: need at least two paired points");
    const double count = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= count;
    my /= count;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw DomainError("fit_slope: abscissae are all equal");
    return sxy / sxx;
}

}  // namespace vclab
