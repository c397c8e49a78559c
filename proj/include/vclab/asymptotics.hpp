#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace vclab {

/// Large-p behaviour of the count generating function at fixed n: a single
/// dominant pole at z0 = 1/theta0 of order n with finite part
/// R = 2 theta1^(n-1) theta0^(-2n).
struct AsymptoticForm {
    double theta0;
    double theta1;
    double n;

    double pole_location() const { return 1.0 / theta0; }
    double pole_order() const { return n; }
    double log_finite_part() const;

    // log[R z0^(-p-r) binom(p + r - 1, r - 1)] at p = alpha n, r = n.
    double log_count(double alpha) const;
};

/// log C(alpha; n) = log 2 + lnG(alpha n + n) - lnG(n) - lnG(alpha n + 1)
///                   + (n - 1) log theta1 + (alpha - 1) n log theta0.
/// p = alpha n is real, not rounded.
double asymptotic_log_count(double alpha, double n, double theta0, double theta1);

/// S(alpha) = (alpha + 1) log(alpha + 1) - alpha log alpha, S(0) = 0.
double entropic_term(double alpha);

/// Growth rate of the count per unit n: S(alpha) + (alpha - 1) log theta0 + log theta1.
/// Its larger root is the transition load.
double transition_function(double alpha, double theta0, double theta1);

enum class TransitionMethod {
    combinatorial,
    annealed_pairs,
    annealed_margin,
    crossing_numeric,
    montecarlo_fit,
};

std::string to_string(TransitionMethod method);

struct TransitionResult {
    double alpha_star = 0.0;
    TransitionMethod method = TransitionMethod::combinatorial;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double residual = 0.0;
};

nlohmann::json to_json(const TransitionResult& result);

/// Larger root of transition_function. Bisects on [alpha_peak, alpha_hi]
/// where alpha_peak = theta0 / (1 - theta0) is the stationary point and
/// alpha_hi is doubled until the function turns negative.
/// Throws NoTransition for theta0 = 1 or a non-positive peak value.
TransitionResult transition_load(double theta0, double theta1);

/// The smaller root on (0, alpha_peak], when it exists (NoTransition otherwise).
/// Never the reported transition.
TransitionResult transition_load_smaller(double theta0, double theta1);

/// v(alpha, rho) = (log 2pi + 1) / 2 + alpha log(1/2 + arcsin(rho) / pi).
double annealed_free_entropy_pairs(double alpha, double rho);

/// Root of v(., rho): -(log 2pi + 1) / (2 log(1/2 + arcsin(rho)/pi)).
/// Throws NoTransition at rho = 1 (divergence), DomainError outside [-1, 1)
/// or at rho = -1 where the threshold collapses to zero.
TransitionResult annealed_threshold_pairs(double rho);

/// Same construction with the per-pattern factor erfc(kappa).
double annealed_free_entropy_margin(double alpha, double kappa);

/// -(log 2pi + 1) / (2 log erfc(kappa)). NoTransition at kappa = 0,
/// DomainError for kappa < 0.
TransitionResult annealed_threshold_margin(double kappa);

struct ScalingExponents {
    double beta = 0.5;
    double nu = 1.0;
};

struct CurvePoint {
    double n;
    double alpha;
    double log_count;
};

struct RescaledPoint {
    double n;
    double x;      // (alpha - alpha*) / alpha* * n^(1/nu)
    double log_y;  // (beta/nu) log n + log C
};

struct Collapse {
    std::vector<RescaledPoint> points;
    // Mean squared vertical gap between the linearly interpolated rescaled
    // curves of each pair of distinct n, over their common x range.
    double score;
};

Collapse fss_rescale(std::span<const CurvePoint> curve, double alpha_star,
                     ScalingExponents exponents = {});

/// Least-squares slope of ys against xs.
double fit_slope(std::span<const double> xs, std::span<const double> ys);

}  // namespace vclab
