#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "vclab/numerics.hpp"

namespace vclab {

/// A multiplet ensemble: k points on the unit sphere with a fixed overlap
/// (Gram) matrix shared by every multiplet.
class StructureSpec {
public:
    /// Validates the Gram matrix: square, symmetric, unit diagonal, entries
    /// in [-1, 1] and positive semidefinite. Throws ValidationError.
    StructureSpec(std::size_t k, Matrix gram);

    static StructureSpec unstructured() { return StructureSpec(1, Matrix::identity(1)); }
    static StructureSpec pair(double rho);
    // Every off-diagonal overlap equal to rho.
    static StructureSpec equicorrelated(std::size_t k, double rho);

    std::size_t k() const { return k_; }
    const Matrix& gram() const { return gram_; }
    // L with L L^T = gram, computed once.
    const Matrix& template_factor() const { return factor_; }

    // rho_{12}; only meaningful for k = 2.
    double pair_overlap() const;
    bool is_uniform_pair() const { return k_ == 2; }

private:
    std::size_t k_;
    Matrix gram_;
    Matrix factor_;
};

/// Accepts {"k": int, "gram": [[...]]} or the shorthand {"k": int, "rho": r}
/// (equicorrelated; for k = 2 the uniform pair). Throws ValidationError with
/// the offending field name.
StructureSpec structure_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StructureSpec& spec);

/// psi_2(rho) = (2/pi) arctan sqrt((1 + rho) / (1 - rho)).
double psi2(double rho);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo estimate of psi_m: probability that a uniform random
/// halfspace puts all m points of a subset on one side, given that the
/// subset minus a distinguished point already is. Averaged over all size-m
/// subsets of each sampled multiplet and over the distinguished point; the
/// conditional is a ratio of per-sample indicator means and its error comes
/// from the delta method.
Estimate psi_m_estimate(const StructureSpec& spec, std::size_t m, std::size_t n,
                        std::size_t samples, Rng& rng);

struct PsiVector {
    std::vector<double> values;  // psi_2 .. psi_k
    std::vector<double> errors;  // zero for closed-form entries
};

/// psi_2 is analytic for k = 2; every other entry is estimated.
PsiVector psi_vector(const StructureSpec& spec, std::size_t n, std::size_t samples, Rng& rng);

struct ThetaCoefficients {
    std::size_t k = 1;
    std::vector<double> theta;  // theta_0 .. theta_k

    double sum() const;
};

/// Counting-recursion weights. k = 1 gives Cover's (1, 1); k = 2 gives
/// (psi_2, 1, 1 - psi_2). Larger k throws UnsupportedError.
ThetaCoefficients theta_coefficients(const StructureSpec& spec);

ThetaCoefficients make_theta(std::vector<double> theta);
nlohmann::json to_json(const ThetaCoefficients& theta);

/// k x n matrix whose rows are the multiplet points: the Cholesky template
/// of the Gram matrix carried by a uniformly random orthonormal frame.
Matrix sample_multiplet(const StructureSpec& spec, std::size_t n, Rng& rng);

}  // namespace vclab
