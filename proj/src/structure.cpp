#include "vclab/structure.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vclab/errors.hpp"

namespace vclab {

namespace {

Matrix validated_gram(std::size_t k, Matrix gram) {
    if (k == 0) throw ValidationError("structure: field 'k' must be at least 1");
    if (gram.rows() != k || gram.cols() != k) {
        std::ostringstream msg;
        msg << "structure: field 'gram' must be " << k << "x" << k;
        throw ValidationError(msg.str());
    }
    for (std::size_t a = 0; a < k; ++a) {
        if (std::abs(gram(a, a) - 1.0) > 1e-12)
            throw ValidationError("structure: field 'gram' must have a unit diagonal");
        for (std::size_t b = 0; b < k; ++b) {
            if (std::abs(gram(a, b)) > 1.0 + 1e-12)
                throw ValidationError("structure: overlaps in 'gram' must lie in [-1, 1]");
            if (std::abs(gram(a, b) - gram(b, a)) > 1e-12)
                throw ValidationError("structure: field 'gram' must be symmetric");
        }
    }
    return gram;
}

}  // namespace

StructureSpec::StructureSpec(std::size_t k, Matrix gram)
    : k_(k), gram_(validated_gram(k, std::move(gram))) {
    try {
        factor_ = cholesky(gram_);
    } catch (const NotPositiveSemidefinite& e) {
        throw ValidationError(std::string("structure: 'gram' is not positive semidefinite (") +
                              e.what() + ")");
    }
}

StructureSpec StructureSpec::pair(double rho) { return equicorrelated(2, rho); }

StructureSpec StructureSpec::equicorrelated(std::size_t k, double rho) {
    if (!(std::abs(rho) <= 1.0)) {
        std::ostringstream msg;
        msg << "structure: field 'rho' must lie in [-1, 1], got " << rho;
        throw ValidationError(msg.str());
    }
    Matrix gram(k, k, rho);
    for (std::size_t a = 0; a < k; ++a) gram(a, a) = 1.0;
    return StructureSpec(k, std::move(gram));
}

double StructureSpec::pair_overlap() const {
    if (k_ != 2) throw UnsupportedError("pair_overlap: structure is not a pair (k != 2)");
    return gram_(0, 1);
}

StructureSpec structure_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("structure: expected a JSON object");
    if (!j.contains("k") || !j["k"].is_number_integer() || j["k"].get<long long>() < 1)
        throw ValidationError("structure: field 'k' must be a positive integer");
    const auto k = j["k"].get<std::size_t>();
    const bool has_rho = j.contains("rho");
    const bool has_gram = j.contains("gram");
    if (has_rho && has_gram)
        throw ValidationError("structure: give either 'rho' or 'gram', not both");
    if (has_rho) {
        if (!j["rho"].is_number()) throw ValidationError("structure: field 'rho' must be a number");
        return StructureSpec::equicorrelated(k, j["rho"].get<double>());
    }
    if (!has_gram) {
        if (k == 1) return StructureSpec::unstructured();
        throw ValidationError("structure: field 'gram' (or 'rho') is required for k > 1");
    }
    const auto& rows = j["gram"];
    if (!rows.is_array() || rows.size() != k)
        throw ValidationError("structure: field 'gram' must be a k x k array");
    Matrix gram(k, k);
    for (std::size_t a = 0; a < k; ++a) {
        if (!rows[a].is_array() || rows[a].size() != k)
            throw ValidationError("structure: field 'gram' must be a k x k array");
        for (std::size_t b = 0; b < k; ++b) {
            if (!rows[a][b].is_number())
                throw ValidationError("structure: entries of 'gram' must be numbers");
            gram(a, b) = rows[a][b].get<double>();
        }
    }
    return StructureSpec(k, std::move(gram));
}

nlohmann::json to_json(const StructureSpec& spec) {
    nlohmann::json gram = nlohmann::json::array();
    for (std::size_t a = 0; a < spec.k(); ++a) {
        const auto row = spec.gram().row(a);
        gram.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return {{"k", spec.k()}, {"gram", gram}};
}

double psi2(double rho) {
    if (!(std::abs(rho) <= 1.0)) {
        std::ostringstream msg;
        msg << "psi2: overlap must lie in [-1, 1], got " << rho;
        throw DomainError(msg.str());
    }
    if (rho == 1.0) return 1.0;
    return 2.0 / std::numbers::pi * std::atan(std::sqrt((1.0 + rho) / (1.0 - rho)));
}

Estimate psi_m_estimate(const StructureSpec& spec, std::size_t m, std::size_t n,
                        std::size_t samples, Rng& rng) {
    const std::size_t k = spec.k();
    if (m < 2 || m > k) {
        std::ostringstream msg;
        msg << "psi_m_estimate: subset size m must lie in [2, " << k << "], got " << m;
        throw DomainError(msg.str());
    }
    if (n < k) throw DimensionError("psi_m_estimate: dimension n must be at least k");
    if (samples == 0) throw DomainError("psi_m_estimate: need at least one sample");

    // All size-m subsets of {0..k-1} as bitmasks.
    std::vector<unsigned> subsets;
    for (unsigned mask = 0; mask < (1u << k); ++mask)
        if (static_cast<std::size_t>(std::popcount(mask)) == m) subsets.push_back(mask);
    const double pairs_per_sample = static_cast<double>(subsets.size() * m);

    // Signs of w . xi_a only depend on the projection of w onto the span of
    // the template, so a Gaussian k-vector against the Cholesky template
    // reproduces the uniform-w statistics for any n >= k.
    const Matrix& factor = spec.template_factor();
    std::vector<double> g(k);
    std::vector<int> sign(k);

    double sum_num = 0.0, sum_den = 0.0;
    double sum_nn = 0.0, sum_dd = 0.0, sum_nd = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        for (auto& x : g) x = rng.normal();
        for (std::size_t a = 0; a < k; ++a) {
            double h = 0.0;
            for (std::size_t b = 0; b <= a; ++b) h += factor(a, b) * g[b];
            sign[a] = h > 0.0 ? 1 : -1;
        }
        double num = 0.0, den = 0.0;
        for (unsigned mask : subsets) {
            int pos = 0;
            for (std::size_t a = 0; a < k; ++a)
                if (mask & (1u << a)) pos += sign[a] > 0;
            const bool all_same = pos == 0 || pos == static_cast<int>(m);
            for (std::size_t star = 0; star < k; ++star) {
                if (!(mask & (1u << star))) continue;
                const int rest_pos = pos - (sign[star] > 0);
                const bool rest_same = rest_pos == 0 || rest_pos == static_cast<int>(m - 1);
                den += rest_same;
                num += all_same;  // all_same implies rest_same
            }
        }
        num /= pairs_per_sample;
        den /= pairs_per_sample;
        sum_num += num;
        sum_den += den;
        sum_nn += num * num;
        sum_dd += den * den;
        sum_nd += num * den;
    }
    if (sum_den == 0.0)
        throw InsufficientConditioning("psi_m_estimate: conditioning event never occurred");

    const double count = static_cast<double>(samples);
    const double ratio = sum_num / sum_den;
    const double mean_den = sum_den / count;
    double std_error = 0.0;
    if (samples > 1) {
        // Delta method on r_i = num_i - ratio * den_i (mean zero by construction).
        const double sum_rr = sum_nn - 2.0 * ratio * sum_nd + ratio * ratio * sum_dd;
        const double var_r = std::max(0.0, sum_rr / (count - 1.0));
        std_error = std::sqrt(var_r / count) / mean_den;
    }
    return {ratio, std_error};
}

PsiVector psi_vector(const StructureSpec& spec, std::size_t n, std::size_t samples, Rng& rng) {
    PsiVector out;
    for (std::size_t m = 2; m <= spec.k(); ++m) {
        if (spec.k() == 2) {
            out.values.push_back(psi2(spec.pair_overlap()));
            out.errors.push_back(0.0);
        } else {
            const auto e = psi_m_estimate(spec, m, n, samples, rng);
            out.values.push_back(e.value);
            out.errors.push_back(e.std_error);
        }
    }
    return out;
}

double ThetaCoefficients::sum() const {
    double s = 0.0;
    for (double t : theta) s += t;
    return s;
}

ThetaCoefficients make_theta(std::vector<double> theta) {
    if (theta.size() < 2) throw DomainError("theta: need at least theta_0 and theta_1");
    for (double t : theta)
        if (!(t >= 0.0) || !std::isfinite(t))
            throw DomainError("theta: coefficients must be finite and nonnegative");
    ThetaCoefficients out;
    out.k = theta.size() - 1;
    out.theta = std::move(theta);
    return out;
}

ThetaCoefficients theta_coefficients(const StructureSpec& spec) {
    switch (spec.k()) {
        case 1:
            return make_theta({1.0, 1.0});
        case 2: {
            const double psi = psi2(spec.pair_overlap());
            return make_theta({psi, 1.0, 1.0 - psi});
        }
        default: {
            std::ostringstream msg;
            msg << "theta_coefficients: no closed form for k = " << spec.k()
                << "; estimate counts by Monte Carlo enumeration instead";
            throw UnsupportedError(msg.str());
        }
    }
}

nlohmann::json to_json(const ThetaCoefficients& theta) {
    return {{"k", theta.k}, {"theta", theta.theta}};
}

Matrix sample_multiplet(const StructureSpec& spec, std::size_t n, Rng& rng) {
    if (n < spec.k()) throw DimensionError("sample_multiplet: dimension n must be at least k");
    return spec.template_factor() * sample_orthonormal_frame(n, spec.k(), rng);
}

}  // namespace vclab
