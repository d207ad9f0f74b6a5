#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>

#include "msgd/glm.hpp"
#include "msgd/model.hpp"
#include "msgd/spectral.hpp"

namespace msgd {

/// Raised when the restricted curvature floor collapses: some admissible
/// support direction carries (numerically) zero curvature, so no stable
/// restricted-Hessian sandwich exists for this model/data pair.
class NotIdentifiable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SmrhMethod { analytic, empirical };

/// Restricted-Hessian sandwich constants over the triple-expanded model:
/// beta ||d||^2 <= <d, grad^2 f(theta) d> <= alpha ||d||^2 for all
/// model-admissible (theta, d) with ||theta|| <= radius, and mu = alpha/beta.
struct SmrhEstimate {
    double alpha = 0.0;
    double beta = 0.0;
    double mu = 1.0;
    double radius = 0.0;
    SmrhMethod method = SmrhMethod::analytic;
    std::uint64_t supports_examined = 0;
};

/// Certified sandwich constants: for every maximal support S of the
/// triple-expanded model, the restricted Hessian at any admissible theta is
/// bracketed by the curvature-weighted Gram matrices
///   (1/n) sum_i d(||x_i|_S||) x_i|_S x_i|_S^T  and  the D-weighted analog,
/// so beta = min_S lambda_min(lower) and alpha = max_S lambda_max(upper).
/// Principal-submatrix interlacing makes the maximal supports sufficient.
inline SmrhEstimate analytic_smrh_bounds(const SparsityModel& model, const Dataset& data,
                                         const GlmFamily& family, double r,
                                         std::uint64_t cap) {
    validate_dataset(family, data);
    if (!(r > 0.0)) throw std::invalid_argument("analytic_smrh_bounds: radius must be positive");
    if (model.ambient_dim() != data.p())
        throw std::invalid_argument("analytic_smrh_bounds: model/data dimension mismatch");

    const SparsityModel c3 = model.expand(3);
    std::vector<Support> gens;
    try {
        gens = c3.enumerate_generators(cap);
    } catch (const EnumerationBudgetExceeded& e) {
        throw EnumerationBudgetExceeded(e.count, e.cap,
                                        "; fall back to empirical_smrh_probe for sampled,"
                                        " non-certified bounds");
    }

    const double n = static_cast<double>(data.n());
    double alpha = -std::numeric_limits<double>::infinity();
    double beta = std::numeric_limits<double>::infinity();
    for (const Support& s : gens) {
        const Mat xs = columns_at(data.x, s);
        Vec wd(data.n()), wD(data.n());
        for (Index i = 0; i < data.n(); ++i) {
            const auto [d, D] = family.curvature_bounds(r, xs.row(i).norm());
            wd[i] = d;
            wD[i] = D;
        }
        Mat lower = (xs.transpose() * wd.asDiagonal() * xs) / n;
        Mat upper = (xs.transpose() * wD.asDiagonal() * xs) / n;
        lower = 0.5 * (lower + lower.transpose()).eval();
        upper = 0.5 * (upper + upper.transpose()).eval();
        beta = std::min(beta, extreme_eigenvalues(lower).first);
        alpha = std::max(alpha, extreme_eigenvalues(upper).second);
    }
    if (!(beta > 1e-12))
        throw NotIdentifiable("model not identifiable from data: restricted curvature floor " +
                              std::to_string(beta) + " <= 1e-12");

    SmrhEstimate est;
    est.alpha = alpha;
    est.beta = beta;
    est.mu = alpha / beta;
    est.radius = r;
    est.method = SmrhMethod::analytic;
    est.supports_examined = gens.size();
    return est;
}

/// Sampled Rayleigh quotients <d, grad^2 f(theta) d>/||d||^2 over random
/// admissible pairs: theta uniform in the radius-r ball on a random generator
/// set of the model, d Gaussian on a random generator set of the 2-expansion,
/// so supp(d) U supp(theta) always lies in the 3-expansion. Returns the
/// extremes seen; these are raw samples, not certified bounds.
inline std::pair<double, double> empirical_smrh_probe(const SparsityModel& model,
                                                      const Dataset& data,
                                                      const GlmFamily& family, double r,
                                                      int trials, std::uint64_t seed) {
    validate_dataset(family, data);
    if (!(r > 0.0)) throw std::invalid_argument("empirical_smrh_probe: radius must be positive");
    if (trials < 1) throw std::invalid_argument("empirical_smrh_probe: trials must be >= 1");

    const SparsityModel c2 = model.expand(2);
    Rng rng(seed);
    Rng rng_theta = rng.stream(1);
    Rng rng_delta = rng.stream(2);

    double q_min = std::numeric_limits<double>::infinity();
    double q_max = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        const Support s_theta = model.sample_generator(rng_theta);
        const Support s_delta = c2.sample_generator(rng_delta);

        // uniform in the |S|-dimensional ball of radius r
        Vec dir = normal_vector(rng_theta, s_theta.size());
        const double nrm = dir.norm();
        if (nrm > 0.0) dir /= nrm;
        const double rad =
            r * std::pow(rng_theta.uniform_open(), 1.0 / static_cast<double>(s_theta.size()));
        const Vec theta = embed((rad * dir).eval(), s_theta, model.ambient_dim());

        Vec delta = embed(normal_vector(rng_delta, s_delta.size()), s_delta,
                          model.ambient_dim());
        const double dn2 = delta.squaredNorm();
        if (dn2 == 0.0) continue;

        const double q = hessian_quadratic_form(family, data, theta, delta) / dn2;
        q_min = std::min(q_min, q);
        q_max = std::max(q_max, q);
    }
    return {q_min, q_max};
}

/// Step size minimizing the contraction factor: 2/(alpha + beta).
inline double step_size_optimal(double alpha, double beta) {
    if (!(beta > 0.0) || !(beta <= alpha))
        throw std::invalid_argument("step_size_optimal: need 0 < beta <= alpha");
    return 2.0 / (alpha + beta);
}

/// Per-iteration contraction coefficient
/// gamma = (eta/eta*) (mu-1)/(mu+1) + |eta/eta* - 1|.
inline double contraction_gamma(double eta, double eta_star, double mu) {
    if (!(eta > 0.0) || !(eta_star > 0.0))
        throw std::invalid_argument("contraction_gamma: step sizes must be positive");
    if (!(mu >= 1.0)) throw std::invalid_argument("contraction_gamma: mu must be >= 1");
    const double ratio = eta / eta_star;
    return ratio * (mu - 1.0) / (mu + 1.0) + std::abs(ratio - 1.0);
}

}  // namespace msgd
