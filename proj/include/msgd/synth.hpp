#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "msgd/glm.hpp"
#include "msgd/model.hpp"
#include "msgd/projection.hpp"
#include "msgd/rng.hpp"
#include "msgd/solver.hpp"
#include "msgd/spectral.hpp"

namespace msgd {

/// Ground-truth parameter on a random generator set: k_active coordinates at
/// +-magnitude, then pulled onto the radius-r ball if necessary.
inline Vec gen_parameter(const SparsityModel& model, double r, int k_active,
                         std::uint64_t seed, double magnitude = 1.0) {
    if (!(r > 0.0)) throw std::invalid_argument("gen_parameter: radius must be positive");
    if (!(magnitude > 0.0)) throw std::invalid_argument("gen_parameter: magnitude must be positive");
    if (k_active < 1 || k_active > model.order())
        throw std::invalid_argument("gen_parameter: k_active must be in [1, model order]");

    Rng rng(seed);
    Rng rng_support = rng.stream(1);
    Rng rng_signs = rng.stream(2);

    Support gen = model.sample_generator(rng_support);
    for (int attempt = 0; gen.size() < k_active && attempt < 1024; ++attempt)
        gen = model.sample_generator(rng_support);
    if (gen.size() < k_active)
        throw std::invalid_argument("gen_parameter: no sampled generator set has >= k_active indices");

    const std::vector<int> pick =
        sample_index_subset(rng_support, gen.size(), k_active);
    Vec theta = Vec::Zero(model.ambient_dim());
    for (int j : pick) theta[gen[j]] = rng_signs.uniform() < 0.5 ? -magnitude : magnitude;
    return rescale_to_ball(std::move(theta), r).first;
}

/// Synthetic sample from the family's conditional distribution at
/// theta_star. Covariates are standard Gaussian rows capped onto the ball of
/// radius covariate_scale; responses use the sub-streams documented in Rng.
inline Dataset gen_dataset(const GlmFamily& family, const Eigen::Ref<const Vec>& theta_star,
                           Index n, double covariate_scale, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_dataset: n must be >= 1");
    if (!(covariate_scale > 0.0))
        throw std::invalid_argument("gen_dataset: covariate_scale must be positive");
    const Index p = theta_star.size();
    if (p < 1) throw std::invalid_argument("gen_dataset: theta_star must be nonempty");

    Rng rng(seed);
    Rng rng_x = rng.stream(1);
    Rng rng_y = rng.stream(2);

    Dataset data;
    data.x.resize(n, p);
    data.y.resize(n);
    for (Index i = 0; i < n; ++i) {
        const Vec row = normal_vector(rng_x, p);
        double c = 1.0;
        const double nrm = row.norm();
        if (nrm > covariate_scale) c = covariate_scale / nrm;
        data.x.row(i) = c * row;
        // cap must hold for the stored (strided) row's own norm evaluation
        while (data.x.row(i).norm() > covariate_scale) {
            c = std::nextafter(c, 0.0);
            data.x.row(i) = c * row;
        }
    }

    const Vec t = data.x * theta_star;
    if (family.is_linear()) {
        const double sigma = family.linear_sigma();
        for (Index i = 0; i < n; ++i) data.y[i] = t[i] + sigma * rng_y.normal();
    } else if (family.is_logistic()) {
        for (Index i = 0; i < n; ++i)
            data.y[i] = rng_y.uniform() < detail::sigmoid(t[i]) ? 1.0 : 0.0;
    } else {
        for (Index i = 0; i < n; ++i) {
            if (std::abs(t[i]) > 20.0)
                throw std::runtime_error("gen_dataset: poisson rate exp(<x,theta*>) overflows"
                                         " sampling range (|t| > 20)");
            data.y[i] = static_cast<double>(rng_y.poisson(std::exp(t[i])));
        }
    }
    return data;
}

/// Empirical decomposition of the estimation error sources at a (possibly
/// infeasible) truth theta_star: projection bias, link mismatch, statistical
/// noise power, and the restricted operator-norm bound on the reference
/// gradient. Hatted fields are sample analogs of population quantities.
struct ErrorDecomposition {
    Vec theta_perp;              // bounded model projection of theta_star
    double delta2 = 0.0;         // ||theta_perp - theta_star||
    double sigma_stat_hat = 0.0; // (1/n) sum (psi'(<x_i,theta*>) - y_i)^2
    double delta1_hat = 0.0;     // (1/n) sum (psi'(<x_i,theta_perp>) - psi'(<x_i,theta*>))^2
    double w_hat = 0.0;          // max_S ||X|_S||_op over 2-expansion generators
    double z_norm = 0.0;         // ||z||, z_i = (psi'(<x_i,theta_perp>) - y_i)/sqrt(n)
    double grad_term = 0.0;      // ||grad f(theta_perp) restricted to its dominant support||
    Support grad_support;
    bool w_hat_certified = true; // false when the 2-expansion was sampled, not enumerated
    bool opnorm_ok = true;       // grad_term <= w_hat * z_norm (+1e-10)
};

inline ErrorDecomposition error_decomposition(const SparsityModel& model, double r,
                                              const GlmFamily& family, const Dataset& data,
                                              const Eigen::Ref<const Vec>& theta_star,
                                              std::uint64_t cap = 100000,
                                              std::uint64_t sample_seed = 0) {
    validate_dataset(family, data);
    if (theta_star.size() != data.p() || model.ambient_dim() != data.p())
        throw std::invalid_argument("error_decomposition: dimension mismatch");

    ErrorDecomposition out;
    out.theta_perp = project_bounded(model, r, theta_star).vector;
    out.delta2 = (out.theta_perp - theta_star).norm();

    const double n = static_cast<double>(data.n());
    const Vec t_star = data.x * theta_star;
    const Vec t_perp = data.x * out.theta_perp;
    double stat = 0.0, link = 0.0, z2 = 0.0;
    for (Index i = 0; i < data.n(); ++i) {
        const double m_star = family.psi_prime(t_star[i]);
        const double m_perp = family.psi_prime(t_perp[i]);
        stat += (m_star - data.y[i]) * (m_star - data.y[i]);
        link += (m_perp - m_star) * (m_perp - m_star);
        z2 += (m_perp - data.y[i]) * (m_perp - data.y[i]);
    }
    out.sigma_stat_hat = stat / n;
    out.delta1_hat = link / n;
    out.z_norm = std::sqrt(z2 / n);

    // W: largest restricted operator norm of X/sqrt(n) over the 2-expansion.
    const SparsityModel c2 = model.expand(2);
    auto opnorm_on = [&](const Support& s) {
        const Mat xs = columns_at(data.x, s);
        Mat gram = (xs.transpose() * xs) / n;
        gram = 0.5 * (gram + gram.transpose()).eval();
        return spectral_norm_from_gram(gram);
    };
    try {
        double w = 0.0;
        for (const Support& s : c2.enumerate_generators(cap)) w = std::max(w, opnorm_on(s));
        out.w_hat = w;
        out.w_hat_certified = true;
    } catch (const EnumerationBudgetExceeded&) {
        Rng rng(mix_seed(sample_seed, 0x77));
        double w = 0.0;
        for (int i = 0; i < 256; ++i) w = std::max(w, opnorm_on(c2.sample_generator(rng)));
        out.w_hat = w;
        out.w_hat_certified = false;
    }

    const ReferenceGradient rg = reference_gradient_term(model, r, family, data, out.theta_perp);
    out.grad_term = rg.norm;
    out.grad_support = rg.support;
    out.opnorm_ok = out.grad_term <= out.w_hat * out.z_norm + 1e-10;
    return out;
}

}  // namespace msgd
