#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

#include "msgd/support.hpp"
#include "msgd/types.hpp"

namespace msgd {

struct Linear {
    double sigma = 1.0;
};
struct Logistic {};
struct Poisson {};

namespace detail {

template <class S>
S sigmoid(S t) {
    if (t >= S(0)) return S(1) / (S(1) + std::exp(-t));
    const S e = std::exp(t);
    return e / (S(1) + e);
}

// sech(x) for x >= 0 without overflowing cosh.
template <class S>
S sech(S x) {
    return S(2) / (std::exp(x) + std::exp(-x));
}

}  // namespace detail

/// Canonical exponential-family response model, identified by its
/// log-partition function psi. psi' is the conditional mean and psi'' the
/// conditional variance scale, so psi'' >= 0 everywhere.
class GlmFamily {
public:
    static GlmFamily linear(double sigma = 1.0) {
        if (!(sigma > 0.0)) throw std::invalid_argument("linear family: sigma must be positive");
        return GlmFamily(Linear{sigma});
    }
    static GlmFamily logistic() { return GlmFamily(Logistic{}); }
    static GlmFamily poisson() { return GlmFamily(Poisson{}); }

    double psi(double t) const {
        check_finite(t);
        if (const auto* lin = std::get_if<Linear>(&kind_))
            return t * t / (2.0 * lin->sigma * lin->sigma);
        if (std::holds_alternative<Logistic>(kind_))
            return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
        return std::exp(t);
    }

    double psi_prime(double t) const {
        check_finite(t);
        if (const auto* lin = std::get_if<Linear>(&kind_))
            return t / (lin->sigma * lin->sigma);
        if (std::holds_alternative<Logistic>(kind_)) return detail::sigmoid(t);
        return std::exp(t);
    }

    double psi_second(double t) const {
        check_finite(t);
        if (const auto* lin = std::get_if<Linear>(&kind_))
            return 1.0 / (lin->sigma * lin->sigma);
        if (std::holds_alternative<Logistic>(kind_)) {
            const double s = detail::sigmoid(t);
            return s * (1.0 - s);
        }
        return std::exp(t);
    }

    /// Envelope (d, D) of psi'' over inner products bounded by r*u:
    /// d = min_{|t|<=r} psi''(tu), D = max_{|t|<=r} psi''(tu).
    std::pair<double, double> curvature_bounds(double r, double u) const {
        if (!(r > 0.0)) throw std::invalid_argument("curvature_bounds: radius must be positive");
        if (!(u >= 0.0)) throw std::invalid_argument("curvature_bounds: u must be nonnegative");
        if (const auto* lin = std::get_if<Linear>(&kind_)) {
            const double c = 1.0 / (lin->sigma * lin->sigma);
            return {c, c};
        }
        if (std::holds_alternative<Logistic>(kind_)) {
            const double s = detail::sech(r * u / 2.0);
            return {0.25 * s * s, 0.25};
        }
        return {std::exp(-r * u), std::exp(r * u)};
    }

    const char* name() const {
        if (std::holds_alternative<Linear>(kind_)) return "linear";
        if (std::holds_alternative<Logistic>(kind_)) return "logistic";
        return "poisson";
    }

    bool is_linear() const { return std::holds_alternative<Linear>(kind_); }
    bool is_logistic() const { return std::holds_alternative<Logistic>(kind_); }
    bool is_poisson() const { return std::holds_alternative<Poisson>(kind_); }

    double linear_sigma() const { return std::get<Linear>(kind_).sigma; }

private:
    explicit GlmFamily(std::variant<Linear, Logistic, Poisson> kind) : kind_(std::move(kind)) {}

    static void check_finite(double t) {
        if (!std::isfinite(t)) throw std::invalid_argument("psi: argument must be finite");
    }

    std::variant<Linear, Logistic, Poisson> kind_;
};

/// Covariate-response sample: row i of x is the covariate of observation i.
struct Dataset {
    Mat x;  // n x p
    Vec y;  // n

    Index n() const { return x.rows(); }
    Index p() const { return x.cols(); }
};

/// Structural checks plus the per-family response range.
inline void validate_dataset(const GlmFamily& family, const Dataset& data) {
    if (data.x.rows() != data.y.size())
        throw std::invalid_argument("dataset: x and y disagree on sample count");
    if (data.x.rows() < 1 || data.x.cols() < 1)
        throw std::invalid_argument("dataset: needs at least one sample and one predictor");
    if (!data.x.allFinite() || !data.y.allFinite())
        throw std::invalid_argument("dataset: entries must be finite");
    if (family.is_logistic()) {
        for (Index i = 0; i < data.y.size(); ++i)
            if (data.y[i] != 0.0 && data.y[i] != 1.0)
                throw std::invalid_argument("logistic family: responses must be 0 or 1");
    } else if (family.is_poisson()) {
        for (Index i = 0; i < data.y.size(); ++i)
            if (data.y[i] < 0.0 || data.y[i] != std::floor(data.y[i]))
                throw std::invalid_argument("poisson family: responses must be nonnegative integers");
    }
}

namespace detail {

inline Vec linear_predictor(const GlmFamily& family, const Dataset& data,
                            const Eigen::Ref<const Vec>& theta) {
    if (theta.size() != data.p())
        throw std::invalid_argument("theta length does not match predictor count");
    Vec t = data.x * theta;
    if (family.is_poisson()) {
        // e^t overflows double well before t reaches 710; fail loudly.
        for (Index i = 0; i < t.size(); ++i)
            if (std::abs(t[i]) > 700.0)
                throw std::runtime_error("poisson family: |<x_i,theta>| > 700 overflows exp");
    }
    return t;
}

}  // namespace detail

/// Mean negative log likelihood (normalization constants dropped):
/// f(theta) = (1/n) sum_i [psi(<x_i,theta>) - y_i <x_i,theta>].
inline double loss(const GlmFamily& family, const Dataset& data,
                   const Eigen::Ref<const Vec>& theta) {
    validate_dataset(family, data);
    const Vec t = detail::linear_predictor(family, data, theta);
    double acc = 0.0;
    for (Index i = 0; i < data.n(); ++i) acc += family.psi(t[i]) - data.y[i] * t[i];
    return acc / static_cast<double>(data.n());
}

/// grad f(theta) = (1/n) sum_i (psi'(<x_i,theta>) - y_i) x_i.
inline Vec gradient(const GlmFamily& family, const Dataset& data,
                    const Eigen::Ref<const Vec>& theta) {
    validate_dataset(family, data);
    const Vec t = detail::linear_predictor(family, data, theta);
    Vec resid(data.n());
    for (Index i = 0; i < data.n(); ++i) resid[i] = family.psi_prime(t[i]) - data.y[i];
    return (data.x.transpose() * resid) / static_cast<double>(data.n());
}

/// Hessian of f at theta restricted to s x s:
/// (1/n) sum_i psi''(<x_i,theta>) x_i|_s x_i|_s^T. Symmetric PSD.
inline Mat restricted_hessian(const GlmFamily& family, const Dataset& data,
                              const Eigen::Ref<const Vec>& theta, const Support& s) {
    validate_dataset(family, data);
    if (s.max_index() >= data.p())
        throw std::invalid_argument("restricted_hessian: support index out of range");
    const Vec t = detail::linear_predictor(family, data, theta);
    Vec w(data.n());
    for (Index i = 0; i < data.n(); ++i) w[i] = family.psi_second(t[i]);
    const Mat xs = columns_at(data.x, s);
    Mat h = (xs.transpose() * w.asDiagonal() * xs) / static_cast<double>(data.n());
    h = 0.5 * (h + h.transpose()).eval();
    return h;
}

/// <delta, (grad^2 f(theta)) delta> without forming the Hessian.
inline double hessian_quadratic_form(const GlmFamily& family, const Dataset& data,
                                     const Eigen::Ref<const Vec>& theta,
                                     const Eigen::Ref<const Vec>& delta) {
    validate_dataset(family, data);
    const Vec t = detail::linear_predictor(family, data, theta);
    const Vec u = data.x * delta;
    double acc = 0.0;
    for (Index i = 0; i < data.n(); ++i) acc += family.psi_second(t[i]) * u[i] * u[i];
    return acc / static_cast<double>(data.n());
}

}  // namespace msgd
