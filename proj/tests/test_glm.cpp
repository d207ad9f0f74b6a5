#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "msgd/glm.hpp"
#include "test_util.hpp"

using msgd::Dataset;
using msgd::GlmFamily;
using msgd::Support;
using msgd::Vec;

namespace {

// Central finite differences of the loss; the independent oracle for gradient.
Vec fd_gradient(const GlmFamily& family, const Dataset& data, const Vec& theta, double h) {
    Vec g(theta.size());
    for (msgd::Index j = 0; j < theta.size(); ++j) {
        Vec hi = theta, lo = theta;
        hi[j] += h;
        lo[j] -= h;
        g[j] = (msgd::loss(family, data, hi) - msgd::loss(family, data, lo)) / (2.0 * h);
    }
    return g;
}

// Directional finite differences of the gradient; oracle for Hessian quadratic forms.
double fd_quadratic_form(const GlmFamily& family, const Dataset& data, const Vec& theta,
                         const Vec& delta, double h) {
    const Vec ghi = msgd::gradient(family, data, theta + h * delta);
    const Vec glo = msgd::gradient(family, data, theta - h * delta);
    return delta.dot(ghi - glo) / (2.0 * h);
}

Dataset random_instance(msgd::Rng& rng, const GlmFamily& family, msgd::Index n, msgd::Index p,
                        const Vec& theta_gen) {
    Dataset data;
    data.x.resize(n, p);
    for (msgd::Index i = 0; i < n; ++i) {
        Vec row = msgd::normal_vector(rng, p);
        const double nrm = row.norm();
        if (nrm > 1.0) row /= nrm;  // keeps poisson rates tame
        data.x.row(i) = row;
    }
    const Vec t = data.x * theta_gen;
    data.y.resize(n);
    for (msgd::Index i = 0; i < n; ++i) {
        if (family.is_linear())
            data.y[i] = t[i] + 0.3 * rng.normal();
        else if (family.is_logistic())
            data.y[i] = rng.uniform() < 1.0 / (1.0 + std::exp(-t[i])) ? 1.0 : 0.0;
        else
            data.y[i] = static_cast<double>(rng.poisson(std::exp(t[i])));
    }
    return data;
}

const std::vector<GlmFamily> kFamilies = {GlmFamily::linear(1.0), GlmFamily::logistic(),
                                          GlmFamily::poisson()};

}  // namespace

TEST_CASE("log-partition closed forms") {
    const auto logi = GlmFamily::logistic();
    CHECK(logi.psi(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(logi.psi_prime(0.0) == 0.5);
    CHECK(logi.psi_second(0.0) == 0.25);
    // overflow-safe at extreme arguments
    CHECK(logi.psi(800.0) == 800.0);
    CHECK(std::isfinite(logi.psi(-800.0)));

    const auto lin = GlmFamily::linear(1.0);
    CHECK(lin.psi(2.0) == 2.0);
    CHECK(lin.psi_second(13.7) == 1.0);
    const auto lin2 = GlmFamily::linear(2.0);
    CHECK(lin2.psi(2.0) == 0.5);

    const auto pois = GlmFamily::poisson();
    CHECK(pois.psi(0.0) == 1.0);
    CHECK(pois.psi_prime(1.5) == pois.psi(1.5));
    CHECK(pois.psi_second(1.5) == pois.psi(1.5));

    CHECK_THROWS_AS(logi.psi(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
    CHECK_THROWS_AS(GlmFamily::linear(0.0), std::invalid_argument);
}

TEST_CASE("psi'' is nonnegative on a wide grid") {
    for (const auto& family : kFamilies)
        for (double t = -20.0; t <= 20.0; t += 0.125) CHECK(family.psi_second(t) >= 0.0);
}

TEST_CASE("curvature envelopes") {
    const auto logi = GlmFamily::logistic();
    for (double r : {0.5, 1.0, 3.0})
        for (double u : {0.0, 0.3, 1.0, 2.5}) {
            const auto [d, D] = logi.curvature_bounds(r, u);
            CHECK(D == 0.25);
            const double sech = 2.0 / (std::exp(r * u / 2.0) + std::exp(-r * u / 2.0));
            CHECK(d == doctest::Approx(0.25 * sech * sech).epsilon(1e-14));
        }
    {
        const auto [d, D] = logi.curvature_bounds(1.0, 0.0);
        CHECK(d == 0.25);
        CHECK(D == 0.25);
    }

    // poisson: grid-minimize/maximize e^{tu} over t in [-r,r] matches endpoints
    const auto pois = GlmFamily::poisson();
    {
        const double r = 1.0, u = 1.0;
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int i = 0; i <= 4000; ++i) {
            const double t = -r + 2.0 * r * i / 4000.0;
            lo = std::min(lo, pois.psi_second(t * u));
            hi = std::max(hi, pois.psi_second(t * u));
        }
        const auto [d, D] = pois.curvature_bounds(r, u);
        CHECK(d == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
        CHECK(D == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
        CHECK(lo == doctest::Approx(d).epsilon(1e-6));
        CHECK(hi == doctest::Approx(D).epsilon(1e-6));
    }

    const auto lin = GlmFamily::linear(2.0);
    const auto [d, D] = lin.curvature_bounds(5.0, 1.0);
    CHECK(d == 0.25);
    CHECK(D == 0.25);
}

TEST_CASE("envelope brackets psi'' along restricted arguments") {
    msgd::Rng rng(23);
    for (const auto& family : kFamilies) {
        for (int i = 0; i < 1000; ++i) {
            const double r = 0.1 + 3.0 * rng.uniform();
            const double u = 2.0 * rng.uniform();
            const double t = r * (2.0 * rng.uniform() - 1.0);  // |t| <= r
            const auto [d, D] = family.curvature_bounds(r, u);
            const double curv = family.psi_second(t * u);
            CHECK(curv >= d - 1e-12);
            CHECK(curv <= D + 1e-12);
        }
    }
}

TEST_CASE("loss closed-form spot checks") {
    // logistic at theta = 0: every sample contributes log 2
    msgd::Rng rng(29);
    Dataset data = random_instance(rng, GlmFamily::logistic(), 20, 5, Vec::Zero(5));
    CHECK(msgd::loss(GlmFamily::logistic(), data, Vec::Zero(5)) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));

    // linear, single sample x = (1,0), y = 1, theta = (1,0): 1/2 - 1
    Dataset one;
    one.x.resize(1, 2);
    one.x << 1.0, 0.0;
    one.y.resize(1);
    one.y << 1.0;
    Vec theta(2);
    theta << 1.0, 0.0;
    CHECK(msgd::loss(GlmFamily::linear(1.0), one, theta) == -0.5);

    // poisson, single sample x = (1), y = 2, theta = (0): psi(0) - 0 = 1
    Dataset pois;
    pois.x.resize(1, 1);
    pois.x << 1.0;
    pois.y.resize(1);
    pois.y << 2.0;
    CHECK(msgd::loss(GlmFamily::poisson(), pois, Vec::Zero(1)) == 1.0);
}

TEST_CASE("gradient spot checks") {
    Dataset one;
    one.x.resize(1, 2);
    one.x << 1.0, 0.0;
    one.y.resize(1);
    one.y << 0.0;
    const Vec g = msgd::gradient(GlmFamily::logistic(), one, Vec::Zero(2));
    CHECK(g[0] == 0.5);
    CHECK(g[1] == 0.0);

    // noiseless linear at the truth: residuals vanish
    msgd::Rng rng(31);
    Dataset data;
    data.x.resize(12, 4);
    for (int i = 0; i < 12; ++i) data.x.row(i) = msgd::normal_vector(rng, 4);
    Vec truth(4);
    truth << 1.0, -2.0, 0.0, 0.5;
    data.y = data.x * truth;
    CHECK(msgd::gradient(GlmFamily::linear(1.0), data, truth).norm() == 0.0);
}

TEST_CASE("gradient matches central finite differences") {
    msgd::Rng rng(37);
    for (const auto& family : kFamilies) {
        for (int rep = 0; rep < 8; ++rep) {
            const msgd::Index n = 10 + static_cast<msgd::Index>(rng.uniform_int(40));
            const msgd::Index p = 2 + static_cast<msgd::Index>(rng.uniform_int(10));
            const Vec theta_gen = 0.5 * msgd::normal_vector(rng, p);
            const Dataset data = random_instance(rng, family, n, p, theta_gen);
            const Vec theta = 0.5 * msgd::normal_vector(rng, p);
            const Vec g = msgd::gradient(family, data, theta);
            const Vec g_fd = fd_gradient(family, data, theta, 1e-5);
            CHECK((g - g_fd).norm() <= 1e-6 * std::max(1.0, g_fd.norm()));
        }
    }
}

TEST_CASE("restricted hessian: closed forms and finite differences") {
    msgd::Rng rng(41);
    const msgd::Index n = 30, p = 8;
    Dataset data = random_instance(rng, GlmFamily::logistic(), n, p, Vec::Zero(p));
    const Support s({1, 3, 4});
    const msgd::Mat xs = msgd::columns_at(data.x, s);

    // linear: (1/n) Xs^T Xs independent of theta
    const msgd::Mat gram = (xs.transpose() * xs) / static_cast<double>(n);
    const msgd::Mat h_lin =
        msgd::restricted_hessian(GlmFamily::linear(1.0), data, msgd::normal_vector(rng, p), s);
    CHECK((h_lin - gram).cwiseAbs().maxCoeff() <= 1e-14);

    // logistic at 0: a quarter of the restricted Gram
    const msgd::Mat h_log = msgd::restricted_hessian(GlmFamily::logistic(), data, Vec::Zero(p), s);
    CHECK((h_log - 0.25 * gram).cwiseAbs().maxCoeff() <= 1e-14);

    // quadratic forms against gradient finite differences, all families
    for (const auto& family : kFamilies) {
        const Vec theta_gen = 0.4 * msgd::normal_vector(rng, p);
        const Dataset inst = random_instance(rng, family, n, p, theta_gen);
        for (int rep = 0; rep < 10; ++rep) {
            const Vec theta = 0.4 * msgd::normal_vector(rng, p);
            Vec delta_s = msgd::normal_vector(rng, s.size());
            const Vec delta = msgd::embed(delta_s, s, p);
            const msgd::Mat h = msgd::restricted_hessian(family, inst, theta, s);
            const double quad = delta_s.dot(h * delta_s);
            const double quad_fd = fd_quadratic_form(family, inst, theta, delta, 1e-5);
            CHECK(quad == doctest::Approx(quad_fd).epsilon(1e-5));
            CHECK(quad == doctest::Approx(msgd::hessian_quadratic_form(family, inst, theta, delta))
                              .epsilon(1e-12));
        }
    }
}

TEST_CASE("loss is convex along random segments") {
    msgd::Rng rng(43);
    for (const auto& family : kFamilies) {
        const Vec theta_gen = 0.4 * msgd::normal_vector(rng, 6);
        const Dataset data = random_instance(rng, family, 25, 6, theta_gen);
        for (int rep = 0; rep < 100; ++rep) {
            const Vec a = 0.6 * msgd::normal_vector(rng, 6);
            const Vec b = 0.6 * msgd::normal_vector(rng, 6);
            const double mid = msgd::loss(family, data, 0.5 * (a + b));
            const double chord =
                0.5 * msgd::loss(family, data, a) + 0.5 * msgd::loss(family, data, b);
            CHECK(mid <= chord + 1e-12);
        }
    }
}

TEST_CASE("response validation per family") {
    Dataset data;
    data.x.resize(2, 2);
    data.x << 1.0, 0.0, 0.0, 1.0;
    data.y.resize(2);

    data.y << 0.0, 2.0;
    CHECK_THROWS_AS(msgd::loss(GlmFamily::logistic(), data, Vec::Zero(2)), std::invalid_argument);
    data.y << 0.0, -1.0;
    CHECK_THROWS_AS(msgd::loss(GlmFamily::poisson(), data, Vec::Zero(2)), std::invalid_argument);
    data.y << 0.0, 1.5;
    CHECK_THROWS_AS(msgd::loss(GlmFamily::poisson(), data, Vec::Zero(2)), std::invalid_argument);
    CHECK_NOTHROW(msgd::loss(GlmFamily::linear(1.0), data, Vec::Zero(2)));

    // dimension mismatch
    CHECK_THROWS_AS(msgd::loss(GlmFamily::linear(1.0), data, Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("poisson overflow guard fails loudly") {
    Dataset data;
    data.x.resize(1, 1);
    data.x << 1.0;
    data.y.resize(1);
    data.y << 1.0;
    Vec theta(1);
    theta << 701.0;
    CHECK_THROWS_AS(msgd::loss(GlmFamily::poisson(), data, theta), std::runtime_error);
    CHECK_THROWS_AS(msgd::gradient(GlmFamily::poisson(), data, theta), std::runtime_error);
    theta << 699.0;
    CHECK_NOTHROW(msgd::loss(GlmFamily::poisson(), data, theta));
}
