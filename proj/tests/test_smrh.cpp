#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "msgd/smrh.hpp"
#include "msgd/synth.hpp"
#include "test_util.hpp"

using msgd::Dataset;
using msgd::GlmFamily;
using msgd::Mat;
using msgd::SparsityModel;
using msgd::Support;
using msgd::Vec;

namespace {

// n = p design with (1/n) X^T X = I exactly.
Dataset identity_design(int p) {
    Dataset data;
    data.x = std::sqrt(static_cast<double>(p)) * Mat::Identity(p, p);
    data.y = Vec::Zero(p);
    return data;
}

}  // namespace

TEST_CASE("jacobi extreme eigenvalues: small oracles") {
    CHECK(msgd::extreme_eigenvalues(Mat::Identity(3, 3)) == std::pair{1.0, 1.0});

    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 3.0;
    CHECK(msgd::extreme_eigenvalues(d) == std::pair{1.0, 3.0});

    // [[2,1],[1,2]]: characteristic polynomial (2-l)^2 - 1 has roots 1 and 3
    Mat m(2, 2);
    m << 2.0, 1.0, 1.0, 2.0;
    const auto [lo, hi] = msgd::extreme_eigenvalues(m);
    CHECK(lo == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(hi == doctest::Approx(3.0).epsilon(1e-14));

    Mat asym(2, 2);
    asym << 1.0, 1.0, 0.5, 1.0;
    CHECK_THROWS_AS(msgd::extreme_eigenvalues(asym), std::invalid_argument);
    CHECK_THROWS_AS(msgd::extreme_eigenvalues(Mat::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("jacobi agrees with Eigen's solver on random symmetric matrices") {
    msgd::Rng rng(47);
    for (int n : {1, 2, 5, 12, 30}) {
        for (int rep = 0; rep < 5; ++rep) {
            Mat a(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
            a = (0.5 * (a + a.transpose())).eval();
            const auto [lo, hi] = msgd::extreme_eigenvalues(a);
            Eigen::SelfAdjointEigenSolver<Mat> es(a);
            CHECK(lo == doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-11));
            CHECK(hi == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-11));
        }
    }
}

TEST_CASE("analytic bounds on the identity design: alpha = beta = 1") {
    const int p = 6;
    const auto model = SparsityModel::plain(p, 2);
    const auto est = msgd::analytic_smrh_bounds(model, identity_design(p), GlmFamily::linear(1.0),
                                                2.0, 1000);
    CHECK(est.alpha == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.beta == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.mu == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.supports_examined == msgd::binomial_saturating(p, 6));
    CHECK(est.method == msgd::SmrhMethod::analytic);
}

TEST_CASE("linear-family bounds ignore the radius and reduce to restricted isometry") {
    msgd::Rng rng(53);
    const int p = 8, n = 32;
    Dataset data;
    data.x = testutil::near_orthogonal_design(rng, p, 4, 0.05);
    data.y = Vec::Zero(n);
    const auto model = SparsityModel::plain(p, 2);

    const auto est1 = msgd::analytic_smrh_bounds(model, data, GlmFamily::linear(1.0), 0.5, 1000);
    const auto est2 = msgd::analytic_smrh_bounds(model, data, GlmFamily::linear(1.0), 7.0, 1000);
    CHECK(est1.alpha == est2.alpha);
    CHECK(est1.beta == est2.beta);

    // mu = (1 + delta)/(1 - delta) with delta the scale-free restricted
    // isometry constant of the Gram matrices over the same supports
    double lam_min = std::numeric_limits<double>::infinity(), lam_max = 0.0;
    for (const Support& s : model.expand(3).enumerate_generators(1000)) {
        const Mat xs = msgd::columns_at(data.x, s);
        Mat gram = (xs.transpose() * xs) / static_cast<double>(n);
        gram = (0.5 * (gram + gram.transpose())).eval();
        const auto [lo, hi] = msgd::extreme_eigenvalues(gram);
        lam_min = std::min(lam_min, lo);
        lam_max = std::max(lam_max, hi);
    }
    const double delta = (lam_max - lam_min) / (lam_max + lam_min);
    CHECK(est1.mu == doctest::Approx((1.0 + delta) / (1.0 - delta)).epsilon(1e-10));

    // sigma rescales alpha and beta together, leaving mu unchanged
    const auto est3 = msgd::analytic_smrh_bounds(model, data, GlmFamily::linear(2.0), 1.0, 1000);
    CHECK(est3.mu == doctest::Approx(est1.mu).epsilon(1e-12));
    CHECK(est3.alpha == doctest::Approx(est1.alpha / 4.0).epsilon(1e-12));
}

TEST_CASE("logistic bounds: quarter-Gram ceiling and sech^2 floor") {
    msgd::Rng rng(59);
    const int p = 8;
    Dataset data;
    data.x = testutil::near_orthogonal_unit_design(rng, p, 4, 0.05);
    const int n = static_cast<int>(data.x.rows());
    data.y = Vec::Zero(n);
    for (int i = 0; i < n; ++i) data.y[i] = static_cast<double>(i % 2);

    const double r = 2.0;
    const auto model = SparsityModel::plain(p, 2);
    const auto est = msgd::analytic_smrh_bounds(model, data, GlmFamily::logistic(), r, 1000);

    Mat full_gram = (data.x.transpose() * data.x) / static_cast<double>(n);
    full_gram = (0.5 * (full_gram + full_gram.transpose())).eval();
    const auto [g_lo, g_hi] = msgd::extreme_eigenvalues(full_gram);
    CHECK(est.alpha <= 0.25 * g_hi + 1e-12);

    // covariates lie in the unit ball, so d >= sech^2(r/2)/4 uniformly; the
    // restricted Gram floor is bounded by the full spectrum from below only
    // support-wise, so recompute it over the same supports
    double gram_floor = std::numeric_limits<double>::infinity();
    for (const Support& s : model.expand(3).enumerate_generators(1000)) {
        const Mat xs = msgd::columns_at(data.x, s);
        Mat gram = (xs.transpose() * xs) / static_cast<double>(n);
        gram = (0.5 * (gram + gram.transpose())).eval();
        gram_floor = std::min(gram_floor, msgd::extreme_eigenvalues(gram).first);
    }
    const double sech = 2.0 / (std::exp(r / 2.0) + std::exp(-r / 2.0));
    CHECK(est.beta >= 0.25 * sech * sech * gram_floor - 1e-12);
}

TEST_CASE("non-identifiable data is rejected") {
    Dataset data;  // n < order of the 3-expansion makes restricted Grams singular
    data.x.resize(2, 6);
    data.x << 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0;
    data.y = Vec::Zero(2);
    CHECK_THROWS_AS(msgd::analytic_smrh_bounds(SparsityModel::plain(6, 2), data,
                                               GlmFamily::linear(1.0), 1.0, 1000),
                    msgd::NotIdentifiable);
}

TEST_CASE("enumeration budget failure suggests the probe") {
    Dataset data = identity_design(30);
    try {
        msgd::analytic_smrh_bounds(SparsityModel::plain(30, 4), data, GlmFamily::linear(1.0), 1.0,
                                   100);
        FAIL("expected EnumerationBudgetExceeded");
    } catch (const msgd::EnumerationBudgetExceeded& e) {
        CHECK(std::string(e.what()).find("empirical_smrh_probe") != std::string::npos);
    }
}

TEST_CASE("empirical probe quotients are sandwiched by the analytic bounds") {
    msgd::Rng rng(61);
    const int p = 8;
    const auto model = SparsityModel::plain(p, 2);

    // linear: Hessian constant in theta, every quotient inside [beta, alpha]
    Dataset lin;
    lin.x = testutil::near_orthogonal_design(rng, p, 4, 0.05);
    lin.y = Vec::Zero(lin.x.rows());
    const auto est_lin =
        msgd::analytic_smrh_bounds(model, lin, GlmFamily::linear(1.0), 2.0, 1000);
    const auto [ql_min, ql_max] =
        msgd::empirical_smrh_probe(model, lin, GlmFamily::linear(1.0), 2.0, 500, 99);
    CHECK(ql_min >= est_lin.beta - 1e-10);
    CHECK(ql_max <= est_lin.alpha + 1e-10);

    // logistic on a fixed-seed instance
    const Vec truth = msgd::gen_parameter(model, 1.0, 2, 7);
    Dataset logi = msgd::gen_dataset(GlmFamily::logistic(), truth, 200, 1.0, 7);
    const auto est_log =
        msgd::analytic_smrh_bounds(model, logi, GlmFamily::logistic(), 2.0, 1000);
    const auto [qg_min, qg_max] =
        msgd::empirical_smrh_probe(model, logi, GlmFamily::logistic(), 2.0, 500, 99);
    CHECK(qg_min >= est_log.beta - 1e-10);
    CHECK(qg_max <= est_log.alpha + 1e-10);

    // one trial collapses the interval
    const auto [one_min, one_max] =
        msgd::empirical_smrh_probe(model, logi, GlmFamily::logistic(), 2.0, 1, 5);
    CHECK(one_min == one_max);
}

TEST_CASE("optimal step size") {
    CHECK(msgd::step_size_optimal(3.0, 1.0) == 0.5);
    CHECK(msgd::step_size_optimal(1.0, 1.0) == 1.0);
    CHECK_THROWS_AS(msgd::step_size_optimal(1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(msgd::step_size_optimal(1.0, 0.0), std::invalid_argument);

    // matches the grid minimizer of the contraction coefficient
    msgd::Rng rng(67);
    for (int rep = 0; rep < 20; ++rep) {
        const double mu = 1.0 + 2.0 * rng.uniform();
        const double beta = 0.5 + rng.uniform();
        const double alpha = mu * beta;
        const double eta_star = msgd::step_size_optimal(alpha, beta);
        const double g_star = msgd::contraction_gamma(eta_star, eta_star, mu);
        double best = std::numeric_limits<double>::infinity();
        for (int i = 1; i <= 1000; ++i) {
            const double eta = (2.0 / beta) * i / 1000.0;
            best = std::min(best, msgd::contraction_gamma(eta, eta_star, mu));
        }
        CHECK(g_star <= best + 1e-12);
    }
}

TEST_CASE("contraction coefficient formula") {
    // eta = eta*, mu = 3: gamma = 1/2, the boundary of the convergent regime
    CHECK(msgd::contraction_gamma(0.5, 0.5, 3.0) == 0.5);
    CHECK(msgd::contraction_gamma(1.0, 1.0, 1.0) == 0.0);

    // eta = 1/beta gives gamma <= mu - 1 (equality in exact arithmetic)
    for (double mu = 1.0; mu < 1.5; mu += 0.01) {
        const double beta = 1.0, alpha = mu;
        const double eta_star = msgd::step_size_optimal(alpha, beta);
        const double g = msgd::contraction_gamma(1.0 / beta, eta_star, mu);
        CHECK(g <= mu - 1.0 + 1e-12);
    }
    const double g14 = msgd::contraction_gamma(1.0, msgd::step_size_optimal(1.4, 1.0), 1.4);
    CHECK(g14 == doctest::Approx(0.4).epsilon(1e-12));

    CHECK_THROWS_AS(msgd::contraction_gamma(0.0, 1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(msgd::contraction_gamma(1.0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("sandwich implies the inner-product deviation bound") {
    // |<u,v> - eta <u, H v>| <= (eta (alpha-beta)/2 + |eta (alpha+beta)/2 - 1|) ||u|| ||v||
    // for unit u, v supported inside one maximal 3-expansion generator set.
    msgd::Rng rng(71);
    const int p = 8;
    const auto model = SparsityModel::plain(p, 2);
    const auto c3 = model.expand(3);
    const Vec truth = msgd::gen_parameter(model, 1.0, 2, 11);
    Dataset data = msgd::gen_dataset(GlmFamily::logistic(), truth, 150, 1.0, 11);
    const GlmFamily family = GlmFamily::logistic();
    const double r = 1.5;
    const auto est = msgd::analytic_smrh_bounds(model, data, family, r, 1000);

    for (int rep = 0; rep < 300; ++rep) {
        const Support u_set = c3.sample_generator(rng);
        Vec u = msgd::embed(msgd::normal_vector(rng, u_set.size()), u_set, p);
        Vec v = msgd::embed(msgd::normal_vector(rng, u_set.size()), u_set, p);
        u /= u.norm();
        v /= v.norm();
        Vec theta = msgd::embed(msgd::normal_vector(rng, u_set.size()), u_set, p);
        theta *= (r * rng.uniform()) / theta.norm();
        const double eta = 0.05 + (2.0 / est.beta) * rng.uniform();

        const msgd::Mat h = msgd::restricted_hessian(family, data, theta, u_set);
        const double uhv = msgd::restrict_to(u, u_set).dot(h * msgd::restrict_to(v, u_set));
        const double lhs = std::abs(u.dot(v) - eta * uhv);
        const double rhs = eta * (est.alpha - est.beta) / 2.0 +
                           std::abs(eta * (est.alpha + est.beta) / 2.0 - 1.0);
        CHECK(lhs <= rhs + 1e-10);
    }
}
