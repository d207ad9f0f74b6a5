#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "msgd/glm.hpp"
#include "msgd/model.hpp"
#include "msgd/projection.hpp"
#include "msgd/smrh.hpp"

namespace msgd {

/// Fixed step 2/(alpha+beta) from known sandwich constants.
struct FixedOptimal {
    double alpha = 0.0;
    double beta = 0.0;
};
/// User-chosen constant step.
struct FixedValue {
    double eta = 1.0;
};
/// Per-iteration step 1/q from a restricted-Hessian Rayleigh quotient along
/// the most recent admissible direction.
struct AdaptiveQuadraticForm {};

using StepPolicy = std::variant<FixedOptimal, FixedValue, AdaptiveQuadraticForm>;

struct SolverConfig {
    StepPolicy step_policy = AdaptiveQuadraticForm{};
    double radius = std::numeric_limits<double>::infinity();
    int max_iters = 500;
    double rel_tol = 1e-8;
    std::optional<Vec> reference;  // enables distance recording for audits
};

/// Per-iteration record. Rows 0..T-1 describe the T gradient/projection
/// steps taken; objective/support/dist_to_ref additionally carry a final
/// entry for the returned iterate (sizes T+1).
struct SolverTrace {
    std::vector<double> eta;
    std::vector<double> objective;
    std::vector<Support> support;
    std::vector<double> step_norm;
    std::vector<double> dist_to_ref;  // empty unless a reference was supplied

    int steps() const { return static_cast<int>(eta.size()); }
    bool has_reference() const { return !dist_to_ref.empty(); }
};

struct FitResult {
    Vec theta;
    SolverTrace trace;
};

class FlatCurvature : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// eta = ||delta||^2 / <delta, grad^2 f(theta) delta>. With a valid sandwich
/// over the right support family this lands in [1/alpha, 1/beta]; callers
/// must supply a direction whose support union with supp(theta) is
/// model-admissible.
inline double adaptive_step(const GlmFamily& family, const Dataset& data,
                            const Eigen::Ref<const Vec>& theta,
                            const Eigen::Ref<const Vec>& delta) {
    const double dn2 = delta.squaredNorm();
    if (!(dn2 > 0.0)) throw std::invalid_argument("adaptive_step: direction must be nonzero");
    const double q = hessian_quadratic_form(family, data, theta, delta) / dn2;
    if (q <= 1e-12) throw FlatCurvature("adaptive_step: flat curvature direction (q = " +
                                        std::to_string(q) + ")");
    return 1.0 / q;
}

struct ReferenceGradient {
    Support support;  // supp of the 2-expansion projection of grad f(theta_bar)
    double norm = 0.0;
};

/// Support and norm of the dominant admissible part of the gradient at a
/// feasible reference point: projecting the gradient onto the 2-expanded
/// model (support selection is radius-independent).
inline ReferenceGradient reference_gradient_term(const SparsityModel& model, double r,
                                                 const GlmFamily& family, const Dataset& data,
                                                 const Eigen::Ref<const Vec>& theta_bar) {
    if (!(r > 0.0)) throw std::invalid_argument("reference_gradient_term: radius must be positive");
    if (theta_bar.size() != model.ambient_dim())
        throw std::invalid_argument("reference_gradient_term: dimension mismatch");
    if (!model.contains(support_of(theta_bar)))
        throw std::invalid_argument("reference_gradient_term: supp(theta_bar) not in the model");
    if (theta_bar.norm() > r * (1.0 + 1e-10))
        throw std::invalid_argument("reference_gradient_term: ||theta_bar|| exceeds radius");

    const Vec g = gradient(family, data, theta_bar);
    const ProjectionResult proj = project_unbounded(model.expand(2), g);
    ReferenceGradient out;
    out.support = proj.support;
    out.norm = proj.vector.norm();
    return out;
}

namespace detail {

inline Vec top_admissible_direction(const SparsityModel& model, const Eigen::Ref<const Vec>& g) {
    return project_unbounded(model, g).vector;
}

}  // namespace detail

/// Projected gradient descent under the model constraint: starting from 0,
/// alternate a gradient step with the exact bounded model projection until
/// the relative step shrinks below rel_tol or max_iters is reached. Every
/// iterate has an admissible support and norm at most config.radius.
inline FitResult fit(const SparsityModel& model, const GlmFamily& family, const Dataset& data,
                     const SolverConfig& config) {
    validate_dataset(family, data);
    if (model.ambient_dim() != data.p())
        throw std::invalid_argument("fit: model/data dimension mismatch");
    if (config.max_iters < 1) throw std::invalid_argument("fit: max_iters must be >= 1");
    if (!(config.rel_tol >= 0.0)) throw std::invalid_argument("fit: rel_tol must be >= 0");
    if (!(config.radius > 0.0)) throw std::invalid_argument("fit: radius must be positive");
    if (config.reference && config.reference->size() != data.p())
        throw std::invalid_argument("fit: reference dimension mismatch");

    double fixed_eta = 0.0;
    const bool adaptive = std::holds_alternative<AdaptiveQuadraticForm>(config.step_policy);
    if (const auto* fo = std::get_if<FixedOptimal>(&config.step_policy))
        fixed_eta = step_size_optimal(fo->alpha, fo->beta);  // validates 0 < beta <= alpha
    else if (const auto* fv = std::get_if<FixedValue>(&config.step_policy)) {
        if (!(fv->eta > 0.0)) throw std::invalid_argument("fit: step size must be positive");
        fixed_eta = fv->eta;
    }

    const Index p = data.p();
    Vec theta = Vec::Zero(p);
    Vec theta_prev = Vec::Zero(p);
    bool have_prev = false;

    SolverTrace trace;
    auto record_state = [&](const Vec& th, const Support& supp) {
        trace.objective.push_back(loss(family, data, th));
        trace.support.push_back(supp);
        if (config.reference) trace.dist_to_ref.push_back((th - *config.reference).norm());
    };
    record_state(theta, Support{});

    for (int i = 0; i < config.max_iters; ++i) {
        const Vec g = gradient(family, data, theta);

        double eta = fixed_eta;
        if (adaptive) {
            // Previous iterate difference lies in the 2-expansion; at the
            // start fall back to the gradient's top admissible part.
            Vec delta = have_prev ? Vec(theta - theta_prev)
                                  : detail::top_admissible_direction(model, g);
            if (delta.squaredNorm() == 0.0) break;  // stationary under the model
            eta = adaptive_step(family, data, theta, delta);
        }

        const Vec chi = theta - eta * g;
        ProjectionResult next = project_bounded(model, config.radius, chi);

        const double step = (next.vector - theta).norm();
        trace.eta.push_back(eta);
        trace.step_norm.push_back(step);

        theta_prev = theta;
        have_prev = true;
        theta = std::move(next.vector);
        record_state(theta, next.support);

        if (step <= config.rel_tol * std::max(1.0, theta_prev.norm())) break;
    }
    return {std::move(theta), std::move(trace)};
}

/// Per-step audit of the distance recursion
///   dist[i+1] <= 2 gamma dist[i] + 2 eta grad_term
/// and of its cumulative geometric envelope. Violations beyond tol are
/// listed; an empty report certifies the trace against the supplied
/// constants.
struct ContractionReport {
    struct Violation {
        int iter;
        double lhs;
        double rhs;
    };
    std::vector<Violation> step_violations;
    std::vector<Violation> envelope_violations;
    double max_step_slack = -std::numeric_limits<double>::infinity();
    double tolerance = 0.0;

    bool ok() const { return step_violations.empty() && envelope_violations.empty(); }
};

inline ContractionReport verify_contraction(const SolverTrace& trace,
                                            const Eigen::Ref<const Vec>& theta_bar,
                                            double gamma, double eta, double grad_term,
                                            double tol = 1e-9) {
    if (!trace.has_reference())
        throw std::invalid_argument("verify_contraction: trace lacks reference distances");

    ContractionReport report;
    report.tolerance = tol;
    const int steps = trace.steps();
    for (int i = 0; i < steps; ++i) {
        const double lhs = trace.dist_to_ref[static_cast<std::size_t>(i) + 1];
        const double rhs =
            2.0 * gamma * trace.dist_to_ref[static_cast<std::size_t>(i)] + 2.0 * eta * grad_term;
        report.max_step_slack = std::max(report.max_step_slack, lhs - rhs);
        if (lhs > rhs + tol) report.step_violations.push_back({i, lhs, rhs});
    }

    const double two_gamma = 2.0 * gamma;
    if (std::abs(1.0 - two_gamma) > 1e-15) {
        const double base = theta_bar.norm();
        double power = 1.0;  // (2 gamma)^i
        for (int i = 0; i <= steps; ++i) {
            const double envelope =
                power * base + 2.0 * eta * (1.0 - power) / (1.0 - two_gamma) * grad_term;
            const double lhs = trace.dist_to_ref[static_cast<std::size_t>(i)];
            if (lhs > envelope + tol) report.envelope_violations.push_back({i, lhs, envelope});
            power *= two_gamma;
        }
    }
    return report;
}

}  // namespace msgd
