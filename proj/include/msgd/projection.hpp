#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "msgd/model.hpp"
#include "msgd/support.hpp"

namespace msgd {

struct ProjectionResult {
    Vec vector;                 // the projected point
    Support support;            // supp(vector)
    Support chosen_generator;   // maximal generator set realizing the argmax
    bool scaled = false;        // whether the sphere rescaling fired
};

/// v scaled onto the closed ball of radius r. The nextafter loop guarantees
/// the computed norm of the result never exceeds r.
inline std::pair<Vec, bool> rescale_to_ball(Vec v, double r) {
    if (std::isinf(r)) return {std::move(v), false};
    const double n = v.norm();
    if (n <= r) return {std::move(v), false};
    double c = r / n;
    Vec w = c * v;
    while (w.norm() > r) {
        c = std::nextafter(c, 0.0);
        w = c * v;
    }
    return {std::move(w), true};
}

namespace detail {

inline void check_vector_dim(const SparsityModel& model, const Eigen::Ref<const Vec>& v) {
    if (v.size() != model.ambient_dim())
        throw std::invalid_argument("projection: vector length " + std::to_string(v.size()) +
                                    " != ambient dimension " +
                                    std::to_string(model.ambient_dim()));
}

// Argmax of ||v|_S|| over maximal generator sets; ties resolved toward the
// lexicographically smallest set.
inline Support best_generator(const SparsityModel& model, const Eigen::Ref<const Vec>& v) {
    if (const auto* pk = std::get_if<PlainK>(&model.kind())) {
        // Top-k magnitudes, smaller index wins ties; this realizes the
        // lexicographically smallest argmax set.
        std::vector<int> order(static_cast<std::size_t>(model.ambient_dim()));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double ma = std::abs(v[a]), mb = std::abs(v[b]);
            return ma != mb ? ma > mb : a < b;
        });
        order.resize(static_cast<std::size_t>(pk->k));
        return Support(std::move(order));
    }
    if (const auto* dg = std::get_if<DisjointGroups>(&model.kind())) {
        // Greatest cell norms; smaller cell index wins ties. Cells are sorted
        // by first element, so this too picks the lexicographically smallest
        // union among tied choices.
        const int m = static_cast<int>(dg->cells.size());
        std::vector<double> sq(static_cast<std::size_t>(m), 0.0);
        for (int c = 0; c < m; ++c)
            sq[static_cast<std::size_t>(c)] =
                squared_norm_on(v, dg->cells[static_cast<std::size_t>(c)]);
        std::vector<int> order(static_cast<std::size_t>(m));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double na = sq[static_cast<std::size_t>(a)], nb = sq[static_cast<std::size_t>(b)];
            return na != nb ? na > nb : a < b;
        });
        Support u;
        for (int c = 0; c < dg->g_active; ++c)
            u = u.set_union(dg->cells[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])]);
        return u;
    }
    const auto& gens = std::get<ExplicitFamily>(model.kind()).generators;
    int best = 0;
    double best_sq = squared_norm_on(v, gens[0]);
    for (int g = 1; g < static_cast<int>(gens.size()); ++g) {
        const double sq = squared_norm_on(v, gens[static_cast<std::size_t>(g)]);
        if (sq > best_sq) {  // keep the earlier (lex smaller) set on ties
            best = g;
            best_sq = sq;
        }
    }
    return gens[static_cast<std::size_t>(best)];
}

}  // namespace detail

/// Euclidean projection onto the sparsity model (no norm constraint):
/// v restricted to the generator set maximizing ||v|_S||.
inline ProjectionResult project_unbounded(const SparsityModel& model,
                                          const Eigen::Ref<const Vec>& v) {
    detail::check_vector_dim(model, v);
    Support s0 = detail::best_generator(model, v);
    Vec w = mask_to(v, s0);
    ProjectionResult res;
    res.support = support_of(w);
    res.vector = std::move(w);
    res.chosen_generator = std::move(s0);
    res.scaled = false;
    return res;
}

/// Euclidean projection onto the model intersected with the radius-r ball:
/// the unbounded projection rescaled onto the sphere. Its support equals the
/// unbounded projection's support.
inline ProjectionResult project_bounded(const SparsityModel& model, double r,
                                        const Eigen::Ref<const Vec>& v) {
    if (!(r > 0.0)) throw std::invalid_argument("project_bounded: radius must be positive");
    ProjectionResult res = project_unbounded(model, v);
    auto [w, scaled] = rescale_to_ball(std::move(res.vector), r);
    res.vector = std::move(w);
    res.scaled = scaled;
    return res;
}

/// Oracle projection by direct minimization of ||candidate - v|| over all
/// maximal generator sets: for each S the best feasible candidate is v|_S
/// rescaled onto the ball, and minimizing the distance is equivalent to
/// maximizing q(S) = ||v|_S||^2 - (||v|_S|| - r)_+^2. Ties pick the
/// lexicographically smallest S, the same policy as project_bounded.
inline ProjectionResult brute_force_project(const SparsityModel& model, double r,
                                            const Eigen::Ref<const Vec>& v,
                                            std::uint64_t cap) {
    detail::check_vector_dim(model, v);
    if (!(r > 0.0)) throw std::invalid_argument("brute_force_project: radius must be positive");
    const std::vector<Support> gens = model.enumerate_generators(cap);
    int best = 0;
    double best_q = -1.0;
    for (int g = 0; g < static_cast<int>(gens.size()); ++g) {
        const double sq = squared_norm_on(v, gens[static_cast<std::size_t>(g)]);
        const double ns = std::sqrt(sq);
        const double over = std::isinf(r) ? 0.0 : std::max(ns - r, 0.0);
        const double q = sq - over * over;
        if (q > best_q) {
            best = g;
            best_q = q;
        }
    }
    Support s0 = gens[static_cast<std::size_t>(best)];
    Vec masked = mask_to(v, s0);
    Support supp = support_of(masked);  // before rescaling, as in project_bounded
    auto [w, scaled] = rescale_to_ball(std::move(masked), r);
    ProjectionResult res;
    res.support = std::move(supp);
    res.vector = std::move(w);
    res.chosen_generator = std::move(s0);
    res.scaled = scaled;
    return res;
}

}  // namespace msgd
