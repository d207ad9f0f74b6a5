#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "msgd/types.hpp"

namespace msgd {

/// Extreme eigenvalues of a symmetric matrix via cyclic Jacobi sweeps with a
/// fixed (row-major) rotation order, run until the off-diagonal Frobenius
/// norm drops below 1e-12. Deterministic, suitable for dimensions up to 256.
template <class Derived>
std::pair<double, double> extreme_eigenvalues(const Eigen::MatrixBase<Derived>& m) {
    const Index n = m.rows();
    if (n != m.cols()) throw std::invalid_argument("extreme_eigenvalues: matrix not square");
    if (n < 1 || n > 256)
        throw std::invalid_argument("extreme_eigenvalues: dimension must be in [1,256]");
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12)
        throw std::invalid_argument("extreme_eigenvalues: matrix asymmetric beyond 1e-12");

    Mat a = 0.5 * (m + m.transpose());
    if (n == 1) return {a(0, 0), a(0, 0)};

    constexpr int kMaxSweeps = 64;
    constexpr double kOffTol = 1e-12;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off2 = 0.0;
        for (Index i = 0; i < n; ++i)
            for (Index j = i + 1; j < n; ++j) off2 += a(i, j) * a(i, j);
        if (std::sqrt(2.0 * off2) <= kOffTol) break;

        for (Index p = 0; p < n - 1; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (Index i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (Index i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
            }
        }
    }
    return {a.diagonal().minCoeff(), a.diagonal().maxCoeff()};
}

/// sqrt(lambda_max(g)) for a symmetric PSD matrix g; clamps tiny negative
/// roundoff to zero.
template <class Derived>
double spectral_norm_from_gram(const Eigen::MatrixBase<Derived>& g) {
    const auto [lo, hi] = extreme_eigenvalues(g);
    (void)lo;
    return std::sqrt(std::max(hi, 0.0));
}

}  // namespace msgd
