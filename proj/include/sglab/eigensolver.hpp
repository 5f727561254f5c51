#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "base.hpp"
#include "linalg.hpp"

namespace sglab {

struct EigenDecomposition {
    std::vector<double> values;   // ascending
    matrix vectors;               // columns are eigenvectors
    std::vector<double> weight;   // diagonal M paired with the vectors (empty = identity)

    std::size_t size() const { return values.size(); }
};

namespace detail {

inline double offdiag_frobenius(const matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

} // namespace detail

// Cyclic Jacobi for a symmetric matrix. Sweeps over all upper-triangle pairs
// until the off-diagonal Frobenius norm drops below tol * ||A||_F.
inline EigenDecomposition eigh(const matrix& a_in, double tol = 1e-12) {
    if (a_in.rows() != a_in.cols()) throw numerical_error("eigh: matrix not square");
    const std::size_t n = a_in.rows();
    if (n > 1500) throw budget_error("eigh: dimension exceeds budget of 1500");
    if (symmetry_defect(a_in) > 1e-10 * (1.0 + max_abs(a_in)))
        throw numerical_error("eigh: matrix not symmetric");

    matrix a = a_in;
    matrix v = matrix::identity(n);
    const double anorm = frobenius_norm(a);
    const double thresh = tol * (anorm > 0.0 ? anorm : 1.0);

    const int max_sweeps = 60;
    int sweep = 0;
    while (detail::offdiag_frobenius(a) > thresh) {
        if (++sweep > max_sweeps) throw convergence_error("eigh: Jacobi sweeps exhausted");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                double t;
                if (tau >= 0.0)
                    t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
                else
                    t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    EigenDecomposition d;
    d.values.resize(n);
    d.vectors = matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        d.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) d.vectors(i, j) = v(i, order[j]);
    }
    return d;
}

// Generalized problem L v = lambda M v with M a positive diagonal weight,
// reduced symmetrically via M^{-1/2} L M^{-1/2}; the returned vectors are
// M-orthonormal columns.
inline EigenDecomposition generalized_eigh(const matrix& l, const std::vector<double>& m_diag,
                                           double tol = 1e-12) {
    const std::size_t n = l.rows();
    if (m_diag.size() != n) throw numerical_error("generalized_eigh: weight size mismatch");
    for (double w : m_diag)
        if (!(w > 0.0)) throw numerical_error("generalized_eigh: weight must be positive");

    std::vector<double> inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(m_diag[i]);

    matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b(i, j) = inv_sqrt[i] * l(i, j) * inv_sqrt[j];
    // symmetrize away the rounding skew before Jacobi
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (b(i, j) + b(j, i));
            b(i, j) = avg;
            b(j, i) = avg;
        }

    EigenDecomposition d = eigh(b, tol);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) d.vectors(i, j) *= inv_sqrt[i];
    d.weight = m_diag;
    return d;
}

// ||L V - M V diag(lambda)||_max, the contract residual for a decomposition.
inline double eigen_residual(const matrix& l, const EigenDecomposition& d) {
    const std::size_t n = l.rows();
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            double lv = 0.0;
            for (std::size_t k = 0; k < n; ++k) lv += l(i, k) * d.vectors(k, j);
            const double m = d.weight.empty() ? 1.0 : d.weight[i];
            worst = std::max(worst, std::abs(lv - d.values[j] * m * d.vectors(i, j)));
        }
    }
    return worst;
}

// max |V^T M V - I|
inline double orthonormality_defect(const EigenDecomposition& d) {
    const std::size_t n = d.size();
    double worst = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double m = d.weight.empty() ? 1.0 : d.weight[i];
                dot += d.vectors(i, a) * m * d.vectors(i, b);
            }
            worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
    }
    return worst;
}

} // namespace sglab
