#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "base.hpp"

namespace sglab {

enum class DecimationBranch { minus, plus };

// Inverse branches of R(y) = y(5-y). The minus branch is written in
// conjugate form 2x / (5 + sqrt(25-4x)): the textbook (5 - sqrt(25-4x))/2
// cancels catastrophically for small x and collapses iterates to exact 0.
inline double psi(double x, DecimationBranch branch) {
    const double disc = 25.0 - 4.0 * x;
    if (disc < 0.0) throw std::domain_error("psi: x exceeds 25/4");
    const double root = std::sqrt(disc);
    if (branch == DecimationBranch::minus) return 2.0 * x / (5.0 + root);
    return 0.5 * (5.0 + root);
}

inline double forward_map(double lambda) { return lambda * (5.0 - lambda); }

struct RenormalizedLimit {
    double seed = 0.0;
    double value = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

namespace detail {

constexpr int decimation_iteration_cap = 200;

// r_n = 5^n psi_-^n(seed) for a fixed iteration count.
inline double renormalized_iterate(double seed, int n) {
    double x = seed;
    double scale = 1.0;
    for (int k = 0; k < n; ++k) {
        x = psi(x, DecimationBranch::minus);
        scale *= 5.0;
    }
    return scale * x;
}

} // namespace detail

// Psi(seed) = lim_n 5^n psi_-^n(seed), iterated until the renormalized
// increments fall below tol.
inline RenormalizedLimit renormalized_limit(double seed, double tol = 1e-12) {
    if (!(tol > 0.0)) throw std::invalid_argument("renormalized_limit: tol must be positive");
    if (seed < 0.0 || seed > 6.25)
        throw std::domain_error("renormalized_limit: seed outside [0, 25/4]");

    double x = seed;
    double scale = 1.0;
    double r_prev = seed;
    for (int n = 1; n <= detail::decimation_iteration_cap; ++n) {
        x = psi(x, DecimationBranch::minus);
        scale *= 5.0;
        const double r = scale * x;
        const double inc = std::abs(r - r_prev);
        if (inc <= tol) return {seed, r, n, inc};
        r_prev = r;
    }
    throw convergence_error("renormalized_limit: no convergence within iteration cap");
}

struct GapConstants {
    double alpha = 0.0;
    double beta = 0.0;
    double tolerance = 0.0;
};

// alpha = Psi(5)/Psi(3), beta = 5 Psi(3)/Psi(5); checked stable under
// doubling the iteration count.
inline GapConstants gap_constants(double tol = 1e-12) {
    if (!(tol > 0.0)) throw std::invalid_argument("gap_constants: tol must be positive");
    const RenormalizedLimit p5 = renormalized_limit(5.0, tol);
    const RenormalizedLimit p3 = renormalized_limit(3.0, tol);
    const double alpha = p5.value / p3.value;
    const double beta = 5.0 * p3.value / p5.value;

    const double p5d = detail::renormalized_iterate(5.0, 2 * p5.iterations);
    const double p3d = detail::renormalized_iterate(3.0, 2 * p3.iterations);
    if (std::abs(p5d / p3d - alpha) > tol || std::abs(5.0 * p3d / p5d - beta) > tol)
        throw convergence_error("gap_constants: not stable under doubled iterations");

    return {alpha, beta, tol};
}

// Distinct Dirichlet graph eigenvalues of the level-m gasket approximation,
// via the decimation set recursion S_1 = {2,5},
// S_{m+1} = (psi_pm(S_m) minus {2,5,6}) union {5,6}.
// Cross-checked against the dense eigensolver for m <= 4 in the test suite.
inline std::vector<double> dirichlet_spectrum(int level) {
    if (level < 1) throw std::invalid_argument("dirichlet_spectrum: level must be >= 1");
    std::vector<double> s = {2.0, 5.0};
    const auto exceptional = [](double v) {
        return std::abs(v - 2.0) <= 1e-8 || std::abs(v - 5.0) <= 1e-8 ||
               std::abs(v - 6.0) <= 1e-8;
    };
    for (int m = 1; m < level; ++m) {
        std::vector<double> next;
        next.reserve(2 * s.size() + 2);
        for (double lam : s) {
            const double lo = psi(lam, DecimationBranch::minus);
            const double hi = psi(lam, DecimationBranch::plus);
            if (!exceptional(lo)) next.push_back(lo);
            if (!exceptional(hi)) next.push_back(hi);
        }
        next.push_back(5.0);
        next.push_back(6.0);
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end(),
                               [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
                   next.end());
        s = std::move(next);
    }
    return s;
}

// Renormalized candidates 5^m Psi(lambda) over all levels m <= max_level and
// all non-exceptional Dirichlet eigenvalues lambda, deduplicated within tol.
// Labeled "decimation candidates" in reports: whether each one is a genuine
// SG eigenvalue is a continuation subtlety left open here.
inline std::vector<double> generate_sg_eigenvalues(int max_level, double tol) {
    if (max_level < 1) throw std::invalid_argument("generate_sg_eigenvalues: max_level must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("generate_sg_eigenvalues: tol must be positive");

    std::vector<double> out;
    for (int m = 1; m <= max_level; ++m) {
        double scale = 1.0;
        for (int k = 0; k < m; ++k) scale *= 5.0;
        for (double lam : dirichlet_spectrum(m)) {
            if (std::abs(lam - 2.0) <= 1e-8 || std::abs(lam - 5.0) <= 1e-8 ||
                std::abs(lam - 6.0) <= 1e-8)
                continue;
            const double inner_tol = std::min(tol, 1e-13);
            out.push_back(scale * renormalized_limit(lam, inner_tol).value);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [tol](double a, double b) { return std::abs(a - b) <= tol; }),
              out.end());
    return out;
}

} // namespace sglab
