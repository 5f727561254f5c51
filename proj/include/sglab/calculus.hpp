#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "base.hpp"
#include "eigensolver.hpp"
#include "gasket.hpp"
#include "linalg.hpp"
#include "symbols.hpp"

namespace sglab {

// Bivariate operator F(L1, L2) acting on functions of the product space.
// Everything below works with n1 x n2 arrays and the two factor
// decompositions; the (n1 n2) x (n1 n2) matrix is never materialized except
// by the explicit dense oracle at the bottom.
struct ProductOperator {
    EigenDecomposition dec1;
    EigenDecomposition dec2;
    MultiplierSymbol symbol;
};

struct JointSpectrumEntry {
    std::size_t i = 0;
    std::size_t j = 0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

inline std::vector<JointSpectrumEntry> joint_spectrum(const ProductOperator& op) {
    std::vector<JointSpectrumEntry> out;
    out.reserve(op.dec1.values.size() * op.dec2.values.size());
    for (std::size_t i = 0; i < op.dec1.values.size(); ++i)
        for (std::size_t j = 0; j < op.dec2.values.size(); ++j)
            out.push_back({i, j, op.dec1.values[i], op.dec2.values[j]});
    return out;
}

namespace detail {

inline double factor_weight(const EigenDecomposition& dec, std::size_t i) {
    return dec.weight.empty() ? 1.0 : dec.weight[i];
}

// Symbol evaluated across the attained joint spectrum. Any non-finite value
// means the symbol is singular on the spectrum actually present.
inline matrix symbol_values(const ProductOperator& op) {
    const std::size_t n1 = op.dec1.values.size();
    const std::size_t n2 = op.dec2.values.size();
    matrix fv(n1, n2);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
            const double v = op.symbol(op.dec1.values[i], op.dec2.values[j]);
            if (!std::isfinite(v))
                throw singular_symbol_error(
                    "symbol '" + op.symbol.name + "' is not finite at attained pair (" +
                    std::to_string(op.dec1.values[i]) + ", " +
                    std::to_string(op.dec2.values[j]) + ")");
            fv(i, j) = v;
        }
    return fv;
}

// Kernel slice K(., (y1, y2)) of the operator applied to the unit-mass atom
// at (y1, y2): K = V1 (F .* outer(V1 row y1, V2 row y2)) V2^T.
inline matrix kernel_column_with(const ProductOperator& op, const matrix& fv, std::size_t y1,
                                 std::size_t y2) {
    const std::size_t n1 = op.dec1.vectors.rows();
    const std::size_t n2 = op.dec2.vectors.rows();
    matrix coef(fv.rows(), fv.cols());
    for (std::size_t k = 0; k < fv.rows(); ++k)
        for (std::size_t l = 0; l < fv.cols(); ++l)
            coef(k, l) = fv(k, l) * op.dec1.vectors(y1, k) * op.dec2.vectors(y2, l);
    matrix left = matmul(op.dec1.vectors, coef);
    matrix out(n1, n2);
    for (std::size_t x1 = 0; x1 < n1; ++x1)
        for (std::size_t x2 = 0; x2 < n2; ++x2) {
            double acc = 0.0;
            for (std::size_t l = 0; l < fv.cols(); ++l)
                acc += left(x1, l) * op.dec2.vectors(x2, l);
            out(x1, x2) = acc;
        }
    return out;
}

inline void check_budget(const ProductOperator& op, const char* what) {
    const std::size_t joint = op.dec1.values.size() * op.dec2.values.size();
    if (joint > 20000)
        throw budget_error(std::string(what) + ": joint spectrum size " + std::to_string(joint) +
                           " exceeds the exact budget of 20000");
}

} // namespace detail

// g = F(L1, L2) f via the two-sided transform V1 (F .* (V1^T M1 f M2 V2)) V2^T.
inline matrix apply(const ProductOperator& op, const matrix& f) {
    const std::size_t n1 = op.dec1.vectors.rows();
    const std::size_t n2 = op.dec2.vectors.rows();
    if (f.rows() != n1 || f.cols() != n2)
        throw std::invalid_argument("apply: input is " + std::to_string(f.rows()) + " x " +
                                    std::to_string(f.cols()) + ", expected " + std::to_string(n1) +
                                    " x " + std::to_string(n2));
    const matrix fv = detail::symbol_values(op);

    matrix mf(n1, n2);
    for (std::size_t i = 0; i < n1; ++i) {
        const double w1 = detail::factor_weight(op.dec1, i);
        for (std::size_t j = 0; j < n2; ++j)
            mf(i, j) = w1 * f(i, j) * detail::factor_weight(op.dec2, j);
    }
    matrix coef = matmul(op.dec1.vectors.transposed(), matmul(mf, op.dec2.vectors));
    for (std::size_t k = 0; k < coef.rows(); ++k)
        for (std::size_t l = 0; l < coef.cols(); ++l) coef(k, l) *= fv(k, l);
    return matmul_transB(matmul(op.dec1.vectors, coef), op.dec2.vectors);
}

// Kernel column against the atom delta_{(y1,y2)} / mu_P(y1, y2).
inline matrix kernel_column(const ProductOperator& op, std::size_t y1, std::size_t y2) {
    if (y1 >= op.dec1.vectors.rows() || y2 >= op.dec2.vectors.rows())
        throw std::invalid_argument("kernel_column: atom index out of range");
    const matrix fv = detail::symbol_values(op);
    return detail::kernel_column_with(op, fv, y1, y2);
}

// Exact L2 operator norm: the joint spectrum is attained, so the norm is the
// maximum of |F| over it.
inline double l2_norm(const ProductOperator& op) {
    return max_abs(detail::symbol_values(op));
}

// Exact L1 -> L1 norm of the kernel: sup over atoms y of the mu_P-weighted
// column mass. Streams one kernel column at a time.
inline double l1_norm(const ProductOperator& op) {
    detail::check_budget(op, "l1_norm");
    const matrix fv = detail::symbol_values(op);
    const std::size_t n1 = op.dec1.vectors.rows();
    const std::size_t n2 = op.dec2.vectors.rows();
    double sup = 0.0;
    for (std::size_t y1 = 0; y1 < n1; ++y1)
        for (std::size_t y2 = 0; y2 < n2; ++y2) {
            const matrix col = detail::kernel_column_with(op, fv, y1, y2);
            double mass = 0.0;
            for (std::size_t x1 = 0; x1 < n1; ++x1) {
                const double w1 = detail::factor_weight(op.dec1, x1);
                for (std::size_t x2 = 0; x2 < n2; ++x2)
                    mass += std::abs(col(x1, x2)) * w1 * detail::factor_weight(op.dec2, x2);
            }
            sup = std::max(sup, mass);
        }
    return sup;
}

// Sampled variant for sizes past the exact budget: the sup runs over a
// seeded random subset of atoms and must be reported as a "sampled sup".
inline double l1_norm_sampled(const ProductOperator& op, std::size_t samples, std::uint64_t seed) {
    if (samples == 0) throw std::invalid_argument("l1_norm_sampled: need at least one sample");
    const matrix fv = detail::symbol_values(op);
    const std::size_t n1 = op.dec1.vectors.rows();
    const std::size_t n2 = op.dec2.vectors.rows();
    rng gen(seed);
    double sup = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t y1 = gen.index(n1);
        const std::size_t y2 = gen.index(n2);
        const matrix col = detail::kernel_column_with(op, fv, y1, y2);
        double mass = 0.0;
        for (std::size_t x1 = 0; x1 < n1; ++x1) {
            const double w1 = detail::factor_weight(op.dec1, x1);
            for (std::size_t x2 = 0; x2 < n2; ++x2)
                mass += std::abs(col(x1, x2)) * w1 * detail::factor_weight(op.dec2, x2);
        }
        sup = std::max(sup, mass);
    }
    return sup;
}

// Weak (1,1) quantity: sup over atoms y and thresholds of
// lambda mu_P{ |T(delta_y / mu_P(y))| >= lambda }, thresholds scanned at the
// attained kernel values (the >= convention makes the identity give 1).
inline double weak11_quantity(const ProductOperator& op) {
    detail::check_budget(op, "weak11_quantity");
    const matrix fv = detail::symbol_values(op);
    const std::size_t n1 = op.dec1.vectors.rows();
    const std::size_t n2 = op.dec2.vectors.rows();
    double sup = 0.0;
    std::vector<std::pair<double, double>> level_sets;
    level_sets.reserve(n1 * n2);
    for (std::size_t y1 = 0; y1 < n1; ++y1)
        for (std::size_t y2 = 0; y2 < n2; ++y2) {
            const matrix col = detail::kernel_column_with(op, fv, y1, y2);
            level_sets.clear();
            for (std::size_t x1 = 0; x1 < n1; ++x1) {
                const double w1 = detail::factor_weight(op.dec1, x1);
                for (std::size_t x2 = 0; x2 < n2; ++x2)
                    level_sets.emplace_back(std::abs(col(x1, x2)),
                                            w1 * detail::factor_weight(op.dec2, x2));
            }
            std::sort(level_sets.begin(), level_sets.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
            double cum = 0.0;
            std::size_t i = 0;
            while (i < level_sets.size()) {
                const double value = level_sets[i].first;
                while (i < level_sets.size() && level_sets[i].first == value)
                    cum += level_sets[i++].second;
                sup = std::max(sup, value * cum);
            }
        }
    return sup;
}

// Certified lower bound on the L^p operator norm: seeded random starts and
// alternating duality ascent (u = |g|^{p-1} sgn g picks out ||g||_p, then one
// more application of the mu-self-adjoint operator proposes the next input).
inline double lp_lower_bound(const ProductOperator& op, double p, std::size_t starts,
                             std::uint64_t seed) {
    if (!(p > 1.0)) throw std::invalid_argument("lp_lower_bound: need p > 1");
    if (starts == 0) throw std::invalid_argument("lp_lower_bound: need at least one start");
    const std::size_t n1 = op.dec1.vectors.rows();
    const std::size_t n2 = op.dec2.vectors.rows();
    const double q = p / (p - 1.0);

    const auto norm_p = [&](const matrix& g, double expo) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n1; ++i) {
            const double w1 = detail::factor_weight(op.dec1, i);
            for (std::size_t j = 0; j < n2; ++j)
                acc += std::pow(std::abs(g(i, j)), expo) * w1 *
                       detail::factor_weight(op.dec2, j);
        }
        return std::pow(acc, 1.0 / expo);
    };
    const auto dual_sign = [&](const matrix& g, double expo) {
        matrix u(n1, n2);
        for (std::size_t i = 0; i < n1; ++i)
            for (std::size_t j = 0; j < n2; ++j) {
                const double v = g(i, j);
                u(i, j) = v == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(v), expo - 1.0), v);
            }
        return u;
    };

    rng gen(seed);
    double best = 0.0;
    for (std::size_t s = 0; s < starts; ++s) {
        matrix f(n1, n2);
        for (std::size_t i = 0; i < n1; ++i)
            for (std::size_t j = 0; j < n2; ++j) f(i, j) = 2.0 * gen.uniform() - 1.0;
        double nf = norm_p(f, p);
        if (nf == 0.0) continue;
        for (std::size_t i = 0; i < n1; ++i)
            for (std::size_t j = 0; j < n2; ++j) f(i, j) /= nf;

        double prev = -1.0;
        for (int iter = 0; iter < 25; ++iter) {
            const matrix g = apply(op, f);
            const double ng = norm_p(g, p);
            best = std::max(best, ng);
            if (ng == 0.0 || std::abs(ng - prev) <= 1e-12 * std::max(1.0, ng)) break;
            prev = ng;
            const matrix w = apply(op, dual_sign(g, p));
            matrix next = dual_sign(w, q);
            const double nn = norm_p(next, p);
            if (nn == 0.0) break;
            for (std::size_t i = 0; i < n1; ++i)
                for (std::size_t j = 0; j < n2; ++j) next(i, j) /= nn;
            f = next;
        }
    }
    return best;
}

// Maximal open subintervals of the window containing no ratio lambda_i /
// lambda_j of the given spectrum.
inline std::vector<std::pair<double, double>> ratio_gaps(const std::vector<double>& spectrum,
                                                         std::pair<double, double> window) {
    if (spectrum.empty()) throw std::invalid_argument("ratio_gaps: empty spectrum");
    if (!(window.first < window.second))
        throw std::invalid_argument("ratio_gaps: window must be a nonempty interval");
    for (double v : spectrum)
        if (!(v > 0.0)) throw std::invalid_argument("ratio_gaps: spectrum must be positive");

    std::vector<double> ratios;
    for (double a : spectrum)
        for (double b : spectrum) {
            const double r = a / b;
            if (r > window.first && r < window.second) ratios.push_back(r);
        }
    std::sort(ratios.begin(), ratios.end());

    std::vector<std::pair<double, double>> gaps;
    double prev = window.first;
    for (double r : ratios) {
        if (r > prev) gaps.emplace_back(prev, r);
        prev = r;
    }
    if (window.second > prev) gaps.emplace_back(prev, window.second);
    return gaps;
}

struct QuasiellipticResult {
    double min_gap = 0.0;
    bool in_gap = false;
};

// Relative spectral gap of c L1 - d L2 over the attained pairs, plus whether
// d/c sits in a ratio gap of the supplied spectra (equivalently, whether any
// attained pair comes within relative 1e-12 of the singular locus).
inline QuasiellipticResult quasielliptic_check(double c, double d,
                                               const std::vector<double>& spec1,
                                               const std::vector<double>& spec2) {
    if (!(c > 0.0) || !(d > 0.0))
        throw std::invalid_argument("quasielliptic_check: c and d must be positive");
    if (spec1.empty() || spec2.empty())
        throw std::invalid_argument("quasielliptic_check: empty spectrum");
    double min_gap = std::numeric_limits<double>::infinity();
    for (double li : spec1)
        for (double lj : spec2) {
            const double den = c * li + d * lj;
            const double gap = den > 0.0 ? std::abs(c * li - d * lj) / den : 0.0;
            min_gap = std::min(min_gap, gap);
        }
    return {min_gap, min_gap > 1e-12};
}

// Count of attained joint-spectrum pairs the cutoff support touches; nonzero
// means the gap identity (omega F)(L1, L2) = 0 is not available at this level.
inline std::size_t omega_support_contact(const CutoffOmega& omega,
                                         const std::vector<double>& spec1,
                                         const std::vector<double>& spec2) {
    std::size_t count = 0;
    for (double li : spec1)
        for (double lj : spec2)
            if (omega(li, lj) > 0.0) ++count;
    return count;
}

// Truncated Calderon-Zygmund integral: sup over atoms y of the kernel mass of
// F (1 - Phi_r) outside the product ball {max(rho1, rho2) < r}.
inline double cz_truncation_integral(const ProductOperator& op, double r,
                                     const MetricMatrix& metric1, const MetricMatrix& metric2,
                                     const MeasureVector& mu1, const MeasureVector& mu2,
                                     double m) {
    if (!(r > 0.0)) throw std::invalid_argument("cz_truncation_integral: r must be positive");
    detail::check_budget(op, "cz_truncation_integral");
    const std::size_t n1 = op.dec1.vectors.rows();
    const std::size_t n2 = op.dec2.vectors.rows();
    if (mu1.size() != n1 || mu2.size() != n2 || metric1.dist.rows() != n1 ||
        metric2.dist.rows() != n2)
        throw std::invalid_argument("cz_truncation_integral: metric or measure size mismatch");
    // the product distance never exceeds the larger factor diameter, so past
    // that the tail region is empty and the integral is exactly zero
    if (r > std::max(diameter(metric1), diameter(metric2))) return 0.0;

    ProductOperator trunc{op.dec1, op.dec2, cz_truncated_symbol(op.symbol, r, m)};
    const matrix fv = detail::symbol_values(trunc);
    double sup = 0.0;
    for (std::size_t y1 = 0; y1 < n1; ++y1)
        for (std::size_t y2 = 0; y2 < n2; ++y2) {
            const matrix col = detail::kernel_column_with(trunc, fv, y1, y2);
            double mass = 0.0;
            for (std::size_t x1 = 0; x1 < n1; ++x1)
                for (std::size_t x2 = 0; x2 < n2; ++x2) {
                    const double rho = std::max(metric1.dist(x1, y1), metric2.dist(x2, y2));
                    if (rho >= r)
                        mass += std::abs(col(x1, x2)) * mu1[x1] * mu2[x2];
                }
            sup = std::max(sup, mass);
        }
    return sup;
}

struct LemmaPReport {
    double constant = 0.0;
    double symbol_sup = 0.0;
    std::size_t support_violations = 0;
    std::size_t samples = 0;
};

// Pointwise kernel-row bound: for sampled base points x_P the squared L2 row
// mass ||K(x_P, .)||^2 is compared against ||F||_inf^2 / prod mu_j(B(x_j,
// 1/R)); the report carries the minimal constant making that hold. The row
// mass collapses by orthonormality to (V1.^2) F.^2 (V2.^2)^T, so no kernels
// are formed. ||F||_inf is taken over the attained pairs; attained pairs
// outside [0, R^m]^2 where F fails to vanish are counted as support
// violations rather than rejected.
inline LemmaPReport lemma_p_check(const ProductOperator& op, double R, double m,
                                  const MetricMatrix& metric1, const MetricMatrix& metric2) {
    if (!(R > 0.0)) throw std::invalid_argument("lemma_p_check: R must be positive");
    if (!(m > 1.0)) throw std::invalid_argument("lemma_p_check: need m > 1");
    const matrix fv = detail::symbol_values(op);
    const std::size_t n1 = op.dec1.vectors.rows();
    const std::size_t n2 = op.dec2.vectors.rows();
    const double fmax = max_abs(fv);

    const double rm = std::pow(R, m);
    LemmaPReport report;
    report.symbol_sup = fmax;
    for (std::size_t k = 0; k < fv.rows(); ++k)
        for (std::size_t l = 0; l < fv.cols(); ++l)
            if ((op.dec1.values[k] > rm || op.dec2.values[l] > rm) &&
                std::abs(fv(k, l)) > 1e-12 * fmax)
                ++report.support_violations;

    matrix v1sq(n1, fv.rows());
    for (std::size_t x = 0; x < n1; ++x)
        for (std::size_t k = 0; k < fv.rows(); ++k)
            v1sq(x, k) = op.dec1.vectors(x, k) * op.dec1.vectors(x, k);
    matrix v2sq(n2, fv.cols());
    for (std::size_t x = 0; x < n2; ++x)
        for (std::size_t l = 0; l < fv.cols(); ++l)
            v2sq(x, l) = op.dec2.vectors(x, l) * op.dec2.vectors(x, l);
    matrix f2(fv.rows(), fv.cols());
    for (std::size_t k = 0; k < fv.rows(); ++k)
        for (std::size_t l = 0; l < fv.cols(); ++l) f2(k, l) = fv(k, l) * fv(k, l);
    const matrix rowmass = matmul(matmul(v1sq, f2), v2sq.transposed());

    const MeasureVector& mu1 = op.dec1.weight;
    const MeasureVector& mu2 = op.dec2.weight;
    if (mu1.size() != n1 || mu2.size() != n2)
        throw std::invalid_argument("lemma_p_check: decompositions must carry measures");
    for (std::size_t x1 = 0; x1 < n1; x1 += 3)
        for (std::size_t x2 = 0; x2 < n2; x2 += 3) {
            const double b1 = ball_mass(metric1, mu1, x1, 1.0 / R);
            const double b2 = ball_mass(metric2, mu2, x2, 1.0 / R);
            const double bound = fmax * fmax / (b1 * b2);
            report.constant = std::max(report.constant, rowmass(x1, x2) / bound);
            ++report.samples;
        }
    return report;
}

// Dense oracle for the tensor-path invariant: the full matrix of F(L1, L2) in
// the standard basis, flat index (x1, x2) -> x1 * n2 + x2, built by direct
// accumulation over eigenmode pairs so it shares no code with apply().
inline matrix dense_operator_matrix(const ProductOperator& op) {
    const std::size_t n1 = op.dec1.vectors.rows();
    const std::size_t n2 = op.dec2.vectors.rows();
    if (n1 * n2 > 1024)
        throw budget_error("dense_operator_matrix: joint size " + std::to_string(n1 * n2) +
                           " exceeds the dense oracle budget of 1024");
    const matrix fv = detail::symbol_values(op);
    matrix dense(n1 * n2, n1 * n2);
    for (std::size_t k = 0; k < fv.rows(); ++k)
        for (std::size_t l = 0; l < fv.cols(); ++l) {
            const double c = fv(k, l);
            if (c == 0.0) continue;
            for (std::size_t x1 = 0; x1 < n1; ++x1)
                for (std::size_t x2 = 0; x2 < n2; ++x2) {
                    const double lhs = c * op.dec1.vectors(x1, k) * op.dec2.vectors(x2, l);
                    if (lhs == 0.0) continue;
                    for (std::size_t y1 = 0; y1 < n1; ++y1)
                        for (std::size_t y2 = 0; y2 < n2; ++y2)
                            dense(x1 * n2 + x2, y1 * n2 + y2) +=
                                lhs * op.dec1.vectors(y1, k) * op.dec2.vectors(y2, l) *
                                detail::factor_weight(op.dec1, y1) *
                                detail::factor_weight(op.dec2, y2);
                }
        }
    return dense;
}

} // namespace sglab
