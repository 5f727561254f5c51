#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "base.hpp"

namespace sglab {

// Mollifier primitives, fixed once so every norm downstream is reproducible
// bit for bit.
inline double mollifier_base(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

// smooth step: 0 for u <= 0, 1 for u >= 1
inline double step01(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = mollifier_base(u);
    return a / (a + mollifier_base(1.0 - u));
}

// smooth bump: 1 on [-1,1], 0 outside (-2,2)
inline double bump_profile(double u) {
    const double a = std::abs(u);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    return step01(2.0 - a);
}

// smooth cutoff: 1 for x <= 1, 0 for x >= 2
inline double chi_cutoff(double x) { return 1.0 - step01(x - 1.0); }

// Evaluatable F(lambda1, lambda2) with the metadata the calculus needs:
// declared homogeneity F(t lambda) = t^h F(lambda) and an optional singular
// locus {c lambda1 = d lambda2}.
struct MultiplierSymbol {
    std::function<double(double, double)> f;
    std::optional<int> homogeneity_degree;
    std::optional<std::pair<double, double>> singular_locus;
    std::string name = "symbol";

    double operator()(double l1, double l2) const { return f(l1, l2); }
};

inline MultiplierSymbol constant_symbol(double c) {
    return {[c](double, double) { return c; }, 0, std::nullopt, "constant"};
}

inline MultiplierSymbol identity_symbol() {
    MultiplierSymbol s = constant_symbol(1.0);
    s.name = "identity";
    return s;
}

// F = e^{-s l1 - t l2}, the product heat semigroup symbol.
inline MultiplierSymbol heat_product_symbol(double s, double t) {
    if (s < 0.0 || t < 0.0)
        throw std::invalid_argument("heat_product_symbol: times must be >= 0");
    return {[s, t](double l1, double l2) { return std::exp(-s * l1 - t * l2); }, std::nullopt,
            std::nullopt, "heat"};
}

// Phi_r = e^{-r^m (l1 + l2)}, the truncation mollifier.
inline MultiplierSymbol phi_symbol(double r, double m) {
    if (!(r > 0.0)) throw std::invalid_argument("phi_symbol: r must be positive");
    if (!(m > 0.0)) throw std::invalid_argument("phi_symbol: m must be positive");
    const double rm = std::pow(r, m);
    return {[rm](double l1, double l2) { return std::exp(-rm * (l1 + l2)); }, std::nullopt,
            std::nullopt, "phi"};
}

// The two quasielliptic Riesz quotients: (a l1 + b l2)/(c l1 - d l2) and
// l1 l2 / (c l1 - d l2)^2, both homogeneous of degree 0 with singular locus
// c l1 = d l2.
inline std::pair<MultiplierSymbol, MultiplierSymbol> riesz_symbols(double a, double b, double c,
                                                                   double d) {
    if (!(c > 0.0) || !(d > 0.0))
        throw std::invalid_argument("riesz_symbols: c and d must be positive");
    MultiplierSymbol f1{
        [a, b, c, d](double l1, double l2) { return (a * l1 + b * l2) / (c * l1 - d * l2); }, 0,
        std::make_pair(c, d), "riesz_linear"};
    MultiplierSymbol f2{[c, d](double l1, double l2) {
                            const double q = c * l1 - d * l2;
                            return l1 * l2 / (q * q);
                        },
                        0, std::make_pair(c, d), "riesz_product"};
    return {f1, f2};
}

// omega(l1, l2) = bump_profile((l1/l2 - gamma)/sigma): identically 1 where
// |l1/l2 - gamma| <= sigma, identically 0 where |l1/l2 - gamma| >= 2 sigma.
// Off the open quadrant (l2 = 0) the cutoff vanishes.
struct CutoffOmega {
    double gamma = 0.0;
    double sigma = 0.0;

    double operator()(double l1, double l2) const {
        if (l2 == 0.0) return 0.0;
        return bump_profile((l1 / l2 - gamma) / sigma);
    }
};

inline CutoffOmega make_cutoff(double gamma, double sigma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("make_cutoff: gamma must be positive");
    if (!(sigma > 0.0)) throw std::invalid_argument("make_cutoff: sigma must be positive");
    return {gamma, sigma};
}

// (1 - omega) F, evaluated so the zero of the cutoff factor wins over a
// singular F on the locus. When the locus ratio d/c lies within sigma of
// gamma the factor is identically 0 there, so the singular locus is cleared
// from the metadata.
inline MultiplierSymbol cutoff_multiply(const MultiplierSymbol& f, const CutoffOmega& omega) {
    MultiplierSymbol out;
    const auto inner = f.f;
    out.f = [inner, omega](double l1, double l2) {
        const double w = 1.0 - omega(l1, l2);
        if (w == 0.0) return 0.0;
        return w * inner(l1, l2);
    };
    out.homogeneity_degree = f.homogeneity_degree;
    out.name = f.name + "_cutoff";
    if (f.singular_locus) {
        const double locus_ratio = f.singular_locus->second / f.singular_locus->first;
        if (std::abs(locus_ratio - omega.gamma) <= omega.sigma)
            out.singular_locus = std::nullopt;
        else
            out.singular_locus = f.singular_locus;
    }
    return out;
}

// omega F, the complementary piece whose operator vanishes when the spectra
// keep every attained ratio outside the cutoff support.
inline MultiplierSymbol omega_multiply(const MultiplierSymbol& f, const CutoffOmega& omega) {
    MultiplierSymbol out;
    const auto inner = f.f;
    out.f = [inner, omega](double l1, double l2) {
        const double w = omega(l1, l2);
        if (w == 0.0) return 0.0;
        return w * inner(l1, l2);
    };
    out.homogeneity_degree = f.homogeneity_degree;
    out.singular_locus = f.singular_locus;
    out.name = "omega_" + f.name;
    return out;
}

// F (1 - Phi_r), the symbol whose kernel the truncation integral measures.
inline MultiplierSymbol cz_truncated_symbol(const MultiplierSymbol& f, double r, double m) {
    if (!(r > 0.0)) throw std::invalid_argument("cz_truncated_symbol: r must be positive");
    if (!(m > 0.0)) throw std::invalid_argument("cz_truncated_symbol: m must be positive");
    MultiplierSymbol out;
    const auto inner = f.f;
    const double rm = std::pow(r, m);
    out.f = [inner, rm](double l1, double l2) {
        const double w = -std::expm1(-rm * (l1 + l2));
        if (w == 0.0) return 0.0;
        return w * inner(l1, l2);
    };
    out.singular_locus = f.singular_locus;
    out.name = f.name + "_truncated";
    return out;
}

// delta_t F(lambda) = F(t lambda1, t lambda2).
inline MultiplierSymbol dilate(const MultiplierSymbol& f, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("dilate: t must be positive");
    MultiplierSymbol out;
    const auto inner = f.f;
    out.f = [inner, t](double l1, double l2) { return inner(t * l1, t * l2); };
    out.homogeneity_degree = f.homogeneity_degree;
    out.singular_locus = f.singular_locus;
    out.name = f.name + "_dilated";
    return out;
}

} // namespace sglab
