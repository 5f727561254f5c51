#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "base.hpp"
#include "fft.hpp"
#include "symbols.hpp"

namespace sglab {

// Smooth dyadic bump eta(lambda) = chi(lambda) - chi(2^m lambda), supported
// in (2^-m, 2). The dilates eta(2^{mk} lambda) telescope to 1, which is the
// only identity callers may rely on; eta itself is not a fixed sign away
// from the plateau.
struct EtaFunction {
    double m = 0.0;

    double operator()(double lam) const { return chi_cutoff(lam) - chi_cutoff(std::pow(2.0, m) * lam); }
};

inline EtaFunction make_eta(double m) {
    if (!(m > 0.0)) throw std::invalid_argument("make_eta: m must be positive");
    return {m};
}

// Uniform samples of a function on the square [lo, hi]^2, nodes lo + h k for
// k = 0..n-1 with h = (hi - lo)/n (periodic convention, right endpoint open).
struct GridFunction2D {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 0;
    std::vector<double> values;

    double h() const { return (hi - lo) / static_cast<double>(n); }
    double node(std::size_t k) const { return lo + h() * static_cast<double>(k); }
    double& at(std::size_t i, std::size_t j) { return values[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

namespace detail {

constexpr double band_box_lo = -0.25;
constexpr double band_box_hi = 2.25;

// feather window: 1 on [0, 2], eased to 0 over the 0.25 margins of the box
inline double band_window(double u) {
    return step01((u - band_box_lo) / 0.25) * step01((band_box_hi - u) / 0.25);
}

} // namespace detail

// Samples of G(x, y) = eta(x + y) W(x) W(y) F(x, y) on the fixed band box,
// where W feathers the box edges so the periodization the FFT imposes sees a
// function vanishing at the seam. The envelope is evaluated first and F only
// where the envelope is nonzero, so an F singular outside the band (or under
// a cutoff zero) never produces a spurious non-finite sample.
inline GridFunction2D band_grid(const std::function<double(double, double)>& f,
                                const EtaFunction& eta, std::size_t n) {
    if (n < 8) throw std::invalid_argument("band_grid: need at least 8 samples per axis");
    GridFunction2D grid{detail::band_box_lo, detail::band_box_hi, n,
                        std::vector<double>(n * n, 0.0)};
    std::vector<double> window(n);
    std::vector<double> nodes(n);
    for (std::size_t k = 0; k < n; ++k) {
        nodes[k] = grid.node(k);
        window[k] = detail::band_window(nodes[k]);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double env = eta(nodes[i] + nodes[j]) * window[i] * window[j];
            if (env == 0.0) continue;
            const double v = env * f(nodes[i], nodes[j]);
            if (!std::isfinite(v))
                throw singular_symbol_error("band_grid: non-finite sample at (" +
                                            std::to_string(nodes[i]) + ", " +
                                            std::to_string(nodes[j]) + ")");
            grid.at(i, j) = v;
        }
    return grid;
}

// sup norm of (1 - Laplacian)^{s/2} G via FFT on the 4x zero-padded grid.
// The outer frame of the grid must vanish (relative to the sup) or the
// padding would cut the function, in which case the resolution is refused.
inline double sobolev_inf_norm(const GridFunction2D& grid, double s) {
    if (s < 0.0) throw std::invalid_argument("sobolev_inf_norm: s must be >= 0");
    const std::size_t n = grid.n;
    if (n == 0 || !is_power_of_two(n))
        throw std::invalid_argument("sobolev_inf_norm: grid side must be a power of two");

    double sup = 0.0;
    for (double v : grid.values) sup = std::max(sup, std::abs(v));
    for (std::size_t k = 0; k < n; ++k) {
        const double frame = std::max(std::max(std::abs(grid.at(0, k)), std::abs(grid.at(n - 1, k))),
                                      std::max(std::abs(grid.at(k, 0)), std::abs(grid.at(k, n - 1))));
        if (frame > 1e-12 * sup)
            throw under_resolved_error("sobolev_inf_norm: grid support touches the box frame");
    }

    const std::size_t np = 4 * n;
    std::vector<std::complex<double>> a(np * np, std::complex<double>(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i * np + j] = grid.at(i, j);
    fft2_inplace(a, np, -1);

    const double h = grid.h();
    std::vector<double> freq(np);
    for (std::size_t k = 0; k < np; ++k) freq[k] = fft_frequency(k, np, h);
    for (std::size_t i = 0; i < np; ++i) {
        const double ki2 = freq[i] * freq[i];
        for (std::size_t j = 0; j < np; ++j)
            a[i * np + j] *= std::pow(1.0 + ki2 + freq[j] * freq[j], 0.5 * s);
    }
    fft2_inplace(a, np, 1);

    double out = 0.0;
    const double scale = 1.0 / (static_cast<double>(np) * static_cast<double>(np));
    for (const auto& v : a) out = std::max(out, std::abs(v) * scale);
    return out;
}

struct BandNormReport {
    double value = 0.0;     // finer resolution
    double coarse = 0.0;
    double rel_diff = 0.0;
    double band_sup = 0.0;  // plain sup of the band samples at the finer resolution
};

// Windowed Sobolev norm of the band function at resolutions n and 2n. The
// two values must agree to the gate or the number is refused rather than
// reported; the refusal is the honest outcome for symbols whose features the
// grid cannot separate.
inline BandNormReport band_norm(const std::function<double(double, double)>& f,
                                const EtaFunction& eta, double s, std::size_t n = 256,
                                double gate = 0.01) {
    if (!(gate > 0.0)) throw std::invalid_argument("band_norm: gate must be positive");
    const GridFunction2D coarse = band_grid(f, eta, n);
    const GridFunction2D fine = band_grid(f, eta, 2 * n);
    BandNormReport report;
    report.coarse = sobolev_inf_norm(coarse, s);
    report.value = sobolev_inf_norm(fine, s);
    for (double v : fine.values) report.band_sup = std::max(report.band_sup, std::abs(v));
    report.rel_diff =
        std::abs(report.value - report.coarse) / std::max(std::abs(report.value), 1e-300);
    if (report.rel_diff > gate)
        throw under_resolved_error("band_norm: resolutions " + std::to_string(n) + " and " +
                                   std::to_string(2 * n) + " disagree by " +
                                   std::to_string(report.rel_diff) + " at s = " +
                                   std::to_string(s));
    return report;
}

// the dilation scales the sup ranges over: t = 2^{-mk}, k = -8..8
inline std::vector<double> dilation_grid(double m) {
    if (!(m > 0.0)) throw std::invalid_argument("dilation_grid: m must be positive");
    std::vector<double> out;
    for (int k = -8; k <= 8; ++k) out.push_back(std::pow(2.0, -m * static_cast<double>(k)));
    return out;
}

// sup over dilations t of the windowed Sobolev band norm of F(t lambda1,
// t lambda2). A symbol declared homogeneous of degree 0 is verified on 100
// deterministic sample pairs and then evaluated at t = 1 only. A symbol that
// declares a singular locus c l1 = d l2 with c, d > 0 is rejected outright:
// the positive ray always crosses the band, so the quantity does not exist.
inline BandNormReport hormander_sup(const MultiplierSymbol& f, const EtaFunction& eta, double s,
                                    const std::vector<double>& t_grid, std::size_t n = 256,
                                    double gate = 0.01) {
    if (t_grid.empty()) throw std::invalid_argument("hormander_sup: empty dilation grid");
    if (f.singular_locus && f.singular_locus->first > 0.0 && f.singular_locus->second > 0.0)
        throw singular_symbol_error("hormander_sup: symbol '" + f.name +
                                    "' declares the singular ray " +
                                    std::to_string(f.singular_locus->first) + " l1 = " +
                                    std::to_string(f.singular_locus->second) +
                                    " l2, which crosses the band");

    if (f.homogeneity_degree && *f.homogeneity_degree == 0) {
        rng gen(1);
        for (int k = 0; k < 100; ++k) {
            const double x = 0.1 + 1.9 * gen.uniform();
            const double y = 0.1 + 1.9 * gen.uniform();
            const double v = f(x, y);
            if (std::abs(f(2.0 * x, 2.0 * y) - v) > 1e-12 * std::max(1.0, std::abs(v)))
                throw numerical_error("hormander_sup: symbol '" + f.name +
                                      "' declares degree 0 but is not dilation invariant");
        }
        return band_norm(f.f, eta, s, n, gate);
    }

    BandNormReport best;
    for (double t : t_grid) {
        const MultiplierSymbol scaled = dilate(f, t);
        const BandNormReport report = band_norm(scaled.f, eta, s, n, gate);
        if (report.value > best.value) best = report;
    }
    return best;
}

struct DerivativeBound {
    int order1 = 0;
    int order2 = 0;
    double constant = 0.0;
};

struct DerivativeConditionReport {
    std::vector<DerivativeBound> bounds;
    double worst = 0.0;
    bool finite = true;
};

// Empirical check of the derivative bounds |D^I F(lambda)| <= C |lambda|^{-|I|}
// for |I| <= floor((d1 + d2)/2) + 1, sampled on dyadic annuli |lambda| = 2^k,
// k = -20..20, along 9 rays interior to the open quadrant. Derivatives are
// repeated central differences with step 2^k * 1e-4 per application.
inline DerivativeConditionReport derivative_condition(const MultiplierSymbol& f, double d1,
                                                      double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0))
        throw std::invalid_argument("derivative_condition: dimensions must be positive");
    const int max_order = static_cast<int>(std::floor((d1 + d2) / 2.0)) + 1;

    const auto stencil_weight = [](int order, int j) {
        double c = 1.0;
        for (int i = 0; i < j; ++i) c = c * static_cast<double>(order - i) / static_cast<double>(i + 1);
        return (j % 2 == 0 ? 1.0 : -1.0) * c;
    };

    DerivativeConditionReport report;
    for (int o1 = 0; o1 <= max_order; ++o1)
        for (int o2 = 0; o2 + o1 <= max_order; ++o2) {
            DerivativeBound bound{o1, o2, 0.0};
            for (int k = -20; k <= 20; ++k) {
                const double radius = std::pow(2.0, static_cast<double>(k));
                const double step = radius * 1e-4;
                const double denom = std::pow(2.0 * step, static_cast<double>(o1 + o2));
                for (int ang = 1; ang <= 9; ++ang) {
                    const double theta = static_cast<double>(ang) * 3.14159265358979323846 / 20.0;
                    const double cx = radius * std::cos(theta);
                    const double cy = radius * std::sin(theta);
                    double acc = 0.0;
                    for (int j1 = 0; j1 <= o1; ++j1)
                        for (int j2 = 0; j2 <= o2; ++j2)
                            acc += stencil_weight(o1, j1) * stencil_weight(o2, j2) *
                                   f(cx + static_cast<double>(o1 - 2 * j1) * step,
                                     cy + static_cast<double>(o2 - 2 * j2) * step);
                    const double value =
                        std::abs(acc / denom) * std::pow(radius, static_cast<double>(o1 + o2));
                    if (!std::isfinite(value)) {
                        report.finite = false;
                        continue;
                    }
                    bound.constant = std::max(bound.constant, value);
                }
            }
            report.worst = std::max(report.worst, bound.constant);
            report.bounds.push_back(bound);
        }
    return report;
}

} // namespace sglab
