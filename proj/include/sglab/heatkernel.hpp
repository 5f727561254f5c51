#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "base.hpp"
#include "eigensolver.hpp"
#include "gasket.hpp"
#include "linalg.hpp"

namespace sglab {

// p_t(x,y) = sum_k e^{-t lambda_k} phi_k(x) phi_k(y), defined relative to
// the measure the eigenvectors are orthonormal against.
struct HeatKernelField {
    std::complex<double> time;
    cmatrix values;

    bool real_time() const { return time.imag() == 0.0; }

    matrix real_values() const {
        matrix out(values.rows(), values.cols());
        for (std::size_t i = 0; i < values.rows(); ++i)
            for (std::size_t j = 0; j < values.cols(); ++j) out(i, j) = values(i, j).real();
        return out;
    }
};

inline HeatKernelField heat_kernel(const EigenDecomposition& dec, std::complex<double> t) {
    if (!(t.real() > 0.0)) throw std::domain_error("heat_kernel: Re t must be positive");
    const std::size_t n = dec.size();
    HeatKernelField f;
    f.time = t;
    f.values = cmatrix(n, n);
    if (t.imag() == 0.0) {
        matrix w(n, n);
        for (std::size_t k = 0; k < n; ++k) {
            const double e = std::exp(-t.real() * dec.values[k]);
            for (std::size_t i = 0; i < n; ++i) w(i, k) = dec.vectors(i, k) * e;
        }
        const matrix p = matmul_transB(w, dec.vectors);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) f.values(i, j) = p(i, j);
    } else {
        cmatrix w(n, n), v(n, n);
        for (std::size_t k = 0; k < n; ++k) {
            const std::complex<double> e = std::exp(-t * dec.values[k]);
            for (std::size_t i = 0; i < n; ++i) {
                w(i, k) = dec.vectors(i, k) * e;
                v(i, k) = dec.vectors(i, k);
            }
        }
        f.values = matmul_transB(w, v);
    }
    return f;
}

inline std::vector<std::complex<double>> heat_column(const EigenDecomposition& dec,
                                                     std::complex<double> t, std::size_t y) {
    if (!(t.real() > 0.0)) throw std::domain_error("heat_column: Re t must be positive");
    const std::size_t n = dec.size();
    if (y >= n) throw std::invalid_argument("heat_column: vertex out of range");
    std::vector<std::complex<double>> coef(n), col(n);
    for (std::size_t k = 0; k < n; ++k) coef[k] = std::exp(-t * dec.values[k]) * dec.vectors(y, k);
    for (std::size_t i = 0; i < n; ++i) {
        std::complex<double> s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += dec.vectors(i, k) * coef[k];
        col[i] = s;
    }
    return col;
}

inline std::vector<double> heat_diagonal(const EigenDecomposition& dec, double t) {
    if (!(t > 0.0)) throw std::domain_error("heat_diagonal: t must be positive");
    const std::size_t n = dec.size();
    std::vector<double> diag(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double e = std::exp(-t * dec.values[k]);
        for (std::size_t i = 0; i < n; ++i) diag[i] += e * dec.vectors(i, k) * dec.vectors(i, k);
    }
    return diag;
}

// Least-squares slope of the vertex-averaged log p_t(x,x) against log t,
// returned as a positive decay exponent.
inline double on_diagonal_decay(const EigenDecomposition& dec, const std::vector<double>& ts) {
    if (ts.size() < 2) throw std::invalid_argument("on_diagonal_decay: need at least two times");
    std::vector<double> lt, ly;
    for (double t : ts) {
        const std::vector<double> diag = heat_diagonal(dec, t);
        double mean_log = 0.0;
        for (double p : diag) {
            if (!(p > 0.0)) throw numerical_error("on_diagonal_decay: nonpositive diagonal value");
            mean_log += std::log(p);
        }
        lt.push_back(std::log(t));
        ly.push_back(mean_log / static_cast<double>(diag.size()));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < lt.size(); ++k) {
        mx += lt[k];
        my += ly[k];
    }
    mx /= static_cast<double>(lt.size());
    my /= static_cast<double>(ly.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < lt.size(); ++k) {
        sxx += (lt[k] - mx) * (lt[k] - mx);
        sxy += (lt[k] - mx) * (ly[k] - my);
    }
    return -sxy / sxx;
}

struct GaussianFit {
    double C = 0.0;
    double b = 0.0;
    double m = 0.0;
    double decay_exponent = 0.0;
    double window_lo = 0.0, window_hi = 0.0; // resolved time window from the metric
    double t_min = 0.0, t_max = 0.0;         // supplied grid endpoints
    std::size_t sample_count = 0;            // (t,x,y) triples examined
    bool succeeded = false;
};

// Fits |p_t(x,y)| <= C mu(B(y,t^{1/m}))^{-1} exp(-b rho^{m/(m-1)}/t^{1/(m-1)})
// over all supplied fields and vertex pairs: b is searched on the grid
// b_probe * 2^k and the largest value keeping C(b) <= 100 C(0) wins. The fit
// asserts existence of finite constants, not sharpness.
inline GaussianFit gaussian_fit(const std::vector<HeatKernelField>& fields,
                                const MetricMatrix& metric, const MeasureVector& mu, double m,
                                double b_probe = 0.05) {
    if (!(m > 1.0)) throw std::invalid_argument("gaussian_fit: walk parameter must exceed 1");
    if (!(b_probe > 0.0)) throw std::invalid_argument("gaussian_fit: b_probe must be positive");
    if (fields.empty()) throw under_resolved_error("gaussian_fit: empty resolved window");

    const std::size_t n = mu.size();
    GaussianFit fit;
    fit.m = m;
    fit.window_lo = std::pow(min_positive_distance(metric), m) / 5.0;
    fit.window_hi = std::pow(diameter(metric), m) * 5.0;

    std::vector<double> ts;
    for (const auto& f : fields) {
        if (!f.real_time() || !(f.time.real() > 0.0))
            throw std::invalid_argument("gaussian_fit: fields must have positive real time");
        if (f.values.rows() != n)
            throw std::invalid_argument("gaussian_fit: field size does not match measure");
        const double t = f.time.real();
        if (t < fit.window_lo * (1.0 - 1e-12) || t > fit.window_hi * (1.0 + 1e-12))
            throw under_resolved_error("gaussian_fit: time sample outside the resolved window");
        ts.push_back(t);
    }
    fit.t_min = *std::min_element(ts.begin(), ts.end());
    fit.t_max = *std::max_element(ts.begin(), ts.end());
    fit.sample_count = ts.size() * n * n;

    const double gamma = m / (m - 1.0);
    const double texp = 1.0 / (m - 1.0);

    // per-field ball masses at radius t^{1/m}
    std::vector<std::vector<double>> bm(fields.size(), std::vector<double>(n));
    for (std::size_t fi = 0; fi < fields.size(); ++fi) {
        const double rb = std::pow(ts[fi], 1.0 / m);
        for (std::size_t y = 0; y < n; ++y) bm[fi][y] = ball_mass(metric, mu, y, rb);
    }

    const auto c_of_b = [&](double b) {
        double worst = 0.0;
        for (std::size_t fi = 0; fi < fields.size(); ++fi) {
            const double tpow = std::pow(ts[fi], texp);
            for (std::size_t x = 0; x < n; ++x)
                for (std::size_t y = 0; y < n; ++y) {
                    const double val = std::abs(fields[fi].values(x, y)) * bm[fi][y] *
                                       std::exp(b * std::pow(metric.dist(x, y), gamma) / tpow);
                    if (val > worst) worst = val;
                }
        }
        return worst;
    };

    const double c0 = c_of_b(0.0);
    const double cap = 100.0 * c0;
    fit.C = c0;
    fit.b = 0.0;
    for (int k = 0; k < 12; ++k) {
        const double b = b_probe * std::pow(2.0, k);
        const double c = c_of_b(b);
        if (c <= cap) {
            fit.b = b;
            fit.C = c;
        } else {
            break;
        }
    }
    fit.succeeded = fit.b > 0.0 && fit.C > 0.0 && std::isfinite(fit.C);

    // on-diagonal decay exponent over the supplied grid
    std::vector<double> lt, ly;
    for (std::size_t fi = 0; fi < fields.size(); ++fi) {
        double mean_log = 0.0;
        for (std::size_t x = 0; x < n; ++x)
            mean_log += std::log(std::abs(fields[fi].values(x, x)));
        lt.push_back(std::log(ts[fi]));
        ly.push_back(mean_log / static_cast<double>(n));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < lt.size(); ++k) {
        mx += lt[k];
        my += ly[k];
    }
    mx /= static_cast<double>(lt.size());
    my /= static_cast<double>(ly.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < lt.size(); ++k) {
        sxx += (lt[k] - mx) * (lt[k] - mx);
        sxy += (lt[k] - mx) * (ly[k] - my);
    }
    fit.decay_exponent = sxx > 0.0 ? -sxy / sxx : 0.0;
    return fit;
}

// sum over the tail {x : rho(x,y) >= r} of |p_t(x,y)|^2 mu(x).
inline double tail_mass(const HeatKernelField& field, const MetricMatrix& metric,
                        const MeasureVector& mu, std::size_t y, double r) {
    if (r < 0.0) throw std::invalid_argument("tail_mass: r must be >= 0");
    if (y >= mu.size()) throw std::invalid_argument("tail_mass: vertex out of range");
    double total = 0.0;
    for (std::size_t x = 0; x < mu.size(); ++x)
        if (metric.dist(x, y) >= r) total += std::norm(field.values(x, y)) * mu[x];
    return total;
}

// sum_x |p_{(1+i tau) R^-m}(x,y)|^2 rho(x,y)^s mu(x); the x = y term uses
// rho^0 = 1 so the s = 0 case matches tail_mass(r = 0).
inline double complex_moment(const EigenDecomposition& dec, const MetricMatrix& metric,
                             const MeasureVector& mu, std::size_t y, double R, double tau,
                             double s, double m) {
    if (!(R > 0.0)) throw std::invalid_argument("complex_moment: R must be positive");
    if (s < 0.0) throw std::invalid_argument("complex_moment: s must be >= 0");
    if (!(m > 1.0)) throw std::invalid_argument("complex_moment: walk parameter must exceed 1");
    const double u = std::pow(R, -m);
    const std::complex<double> t(u, tau * u);
    const auto col = heat_column(dec, t, y);
    double total = 0.0;
    for (std::size_t x = 0; x < mu.size(); ++x)
        total += std::norm(col[x]) * std::pow(metric.dist(x, y), s) * mu[x];
    return total;
}

// evenly log-spaced grid with both endpoints pinned exactly
inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log_spaced: need 0 < lo <= hi");
    if (n == 0) throw std::invalid_argument("log_spaced: need at least one point");
    std::vector<double> out(n);
    out.front() = lo;
    if (n == 1) return out;
    const double a = std::log(lo);
    const double step = (std::log(hi) - a) / static_cast<double>(n - 1);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = std::exp(a + static_cast<double>(i) * step);
    out.back() = hi;
    return out;
}

// Worst ratio in the tail-mass inequality: over the supplied times, sampled
// base points, and a 6-point log grid of radii spanning the metric, compare
// tail_mass(y, r) against mu(B(y, t^{1/m}))^{-1} e^{-b r^{m/(m-1)} / t^{1/(m-1)}}.
inline double ltu_constant(const EigenDecomposition& dec, const MetricMatrix& metric,
                           const MeasureVector& mu, double b, double m,
                           const std::vector<double>& ts, std::size_t y_stride = 2) {
    if (!(b > 0.0)) throw std::invalid_argument("ltu_constant: b must be positive");
    if (!(m > 1.0)) throw std::invalid_argument("ltu_constant: walk parameter must exceed 1");
    if (ts.empty()) throw std::invalid_argument("ltu_constant: empty time grid");
    if (y_stride == 0) throw std::invalid_argument("ltu_constant: stride must be positive");
    const double gamma = m / (m - 1.0);
    const double texp = 1.0 / (m - 1.0);
    const std::vector<double> rs = log_spaced(min_positive_distance(metric), diameter(metric), 6);
    double worst = 0.0;
    for (double t : ts) {
        const HeatKernelField field = heat_kernel(dec, t);
        for (std::size_t y = 0; y < mu.size(); y += y_stride) {
            const double bm = ball_mass(metric, mu, y, std::pow(t, 1.0 / m));
            for (double r : rs) {
                const double tail = tail_mass(field, metric, mu, y, r);
                const double bound = std::exp(-b * std::pow(r, gamma) / std::pow(t, texp)) / bm;
                worst = std::max(worst, tail / bound);
            }
        }
    }
    return worst;
}

// Worst ratio in the complex moment inequality: over scales R, aspect ratios
// tau, and sampled base points, compare complex_moment against
// mu(B(y, 1/R))^{-1} R^{-s} (1 + |tau|)^s.
inline double jeden_constant(const EigenDecomposition& dec, const MetricMatrix& metric,
                             const MeasureVector& mu, double s, double m,
                             const std::vector<double>& scales, const std::vector<double>& taus,
                             std::size_t y_stride = 2) {
    if (s < 0.0) throw std::invalid_argument("jeden_constant: s must be >= 0");
    if (!(m > 1.0)) throw std::invalid_argument("jeden_constant: walk parameter must exceed 1");
    if (scales.empty() || taus.empty())
        throw std::invalid_argument("jeden_constant: empty scale or tau grid");
    if (y_stride == 0) throw std::invalid_argument("jeden_constant: stride must be positive");
    double worst = 0.0;
    for (double R : scales)
        for (double tau : taus)
            for (std::size_t y = 0; y < mu.size(); y += y_stride) {
                const double mom = complex_moment(dec, metric, mu, y, R, tau, s, m);
                const double bound = std::pow(R, -s) * std::pow(1.0 + std::abs(tau), s) /
                                     ball_mass(metric, mu, y, 1.0 / R);
                worst = std::max(worst, mom / bound);
            }
    return worst;
}

} // namespace sglab
