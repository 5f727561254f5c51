#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "base.hpp"
#include "eigensolver.hpp"
#include "linalg.hpp"

namespace sglab {

// Integer lattice address at scale 2^level: the planar position is
// ((i + j/2) / 2^level, j * (sqrt(3)/2) / 2^level), with sqrt(3)/2 kept
// symbolic so identification is exact integer comparison.
struct VertexAddress {
    long long i = 0;
    long long j = 0;
    int level = 0;

    double x() const { return (static_cast<double>(i) + 0.5 * static_cast<double>(j)) / std::pow(2.0, level); }
    double y() const { return static_cast<double>(j) * 0.8660254037844386 / std::pow(2.0, level); }

    // Same planar point expressed with the smallest possible level.
    VertexAddress normalized() const {
        VertexAddress v = *this;
        while (v.level > 0 && v.i % 2 == 0 && v.j % 2 == 0) {
            v.i /= 2;
            v.j /= 2;
            --v.level;
        }
        return v;
    }

    bool operator==(const VertexAddress&) const = default;
};

struct GasketGraph {
    int level = 0;
    std::vector<VertexAddress> vertices;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::array<std::size_t, 3> boundary{};
    std::vector<std::array<std::size_t, 3>> cells;

    std::size_t size() const { return vertices.size(); }
    bool is_boundary(std::size_t v) const {
        return v == boundary[0] || v == boundary[1] || v == boundary[2];
    }
};

// Level-m graph approximation: subdivide the corner triangle m times via the
// cell maps f_i(x) = (x + p_i)/2 and keep the smallest cells as graph cells.
inline GasketGraph build(int m) {
    if (m < 0) throw std::invalid_argument("build: level must be >= 0");
    if (m > 8) throw budget_error("build: level exceeds memory budget (max 8)");

    using Pt = std::pair<long long, long long>;
    const long long s = 1LL << m;
    std::vector<std::array<Pt, 3>> cells = {{Pt{0, 0}, Pt{s, 0}, Pt{0, s}}};
    for (int step = 0; step < m; ++step) {
        std::vector<std::array<Pt, 3>> next;
        next.reserve(3 * cells.size());
        for (const auto& c : cells) {
            const Pt a = c[0], b = c[1], d = c[2];
            const Pt ab{(a.first + b.first) / 2, (a.second + b.second) / 2};
            const Pt bd{(b.first + d.first) / 2, (b.second + d.second) / 2};
            const Pt da{(d.first + a.first) / 2, (d.second + a.second) / 2};
            next.push_back({a, ab, da});
            next.push_back({ab, b, bd});
            next.push_back({da, bd, d});
        }
        cells = std::move(next);
    }

    std::map<Pt, std::size_t> index;
    for (const auto& c : cells)
        for (const auto& p : c) index.emplace(p, 0);
    std::size_t next_id = 0;
    for (auto& kv : index) kv.second = next_id++;

    GasketGraph g;
    g.level = m;
    g.vertices.resize(index.size());
    for (const auto& kv : index)
        g.vertices[kv.second] = VertexAddress{kv.first.first, kv.first.second, m};

    std::set<std::pair<std::size_t, std::size_t>> edge_set;
    g.cells.reserve(cells.size());
    for (const auto& c : cells) {
        const std::size_t ia = index.at(c[0]), ib = index.at(c[1]), ic = index.at(c[2]);
        g.cells.push_back({ia, ib, ic});
        edge_set.insert({std::min(ia, ib), std::max(ia, ib)});
        edge_set.insert({std::min(ib, ic), std::max(ib, ic)});
        edge_set.insert({std::min(ic, ia), std::max(ic, ia)});
    }
    g.edges.assign(edge_set.begin(), edge_set.end());

    g.boundary = {index.at(Pt{0, 0}), index.at(Pt{s, 0}), index.at(Pt{0, s})};

    const std::size_t want_v = (static_cast<std::size_t>(std::pow(3.0, m + 1)) + 3) / 2;
    const std::size_t want_e = static_cast<std::size_t>(std::pow(3.0, m + 1));
    if (g.vertices.size() != want_v || g.edges.size() != want_e)
        throw numerical_error("build: vertex/edge count mismatch");
    return g;
}

inline std::vector<int> degrees(const GasketGraph& g) {
    std::vector<int> deg(g.size(), 0);
    for (const auto& e : g.edges) {
        ++deg[e.first];
        ++deg[e.second];
    }
    return deg;
}

using MeasureVector = std::vector<double>;

// Self-similar measure: each of the 3^m smallest cells carries mass 3^-m,
// split equally among its corners; total mass 1.
inline MeasureVector measure(const GasketGraph& g) {
    MeasureVector mu(g.size(), 0.0);
    const double w = std::pow(3.0, -g.level) / 3.0;
    for (const auto& c : g.cells) {
        mu[c[0]] += w;
        mu[c[1]] += w;
        mu[c[2]] += w;
    }
    return mu;
}

enum class BoundaryCondition { dirichlet, neumann };

struct LaplacianRep {
    matrix mat;                          // 5^m (D - A), boundary removed for Dirichlet
    double renormalization = 1.0;        // the 5^m factor
    BoundaryCondition bc = BoundaryCondition::neumann;
    std::vector<std::size_t> vertex_map; // row -> vertex index in the graph
};

namespace detail {

inline matrix graph_laplacian(const GasketGraph& g) {
    matrix l(g.size(), g.size());
    for (const auto& e : g.edges) {
        l(e.first, e.second) -= 1.0;
        l(e.second, e.first) -= 1.0;
        l(e.first, e.first) += 1.0;
        l(e.second, e.second) += 1.0;
    }
    return l;
}

} // namespace detail

// Vertices kept by a boundary condition: all of them for Neumann, the
// interior for Dirichlet.
inline std::vector<std::size_t> vertex_subset(const GasketGraph& g, BoundaryCondition bc) {
    std::vector<std::size_t> keep;
    keep.reserve(g.size());
    for (std::size_t v = 0; v < g.size(); ++v)
        if (bc == BoundaryCondition::neumann || !g.is_boundary(v)) keep.push_back(v);
    return keep;
}

inline matrix restrict_matrix(const matrix& a, const std::vector<std::size_t>& keep) {
    matrix out(keep.size(), keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i)
        for (std::size_t j = 0; j < keep.size(); ++j) out(i, j) = a(keep[i], keep[j]);
    return out;
}

inline std::vector<double> restrict_vector(const std::vector<double>& v,
                                           const std::vector<std::size_t>& keep) {
    std::vector<double> out(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) out[i] = v[keep[i]];
    return out;
}

// 5^m (D - A); Dirichlet deletes the boundary rows and columns. The
// conventional extra factor 3/2 is dropped: only ratios and scalings matter
// for the checks this library performs.
inline LaplacianRep laplacian(const GasketGraph& g, BoundaryCondition bc) {
    LaplacianRep rep;
    rep.renormalization = std::pow(5.0, g.level);
    rep.bc = bc;
    rep.vertex_map = vertex_subset(g, bc);
    matrix l = detail::graph_laplacian(g);
    for (std::size_t i = 0; i < l.rows(); ++i)
        for (std::size_t j = 0; j < l.cols(); ++j) l(i, j) *= rep.renormalization;
    rep.mat = restrict_matrix(l, rep.vertex_map);
    return rep;
}

// Energy form (5/3)^m (D - A) on all vertices; the operator paired with the
// measure in heat-kernel and functional-calculus work.
inline matrix energy_matrix(const GasketGraph& g) {
    matrix e = detail::graph_laplacian(g);
    const double scale = std::pow(5.0 / 3.0, g.level);
    for (std::size_t i = 0; i < e.rows(); ++i)
        for (std::size_t j = 0; j < e.cols(); ++j) e(i, j) *= scale;
    return e;
}

enum class MetricKind { resistance, euclidean };

struct MetricMatrix {
    matrix dist;
    MetricKind kind = MetricKind::resistance;
};

// Effective resistance R(x,y) = (e_x - e_y)^T E^+ (e_x - e_y) with E the
// Neumann energy matrix and E^+ its pseudoinverse on the mean-zero subspace.
inline MetricMatrix resistance_metric(const GasketGraph& g) {
    const matrix e = energy_matrix(g);
    const EigenDecomposition d = eigh(e);
    const std::size_t n = g.size();

    const double lam_max = d.values.back();
    const double kernel_tol = 1e-8 * lam_max;
    std::size_t kernel_dim = 0;
    for (double lam : d.values)
        if (std::abs(lam) <= kernel_tol) ++kernel_dim;
    if (kernel_dim != 1)
        throw numerical_error("resistance_metric: energy kernel is not exactly the constants");

    matrix pinv(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(d.values[k]) <= kernel_tol) continue;
        const double inv = 1.0 / d.values[k];
        for (std::size_t i = 0; i < n; ++i) {
            const double vik = d.vectors(i, k) * inv;
            if (vik == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) pinv(i, j) += vik * d.vectors(j, k);
        }
    }

    MetricMatrix m;
    m.kind = MetricKind::resistance;
    m.dist = matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double r = pinv(i, i) + pinv(j, j) - 2.0 * pinv(i, j);
            m.dist(i, j) = r > 0.0 ? r : 0.0;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (m.dist(i, j) + m.dist(j, i));
            m.dist(i, j) = avg;
            m.dist(j, i) = avg;
        }
    return m;
}

inline MetricMatrix euclidean_metric(const GasketGraph& g) {
    const std::size_t n = g.size();
    MetricMatrix m;
    m.kind = MetricKind::euclidean;
    m.dist = matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = g.vertices[i].x() - g.vertices[j].x();
            const double dy = g.vertices[i].y() - g.vertices[j].y();
            const double r = std::sqrt(dx * dx + dy * dy);
            m.dist(i, j) = r;
            m.dist(j, i) = r;
        }
    }
    return m;
}

inline double diameter(const MetricMatrix& m) { return max_abs(m.dist); }

inline double min_positive_distance(const MetricMatrix& m) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.dist.rows(); ++i)
        for (std::size_t j = i + 1; j < m.dist.cols(); ++j)
            if (m.dist(i, j) > 0.0 && m.dist(i, j) < best) best = m.dist(i, j);
    return best;
}

// mu(B(x,r)) with the strict ball {y : rho(x,y) < r}.
inline double ball_mass(const MetricMatrix& metric, const MeasureVector& mu, std::size_t center,
                        double r) {
    double s = 0.0;
    for (std::size_t y = 0; y < mu.size(); ++y)
        if (metric.dist(center, y) < r) s += mu[y];
    return s;
}

struct DoublingFit {
    double d_fit = std::numeric_limits<double>::quiet_NaN();
    double c_fit = std::numeric_limits<double>::quiet_NaN();
    bool resolved = false;
};

// Pooled least-squares fit of log mu(B(x,r)) against log r, every vertex as
// a center and `samples` log-uniform radii spanning [min positive distance,
// diameter]. C_fit is the sampled sup of mu(B(x,tr)) / ((1+t)^d_fit mu(B(x,r)))
// over t in {1/2, 1, 2, 4}.
inline DoublingFit doubling_check(const GasketGraph& g, const MetricMatrix& metric,
                                  const MeasureVector& mu, int samples) {
    if (samples < 1) throw std::invalid_argument("doubling_check: samples must be positive");
    (void)g;
    DoublingFit fit;
    const double rmin = min_positive_distance(metric);
    const double rmax = diameter(metric);
    if (!(rmax > rmin * (1.0 + 1e-12)) || samples < 2) return fit;

    std::vector<double> radii(samples);
    const double l0 = std::log(rmin), l1 = std::log(rmax);
    for (int k = 0; k < samples; ++k)
        radii[k] = std::exp(l0 + (l1 - l0) * static_cast<double>(k) / (samples - 1));

    const std::size_t n = mu.size();
    std::vector<double> lx, ly;
    lx.reserve(n * radii.size());
    ly.reserve(n * radii.size());
    for (std::size_t x = 0; x < n; ++x)
        for (double r : radii) {
            lx.push_back(std::log(r));
            ly.push_back(std::log(ball_mass(metric, mu, x, r)));
        }
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        mx += lx[k];
        my += ly[k];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(ly.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxx += (lx[k] - mx) * (lx[k] - mx);
        sxy += (lx[k] - mx) * (ly[k] - my);
    }
    if (!(sxx > 1e-15)) return fit;
    fit.d_fit = sxy / sxx;

    const double ts[] = {0.5, 1.0, 2.0, 4.0};
    double cf = 0.0;
    for (std::size_t x = 0; x < n; ++x)
        for (double r : radii) {
            const double b1 = ball_mass(metric, mu, x, r);
            for (double t : ts) {
                const double q = ball_mass(metric, mu, x, t * r) /
                                 (std::pow(1.0 + t, fit.d_fit) * b1);
                if (q > cf) cf = q;
            }
        }
    fit.c_fit = cf;
    fit.resolved = true;
    return fit;
}

// Empirical doubling constant on the same radius grid the fit uses: sup over
// centers and radii of mu(B(x, 2r)) / mu(B(x, r)).
inline double doubling_constant(const MetricMatrix& metric, const MeasureVector& mu,
                                int samples) {
    if (samples < 2) throw std::invalid_argument("doubling_constant: need at least two radii");
    const double rmin = min_positive_distance(metric);
    const double rmax = diameter(metric);
    if (!(rmax > rmin * (1.0 + 1e-12)))
        throw std::invalid_argument("doubling_constant: metric has no radius range");
    double sup = 0.0;
    const double l0 = std::log(rmin), l1 = std::log(rmax);
    for (int k = 0; k < samples; ++k) {
        const double r = std::exp(l0 + (l1 - l0) * static_cast<double>(k) / (samples - 1));
        for (std::size_t x = 0; x < mu.size(); ++x)
            sup = std::max(sup, ball_mass(metric, mu, x, 2.0 * r) / ball_mass(metric, mu, x, r));
    }
    return sup;
}

// sum over the tail {x : rho(x,y) >= r} of (1 + R rho(x,y))^-s mu(x).
// s = 0 is allowed so the trivial total-mass check stays expressible. The
// metric and measure may be restricted data, as long as they agree in size.
inline double weighted_tail_integral(const MetricMatrix& metric, const MeasureVector& mu,
                                     std::size_t y, double R, double s, double r) {
    if (!(R > 0.0)) throw std::invalid_argument("weighted_tail_integral: R must be positive");
    if (s < 0.0) throw std::invalid_argument("weighted_tail_integral: s must be >= 0");
    if (r < 0.0) throw std::invalid_argument("weighted_tail_integral: r must be >= 0");
    if (metric.dist.rows() != mu.size())
        throw std::invalid_argument("weighted_tail_integral: metric and measure size mismatch");
    if (y >= mu.size()) throw std::invalid_argument("weighted_tail_integral: vertex out of range");
    double total = 0.0;
    for (std::size_t x = 0; x < mu.size(); ++x) {
        const double rho = metric.dist(y, x);
        if (rho >= r) total += std::pow(1.0 + R * rho, -s) * mu[x];
    }
    return total;
}

inline double weighted_tail_integral(const GasketGraph& g, const MetricMatrix& metric,
                                     const MeasureVector& mu, std::size_t y, double R, double s,
                                     double r) {
    if (mu.size() != g.size())
        throw std::invalid_argument("weighted_tail_integral: measure does not match the graph");
    return weighted_tail_integral(metric, mu, y, R, s, r);
}

// mu-paired spectral data of the renormalized operator: the generalized
// eigenproblem of the energy form (5/3)^m (D - A) against the self-similar
// measure, restricted per the boundary condition. Tiny negative eigenvalues
// from roundoff are clipped at zero.
inline EigenDecomposition sg_spectral_data(const GasketGraph& g, BoundaryCondition bc,
                                           double tol = 1e-12) {
    const auto keep = vertex_subset(g, bc);
    const matrix e = restrict_matrix(energy_matrix(g), keep);
    const MeasureVector mu = restrict_vector(measure(g), keep);
    EigenDecomposition d = generalized_eigh(e, mu, tol);
    const double clip = 1e-10 * std::abs(d.values.back());
    for (double& v : d.values)
        if (v < 0.0 && v > -clip) v = 0.0;
    return d;
}

// Everything the kernel and calculus checks need about one operator: the
// mu-paired spectral data plus the resistance metric on the kept vertices.
struct SgOperatorData {
    int level = 0;
    BoundaryCondition bc = BoundaryCondition::neumann;
    EigenDecomposition dec;
    MetricMatrix rho;
    std::vector<std::size_t> vertex_map;

    const MeasureVector& mu() const { return dec.weight; }
    std::size_t size() const { return dec.size(); }
};

inline SgOperatorData sg_operator(const GasketGraph& g, BoundaryCondition bc,
                                  double tol = 1e-12) {
    SgOperatorData d;
    d.level = g.level;
    d.bc = bc;
    d.vertex_map = vertex_subset(g, bc);
    d.dec = sg_spectral_data(g, bc, tol);
    const MetricMatrix full = resistance_metric(g);
    d.rho = MetricMatrix{restrict_matrix(full.dist, d.vertex_map), full.kind};
    return d;
}

// Adjacency export: one row per vertex with its exact lattice address,
// planar position, boundary flag, and semicolon-separated neighbor indices.
inline std::string adjacency_csv(const GasketGraph& g) {
    std::vector<std::vector<std::size_t>> nbr(g.size());
    for (const auto& e : g.edges) {
        nbr[e.first].push_back(e.second);
        nbr[e.second].push_back(e.first);
    }
    std::string out = "index,i,j,level,x,y,boundary,neighbors\n";
    char buf[128];
    for (std::size_t v = 0; v < g.size(); ++v) {
        const VertexAddress& a = g.vertices[v];
        std::snprintf(buf, sizeof(buf), "%zu,%lld,%lld,%d,%.17g,%.17g,%d,", v, a.i, a.j, a.level,
                      a.x(), a.y(), g.is_boundary(v) ? 1 : 0);
        out += buf;
        std::sort(nbr[v].begin(), nbr[v].end());
        for (std::size_t k = 0; k < nbr[v].size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%s%zu", k ? ";" : "", nbr[v][k]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

} // namespace sglab
