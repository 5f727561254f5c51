#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "sglab/eigensolver.hpp"
#include "sglab/gasket.hpp"

using namespace sglab;

namespace {

matrix random_symmetric(std::size_t n, std::uint64_t seed) {
    rng gen(seed);
    matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double v = 2.0 * gen.uniform() - 1.0;
            a(i, j) = v;
            a(j, i) = v;
        }
    return a;
}

} // namespace

TEST_CASE("eigh on small closed-form matrices") {
    const matrix id = matrix::identity(5);
    const EigenDecomposition d = eigh(id);
    for (double v : d.values) CHECK(v == Catch::Approx(1.0).margin(1e-14));
    CHECK(orthonormality_defect(d) < 1e-12);

    matrix a(2, 2);
    a(0, 0) = 2.0;
    a(0, 1) = 1.0;
    a(1, 0) = 1.0;
    a(1, 1) = 2.0;
    const EigenDecomposition e = eigh(a);
    CHECK(e.values[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(e.values[1] == Catch::Approx(3.0).margin(1e-12));
    CHECK(eigen_residual(a, e) < 1e-12);
}

TEST_CASE("eigh satisfies its residual contract on a random matrix") {
    const matrix a = random_symmetric(50, 2024);
    const EigenDecomposition d = eigh(a);
    CHECK(eigen_residual(a, d) <= 1e-10 * inf_norm(a));
    CHECK(orthonormality_defect(d) <= 1e-10);
    CHECK(std::is_sorted(d.values.begin(), d.values.end()));

    // trace and full reconstruction
    double tr = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) tr += a(i, i);
    const double sum = std::accumulate(d.values.begin(), d.values.end(), 0.0);
    CHECK(sum == Catch::Approx(tr).epsilon(1e-8));

    matrix recon(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.rows(); ++k)
                s += d.vectors(i, k) * d.values[k] * d.vectors(j, k);
            recon(i, j) = s;
        }
    CHECK(max_abs_diff(recon, a) < 1e-8 * (1.0 + max_abs(a)));
}

TEST_CASE("generalized_eigh agrees with the symmetric reduction") {
    const std::size_t n = 20;
    matrix l = random_symmetric(n, 7);
    // make it look like a Laplacian-ish PSD matrix so values are tame
    l = matmul(l, l.transposed());
    rng gen(8);
    std::vector<double> m(n);
    for (auto& w : m) w = 0.5 + gen.uniform();

    const EigenDecomposition d = generalized_eigh(l, m);
    CHECK(eigen_residual(l, d) <= 1e-9 * (1.0 + inf_norm(l)));
    CHECK(orthonormality_defect(d) <= 1e-10);

    matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b(i, j) = l(i, j) / std::sqrt(m[i] * m[j]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (b(i, j) + b(j, i));
            b(i, j) = avg;
            b(j, i) = avg;
        }
    const EigenDecomposition ref = eigh(b);
    for (std::size_t k = 0; k < n; ++k)
        CHECK(d.values[k] == Catch::Approx(ref.values[k]).margin(1e-10 * (1.0 + inf_norm(l))));

    // L = M gives the constant spectrum 1
    matrix mm(n, n);
    for (std::size_t i = 0; i < n; ++i) mm(i, i) = m[i];
    const EigenDecomposition ones = generalized_eigh(mm, m);
    for (double v : ones.values) CHECK(v == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("eigh rejects bad input") {
    matrix a(3, 3);
    a(0, 1) = 1.0;
    a(1, 0) = 2.0;
    CHECK_THROWS_AS(eigh(a), numerical_error);

    CHECK_THROWS_AS(eigh(matrix(2, 3)), numerical_error);
    CHECK_THROWS_AS(eigh(matrix::identity(1501)), budget_error);

    matrix l = matrix::identity(3);
    CHECK_THROWS_AS(generalized_eigh(l, {1.0, 1.0}), numerical_error);
    CHECK_THROWS_AS(generalized_eigh(l, {1.0, 0.0, 1.0}), numerical_error);
}

TEST_CASE("restricted gasket operators have positive spectra") {
    const GasketGraph g = build(2);
    const SgOperatorData op = sg_operator(g, BoundaryCondition::dirichlet);
    REQUIRE(op.size() == g.size() - 3);
    for (double v : op.dec.values) CHECK(v > 0.0);
    CHECK(orthonormality_defect(op.dec) <= 1e-10);
}
