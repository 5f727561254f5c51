#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "sglab/decimation.hpp"
#include "sglab/eigensolver.hpp"
#include "sglab/gasket.hpp"

using namespace sglab;

TEST_CASE("psi branches invert the forward map") {
    CHECK(psi(6.25, DecimationBranch::minus) == Catch::Approx(2.5).margin(1e-12));
    CHECK(psi(6.25, DecimationBranch::plus) == Catch::Approx(2.5).margin(1e-12));
    CHECK(forward_map(2.5) == Catch::Approx(6.25).margin(1e-14));

    rng gen(11);
    for (int k = 0; k < 1000; ++k) {
        const double x = 6.25 * gen.uniform();
        const double lo = psi(x, DecimationBranch::minus);
        const double hi = psi(x, DecimationBranch::plus);
        REQUIRE(lo <= 2.5 + 1e-12);
        REQUIRE(hi >= 2.5 - 1e-12);
        REQUIRE(std::abs(forward_map(lo) - x) < 1e-12);
        REQUIRE(std::abs(forward_map(hi) - x) < 1e-11);
    }

    CHECK_THROWS_AS(psi(6.2501, DecimationBranch::minus), std::domain_error);
}

TEST_CASE("renormalized limits hit the pinned values") {
    CHECK(renormalized_limit(2.0).value == Catch::Approx(2.2421331852464538632).margin(1e-10));
    CHECK(renormalized_limit(3.0).value == Catch::Approx(3.6152567198877032728).margin(1e-10));
    CHECK(renormalized_limit(5.0).value == Catch::Approx(7.4514436605592807297).margin(1e-10));

    const RenormalizedLimit lim = renormalized_limit(3.0);
    CHECK(lim.seed == 3.0);
    CHECK(lim.iterations >= 5);
    CHECK(lim.residual <= 1e-12);

    // increments contract by 1/5 per step once settled
    const double r10 = detail::renormalized_iterate(3.0, 10);
    const double r11 = detail::renormalized_iterate(3.0, 11);
    const double r12 = detail::renormalized_iterate(3.0, 12);
    CHECK((r12 - r11) / (r11 - r10) == Catch::Approx(0.2).margin(1e-3));

    CHECK_THROWS_AS(renormalized_limit(-0.5), std::domain_error);
    CHECK_THROWS_AS(renormalized_limit(6.3), std::domain_error);
    CHECK_THROWS_AS(renormalized_limit(3.0, 0.0), std::invalid_argument);
}

TEST_CASE("gap constants") {
    const GapConstants gc = gap_constants();
    CHECK(gc.alpha == Catch::Approx(2.061110520746).margin(1e-10));
    CHECK(gc.beta == Catch::Approx(2.425876705626).margin(1e-10));
    CHECK(gc.alpha * gc.beta == Catch::Approx(5.0).margin(1e-12));
    // sqrt(5) sits inside the gap
    CHECK(gc.alpha < std::sqrt(5.0));
    CHECK(std::sqrt(5.0) < gc.beta);
    CHECK_THROWS_AS(gap_constants(-1.0), std::invalid_argument);
}

TEST_CASE("dirichlet spectrum recursion") {
    const std::vector<std::size_t> counts = {2, 6, 13, 27, 55, 111};
    for (int m = 1; m <= 6; ++m)
        REQUIRE(dirichlet_spectrum(m).size() == counts[static_cast<std::size_t>(m - 1)]);

    const std::vector<double> s2 = dirichlet_spectrum(2);
    const std::vector<double> expect2 = {0.4384471871911697, 1.3819660112501051,
                                         3.618033988749895,  4.561552812808830,
                                         5.0,                6.0};
    REQUIRE(s2.size() == expect2.size());
    for (std::size_t k = 0; k < s2.size(); ++k)
        CHECK(s2[k] == Catch::Approx(expect2[k]).margin(1e-12));

    CHECK(dirichlet_spectrum(3).front() == Catch::Approx(0.08928375523).margin(1e-9));
    CHECK_THROWS_AS(dirichlet_spectrum(0), std::invalid_argument);
}

TEST_CASE("set recursion matches the dense eigensolver") {
    // eigenvalues of the unrenormalized Dirichlet graph Laplacian D - A
    for (int m = 1; m <= 4; ++m) {
        const GasketGraph g = build(m);
        const LaplacianRep rep = laplacian(g, BoundaryCondition::dirichlet);
        matrix unrenormalized = rep.mat;
        for (std::size_t i = 0; i < unrenormalized.rows(); ++i)
            for (std::size_t j = 0; j < unrenormalized.cols(); ++j)
                unrenormalized(i, j) /= rep.renormalization;
        const EigenDecomposition d = eigh(unrenormalized);

        std::vector<double> distinct;
        for (double v : d.values)
            if (distinct.empty() || std::abs(v - distinct.back()) > 1e-8) distinct.push_back(v);

        const std::vector<double> predicted = dirichlet_spectrum(m);
        REQUIRE(distinct.size() == predicted.size());
        for (std::size_t k = 0; k < distinct.size(); ++k)
            REQUIRE(distinct[k] == Catch::Approx(predicted[k]).margin(1e-8));
    }
}

TEST_CASE("candidate eigenvalues avoid the forbidden ratio band") {
    const std::vector<double> cand = generate_sg_eigenvalues(6, 1e-10);
    CHECK(cand.size() >= 50);
    CHECK(cand.size() <= 200);
    CHECK(std::is_sorted(cand.begin(), cand.end()));
    for (double v : cand) REQUIRE(v > 0.0);
    CHECK(cand.front() == Catch::Approx(11.210665926232269).margin(1e-6));

    const GapConstants gc = gap_constants();
    for (std::size_t i = 0; i < cand.size(); ++i)
        for (std::size_t j = i + 1; j < cand.size(); ++j) {
            const double ratio = cand[j] / cand[i];
            if (ratio > 3.0) break;
            REQUIRE_FALSE((ratio > gc.alpha + 1e-9 && ratio < gc.beta - 1e-9));
        }

    CHECK_THROWS_AS(generate_sg_eigenvalues(0, 1e-10), std::invalid_argument);
    CHECK_THROWS_AS(generate_sg_eigenvalues(3, 0.0), std::invalid_argument);
}
