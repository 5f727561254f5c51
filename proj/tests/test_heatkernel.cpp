#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "sglab/gasket.hpp"
#include "sglab/heatkernel.hpp"

using namespace sglab;

namespace {

const SgOperatorData& dirichlet2() {
    static const SgOperatorData op = sg_operator(build(2), BoundaryCondition::dirichlet);
    return op;
}

const SgOperatorData& neumann3() {
    static const SgOperatorData op = sg_operator(build(3), BoundaryCondition::neumann);
    return op;
}

} // namespace

TEST_CASE("heat kernel basics") {
    const SgOperatorData& op = dirichlet2();
    const HeatKernelField f = heat_kernel(op.dec, 0.1);
    REQUIRE(f.real_time());
    CHECK(symmetry_defect(f.real_values()) < 1e-10);

    // semigroup: P_{0.1} M P_{0.1} = P_{0.2}
    const matrix p1 = f.real_values();
    const matrix p2 = heat_kernel(op.dec, 0.2).real_values();
    matrix mp(p1.rows(), p1.cols());
    for (std::size_t i = 0; i < p1.rows(); ++i)
        for (std::size_t j = 0; j < p1.cols(); ++j) mp(i, j) = p1(i, j) * op.mu()[j];
    CHECK(max_abs_diff(matmul(mp, p1), p2) < 1e-8 * (1.0 + max_abs(p2)));

    // heat_column agrees with the full field
    const auto col = heat_column(op.dec, 0.1, 3);
    for (std::size_t i = 0; i < op.size(); ++i)
        REQUIRE(std::abs(col[i] - f.values(i, 3)) < 1e-12);

    // Dirichlet kernel vanishes at large time
    const matrix late = heat_kernel(op.dec, 50.0).real_values();
    CHECK(max_abs(late) < 1e-8);

    CHECK_THROWS_AS(heat_kernel(op.dec, std::complex<double>(0.0, 1.0)), std::domain_error);
    CHECK_THROWS_AS(heat_kernel(op.dec, -0.1), std::domain_error);
    CHECK_THROWS_AS(heat_column(op.dec, 0.1, op.size()), std::invalid_argument);
}

TEST_CASE("neumann kernel conserves mass and converges to the mean") {
    const SgOperatorData& op = neumann3();
    const HeatKernelField f = heat_kernel(op.dec, 0.05);
    const matrix p = f.real_values();
    for (std::size_t x = 0; x < op.size(); ++x) {
        double s = 0.0;
        for (std::size_t y = 0; y < op.size(); ++y) s += p(x, y) * op.mu()[y];
        REQUIRE(s == Catch::Approx(1.0).margin(1e-10));
    }

    // t -> infinity: p_t -> 1 (the L^2(mu)-normalized constant squared)
    const matrix late = heat_kernel(op.dec, 200.0).real_values();
    for (std::size_t x = 0; x < op.size(); ++x)
        REQUIRE(late(x, x) == Catch::Approx(1.0).margin(1e-8));

    // positivity across the resolved window
    for (double t : log_spaced(std::pow(5.0, -3), 0.2, 5)) {
        const matrix q = heat_kernel(op.dec, t).real_values();
        double lowest = 0.0;
        for (std::size_t i = 0; i < q.rows(); ++i)
            for (std::size_t j = 0; j < q.cols(); ++j) lowest = std::min(lowest, q(i, j));
        REQUIRE(lowest > -1e-10);
    }

    // on-diagonal values decrease in t
    const std::vector<double> d1 = heat_diagonal(op.dec, 0.01);
    const std::vector<double> d2 = heat_diagonal(op.dec, 0.02);
    for (std::size_t x = 0; x < op.size(); ++x) REQUIRE(d2[x] < d1[x] + 1e-14);
}

TEST_CASE("complex time obeys the modulus bound") {
    const SgOperatorData& op = dirichlet2();
    // |p_{(1+i tau)u}(x,y)| <= sqrt(p_u(x,x) p_u(y,y))
    for (double u : {0.04, 0.2})
        for (double tau : {1.0, 4.0}) {
            const HeatKernelField f = heat_kernel(op.dec, std::complex<double>(u, tau * u));
            const std::vector<double> diag = heat_diagonal(op.dec, u);
            for (std::size_t x = 0; x < op.size(); ++x)
                for (std::size_t y = 0; y < op.size(); ++y)
                    REQUIRE(std::abs(f.values(x, y)) <=
                            std::sqrt(diag[x] * diag[y]) + 1e-12);
        }

    // moment with tau = 0, s = 0 is the full squared mass
    const double mom = complex_moment(op.dec, op.rho, op.mu(), 4, 2.0, 0.0, 0.0, 2.5);
    const HeatKernelField f = heat_kernel(op.dec, std::pow(2.0, -2.5));
    CHECK(mom == Catch::Approx(tail_mass(f, op.rho, op.mu(), 4, 0.0)).margin(1e-14));

    CHECK_THROWS_AS(complex_moment(op.dec, op.rho, op.mu(), 0, -1.0, 0.0, 0.0, 2.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(complex_moment(op.dec, op.rho, op.mu(), 0, 1.0, 0.0, -1.0, 2.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(tail_mass(f, op.rho, op.mu(), 0, -1.0), std::invalid_argument);
}

TEST_CASE("gaussian fit on the level-2 operator") {
    const SgOperatorData& op = dirichlet2();
    const double m = sg_walk_dimension();

    std::vector<HeatKernelField> fields;
    for (double t : log_spaced(std::pow(5.0, -2), std::pow(5.0, -1), 9))
        fields.push_back(heat_kernel(op.dec, t));

    const GaussianFit fit = gaussian_fit(fields, op.rho, op.mu(), m);
    REQUIRE(fit.succeeded);
    CHECK(fit.C == Catch::Approx(7.68623).epsilon(1e-3));
    CHECK(fit.b == 3.2);
    CHECK(fit.m == m);
    CHECK(fit.sample_count == 9 * op.size() * op.size());
    CHECK(fit.decay_exponent > 0.0);

    // times outside the resolved window are refused
    std::vector<HeatKernelField> early = {heat_kernel(op.dec, fit.window_lo / 10.0)};
    CHECK_THROWS_AS(gaussian_fit(early, op.rho, op.mu(), m), under_resolved_error);
    std::vector<HeatKernelField> late = {heat_kernel(op.dec, fit.window_hi * 10.0)};
    CHECK_THROWS_AS(gaussian_fit(late, op.rho, op.mu(), m), under_resolved_error);

    CHECK_THROWS_AS(gaussian_fit({}, op.rho, op.mu(), m), under_resolved_error);
    CHECK_THROWS_AS(gaussian_fit(fields, op.rho, op.mu(), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_fit(fields, op.rho, op.mu(), m, 0.0), std::invalid_argument);
}

TEST_CASE("gaussian fit on the level-3 operator") {
    const SgOperatorData op = sg_operator(build(3), BoundaryCondition::dirichlet);
    const double m = sg_walk_dimension();
    std::vector<HeatKernelField> fields;
    for (double t : log_spaced(std::pow(5.0, -3), std::pow(5.0, -1), 9))
        fields.push_back(heat_kernel(op.dec, t));
    const GaussianFit fit = gaussian_fit(fields, op.rho, op.mu(), m);
    REQUIRE(fit.succeeded);
    CHECK(fit.C == Catch::Approx(3.05).epsilon(0.05));
    CHECK(fit.b == Catch::Approx(1.6).margin(1e-12));
}

TEST_CASE("tail and moment constants on the level-2 operator") {
    const SgOperatorData& op = dirichlet2();
    const double m = sg_walk_dimension();
    const std::vector<double> ts = log_spaced(std::pow(5.0, -2), 0.2, 5);

    const double ltu = ltu_constant(op.dec, op.rho, op.mu(), 3.2, m, ts);
    CHECK(ltu == Catch::Approx(0.881198).epsilon(1e-3));

    const std::vector<double> scales = {2.0, 4.0, 8.0};
    const std::vector<double> taus = {0.0, 1.0, 2.0, 4.0, 8.0};
    CHECK(jeden_constant(op.dec, op.rho, op.mu(), 0.0, m, scales, taus) ==
          Catch::Approx(0.667445).epsilon(1e-3));
    CHECK(jeden_constant(op.dec, op.rho, op.mu(), 2.0, m, scales, taus) ==
          Catch::Approx(0.176378).epsilon(1e-3));

    CHECK_THROWS_AS(ltu_constant(op.dec, op.rho, op.mu(), 0.0, m, ts), std::invalid_argument);
    CHECK_THROWS_AS(ltu_constant(op.dec, op.rho, op.mu(), 3.2, m, {}), std::invalid_argument);
    CHECK_THROWS_AS(jeden_constant(op.dec, op.rho, op.mu(), -1.0, m, scales, taus),
                    std::invalid_argument);
    CHECK_THROWS_AS(jeden_constant(op.dec, op.rho, op.mu(), 0.0, m, {}, taus),
                    std::invalid_argument);
}

TEST_CASE("log_spaced pins both endpoints") {
    const std::vector<double> g = log_spaced(0.04, 0.2, 9);
    REQUIRE(g.size() == 9);
    CHECK(g.front() == 0.04);
    CHECK(g.back() == 0.2);
    CHECK(std::is_sorted(g.begin(), g.end()));
    CHECK(g[4] == Catch::Approx(std::sqrt(0.04 * 0.2)).margin(1e-15));
    CHECK(log_spaced(2.0, 2.0, 1).front() == 2.0);
    CHECK_THROWS_AS(log_spaced(-1.0, 2.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(log_spaced(2.0, 1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(log_spaced(1.0, 2.0, 0), std::invalid_argument);
}

TEST_CASE("on-diagonal decay exponent is anomalous") {
    const SgOperatorData& op = neumann3();
    const double slope = on_diagonal_decay(op.dec, log_spaced(std::pow(5.0, -3), std::pow(5.0, -2), 7));
    CHECK(slope > 0.3);
    CHECK(slope < 1.0);
    CHECK_THROWS_AS(on_diagonal_decay(op.dec, {0.1}), std::invalid_argument);
}
