#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sglab/calculus.hpp"
#include "sglab/gasket.hpp"
#include "sglab/heatkernel.hpp"
#include "sglab/symbols.hpp"

using namespace sglab;

namespace {

const SgOperatorData& dir2() {
    static const SgOperatorData op = sg_operator(build(2), BoundaryCondition::dirichlet);
    return op;
}

matrix random_input(std::size_t n1, std::size_t n2, std::uint64_t seed) {
    rng gen(seed);
    matrix f(n1, n2);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) f(i, j) = 2.0 * gen.uniform() - 1.0;
    return f;
}

// diagonal decomposition against the counting measure, for budget tests
EigenDecomposition synthetic_dec(std::size_t n) {
    EigenDecomposition d;
    d.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.values[i] = 1.0 + static_cast<double>(i);
    d.vectors = matrix::identity(n);
    return d;
}

const MultiplierSymbol lambda1_symbol{[](double l1, double) { return l1; }, std::nullopt,
                                      std::nullopt, "lambda1"};

} // namespace

TEST_CASE("apply reproduces closed-form actions") {
    const SgOperatorData& op = dir2();
    const matrix f = random_input(op.size(), op.size(), 11);

    // F = 1 is the identity on the product space
    ProductOperator ident{op.dec, op.dec, identity_symbol()};
    CHECK(max_abs_diff(apply(ident, f), f) < 1e-10);

    // F = lambda1 acts as M^{-1} E on the first factor
    const GasketGraph g = build(2);
    const auto keep = vertex_subset(g, BoundaryCondition::dirichlet);
    const matrix e = restrict_matrix(energy_matrix(g), keep);
    ProductOperator first{op.dec, op.dec, lambda1_symbol};
    const matrix got = apply(first, f);
    matrix ref(op.size(), op.size());
    for (std::size_t i = 0; i < op.size(); ++i)
        for (std::size_t j = 0; j < op.size(); ++j) {
            double acc = 0.0;
            for (std::size_t z = 0; z < op.size(); ++z) acc += e(i, z) * f(z, j);
            ref(i, j) = acc / op.mu()[i];
        }
    CHECK(max_abs_diff(got, ref) < 1e-8 * (1.0 + max_abs(ref)));

    // linearity
    const matrix h = random_input(op.size(), op.size(), 12);
    matrix combo(op.size(), op.size());
    for (std::size_t i = 0; i < op.size(); ++i)
        for (std::size_t j = 0; j < op.size(); ++j) combo(i, j) = 2.0 * f(i, j) - 3.0 * h(i, j);
    const matrix lhs = apply(first, combo);
    const matrix af = apply(first, f);
    const matrix ah = apply(first, h);
    matrix rhs(op.size(), op.size());
    for (std::size_t i = 0; i < op.size(); ++i)
        for (std::size_t j = 0; j < op.size(); ++j) rhs(i, j) = 2.0 * af(i, j) - 3.0 * ah(i, j);
    CHECK(max_abs_diff(lhs, rhs) < 1e-12 * (1.0 + max_abs(lhs)));

    CHECK_THROWS_AS(apply(ident, matrix(op.size(), op.size() + 1)), std::invalid_argument);
}

TEST_CASE("symbol product is operator composition") {
    const SgOperatorData& op = dir2();
    const matrix f = random_input(op.size(), op.size(), 13);

    ProductOperator s{op.dec, op.dec, heat_product_symbol(0.05, 0.08)};
    ProductOperator t{op.dec, op.dec, heat_product_symbol(0.03, 0.02)};
    ProductOperator st{op.dec, op.dec, heat_product_symbol(0.08, 0.10)};
    CHECK(max_abs_diff(apply(st, f), apply(s, apply(t, f))) < 1e-8);

    // kernel slice of the composition is S applied to the T slice
    const matrix kt = kernel_column(t, 2, 5);
    const matrix kst = kernel_column(st, 2, 5);
    CHECK(max_abs_diff(kst, apply(s, kt)) < 1e-8 * (1.0 + max_abs(kst)));

    // mu_P self-adjointness of a real symbol
    const matrix g = random_input(op.size(), op.size(), 14);
    const matrix sf = apply(s, f);
    const matrix sg = apply(s, g);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < op.size(); ++i)
        for (std::size_t j = 0; j < op.size(); ++j) {
            const double w = op.mu()[i] * op.mu()[j];
            lhs += sf(i, j) * g(i, j) * w;
            rhs += f(i, j) * sg(i, j) * w;
        }
    CHECK(lhs == Catch::Approx(rhs).margin(1e-10));
}

TEST_CASE("kernel columns factor for product symbols") {
    const SgOperatorData& op = dir2();
    ProductOperator heat{op.dec, op.dec, heat_product_symbol(0.05, 0.08)};

    const std::size_t y1 = 1, y2 = 2;
    const matrix k = kernel_column(heat, y1, y2);
    const auto ps = heat_column(op.dec, 0.05, y1);
    const auto pt = heat_column(op.dec, 0.08, y2);
    for (std::size_t x1 = 0; x1 < op.size(); ++x1)
        for (std::size_t x2 = 0; x2 < op.size(); ++x2)
            REQUIRE(k(x1, x2) ==
                    Catch::Approx(ps[x1].real() * pt[x2].real()).margin(1e-10));

    // agreement with apply() on the normalized atom
    matrix atom(op.size(), op.size());
    atom(y1, y2) = 1.0 / (op.mu()[y1] * op.mu()[y2]);
    CHECK(max_abs_diff(kernel_column(heat, y1, y2), apply(heat, atom)) < 1e-10);

    CHECK_THROWS_AS(kernel_column(heat, op.size(), 0), std::invalid_argument);
}

TEST_CASE("norms on the identity symbol") {
    const SgOperatorData& op = dir2();
    ProductOperator ident{op.dec, op.dec, identity_symbol()};

    CHECK(l2_norm(ident) == 1.0);
    CHECK(l1_norm(ident) == Catch::Approx(1.0).margin(1e-12));
    CHECK(weak11_quantity(ident) == Catch::Approx(1.0).margin(1e-12));
    CHECK(l1_norm_sampled(ident, 5, 99) == Catch::Approx(1.0).margin(1e-12));
    CHECK(lp_lower_bound(ident, 2.0, 3, 7) == Catch::Approx(1.0).margin(1e-12));

    CHECK(joint_spectrum(ident).size() == op.size() * op.size());
    CHECK(joint_spectrum(ident).front().lambda1 == op.dec.values.front());
}

TEST_CASE("norms on heat operators") {
    const SgOperatorData& op = dir2();
    ProductOperator heat{op.dec, op.dec, heat_product_symbol(0.05, 0.08)};

    // exact L2 norm is the max of the symbol over the attained pairs
    double brute = 0.0;
    for (double l1 : op.dec.values)
        for (double l2 : op.dec.values)
            brute = std::max(brute, std::abs(std::exp(-0.05 * l1 - 0.08 * l2)));
    CHECK(l2_norm(heat) == Catch::Approx(brute).margin(1e-12));

    const double exact_l1 = l1_norm(heat);
    CHECK(weak11_quantity(heat) <= exact_l1 + 1e-12);
    CHECK(l1_norm_sampled(heat, 10, 5) <= exact_l1 + 1e-12);

    // duality ascent recovers the L2 norm at p = 2
    CHECK(lp_lower_bound(heat, 2.0, 2, 3) == Catch::Approx(l2_norm(heat)).epsilon(1e-6));

    // interpolation: the certified p-norm lower bound respects the
    // convexity bound l1^{2/p-1} l2^{2-2/p} for 1 < p < 2
    const double p = 1.5;
    const double lb = lp_lower_bound(heat, p, 2, 3);
    const double bound = std::pow(exact_l1, 2.0 / p - 1.0) * std::pow(l2_norm(heat), 2.0 - 2.0 / p);
    CHECK(lb <= bound * (1.0 + 1e-9));

    // a positive conservative kernel has unit L1 norm
    const SgOperatorData neu = sg_operator(build(2), BoundaryCondition::neumann);
    ProductOperator pos{neu.dec, neu.dec, heat_product_symbol(0.2, 0.3)};
    CHECK(l1_norm(pos) == Catch::Approx(1.0).margin(1e-10));

    CHECK_THROWS_AS(lp_lower_bound(heat, 1.0, 2, 3), std::invalid_argument);
    CHECK_THROWS_AS(lp_lower_bound(heat, 2.0, 0, 3), std::invalid_argument);
    CHECK_THROWS_AS(l1_norm_sampled(heat, 0, 3), std::invalid_argument);
}

TEST_CASE("exact sweeps respect the joint budget") {
    ProductOperator big{synthetic_dec(150), synthetic_dec(150), identity_symbol()};
    CHECK_THROWS_AS(l1_norm(big), budget_error);
    CHECK_THROWS_AS(weak11_quantity(big), budget_error);
    // the sampled variant still works
    CHECK(l1_norm_sampled(big, 3, 1) == Catch::Approx(1.0).margin(1e-12));

    ProductOperator mid{synthetic_dec(40), synthetic_dec(40), identity_symbol()};
    CHECK_THROWS_AS(dense_operator_matrix(mid), budget_error);
}

TEST_CASE("singular symbols on the attained spectrum are rejected") {
    const SgOperatorData& op = dir2();
    // c = d puts the singular locus on the attained diagonal
    const auto [f1, f2] = riesz_symbols(1.0, 1.0, 1.0, 1.0);
    ProductOperator bad1{op.dec, op.dec, f1};
    ProductOperator bad2{op.dec, op.dec, f2};
    CHECK_THROWS_AS(l2_norm(bad1), singular_symbol_error);
    CHECK_THROWS_AS(l2_norm(bad2), singular_symbol_error);

    // d/c = sqrt(5) misses every attained ratio, so the same quotients are fine
    const auto [g1, g2] = riesz_symbols(1.0, 1.0, 1.0, std::sqrt(5.0));
    ProductOperator ok1{op.dec, op.dec, g1};
    ProductOperator ok2{op.dec, op.dec, g2};
    CHECK(std::isfinite(l2_norm(ok1)));
    CHECK(std::isfinite(l2_norm(ok2)));
}

TEST_CASE("ratio gaps") {
    const auto one = ratio_gaps({1.0}, {0.5, 1.5});
    REQUIRE(one.size() == 2);
    CHECK(one[0] == std::pair{0.5, 1.0});
    CHECK(one[1] == std::pair{1.0, 1.5});

    const auto two = ratio_gaps({1.0, 2.0}, {0.25, 3.0});
    REQUIRE(two.size() == 4);
    CHECK(two[0] == std::pair{0.25, 0.5});
    CHECK(two[3] == std::pair{2.0, 3.0});

    CHECK_THROWS_AS(ratio_gaps({}, {0.5, 1.5}), std::invalid_argument);
    CHECK_THROWS_AS(ratio_gaps({1.0}, {1.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(ratio_gaps({-1.0}, {0.5, 1.5}), std::invalid_argument);
}

TEST_CASE("quasielliptic gap across levels") {
    const double root5 = std::sqrt(5.0);
    const std::vector<double> expected = {0.0557281, 0.0786893, 0.0148058};
    for (int m = 1; m <= 3; ++m) {
        const EigenDecomposition dec = sg_spectral_data(build(m), BoundaryCondition::dirichlet);
        const QuasiellipticResult q = quasielliptic_check(1.0, root5, dec.values, dec.values);
        REQUIRE(q.in_gap);
        CHECK(q.min_gap == Catch::Approx(expected[static_cast<std::size_t>(m - 1)]).epsilon(1e-5));
    }

    const QuasiellipticResult deg = quasielliptic_check(1.0, 1.0, {1.0}, {1.0});
    CHECK(deg.min_gap == 0.0);
    CHECK_FALSE(deg.in_gap);

    CHECK_THROWS_AS(quasielliptic_check(0.0, 1.0, {1.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(quasielliptic_check(1.0, -1.0, {1.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(quasielliptic_check(1.0, 1.0, {}, {1.0}), std::invalid_argument);
}

TEST_CASE("riesz symbols and spectral cutoff") {
    const double root5 = std::sqrt(5.0);
    const auto [f1, f2] = riesz_symbols(1.0, 1.0, 1.0, root5);
    CHECK(f1(2.0, 1.0) == Catch::Approx(3.0 / (2.0 - root5)).margin(1e-14));
    CHECK(f2(2.0, 1.0) == Catch::Approx(2.0 / std::pow(2.0 - root5, 2)).margin(1e-12));
    REQUIRE(f1.homogeneity_degree);
    CHECK(*f1.homogeneity_degree == 0);
    REQUIRE(f1.singular_locus);
    CHECK(f1.singular_locus->second == root5);
    CHECK_THROWS_AS(riesz_symbols(1.0, 1.0, 0.0, 1.0), std::invalid_argument);

    const CutoffOmega omega = make_cutoff(root5, 0.08);
    CHECK(omega(root5 * 3.0, 3.0) == 1.0);
    CHECK(omega(root5 * 3.0 + 3.0 * 0.05, 3.0) == 1.0);          // inside |ratio - gamma| <= sigma
    CHECK(omega(3.0 * (root5 + 0.3), 3.0) == 0.0);               // outside 2 sigma
    CHECK(omega(1.0, 0.0) == 0.0);

    const MultiplierSymbol cut = cutoff_multiply(f1, omega);
    CHECK_FALSE(cut.singular_locus.has_value());                  // locus sits inside the cutoff
    CHECK(cut(root5 * 3.0, 3.0) == 0.0);                          // even though f1 blows up there
    const double away1 = 10.0, away2 = 1.0;
    CHECK(cut(away1, away2) == f1(away1, away2));

    // a cutoff centered elsewhere keeps the locus
    const MultiplierSymbol off = cutoff_multiply(f1, make_cutoff(1.0, 0.08));
    REQUIRE(off.singular_locus.has_value());

    CHECK_THROWS_AS(make_cutoff(0.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(make_cutoff(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("gap identity at coarse levels") {
    const double root5 = std::sqrt(5.0);
    const CutoffOmega omega = make_cutoff(root5, 0.08);
    const auto [f1, f2] = riesz_symbols(1.0, 1.0, 1.0, root5);

    for (int m = 1; m <= 2; ++m) {
        const EigenDecomposition dec = sg_spectral_data(build(m), BoundaryCondition::dirichlet);
        CHECK(omega_support_contact(omega, dec.values, dec.values) == 0);
        // so the omega piece of the operator vanishes identically
        ProductOperator piece{dec, dec, omega_multiply(f1, omega)};
        CHECK(l2_norm(piece) == 0.0);
    }

    // finer spectra do touch the cutoff support
    const EigenDecomposition dec3 = sg_spectral_data(build(3), BoundaryCondition::dirichlet);
    CHECK(omega_support_contact(omega, dec3.values, dec3.values) > 0);
}

TEST_CASE("truncated kernel integrals") {
    const SgOperatorData& op = dir2();
    const double m_walk = sg_walk_dimension();
    const double root5 = std::sqrt(5.0);
    const auto [f1, f2] = riesz_symbols(1.0, 1.0, 1.0, root5);
    ProductOperator pop{op.dec, op.dec, cutoff_multiply(f1, make_cutoff(root5, 0.08))};

    // past the diameter the tail region is empty
    CHECK(cz_truncation_integral(pop, 0.5, op.rho, op.rho, op.mu(), op.mu(), m_walk) == 0.0);
    CHECK(cz_truncation_integral(pop, 8.0, op.rho, op.rho, op.mu(), op.mu(), m_walk) == 0.0);

    CHECK(cz_truncation_integral(pop, 0.25, op.rho, op.rho, op.mu(), op.mu(), m_walk) ==
          Catch::Approx(17.367).epsilon(1e-2));
    CHECK(cz_truncation_integral(pop, 0.125, op.rho, op.rho, op.mu(), op.mu(), m_walk) ==
          Catch::Approx(7.08609).epsilon(1e-2));
    CHECK(cz_truncation_integral(pop, std::pow(2.0, -8), op.rho, op.rho, op.mu(), op.mu(),
                                 m_walk) < 1e-3);

    CHECK_THROWS_AS(cz_truncation_integral(pop, 0.0, op.rho, op.rho, op.mu(), op.mu(), m_walk),
                    std::invalid_argument);
    MeasureVector short_mu(op.mu().begin(), op.mu().end() - 1);
    CHECK_THROWS_AS(cz_truncation_integral(pop, 0.25, op.rho, op.rho, short_mu, op.mu(), m_walk),
                    std::invalid_argument);
}

TEST_CASE("pointwise kernel-row bound") {
    const SgOperatorData& op = dir2();
    const double m_walk = sg_walk_dimension();

    const auto band_symbol = [m_walk](double R) {
        const double rm = std::pow(R, m_walk);
        return MultiplierSymbol{[rm](double l1, double l2) { return std::exp(-(l1 + l2) / rm); },
                                std::nullopt, std::nullopt, "expR"};
    };

    ProductOperator pop{op.dec, op.dec, band_symbol(2.0)};
    const LemmaPReport r2 = lemma_p_check(pop, 2.0, m_walk, op.rho, op.rho);
    CHECK(r2.constant == Catch::Approx(1.54539).epsilon(1e-3));
    CHECK(r2.symbol_sup <= 1.0);
    CHECK(r2.samples > 0);
    // the exponential symbol does not vanish past R^m, so violations are expected
    CHECK(r2.support_violations > 0);

    pop.symbol = band_symbol(4.0);
    const LemmaPReport r4 = lemma_p_check(pop, 4.0, m_walk, op.rho, op.rho);
    pop.symbol = band_symbol(8.0);
    const LemmaPReport r8 = lemma_p_check(pop, 8.0, m_walk, op.rho, op.rho);
    CHECK(r4.constant == Catch::Approx(0.803901).epsilon(1e-3));
    CHECK(r8.constant == Catch::Approx(0.48895).epsilon(1e-3));
    CHECK(r2.constant > r4.constant);
    CHECK(r4.constant > r8.constant);

    CHECK_THROWS_AS(lemma_p_check(pop, 0.0, m_walk, op.rho, op.rho), std::invalid_argument);
    CHECK_THROWS_AS(lemma_p_check(pop, 2.0, 1.0, op.rho, op.rho), std::invalid_argument);
    ProductOperator bare{synthetic_dec(4), synthetic_dec(4), identity_symbol()};
    CHECK_THROWS_AS(lemma_p_check(bare, 2.0, m_walk, MetricMatrix{matrix(4, 4)},
                                  MetricMatrix{matrix(4, 4)}),
                    std::invalid_argument);
}

TEST_CASE("tensor path agrees with the dense oracle") {
    const double root5 = std::sqrt(5.0);
    for (int lvl : {1, 2}) {
        const SgOperatorData op = sg_operator(build(lvl), BoundaryCondition::dirichlet);
        const auto [f1, f2] = riesz_symbols(1.0, 1.0, 1.0, root5);
        const std::vector<MultiplierSymbol> symbols = {
            identity_symbol(), heat_product_symbol(0.3, 0.7),
            cutoff_multiply(f1, make_cutoff(root5, 0.08))};
        const matrix f = random_input(op.size(), op.size(), 11);
        for (const MultiplierSymbol& sym : symbols) {
            ProductOperator pop{op.dec, op.dec, sym};
            const matrix dense = dense_operator_matrix(pop);
            const matrix g = apply(pop, f);
            double worst = 0.0;
            for (std::size_t i = 0; i < f.rows(); ++i)
                for (std::size_t j = 0; j < f.cols(); ++j) {
                    double acc = 0.0;
                    for (std::size_t a = 0; a < f.rows(); ++a)
                        for (std::size_t b = 0; b < f.cols(); ++b)
                            acc += dense(i * f.cols() + j, a * f.cols() + b) * f(a, b);
                    worst = std::max(worst, std::abs(acc - g(i, j)));
                }
            REQUIRE(worst <= 1e-10 * (1.0 + max_abs(g)));
        }
    }

    // Neumann pairing goes through the same invariant
    const SgOperatorData neu = sg_operator(build(1), BoundaryCondition::neumann);
    ProductOperator pop{neu.dec, neu.dec, heat_product_symbol(0.2, 0.4)};
    const matrix f = random_input(neu.size(), neu.size(), 21);
    const matrix dense = dense_operator_matrix(pop);
    const matrix g = apply(pop, f);
    double worst = 0.0;
    for (std::size_t i = 0; i < f.rows(); ++i)
        for (std::size_t j = 0; j < f.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t a = 0; a < f.rows(); ++a)
                for (std::size_t b = 0; b < f.cols(); ++b)
                    acc += dense(i * f.cols() + j, a * f.cols() + b) * f(a, b);
            worst = std::max(worst, std::abs(acc - g(i, j)));
        }
    CHECK(worst <= 1e-10 * (1.0 + max_abs(g)));
}
