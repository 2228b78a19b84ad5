#include "doctest.h"

#include <cmath>

#include "ergopt/dynamics.hpp"
#include "ergopt/transfer.hpp"

using namespace ergopt;

namespace {

ExpandingMap doubling() {
    return ExpandingMap({Expression::parse("x/2"), Expression::parse("(x+1)/2")}, 0.5,
                        Orientation::preserving);
}

} // namespace

TEST_CASE("potential positivity and the two constructors") {
    Potential pg = Potential::from_g(Expression::parse("exp(x)"));
    CHECK(pg.A(0.3) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(pg.g(0.3) == doctest::Approx(std::exp(0.3)));
    Potential pa = Potential::from_A(Expression::parse("x"));
    CHECK(pa.g(0.25) == doctest::Approx(std::exp(0.25)));
    CHECK(pa.max_A() >= 1.0);
    CHECK_THROWS_AS(Potential::from_g(Expression::parse("x - 1/2")), ConfigError);
}

TEST_CASE("constant weight has closed-form eigendata") {
    ExpandingMap map = doubling();
    const double c = 1.7;
    Potential pot = Potential::from_g(Expression::parse("1.7"));
    for (double beta : {1.0, 2.0, 4.0}) {
        EigenData eig = leading_eigen(map, pot, beta, 48);
        CHECK(eig.alpha == doctest::Approx(2.0 * std::pow(c, beta)).epsilon(1e-12));
        for (double v : eig.v.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(eig.residual < 1e-12);
        // every depth-k cylinder carries mass 2^-k
        CHECK(cylinder_mass(map, pot, eig, Word::parse("0110", 2)) ==
              doctest::Approx(1.0 / 16.0).epsilon(1e-10));
    }
}

TEST_CASE("leading eigen solves the operator equation for g = exp(x)") {
    ExpandingMap map = doubling();
    Potential pot = Potential::from_g(Expression::parse("exp(x)"));
    EigenData eig = leading_eigen(map, pot, 1.0, 96);
    CHECK(eig.residual < 1e-12);

    // P v = alpha v pointwise, off the collocation grid too
    for (double x : {0.0, 0.31, 0.64, 1.0}) {
        double lhs = 0.0;
        for (int i = 0; i < 2; ++i) {
            double y = map.branch(i, x);
            lhs += std::exp(y) * eig.v(y);
        }
        CHECK(lhs == doctest::Approx(eig.alpha * eig.v(x)).epsilon(1e-11));
    }

    // normalizations: mu(1) = 1 and mu(v) = 1
    double mass = 0.0, vmass = 0.0;
    for (int j = 0; j < eig.grid->size(); ++j) {
        mass += eig.mu[j];
        vmass += eig.mu[j] * eig.v.values()[j];
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(vmass == doctest::Approx(1.0).epsilon(1e-11));

    // eigenmeasure property: mu(P q) = alpha mu(q) for a non-symmetric probe
    GridFunction q = GridFunction::sample(eig.grid, [](double x) { return std::cos(3.0 * x); });
    GridFunction Pq = transfer_apply(map, pot, 1.0, q);
    CHECK(eig.mu_integral(Pq) == doctest::Approx(eig.alpha * eig.mu_integral(q)).epsilon(1e-10));
}

TEST_CASE("cylinder masses are a consistent measure") {
    ExpandingMap map = doubling();
    Potential pot = Potential::from_g(Expression::parse("exp(x)"));
    EigenData eig = leading_eigen(map, pot, 1.0, 96);

    // partition sums at depths 1..6
    for (int k = 1; k <= 6; ++k) {
        double total = 0.0;
        std::vector<int> syms(k, 0);
        for (long code = 0; code < (1L << k); ++code) {
            for (int j = 0; j < k; ++j) syms[j] = (code >> j) & 1;
            total += cylinder_mass(map, pot, eig, Word(syms, 2));
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }

    // Kolmogorov consistency: splitting the innermost cell refines the
    // cylinder, so mu(I_w) = sum_s mu(I_{sw})
    Word w = Word::parse("011", 2);
    CHECK(cylinder_mass(map, pot, eig, w) ==
          doctest::Approx(cylinder_mass(map, pot, eig, w.prepended(0)) +
                          cylinder_mass(map, pot, eig, w.prepended(1)))
              .epsilon(1e-11));

    // the word measure projects the invariant density
    double total_inv = word_measure(map, pot, eig, Word::parse("0", 2)) +
                       word_measure(map, pot, eig, Word::parse("1", 2));
    CHECK(total_inv == doctest::Approx(1.0).epsilon(1e-10));

    // MassChain matches the one-shot cylinder masses along a sequence
    EventuallyPeriodicPoint omega = EventuallyPeriodicPoint::parse("01|10", 2);
    MassChain chain(map, pot, eig, omega, 8);
    for (int k = 1; k <= 8; ++k)
        CHECK(chain.log_mass(k) ==
              doctest::Approx(log_cylinder_mass(map, pot, eig, omega.truncation(k)))
                  .epsilon(1e-12));
}

TEST_CASE("spectral projection converges to the rank-one limit") {
    ExpandingMap map = doubling();
    Potential pot = Potential::from_g(Expression::parse("exp(x)"));
    EigenData eig = leading_eigen(map, pot, 1.0, 96);
    GridFunction z = GridFunction::sample(eig.grid, [](double x) { return x; });
    double zbar = eig.mu_integral(z);

    double prev = -1.0;
    for (int k : {6, 9, 12}) {
        double worst = 0.0;
        for (double x : {0.05, 0.37, 0.81})
            worst = std::max(worst, std::abs(spectral_projection_rho(map, pot, eig, z, k, x) -
                                             eig.v(x) * zbar));
        if (prev >= 0.0) CHECK(worst < 0.5 * prev);
        prev = worst;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("scaled log eigenfunction vanishes at the anchor") {
    ExpandingMap map = doubling();
    Potential pot = Potential::from_A(Expression::parse("x"));
    EigenData eig = leading_eigen(map, pot, 8.0, 96);
    GridFunction s = log_eigenfunction_scaled(eig, 1.0);
    CHECK(std::abs(s(1.0)) < 1e-12);
    // (1/beta) log v_beta approximates the subaction x - 1 within O(1/beta)
    CHECK(s(0.0) == doctest::Approx(-1.0).epsilon(0.15));
}
