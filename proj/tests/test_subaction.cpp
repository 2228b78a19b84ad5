#include "doctest.h"

#include <cmath>

#include "ergopt/subaction.hpp"

using namespace ergopt;

namespace {

ExpandingMap doubling() {
    return ExpandingMap({Expression::parse("x/2"), Expression::parse("(x+1)/2")}, 0.5,
                        Orientation::preserving);
}

ExpandingMap neg_doubling() {
    return ExpandingMap({Expression::parse("(1-x)/2"), Expression::parse("(2-x)/2")}, 0.5,
                        Orientation::reversing);
}

EventuallyPeriodicPoint epp(const char* s) { return EventuallyPeriodicPoint::parse(s, 2); }

double ident(double x) { return x; }

} // namespace

TEST_CASE("doubling with A(x) = x maximizes at the fixed point 1") {
    ErgodicOptimum opt = max_ergodic_average(doubling(), ident, 8);
    CHECK(opt.m == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(opt.maximizer.itinerary.to_string() == "1");
    CHECK(opt.maximizer.points[0] == doctest::Approx(1.0));
    // 2 + 1 + 2 + 3 + 6 + 9 + 18 + 30 primitive necklaces up to period 8
    CHECK(opt.orbits.size() == 71);
}

TEST_CASE("Lax-Oleinik recovers V(x) = x - 1") {
    SubactionParams params;
    params.grid_n = 2049;
    SubactionResult res = calibrated_subaction(doubling(), ident, 1.0, 1.0, params);
    CHECK(res.calibration_residual <= 1e-10);
    double sup = 0.0;
    for (int j = 0; j < res.V.size(); ++j)
        sup = std::max(sup, std::abs(res.V.values()[j] - (res.V.node(j) - 1.0)));
    CHECK(sup <= 1e-8);

    auto Vfn = [&res](double x) { return res.V(x); };
    CHECK(error_R(doubling(), ident, Vfn, 1.0, 0.75) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(error_R(doubling(), ident, Vfn, 1.0, 0.25) == doctest::Approx(1.0).epsilon(1e-9));

    // orbit 3/4 -> 1/2 -> 0 -> 0 -> ...: R terms 0, 0, 1, 1, ...
    DeviationValue dev = deviation_I(doubling(), ident, Vfn, 1.0, 0.75, 20);
    REQUIRE(dev.terms.size() == 20);
    CHECK(dev.terms[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(dev.terms[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(dev.terms[5] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(dev.value == doctest::Approx(18.0).epsilon(1e-7));
    CHECK_FALSE(dev.finite);

    DeviationValue at_max = deviation_I(doubling(), ident, Vfn, 1.0, 1.0, 20);
    CHECK(at_max.value == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(at_max.finite);
}

TEST_CASE("wrong m makes the value iteration drift, not hang") {
    SubactionParams params;
    params.grid_n = 257;
    params.max_iter = 400;
    CHECK_THROWS_AS(calibrated_subaction(doubling(), ident, 0.9, 1.0, params),
                    ConvergenceError);
}

TEST_CASE("the quadratic subaction of the reversed doubling example") {
    // T(x) = -2x mod 1 with A = -(1-x)^2: V(x) = -x^2/3 + 2x/9 + c solves the
    // calibration identity with m = -1/9.
    ExpandingMap map = neg_doubling();
    auto A = [](double x) { return -(1.0 - x) * (1.0 - x); };
    ErgodicOptimum opt = max_ergodic_average(map, A, 8);
    CHECK(opt.m == doctest::Approx(-1.0 / 9.0).epsilon(1e-12));
    CHECK(opt.maximizer.points[0] == doctest::Approx(2.0 / 3.0));

    SubactionParams params;
    params.grid_n = 4097;
    SubactionResult res = calibrated_subaction(map, A, -1.0 / 9.0, 2.0 / 3.0, params);
    auto quad = [](double x) { return -x * x / 3.0 + 2.0 * x / 9.0; };
    const double offset = quad(2.0 / 3.0);
    double sup = 0.0;
    for (int j = 0; j < res.V.size(); ++j) {
        double x = res.V.node(j);
        sup = std::max(sup, std::abs(res.V.values()[j] - (quad(x) - offset)));
    }
    CHECK(sup <= 1e-6);

    auto Vfn = [&res](double x) { return res.V(x); };
    CHECK(error_R(map, A, Vfn, -1.0 / 9.0, 1.0 / 6.0) ==
          doctest::Approx(5.0 / 9.0).epsilon(1e-6));
}

TEST_CASE("Mane potential and Aubry membership for A(x) = x") {
    ExpandingMap map = doubling();
    ChainSearchParams params;

    ManeValue stay = mane_potential(map, ident, 1.0, 1.0, 1.0, params);
    CHECK(stay.attained);
    CHECK(stay.value == doctest::Approx(0.0).epsilon(1e-9));

    // best return chain at 0 is the single step psi_0, paying A(0) - m = -1
    ManeValue back = mane_potential(map, ident, 1.0, 0.0, 0.0, params);
    CHECK(back.attained);
    CHECK(back.value == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(back.chain.size() == 1);

    ManeValue barrier = peierls_barrier(map, ident, 1.0, 1.0, 1.0, params);
    CHECK(barrier.attained);
    CHECK(barrier.value == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(barrier.chain.size() >= 8);
    // h <= S at equal parameters
    CHECK(barrier.value <= stay.value + 1e-12);

    ManeValue barrier0 = peierls_barrier(map, ident, 1.0, 0.0, 0.0, params);
    CHECK(barrier0.value == doctest::Approx(-8.0).epsilon(1e-9));

    CHECK(aubry_test(map, ident, 1.0, 1.0, params));
    CHECK_FALSE(aubry_test(map, ident, 1.0, 0.0, params));

    // constant potential: every reachable pair has S = 0
    auto flat = [](double) { return 0.25; };
    ManeValue zero = mane_potential(map, flat, 0.25, 0.37, 0.81, params);
    CHECK(zero.attained);
    CHECK(zero.value == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("maximizing set collects rotations of the reversed itinerary") {
    ErgodicOptimum opt = max_ergodic_average(doubling(), ident, 8);
    MaximizingSet M = MaximizingSet::from_orbit(opt.maximizer);
    REQUIRE(M.points.size() == 1);
    CHECK(M.points[0] == epp("|1"));
    CHECK(M.anchor == epp("|1"));
    CHECK(M.contains(epp("|1")));
    CHECK_FALSE(M.contains(epp("0|1")));

    // a 2-cycle keeps both phases
    PeriodicOrbit two;
    for (const PeriodicOrbit& o : opt.orbits)
        if (o.period() == 2) two = o;
    MaximizingSet M2 = MaximizingSet::from_orbit(two);
    CHECK(M2.points.size() == 2);
    CHECK(M2.contains(epp("|10")));
    CHECK(M2.contains(epp("|01")));
}

TEST_CASE("dual value matches the primal for A(x) = x") {
    ExpandingMap map = doubling();
    Potential pot = Potential::from_A(Expression::parse("x"));
    double m_star = dual_max_average(map, pot, 1.0, 6, 40);
    CHECK(m_star == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("dual subaction table for A(x) = x is the zero table") {
    ExpandingMap map = doubling();
    Potential pot = Potential::from_A(Expression::parse("x"));
    ErgodicOptimum opt = max_ergodic_average(map, ident, 8);
    MaximizingSet M = MaximizingSet::from_orbit(opt.maximizer);
    double m_star = dual_max_average(map, pot, 1.0, 8, 40);

    DualParams params;
    params.cylinder_depth = 10;
    DualSubactionTable table(map, pot, 1.0, M, m_star, params);
    CHECK(table.calibration_residual() <= 1e-10);
    for (double v : table.table()) CHECK(std::abs(v) <= 1e-10);

    // index round trip
    Word w = Word::parse("0110010110", 2);
    CHECK(table.word_of(table.index_of(w)) == w);
    CHECK(table.representative(table.index_of(w)).truncation(10) == w);

    // A* on the table representatives reads the first symbol
    CHECK(table.a_star(epp("0|1")) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(table.a_star(epp("|1")) == doctest::Approx(1.0).epsilon(1e-9));

    // R*(w) = 1 - w_0, so I*(0^j 1^inf) = j
    for (int j = 0; j <= 3; ++j) {
        EventuallyPeriodicPoint w0 = epp("|1");
        for (int i = 0; i < j; ++i) w0 = w0.prepended(0);
        DeviationValue dev = I_star(table, w0);
        CHECK(dev.finite);
        CHECK(dev.value == doctest::Approx(static_cast<double>(j)).epsilon(1e-8));
    }

    // an orbit that never reaches M has infinite deviation
    CHECK_FALSE(I_star(table, epp("|0")).finite);

    RStarReport report = r_star_good(table);
    CHECK(report.good);
    CHECK(report.min_value == doctest::Approx(1.0).epsilon(1e-8));
    REQUIRE(report.witnesses.size() == 1);
    CHECK(report.witnesses[0].point == epp("0|1"));
}

TEST_CASE("planted R* zero is reported with its witness") {
    PeriodicOrbit orbit;
    orbit.itinerary = Word::parse("01", 2);
    orbit.points = {1.0 / 3.0, 2.0 / 3.0};
    MaximizingSet M = MaximizingSet::from_orbit(orbit);

    EventuallyPeriodicPoint bad = epp("1|10");
    auto r_star_fn = [&bad](const EventuallyPeriodicPoint& w) {
        return w == bad ? 0.0 : 1.0;
    };
    RStarReport report = r_star_scan(M, 2, r_star_fn, 1.0, 1e-6);
    CHECK_FALSE(report.good);
    REQUIRE(!report.witnesses.empty());
    CHECK(report.witnesses[0].point == bad);
    CHECK(report.witnesses[0].r_star == 0.0);

    // P = preimages of M outside M: 0(01)^inf = (00 1)... and 1(10)^inf
    CHECK(report.witnesses.size() == 2);

    // a constant dual potential cannot be certified either way
    CHECK_THROWS_AS(r_star_scan(M, 2, r_star_fn, 0.0, 1e-6), RefusalError);
}
