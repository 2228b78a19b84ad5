// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Each criterion rechecks the closed-form or property-based oracle it states,
// including its runtime budget where one is declared.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "ergopt/io_util.hpp"
#include "ergopt/kernel.hpp"
#include "ergopt/piecewise.hpp"
#include "ergopt/problem.hpp"

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

double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

// ---------------------------------------------------------------- criterion 1

bool criterion_constant(Check& c) {
    const double cval = 1.3;
    ExpandingMap map = doubling();
    Potential pot = Potential::from_g(Expression::parse("1.3"));
    KernelSettings settings;
    settings.grid_n = 64;
    KernelContext ctx(map, pot, 1.0, epp("|1"), settings);

    for (double beta : {1.0, 2.0, 4.0}) {
        const EigenData& eig = ctx.eigen(beta);
        c.require(std::abs(eig.alpha - 2.0 * std::pow(cval, beta)) <= 1e-10,
                  "alpha != d c^beta at beta=" + std::to_string(beta));
        for (double v : eig.v.values())
            c.require(std::abs(v - 1.0) <= 1e-10, "eigenfunction not constant 1");

        HKernel h(ctx, epp("01|10"), beta, 30);
        for (double x : {0.0, 0.3, 1.0})
            c.require(std::abs(h.log_h(x, 20)) <= 1e-10, "h_gamma != 1");

        ConvergedValue s = scaling_function(ctx, epp("|10"), beta, 1e-12);
        c.require(std::abs(s.value - 0.5) <= 1e-10, "scaling function != 1/2");

        c.require(std::abs(series_dual(map, pot, beta, epp("1|0"), 1.0, 40) -
                           beta * std::log(cval)) <= 1e-10,
                  "series dual != beta log c");
        c.require(std::abs(dual_potential(ctx, epp("1|0"), beta, DualMode::scaling, 20) -
                           beta * std::log(cval)) <= 1e-9,
                  "scaling dual != beta log c");
    }
    return c.ok;
}

// ---------------------------------------------------------------- criterion 2

bool criterion_doubling_end_to_end(Check& c) {
    ExpandingMap map = doubling();
    Potential pot = Potential::from_A(Expression::parse("x"));
    auto A = [](double x) { return x; };

    ErgodicOptimum opt = max_ergodic_average(map, A, 8);
    c.require(std::abs(opt.m - 1.0) <= 1e-12, "m != 1");
    c.require(opt.maximizer.itinerary.to_string() == "1" &&
                  std::abs(opt.maximizer.points[0] - 1.0) <= 1e-12,
              "maximizer is not the fixed point 1");

    SubactionResult lax = calibrated_subaction(map, A, 1.0, 1.0);
    double sup = 0.0;
    for (int j = 0; j < lax.V.size(); ++j)
        sup = std::max(sup, std::abs(lax.V.values()[j] - (lax.V.node(j) - 1.0)));
    c.require(sup <= 1e-8, "sup |V - (x-1)| = " + format_double(sup));

    for (const char* s : {"|1", "|0", "0|1", "10|0", "011|01"}) {
        EventuallyPeriodicPoint w = epp(s);
        double astar = series_dual(map, pot, 1.0, w, 1.0, 40);
        c.require(std::abs(astar - w.symbol_at(0)) <= 1e-9,
                  std::string("A*(") + s + ") != leading symbol");
    }

    MaximizingSet M = MaximizingSet::from_orbit(opt.maximizer);
    double m_star = dual_max_average(map, pot, 1.0, 8, 40);
    DualSubactionTable table(map, pot, 1.0, M, m_star, DualParams{});
    c.require(table.calibration_residual() <= 1e-10, "V* residual > 1e-10");
    double vsup = 0.0;
    for (double v : table.table()) vsup = std::max(vsup, std::abs(v));
    c.require(vsup <= 1e-10, "V* not the zero table, sup = " + format_double(vsup));

    for (int j = 0; j <= 5; ++j) {
        EventuallyPeriodicPoint w = epp("|1");
        for (int i = 0; i < j; ++i) w = w.prepended(0);
        DeviationValue dev = I_star(table, w);
        c.require(dev.finite && std::abs(dev.value - j) <= 1e-9,
                  "I*(0^" + std::to_string(j) + " 1^inf) != " + std::to_string(j));
    }

    PiecewiseReport report = run_piecewise(map, pot, 1.0);
    c.require(report.breakpoints.segment_words.size() == 1, "more than one segment");
    c.require(!report.breakpoints.segment_words.empty() &&
                  report.breakpoints.segment_words[0] == epp("|1"),
              "selected word is not 1^inf");
    c.require(report.cross.sup_dual_vs_lax <= 1e-4,
              "sup |V_dual - V_lax| = " + format_double(report.cross.sup_dual_vs_lax));
    return c.ok;
}

// ---------------------------------------------------------------- criterion 3

bool criterion_example_61(Check& c) {
    ExpandingMap map = neg_doubling();
    auto A = [](double x) { return -(1.0 - x) * (1.0 - x); };

    ErgodicOptimum opt = max_ergodic_average(map, A, 8);
    c.require(std::abs(opt.m + 1.0 / 9.0) <= 1e-10, "m != -1/9");
    c.require(opt.maximizer.period() == 1 &&
                  std::abs(opt.maximizer.points[0] - 2.0 / 3.0) <= 1e-10,
              "support is not {2/3}");

    SubactionResult res = calibrated_subaction(map, A, -1.0 / 9.0, 2.0 / 3.0);
    auto quad = [](double x) { return -x * x / 3.0 + 2.0 * x / 9.0; };
    double offset = quad(2.0 / 3.0);
    double sup = 0.0;
    for (int j = 0; j < res.V.size(); ++j) {
        double x = res.V.node(j);
        sup = std::max(sup, std::abs(res.V.values()[j] - (quad(x) - offset)));
    }
    c.require(sup <= 1e-6, "sup |V - quadratic| = " + format_double(sup));

    auto V = [&res](double x) { return res.V(x); };
    double r = error_R(map, A, V, -1.0 / 9.0, 1.0 / 6.0);
    c.require(std::abs(r - 5.0 / 9.0) <= 1e-6, "R(1/6) != 5/9, got " + format_double(r));
    // the identity value 5/9 is the oracle; the alternative constant 0.665
    // floating in the literature does not satisfy the calibration identity
    std::printf("    note: R(1/6) = %s (identity value 5/9 = %s; reported 0.665 differs by %s)\n",
                format_double(r).c_str(), format_double(5.0 / 9.0).c_str(),
                format_double(std::abs(0.665 - 5.0 / 9.0)).c_str());
    return c.ok;
}

// ---------------------------------------------------------------- criterion 4

bool criterion_spectral_projection(Check& c) {
    ExpandingMap map = doubling();
    Potential pot = Potential::from_g(Expression::parse("exp(x)"));
    EigenData eig = leading_eigen(map, pot, 1.0, 96);
    GridFunction z = GridFunction::sample(eig.grid, [](double x) { return x; });
    double zbar = eig.mu_integral(z);

    double worst10 = 0.0, worst12 = 0.0;
    for (int j = 0; j < 33; ++j) {
        double x = j / 32.0;
        double limit = eig.v(x) * zbar;
        worst10 = std::max(worst10,
                           std::abs(spectral_projection_rho(map, pot, eig, z, 10, x) - limit));
        worst12 = std::max(worst12,
                           std::abs(spectral_projection_rho(map, pot, eig, z, 12, x) - limit));
    }
    c.require(worst12 <= 0.6 * worst10,
              "k=12 error " + format_double(worst12) + " not <= 0.6 * k=10 error " +
                  format_double(worst10));
    return c.ok;
}

// ---------------------------------------------------------------- criterion 5

bool criterion_involution_identity(Check& c) {
    ExpandingMap map = doubling();
    Potential pot = Potential::from_g(Expression::parse("exp(x)"));
    KernelContext ctx(map, pot, 1.0, epp("|1"));

    std::mt19937_64 rng(2026);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        int head_len = static_cast<int>(rng() % 5);
        int cycle_len = 1 + static_cast<int>(rng() % 4);
        std::vector<int> head, cycle;
        for (int i = 0; i < head_len; ++i) head.push_back(static_cast<int>(rng() % 2));
        for (int i = 0; i < cycle_len; ++i) cycle.push_back(static_cast<int>(rng() % 2));
        EventuallyPeriodicPoint w(Word(head, 2), Word(cycle, 2));
        for (int k = 1; k <= 9; ++k) {
            double x = k / 10.0;
            worst = std::max(worst, std::abs(involution_residual(ctx, w, x, 1.0, 40)));
        }
    }
    c.require(worst <= 1e-8, "max residual " + format_double(worst));
    c.detail = "max residual " + format_double(worst);
    return c.ok;
}

// ---------------------------------------------------------------- criterion 6

bool criterion_value_duality(Check& c) {
    ExpandingMap map = doubling();
    for (const char* src : {"x", "cos(2*pi*x)"}) {
        Potential pot = Potential::from_A(Expression::parse(src));
        auto A = [&pot](double x) { return pot.A(x); };
        double m = max_ergodic_average(map, A, 8).m;
        double m_star = dual_max_average(map, pot, 1.0, 8, 40);
        c.require(std::abs(m - m_star) <= 2e-3,
                  std::string("|m - m*| for A=") + src + " is " +
                      format_double(std::abs(m - m_star)));

        // scaling-route dual at cylinder depth 12 agrees on periodic averages
        KernelSettings settings;
        settings.grid_n = 96;
        KernelContext ctx(map, pot, 1.0, epp("|1"), settings);
        double best = -1e300;
        for (const Word& w : primitive_necklaces(2, 4)) {
            double total = 0.0;
            EventuallyPeriodicPoint p(Word({}, 2), w);
            for (std::size_t r = 0; r < w.size(); ++r) {
                total += dual_potential(ctx, p, 1.0, DualMode::scaling, 12);
                p = p.shifted();
            }
            best = std::max(best, total / static_cast<double>(w.size()));
        }
        c.require(std::abs(m - best) <= 2e-3,
                  std::string("scaling-route m* for A=") + src + " off by " +
                      format_double(std::abs(m - best)));
    }
    return c.ok;
}

// ---------------------------------------------------------------- criterion 7

bool criterion_roundtrip(Check& c) {
    ExpandingMap map = doubling();
    for (const char* src : {"x", "cos(2*pi*x)"}) {
        Potential pot = Potential::from_A(Expression::parse(src));
        double r = dual_roundtrip_residual(map, pot, 1.0, epp("|1"), 40, 6);
        c.require(r <= 1e-5, std::string("roundtrip residual for A=") + src + " is " +
                                 format_double(r));
    }
    return c.ok;
}

// ---------------------------------------------------------------- criterion 8

bool criterion_zero_temperature_trend(Check& c) {
    ExpandingMap map = doubling();
    Potential pot = Potential::from_A(Expression::parse("x"));
    auto A = [](double x) { return x; };
    SubactionResult lax = calibrated_subaction(map, A, 1.0, 1.0);

    double prev = 1e300;
    double final_sup = 0.0;
    for (double beta : {8.0, 16.0, 32.0, 64.0}) {
        EigenData eig = leading_eigen(map, pot, beta, 128);
        GridFunction scaled = log_eigenfunction_scaled(eig, 1.0);
        double sup = 0.0;
        for (int j = 0; j <= 256; ++j) {
            double x = j / 256.0;
            sup = std::max(sup, std::abs(scaled(x) - lax.V(x)));
        }
        // decreasing up to a rounding-level tie: for this potential the scaled
        // eigenfunction matches V to machine precision at every beta
        c.require(sup <= prev + 1e-9, "sup at beta=" + format_double(beta) + " not decreasing");
        prev = sup;
        final_sup = sup;
    }
    c.require(final_sup <= std::log(2.0) / 64.0 + 5e-3,
              "final sup " + format_double(final_sup));
    c.detail = "final sup " + format_double(final_sup);
    return c.ok;
}

// ---------------------------------------------------------------- criterion 9

bool criterion_uniform_regularity(Check& c) {
    ExpandingMap map = doubling();
    Potential pot = Potential::from_g(Expression::parse("exp(x)"));
    KernelContext ctx(map, pot, 1.0, epp("|1"));

    const std::vector<double> betas = {1.0, 4.0, 16.0, 64.0};
    std::vector<double> maxima;
    for (double beta : betas) {
        double worst = 0.0;
        for (const char* s : {"|1", "01|10", "1|100"}) {
            HKernel h(ctx, epp(s), beta, 35);
            std::vector<double> xs, vals;
            for (int j = 0; j <= 8; ++j) {
                xs.push_back(j / 8.0);
                vals.push_back(h.H(xs.back(), 30));
            }
            for (std::size_t i = 0; i < xs.size(); ++i)
                for (std::size_t k = i + 1; k < xs.size(); ++k)
                    worst = std::max(worst,
                                     std::abs(vals[i] - vals[k]) / (xs[k] - xs[i]));
        }
        maxima.push_back(worst);
    }
    // single constant: the contraction budget lambda/(1-lambda) * Lip(A) + 5%
    for (double mx : maxima)
        c.require(mx <= 1.05, "Lipschitz quotient " + format_double(mx) + " above budget");
    double tau = kendall_tau(betas, maxima, 1e-9);
    c.require(tau <= 0.0, "Kendall tau = " + format_double(tau) + " > 0");
    c.detail = "max quotient " + format_double(*std::max_element(maxima.begin(), maxima.end())) +
               ", tau " + format_double(tau);
    return c.ok;
}

// --------------------------------------------------------------- criterion 10

int run_cli(const std::string& cmd) {
    int status = std::system(cmd.c_str());
    if (status < 0) return -1;
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
}

bool criterion_pipeline_guards(Check& c) {
    // in-process refusal
    {
        Potential pot = Potential::from_A(Expression::parse("-(1-x)^2"));
        bool refused = false;
        try {
            run_piecewise(neg_doubling(), pot, 2.0 / 3.0);
        } catch (const RefusalError&) {
            refused = true;
        }
        c.require(refused, "run_piecewise accepted an orientation-reversing map");
    }

    // CLI refusal must exit with the certified-failure code 2
    {
        const char* bin = std::getenv("ERGOPT_BIN");
        std::string binary = bin ? bin : "../ergopt";
        if (std::filesystem::exists(binary)) {
            std::filesystem::create_directories("acceptance_scratch");
            write_text_file("acceptance_scratch/neg_doubling.json", R"({
  "_note": "T(x) = -2x mod 1 with the distance-squared potential",
  "map": {
    "inverse_branches": ["(1-x)/2", "(2-x)/2"],
    "lambda": 0.5,
    "orientation": "reversing"
  },
  "potential": {"A": "-(1-x)^2"},
  "anchors": {"x_bar": 0.6666666666666666}
}
)");
            int code = run_cli(binary +
                               " piecewise acceptance_scratch/neg_doubling.json"
                               " --out acceptance_scratch 2>/dev/null");
            c.require(code == 2, "CLI piecewise exit code " + std::to_string(code) + " != 2");
        } else {
            c.require(false, "CLI binary not found for the exit-code check");
        }
    }

    // planted R* zero: scan must fail with the right witness
    {
        PeriodicOrbit orbit;
        orbit.itinerary = Word::parse("01", 2);
        orbit.points = {1.0 / 3.0, 2.0 / 3.0};
        MaximizingSet M = MaximizingSet::from_orbit(orbit);
        EventuallyPeriodicPoint bad = epp("1|10");
        RStarReport report = r_star_scan(
            M, 2, [&bad](const EventuallyPeriodicPoint& w) { return w == bad ? 0.0 : 1.0; },
            1.0, 1e-6);
        c.require(!report.good, "planted zero not detected");
        c.require(!report.witnesses.empty() && report.witnesses[0].point == bad,
                  "wrong witness for the planted zero");
    }

    // planted crossing: one breakpoint within refine_tol, monotone words
    {
        std::vector<KernelSection> sections(2);
        sections[0].word = epp("0|1");
        sections[0].kernel = [](double x) { return -0.05 * x - 0.1; };
        sections[1].word = epp("|1");
        sections[1].kernel = [](double x) { return -0.3 * x; };
        BreakpointReport report = scan_breakpoints(sections, 1025, 1e-4, 1e-12);
        c.require(report.breakpoints.size() == 1,
                  std::to_string(report.breakpoints.size()) + " breakpoints != 1");
        if (report.breakpoints.size() == 1)
            c.require(std::abs(report.breakpoints[0] - 0.4) <= 1e-4,
                      "breakpoint " + format_double(report.breakpoints[0]) +
                          " not within 1e-4 of 0.4");
        c.require(report.monotone, "segment words not monotone");
    }
    return c.ok;
}

// --------------------------------------------------------------- criterion 11

bool criterion_property_suites(Check& c) {
    ExpandingMap map = doubling();

    // calibration: R >= 0 everywhere, best branch defect 0
    for (const char* src : {"x", "cos(2*pi*x)"}) {
        Potential pot = Potential::from_A(Expression::parse(src));
        auto A = [&pot](double x) { return pot.A(x); };
        ErgodicOptimum opt = max_ergodic_average(map, A, 6);
        SubactionParams sp;
        sp.grid_n = 4097;
        SubactionResult res = calibrated_subaction(map, A, opt.m, 1.0, sp);
        c.require(res.calibration_residual <= 1e-9,
                  std::string("branch-min defect for A=") + src);
        auto V = [&res](double x) { return res.V(x); };
        for (int j = 0; j <= 512; ++j) {
            double x = j / 512.0;
            c.require(error_R(map, A, V, opt.m, x) >= -1e-9,
                      std::string("R < 0 for A=") + src);
        }

        // Hoelder/Lipschitz budget: |V(x)-V(y)| <= lambda/(1-lambda) Lip(A) |x-y| + 5%
        double lipA = 0.0;
        for (int j = 0; j < 512; ++j) {
            double x = j / 512.0, y = (j + 1) / 512.0;
            lipA = std::max(lipA, std::abs(pot.A(x) - pot.A(y)) * 512.0);
        }
        double budget = (0.5 / (1.0 - 0.5)) * lipA * 1.05;
        for (int j = 0; j < 512; ++j) {
            double x = j / 512.0, y = (j + 1) / 512.0;
            c.require(std::abs(res.V(x) - res.V(y)) * 512.0 <= budget + 1e-9,
                      std::string("Lipschitz budget exceeded for A=") + src);
        }
    }

    // m is 1-Lipschitz in the potential (sup metric)
    {
        auto A1 = [](double x) { return x; };
        auto A2 = [](double x) { return x + 0.05 * std::cos(2.0 * M_PI * x); };
        double m1 = max_ergodic_average(map, A1, 6).m;
        double m2 = max_ergodic_average(map, A2, 6).m;
        c.require(std::abs(m1 - m2) <= 0.05 + 1e-12, "m not Lipschitz in A");
        auto A3 = [](double x) { return x + 0.25; };
        double m3 = max_ergodic_average(map, A3, 6).m;
        c.require(std::abs(m3 - (m1 + 0.25)) <= 1e-12, "m(A + c) != m(A) + c");
    }

    // Kolmogorov consistency of word_measure
    {
        Potential pot = Potential::from_g(Expression::parse("exp(cos(2*pi*x))"));
        EigenData eig = leading_eigen(map, pot, 1.0, 96);
        for (const char* ws : {"0", "10", "011"}) {
            Word w = Word::parse(ws, 2);
            double whole = word_measure(map, pot, eig, w);
            double split = word_measure(map, pot, eig, w.appended(0)) +
                           word_measure(map, pot, eig, w.appended(1));
            c.require(std::abs(whole - split) <= 1e-9,
                      std::string("word_measure inconsistent at ") + ws);
        }
        double total = word_measure(map, pot, eig, Word::parse("0", 2)) +
                       word_measure(map, pot, eig, Word::parse("1", 2));
        c.require(std::abs(total - 1.0) <= 1e-9, "word_measure does not sum to 1");
    }

    // subaction uniqueness up to constants under a unique maximizing orbit
    {
        auto A = [](double x) { return x; };
        SubactionParams sp;
        sp.grid_n = 4097;
        SubactionResult va = calibrated_subaction(map, A, 1.0, 1.0, sp);
        SubactionResult vb = calibrated_subaction(map, A, 1.0, 0.25, sp);
        double lo = 1e300, hi = -1e300;
        for (int j = 0; j < va.V.size(); ++j) {
            double d = va.V.values()[j] - vb.V.values()[j];
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        c.require(hi - lo <= 1e-8, "anchored subactions differ by a non-constant");
    }

    // Aubry membership on {0, 1} for A(x) = x
    {
        auto A = [](double x) { return x; };
        c.require(aubry_test(map, A, 1.0, 1.0), "1 not in the Aubry set");
        c.require(!aubry_test(map, A, 1.0, 0.0), "0 wrongly in the Aubry set");
    }
    return c.ok;
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // 0 = no per-criterion budget
    bool (*fn)(Check&);
};

} // namespace

int main() {
    const Criterion criteria[] = {
        {1, "constant-potential exactness", 1.0, criterion_constant},
        {2, "doubling A(x)=x end-to-end", 30.0, criterion_doubling_end_to_end},
        {3, "reversed doubling quadratic subaction", 10.0, criterion_example_61},
        {4, "spectral projection decay", 20.0, criterion_spectral_projection},
        {5, "involution identity", 20.0, criterion_involution_identity},
        {6, "duality of values", 0.0, criterion_value_duality},
        {7, "coboundary round trip", 0.0, criterion_roundtrip},
        {8, "zero-temperature trend", 0.0, criterion_zero_temperature_trend},
        {9, "uniform-in-beta regularity", 0.0, criterion_uniform_regularity},
        {10, "pipeline guards", 0.0, criterion_pipeline_guards},
        {11, "property suites", 300.0, criterion_property_suites},
    };

    int failures = 0;
    for (const Criterion& cr : criteria) {
        Check check;
        auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = cr.fn(check);
        } catch (const std::exception& e) {
            check.ok = false;
            check.detail = std::string("exception: ") + e.what();
        }
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (cr.budget_seconds > 0.0 && seconds > cr.budget_seconds) {
            ok = false;
            check.ok = false;
            check.detail = "runtime " + format_double(seconds) + " s over budget " +
                           format_double(cr.budget_seconds) + " s";
        }
        ok = ok && check.ok;
        if (!ok) ++failures;
        std::printf("ACCEPTANCE %2d %-38s %s  (%.2f s)%s%s\n", cr.id, cr.name,
                    ok ? "PASS" : "FAIL", seconds, check.detail.empty() ? "" : "  ",
                    check.detail.c_str());
        std::fflush(stdout);
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
