#include "ergopt/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_set>

#include "ergopt/errors.hpp"
#include "ergopt/parallel.hpp"

namespace ergopt {

namespace {

// Deterministic uniform double in [0, 1); the distribution classes in
// <random> are implementation-defined, and reports must be reproducible.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<double> uniform_grid(int n) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n - 1);
    return xs;
}

} // namespace

CandidateSet candidate_words(const DualSubactionTable& table, int n_bar) {
    if (n_bar < 0) throw ConfigError("candidate pre-orbit depth must be nonnegative");
    const MaximizingSet& M = table.maximizing_set();
    int d = table.alphabet();

    std::unordered_set<EventuallyPeriodicPoint> seen;
    std::vector<EventuallyPeriodicPoint> frontier = M.points;
    for (const auto& m : M.points) seen.insert(m);
    for (int j = 1; j <= n_bar; ++j) {
        std::vector<EventuallyPeriodicPoint> next;
        for (const auto& w : frontier) {
            for (int s = 0; s < d; ++s) {
                EventuallyPeriodicPoint p = w.prepended(s);
                if (seen.insert(p).second) next.push_back(p);
            }
        }
        frontier = std::move(next);
    }

    CandidateSet out;
    out.n_bar = n_bar;
    out.M = M;
    out.words.assign(seen.begin(), seen.end());
    std::sort(out.words.begin(), out.words.end(),
              [](const EventuallyPeriodicPoint& a, const EventuallyPeriodicPoint& b) {
                  return lex_compare(a, b) < 0;
              });
    out.i_star.reserve(out.words.size());
    for (const auto& w : out.words) {
        DeviationValue dev = I_star(table, w);
        if (!dev.finite)
            throw Error("candidate word " + w.to_string() + " has infinite deviation");
        out.i_star.push_back(dev.value);
    }
    return out;
}

std::vector<EventuallyPeriodicPoint> shell_words(const CandidateSet& cand) {
    int d = cand.M.cycle.alphabet;
    std::unordered_set<EventuallyPeriodicPoint> inside(cand.words.begin(), cand.words.end());
    std::unordered_set<EventuallyPeriodicPoint> shell;

    // Every word of first-entry depth exactly n_bar + 1 arises by prepending
    // one symbol to a depth-n_bar word; prepends that stay inside the
    // candidate set have shallower entry and are skipped.
    for (const auto& w : cand.words) {
        for (int s = 0; s < d; ++s) {
            EventuallyPeriodicPoint p = w.prepended(s);
            if (!inside.count(p)) shell.insert(p);
        }
    }
    std::vector<EventuallyPeriodicPoint> out(shell.begin(), shell.end());
    std::sort(out.begin(), out.end(),
              [](const EventuallyPeriodicPoint& a, const EventuallyPeriodicPoint& b) {
                  return lex_compare(a, b) < 0;
              });
    return out;
}

std::vector<KernelSection> build_sections(const ExpandingMap& map, const Potential& pot,
                                          double x_bar, const CandidateSet& cand,
                                          int series_depth) {
    std::vector<KernelSection> sections;
    sections.reserve(cand.words.size());
    for (std::size_t i = 0; i < cand.words.size(); ++i) {
        KernelSection sec;
        sec.word = cand.words[i];
        sec.i_star = cand.i_star[i];
        EventuallyPeriodicPoint w = cand.words[i];
        sec.kernel = [&map, &pot, w, x_bar, series_depth](double x) {
            return delta_series(map, pot, 1.0, w, x, x_bar, series_depth);
        };
        sections.push_back(std::move(sec));
    }
    return sections;
}

namespace {

struct PointSelection {
    double value;
    std::vector<int> argmax;
};

PointSelection select_at(const std::vector<KernelSection>& sections, double x, double tie_tol) {
    PointSelection out;
    std::vector<double> vals(sections.size());
    out.value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sections.size(); ++i) {
        vals[i] = sections[i].value(x);
        out.value = std::max(out.value, vals[i]);
    }
    for (std::size_t i = 0; i < sections.size(); ++i)
        if (vals[i] >= out.value - tie_tol) out.argmax.push_back(static_cast<int>(i));
    return out;
}

int lex_max_index(const std::vector<KernelSection>& sections, const std::vector<int>& idx) {
    int best = idx.front();
    for (int i : idx)
        if (lex_compare(sections[static_cast<std::size_t>(i)].word,
                        sections[static_cast<std::size_t>(best)].word) > 0)
            best = i;
    return best;
}

int lex_min_index(const std::vector<KernelSection>& sections, const std::vector<int>& idx) {
    int best = idx.front();
    for (int i : idx)
        if (lex_compare(sections[static_cast<std::size_t>(i)].word,
                        sections[static_cast<std::size_t>(best)].word) < 0)
            best = i;
    return best;
}

} // namespace

SelectionFunction optimal_selection(const std::vector<KernelSection>& sections,
                                    const std::vector<double>& xs, double tie_tol) {
    if (sections.empty()) throw ConfigError("selection needs at least one kernel section");
    SelectionFunction sel;
    sel.xs = xs;
    sel.tie_tol = tie_tol;
    sel.value.assign(xs.size(), 0.0);
    sel.argmax.assign(xs.size(), {});
    sel.u_minus.assign(xs.size(), 0);
    sel.u_plus.assign(xs.size(), 0);
    parallel_for(static_cast<long>(xs.size()), [&](long i) {
        std::size_t j = static_cast<std::size_t>(i);
        PointSelection p = select_at(sections, xs[j], tie_tol);
        sel.value[j] = p.value;
        sel.u_minus[j] = lex_min_index(sections, p.argmax);
        sel.u_plus[j] = lex_max_index(sections, p.argmax);
        sel.argmax[j] = std::move(p.argmax);
    });
    return sel;
}

BreakpointReport scan_breakpoints(const std::vector<KernelSection>& sections, int grid_n,
                                  double refine_tol, double tie_tol, int probe_count,
                                  unsigned rng_seed) {
    if (grid_n < 3) throw ConfigError("breakpoint scan grid needs at least 3 points");
    BreakpointReport report;
    report.refine_tol = refine_tol;
    report.tie_tol = tie_tol;

    auto plus_at = [&](double x) {
        PointSelection p = select_at(sections, x, tie_tol);
        return lex_max_index(sections, p.argmax);
    };

    std::vector<double> xs = uniform_grid(grid_n);
    std::vector<int> plus(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) plus[i] = plus_at(xs[i]);

    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (plus[i] == plus[i + 1]) continue;
        double lo = xs[i];
        double hi = xs[i + 1];
        int left = plus[i];
        while (hi - lo > refine_tol) {
            double mid = 0.5 * (lo + hi);
            if (plus_at(mid) == left)
                lo = mid;
            else
                hi = mid;
        }
        report.breakpoints.push_back(0.5 * (lo + hi));
    }

    std::vector<double> bounds;
    bounds.push_back(0.0);
    bounds.insert(bounds.end(), report.breakpoints.begin(), report.breakpoints.end());
    bounds.push_back(1.0);

    report.certified = true;
    for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
        SegmentCertificate cert;
        cert.lo = bounds[s];
        cert.hi = bounds[s + 1];
        // Keep probes clear of the refined-but-inexact segment ends.
        double margin = std::min(refine_tol, 0.25 * (cert.hi - cert.lo));
        double plo = cert.lo + margin;
        double phi = cert.hi - margin;
        cert.section = plus_at(0.5 * (plo + phi));
        cert.constant = true;
        std::mt19937_64 rng(rng_seed + static_cast<unsigned>(s));
        for (int p = 0; p < probe_count; ++p) {
            double x = plo + (phi - plo) * uniform01(rng);
            if (plus_at(x) != cert.section) {
                cert.constant = false;
                break;
            }
        }
        report.certified = report.certified && cert.constant;
        report.segment_sections.push_back(cert.section);
        report.segment_words.push_back(sections[static_cast<std::size_t>(cert.section)].word);
        report.certificates.push_back(cert);
    }

    report.count_consistent = report.breakpoints.size() + 1 <= sections.size();
    for (std::size_t s = 0; s + 1 < report.segment_words.size(); ++s) {
        if (lex_compare(report.segment_words[s + 1], report.segment_words[s]) > 0)
            report.monotone = false;
    }
    return report;
}

TwistReport twist_check(const std::vector<KernelSection>& sections, int x_samples) {
    TwistReport report;
    if (sections.size() < 2 || x_samples < 2) {
        report.ok = false;
        report.degenerate = true;
        return report;
    }
    std::vector<double> xs = uniform_grid(x_samples);

    // Cache G on the sample grid; quadruple margins are then table lookups.
    std::vector<std::vector<double>> g(sections.size());
    for (std::size_t i = 0; i < sections.size(); ++i) {
        g[i].reserve(xs.size());
        for (double x : xs) g[i].push_back(sections[i].kernel(x));
    }

    report.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < sections.size(); ++a) {
        for (std::size_t a2 = 0; a2 < sections.size(); ++a2) {
            if (lex_compare(sections[a].word, sections[a2].word) >= 0) continue;
            for (std::size_t b = 0; b + 1 < xs.size(); ++b) {
                for (std::size_t b2 = b + 1; b2 < xs.size(); ++b2) {
                    double margin = g[a][b2] + g[a2][b] - g[a][b] - g[a2][b2];
                    ++report.samples;
                    report.min_margin = std::min(report.min_margin, margin);
                    if (margin <= 1e-12) ++report.violations;
                }
            }
        }
    }
    report.ok = report.violations == 0;
    report.degenerate = !report.ok && report.min_margin > -1e-12;
    return report;
}

MonotonicityReport monotonicity_check(const std::vector<KernelSection>& sections,
                                      const SelectionFunction& sel) {
    MonotonicityReport report;
    for (std::size_t i = 0; i + 1 < sel.xs.size(); ++i) {
        bool plus_ok = lex_compare(sections[static_cast<std::size_t>(sel.u_plus[i + 1])].word,
                                   sections[static_cast<std::size_t>(sel.u_plus[i])].word) <= 0;
        bool minus_ok = lex_compare(sections[static_cast<std::size_t>(sel.u_minus[i + 1])].word,
                                    sections[static_cast<std::size_t>(sel.u_minus[i])].word) <= 0;
        if (!plus_ok || !minus_ok) {
            report.ok = false;
            report.first_violation = static_cast<int>(i);
            return report;
        }
    }
    return report;
}

UniquenessStats generic_uniqueness_probe(const SelectionFunction& sel,
                                         const BreakpointReport& report, double refine_tol) {
    UniquenessStats stats;
    std::size_t n = sel.xs.size();
    if (n == 0) return stats;
    double spacing = n > 1 ? sel.xs[1] - sel.xs[0] : 0.0;

    std::size_t singletons = 0;
    double cluster_start = 0.0;
    bool in_cluster = false;
    for (std::size_t i = 0; i < n; ++i) {
        bool tie = sel.argmax[i].size() > 1;
        if (!tie) {
            ++singletons;
            if (in_cluster) {
                stats.max_tie_cluster_width =
                    std::max(stats.max_tie_cluster_width, sel.xs[i - 1] - cluster_start);
                in_cluster = false;
            }
            continue;
        }
        if (!in_cluster) {
            cluster_start = sel.xs[i];
            in_cluster = true;
        }
        double dist = std::numeric_limits<double>::infinity();
        for (double z : report.breakpoints) dist = std::min(dist, std::abs(sel.xs[i] - z));
        if (dist > refine_tol + spacing) stats.ties_near_breakpoints = false;
    }
    if (in_cluster)
        stats.max_tie_cluster_width =
            std::max(stats.max_tie_cluster_width, sel.xs[n - 1] - cluster_start);
    stats.singleton_fraction = static_cast<double>(singletons) / static_cast<double>(n);
    return stats;
}

double kendall_tau(const std::vector<double>& a, const std::vector<double>& b, double tie_tol) {
    if (a.size() != b.size()) throw ConfigError("rank correlation needs equal-length samples");
    std::size_t n = a.size();
    if (n < 2) return 0.0;
    long concordant = 0;
    long discordant = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double dx = a[j] - a[i];
            double dy = b[j] - b[i];
            if (std::abs(dx) <= tie_tol || std::abs(dy) <= tie_tol) continue;
            if ((dx > 0) == (dy > 0))
                ++concordant;
            else
                ++discordant;
        }
    }
    double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return static_cast<double>(concordant - discordant) / pairs;
}

PiecewiseReport run_piecewise(const ExpandingMap& map, const Potential& pot, double x_bar,
                              PiecewiseParams params) {
    if (map.orientation() == Orientation::reversing)
        throw RefusalError(
            "orientation-reversing map: the twist framework needs orientation-preserving "
            "branches, so the piecewise pipeline does not apply");

    PiecewiseReport report;
    auto A = [&pot](double x) { return pot.A(x); };
    report.optimum = max_ergodic_average(map, A, params.max_period);
    MaximizingSet M = MaximizingSet::from_orbit(report.optimum.maximizer);
    report.m_star =
        dual_max_average(map, pot, x_bar, params.max_period, params.dual.series_depth);

    DualSubactionTable table(map, pot, x_bar, M, report.m_star, params.dual);
    report.r_star = r_star_good(table, params.r_star_threshold);
    report.r_star_warning = !report.r_star.good;

    report.candidates = candidate_words(table, params.n_bar);
    std::vector<KernelSection> sections =
        build_sections(map, pot, x_bar, report.candidates, params.dual.series_depth);

    std::vector<double> xs = uniform_grid(params.scan_grid);
    report.selection = optimal_selection(sections, xs, params.tie_tol);
    report.breakpoints = scan_breakpoints(sections, params.scan_grid, params.refine_tol,
                                          params.tie_tol, params.probe_count, params.rng_seed);
    report.twist = twist_check(sections, params.twist_samples);
    report.monotonicity = monotonicity_check(sections, report.selection);

    // Closure diagnostic: deeper pre-orbit words pay at least the shell's
    // minimal deviation, which must exceed the kernel spread K(x).
    std::vector<EventuallyPeriodicPoint> shell = shell_words(report.candidates);
    report.closure.min_shell_i_star = std::numeric_limits<double>::infinity();
    for (const auto& w : shell) {
        DeviationValue dev = I_star(table, w);
        if (dev.finite)
            report.closure.min_shell_i_star = std::min(report.closure.min_shell_i_star, dev.value);
    }
    std::vector<double> cross_xs = uniform_grid(params.cross_grid);
    for (double x : cross_xs) {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        for (const KernelSection& sec : sections) {
            double gx = sec.kernel(x);
            gmax = std::max(gmax, gx);
            gmin = std::min(gmin, gx);
        }
        report.closure.k_max = std::max(report.closure.k_max, gmax - gmin);
    }
    report.closure.slack = report.closure.min_shell_i_star - report.closure.k_max;
    report.closure.certified = report.closure.slack > 0.0;

    report.lax = calibrated_subaction(map, A, report.optimum.m, x_bar, params.lax);

    double anchor_value = select_at(sections, x_bar, params.tie_tol).value;
    report.v_dual.reserve(xs.size());
    report.v_lax.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        report.v_dual.push_back(report.selection.value[i] - anchor_value);
        report.v_lax.push_back(report.lax.V(xs[i]));
    }
    for (std::size_t i = 0; i < xs.size(); ++i)
        report.cross.sup_dual_vs_lax =
            std::max(report.cross.sup_dual_vs_lax, std::abs(report.v_dual[i] - report.v_lax[i]));

    // The trend comparison allows a rounding-level tie: when the scaled
    // eigenfunction already coincides with V at every beta (A(x) = x does
    // this), the sups are all noise and their ordering carries no signal.
    double prev_sup = std::numeric_limits<double>::infinity();
    for (double beta : params.beta_schedule) {
        EigenData eig = leading_eigen(map, pot, beta, params.eigen_grid);
        GridFunction scaled = log_eigenfunction_scaled(eig, x_bar);
        double sup = 0.0;
        for (double x : cross_xs)
            sup = std::max(sup, std::abs(scaled(x) - report.lax.V(x)));
        if (sup > prev_sup + 1e-9) report.cross.beta_trend_decreasing = false;
        report.cross.beta_sup.push_back({beta, sup});
        prev_sup = sup;
    }
    return report;
}

} // namespace ergopt
