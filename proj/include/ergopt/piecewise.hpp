#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ergopt/kernel.hpp"
#include "ergopt/subaction.hpp"

namespace ergopt {

// One candidate word with its anchored kernel section
//   S_w(x) = G(w, x) - I*(w),
// where G(w, x) is the zero-temperature involution kernel anchored so that
// G(w, x_bar) = 0 for every w.  The subaction is the upper envelope of the
// sections over the finite candidate set.
struct KernelSection {
    EventuallyPeriodicPoint word;
    double i_star = 0.0;
    std::function<double(double)> kernel;

    double value(double x) const { return kernel(x) - i_star; }
};

struct CandidateSet {
    std::vector<EventuallyPeriodicPoint> words;  // lexicographically increasing
    std::vector<double> i_star;
    int n_bar = 0;
    MaximizingSet M;
};

// Pre-orbit of M up to depth n_bar, canonicalized and deduplicated, with I*
// attached.  Distinct representations of the same sequence collapse (for
// instance every all-cycle prepend folds back into M).
CandidateSet candidate_words(const DualSubactionTable& table, int n_bar);

// Words at exact pre-orbit depth n_bar + 1 that are not already candidates;
// their I* values drive the closure diagnostic.
std::vector<EventuallyPeriodicPoint> shell_words(const CandidateSet& cand);

// Sections for the candidate set, using the anchored series kernel.
std::vector<KernelSection> build_sections(const ExpandingMap& map, const Potential& pot,
                                          double x_bar, const CandidateSet& cand,
                                          int series_depth);

struct SelectionFunction {
    std::vector<double> xs;
    std::vector<double> value;            // optimal section value per x
    std::vector<std::vector<int>> argmax; // section indices within tie_tol, lex order
    std::vector<int> u_minus;             // lex-least argmax
    std::vector<int> u_plus;              // lex-greatest argmax
    double tie_tol = 0.0;
};

SelectionFunction optimal_selection(const std::vector<KernelSection>& sections,
                                    const std::vector<double>& xs, double tie_tol);

struct SegmentCertificate {
    double lo = 0.0;
    double hi = 0.0;
    int section = 0;
    bool constant = false;  // the probes all selected this section
};

struct BreakpointReport {
    std::vector<double> breakpoints;  // interior change points, increasing
    std::vector<EventuallyPeriodicPoint> segment_words;
    std::vector<int> segment_sections;
    std::vector<SegmentCertificate> certificates;
    double refine_tol = 0.0;
    double tie_tol = 0.0;
    bool certified = false;      // all segment probes consistent
    bool count_consistent = true;  // #breakpoints <= #candidates - 1
    bool monotone = true;        // segment words weakly lex-decreasing
};

BreakpointReport scan_breakpoints(const std::vector<KernelSection>& sections, int grid_n,
                                  double refine_tol, double tie_tol, int probe_count = 16,
                                  unsigned rng_seed = 7u);

struct TwistReport {
    bool ok = false;
    bool degenerate = false;  // margins vanish within noise instead of being signed
    double min_margin = 0.0;
    long samples = 0;
    long violations = 0;
};

// Strict rectangle inequality G(a,b) + G(a',b') < G(a,b') + G(a',b) on
// sampled quadruples with a < a' (lex) and b < b'.
TwistReport twist_check(const std::vector<KernelSection>& sections, int x_samples);

struct MonotonicityReport {
    bool ok = true;
    int first_violation = -1;  // grid index, -1 when monotone
};

MonotonicityReport monotonicity_check(const std::vector<KernelSection>& sections,
                                      const SelectionFunction& sel);

struct UniquenessStats {
    double singleton_fraction = 0.0;
    double max_tie_cluster_width = 0.0;
    bool ties_near_breakpoints = true;  // every tie within refine_tol + spacing of a breakpoint
};

UniquenessStats generic_uniqueness_probe(const SelectionFunction& sel,
                                         const BreakpointReport& report, double refine_tol);

struct ClosureDiagnostic {
    double k_max = 0.0;          // max over x of max_w G - min_w G (candidates)
    double min_shell_i_star = 0.0;
    double slack = 0.0;          // min_shell_i_star - k_max
    bool certified = false;
};

struct CrossValidation {
    double sup_dual_vs_lax = 0.0;
    std::vector<ScheduleValue> beta_sup;  // sup |(1/beta) log phi_beta - V_lax| per beta
    bool beta_trend_decreasing = true;
};

// Kendall rank correlation with an explicit tie tolerance; pairs closer than
// tie_tol in either coordinate count as ties.
double kendall_tau(const std::vector<double>& a, const std::vector<double>& b,
                   double tie_tol = 0.0);

struct PiecewiseParams {
    int n_bar = 3;
    double tie_tol = 1e-7;
    int scan_grid = 1025;
    double refine_tol = 1e-4;
    int probe_count = 16;
    unsigned rng_seed = 7u;
    int twist_samples = 24;        // x-sample count for twist quadruples
    int cross_grid = 257;          // comparison grid for cross-validation
    int max_period = 8;
    double r_star_threshold = 1e-6;
    std::vector<double> beta_schedule = {8.0, 16.0, 32.0, 64.0};
    int eigen_grid = 128;
    DualParams dual;
    SubactionParams lax;
};

struct PiecewiseReport {
    ErgodicOptimum optimum;
    double m_star = 0.0;
    RStarReport r_star;
    bool r_star_warning = false;
    CandidateSet candidates;
    SelectionFunction selection;
    BreakpointReport breakpoints;
    TwistReport twist;
    MonotonicityReport monotonicity;
    ClosureDiagnostic closure;
    CrossValidation cross;
    SubactionResult lax;
    std::vector<double> v_dual;  // anchored to 0 at x_bar, on selection.xs
    std::vector<double> v_lax;   // sampled on selection.xs
};

// The full pipeline: maximizing orbit, dual table, candidates, sections,
// selection, breakpoints, certificates, and cross-validation.  Refuses
// orientation-reversing maps (the twist framework needs preserving ones).
PiecewiseReport run_piecewise(const ExpandingMap& map, const Potential& pot, double x_bar,
                              PiecewiseParams params = {});

} // namespace ergopt
