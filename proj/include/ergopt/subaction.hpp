#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ergopt/dynamics.hpp"
#include "ergopt/transfer.hpp"

namespace ergopt {

struct ErgodicOptimum {
    double m = 0.0;
    PeriodicOrbit maximizer;
    std::vector<PeriodicOrbit> orbits;  // all enumerated orbits, best first
};

// m(A) over periodic orbits up to max_period.
ErgodicOptimum max_ergodic_average(const ExpandingMap& map, const std::function<double(double)>& A,
                                   int max_period);

// Piecewise linear function on a uniform grid over [0, 1].  Subactions are
// Lipschitz but generally kinked, so a dense linear interpolant is the right
// container (a global polynomial would ring at the kinks).
class PiecewiseLinearFn {
public:
    PiecewiseLinearFn() : PiecewiseLinearFn(2) {}
    explicit PiecewiseLinearFn(int n);

    int size() const { return static_cast<int>(values_.size()); }
    double node(int j) const { return static_cast<double>(j) / (size() - 1); }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double operator()(double x) const;

private:
    std::vector<double> values_;
};

struct SubactionParams {
    int grid_n = 8193;
    double tol = 1e-12;
    int max_iter = 5000;
};

struct SubactionResult {
    PiecewiseLinearFn V;
    double m = 0.0;
    int iterations = 0;
    double delta = 0.0;                 // last sup-change of the iteration
    double calibration_residual = 0.0;  // sup over nodes of the fixed-point defect
};

// Calibrated subaction by Lax-Oleinik value iteration
//   V(x) = max_i [V(psi_i x) + A(psi_i x) - m],
// anchored so V(x_bar) = 0.  If the supplied m is off, the iteration drifts
// by a constant per step; that is detected and reported instead of looping.
SubactionResult calibrated_subaction(const ExpandingMap& map, const std::function<double(double)>& A,
                                     double m, double x_bar, SubactionParams params = {});

// R(x) = V(f x) - V(x) - A(x) + m, nonnegative for a calibrated V.
double error_R(const ExpandingMap& map, const std::function<double(double)>& A,
               const std::function<double(double)>& V, double m, double x);

struct DeviationValue {
    double value = 0.0;
    bool finite = true;
    std::vector<double> terms;
};

// Deviation function I(x) = sum of R along the forward orbit, truncated at
// n_terms.  finite is cleared when the trailing terms show no decay, in which
// case the true series diverges and value only reports the truncated sum.
DeviationValue deviation_I(const ExpandingMap& map, const std::function<double(double)>& A,
                           const std::function<double(double)>& V, double m, double x,
                           int n_terms = 60);

struct ChainSearchParams {
    double eps = 1e-3;        // target ball radius around x
    int max_n = 20;           // chain length cap
    int k_min = 8;            // minimum length (Peierls variant)
    long node_budget = 4000000;
};

struct ManeValue {
    double value = 0.0;
    bool attained = false;  // false when no admissible chain exists
    Word chain;             // maximizing chain, first symbol applied first
    long nodes_visited = 0;
};

// Mane potential S(x, y): supremum over backward chains z = psi_gamma(y)
// with 1 <= |gamma| <= max_n and |z - x| < eps of the m-adjusted action of
// the chain.  Branch and bound over the preimage tree.
ManeValue mane_potential(const ExpandingMap& map, const std::function<double(double)>& A, double m,
                         double x, double y, ChainSearchParams params = {});

// Peierls barrier: same search restricted to chains of length >= k_min.
ManeValue peierls_barrier(const ExpandingMap& map, const std::function<double(double)>& A, double m,
                          double x, double y, ChainSearchParams params = {});

// Aubry membership test: S(x, x) >= -tol.
bool aubry_test(const ExpandingMap& map, const std::function<double(double)>& A, double m, double x,
                ChainSearchParams params = {}, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Shift-side (dual) objects.

// The maximizing set on the shift: all rotations of the reversed itinerary
// of the interval maximizing orbit.
struct MaximizingSet {
    std::vector<EventuallyPeriodicPoint> points;
    Word cycle;                      // reversed itinerary, one fixed rotation
    EventuallyPeriodicPoint anchor;  // lexicographically least point

    static MaximizingSet from_orbit(const PeriodicOrbit& orbit);
    bool contains(const EventuallyPeriodicPoint& w) const;
};

struct DualParams {
    int cylinder_depth = 12;
    int series_depth = 40;
    double tol = 1e-12;
    int max_iter = 5000;
    int max_period = 8;  // period cap for the dual value m*
};

// Table of the dual calibrated subaction V* on depth-k cylinders.  Each
// cylinder is represented by its word extended with the cycle of M, and the
// table is anchored so V* vanishes on the cylinder of M's anchor.
class DualSubactionTable {
public:
    DualSubactionTable(const ExpandingMap& map, const Potential& pot, double x_bar,
                       MaximizingSet M, double m_star, DualParams params = {});

    int depth() const { return depth_; }
    int alphabet() const { return alphabet_; }
    double m_star() const { return m_star_; }
    const MaximizingSet& maximizing_set() const { return M_; }
    const DualParams& params() const { return params_; }
    double calibration_residual() const { return residual_; }
    double approx_error() const { return approx_error_; }
    int iterations() const { return iterations_; }

    long index_of(const Word& w) const;
    Word word_of(long idx) const;
    EventuallyPeriodicPoint representative(long idx) const;

    double value(const EventuallyPeriodicPoint& w) const;
    double a_star(const EventuallyPeriodicPoint& w) const;  // series dual at table depth
    const std::vector<double>& table() const { return values_; }

private:
    const ExpandingMap& map_;
    const Potential& pot_;
    double x_bar_;
    MaximizingSet M_;
    double m_star_;
    DualParams params_;
    int depth_;
    int alphabet_;
    std::vector<double> values_;
    double residual_ = 0.0;
    double approx_error_ = 0.0;
    int iterations_ = 0;
};

// Dual value m* = m(A*): best Birkhoff average of the series dual over
// periodic sequences up to max_period.
double dual_max_average(const ExpandingMap& map, const Potential& pot, double x_bar, int max_period,
                        int series_depth);

// R*(w) = V*(sigma w) - V*(w) - (A*(w) - m*).
double R_star(const DualSubactionTable& table, const EventuallyPeriodicPoint& w);

// I*(w): sum of R* along the shift orbit until it enters M.  Landing in M is
// decided by exact comparison of eventually periodic points; orbits whose
// eventual cycle is not the cycle of M have infinite deviation.
DeviationValue I_star(const DualSubactionTable& table, const EventuallyPeriodicPoint& w);

struct RStarWitness {
    EventuallyPeriodicPoint point;
    double r_star = 0.0;
};

struct RStarReport {
    bool good = false;
    double min_value = 0.0;
    double threshold = 0.0;
    std::vector<RStarWitness> witnesses;  // all of P = sigma^{-1}(M) \ M, worst first
};

// Checks strict positivity of R* on the preimages of M outside M, the
// finite-candidate gap condition behind the piecewise certificate.  Refuses
// to certify when A* is numerically constant (every direction is then tied).
RStarReport r_star_good(const DualSubactionTable& table, double threshold = 1e-6);

// Same scan against an arbitrary R* evaluator; a_star_spread guards the
// degenerate constant-potential case.
RStarReport r_star_scan(const MaximizingSet& M, int alphabet,
                        const std::function<double(const EventuallyPeriodicPoint&)>& r_star_fn,
                        double a_star_spread, double threshold);

} // namespace ergopt
