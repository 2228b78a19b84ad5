#pragma once

#include <map>
#include <memory>
#include <vector>

#include "ergopt/transfer.hpp"

namespace ergopt {

// A limit computed by deepening until a geometric tail estimate drops below
// the requested tolerance.
struct ConvergedValue {
    double value = 0.0;
    int depth_used = 0;
    double tail_bound = 0.0;
};

struct KernelSettings {
    int grid_n = 128;
    double eigen_tol = 1e-12;
    int eigen_max_iter = 5000;
    int depth_cap = 60;      // cap for Cauchy-driven cylinder depths
    int series_depth = 40;   // truncation of the telescoping series formulas
};

// Shared state for kernel computations: the map, the weight, the additive
// anchors (x_bar, omega_bar), and a per-beta eigendata cache.  Populate the
// cache (by calling eigen) before any parallel section; the cache itself is
// not guarded.
class KernelContext {
public:
    KernelContext(const ExpandingMap& map, const Potential& pot, double x_bar,
                  EventuallyPeriodicPoint omega_bar, KernelSettings settings = {});

    const ExpandingMap& map() const { return map_; }
    const Potential& potential() const { return pot_; }
    double x_bar() const { return x_bar_; }
    const EventuallyPeriodicPoint& omega_bar() const { return omega_bar_; }
    const KernelSettings& settings() const { return settings_; }

    const EigenData& eigen(double beta) const;

private:
    const ExpandingMap& map_;
    const Potential& pot_;
    double x_bar_;
    EventuallyPeriodicPoint omega_bar_;
    KernelSettings settings_;
    mutable std::map<double, EigenData> eigen_cache_;
};

// Evaluator of log h_beta(omega_k, x) for one sequence at one inverse
// temperature.  Cylinder masses along omega are computed once at
// construction; each evaluation then costs O(depth) potential evaluations.
class HKernel {
public:
    HKernel(const KernelContext& ctx, EventuallyPeriodicPoint omega, double beta, int max_depth);

    int max_depth() const { return max_depth_; }
    double beta() const { return beta_; }

    double log_h(double x, int depth) const;
    double H(double x, int depth) const { return log_h(x, depth) / beta_; }

    // Deepen until the geometric tail bound (fitted from observed defects
    // against the declared contraction factor) drops below tol.
    ConvergedValue limit_log_h(double x, double tol) const;

private:
    const KernelContext& ctx_;
    EventuallyPeriodicPoint omega_;
    double beta_;
    int max_depth_;
    std::vector<int> syms_;
    std::unique_ptr<MassChain> masses_;
    double log_alpha_;
};

// W_1(omega, x) = log h(omega, x) at beta = 1: the involution kernel of log g.
ConvergedValue h_limit(const KernelContext& ctx, const EventuallyPeriodicPoint& omega, double x,
                       double beta, double tol);

// Scaling function s(omega) = lim_k mu(I_{omega_k}) / mu(I_{sigma(omega_k)}).
ConvergedValue scaling_function(const KernelContext& ctx, const EventuallyPeriodicPoint& omega,
                                double beta, double tol);
double log_scaling_at_depth(const KernelContext& ctx, const EventuallyPeriodicPoint& omega,
                            double beta, int depth);

enum class DualMode { scaling, series };

// Dual potential A*(omega) for beta * A.
//  - scaling: log alpha_beta + log s_beta(omega) at the given depth.
//  - series:  the telescoped backward-orbit series anchored at x_bar;
//             independence from the base point is audited internally.
// The two modes agree up to a coboundary, so they share Birkhoff averages
// over periodic words but not pointwise values.
double dual_potential(const KernelContext& ctx, const EventuallyPeriodicPoint& omega, double beta,
                      DualMode mode, int depth);

// Residual of the involution identity
//   log g*(omega) = beta A(psi_{omega_0} x) + log h(sigma omega, psi_{omega_0} x) - log h(omega, x)
// with every piece truncated at the same depth.
double involution_residual(const KernelContext& ctx, const EventuallyPeriodicPoint& omega, double x,
                           double beta, int depth);

ConvergedValue H_beta(const KernelContext& ctx, const EventuallyPeriodicPoint& omega, double x,
                      double beta, double tol);

struct ScheduleValue {
    double beta;
    double value;
};
struct HInfinityResult {
    std::vector<ScheduleValue> per_beta;
    double value = 0.0;       // last schedule entry
    double tail_bound = 0.0;  // last observed defect between schedule entries
    bool defect_decreasing = true;
};

// Zero-temperature kernel H_infinity(omega, x) = lim (1/beta) log h_beta
// along an increasing beta schedule (at least 3 entries).
HInfinityResult H_infinity(const KernelContext& ctx, const EventuallyPeriodicPoint& omega, double x,
                           const std::vector<double>& schedule, double tol);

// Backward-orbit difference series
//   Delta_A(x, y, nu) = sum_n [A(tau_{n,nu} x) - A(tau_{n,nu} y)],
// where tau_{n,nu} applies psi_{nu_0}, ..., psi_{nu_n} in that order.
double delta_series(const ExpandingMap& map, const Potential& pot, double beta,
                    const EventuallyPeriodicPoint& nu, double x, double y, int depth);

// Series-route dual potential, exposed without a context for reuse by the
// shift-side pipeline.  Returns beta A(psi_{omega_0} x_bar) + Delta(...).
double series_dual(const ExpandingMap& map, const Potential& pot, double beta,
                   const EventuallyPeriodicPoint& omega, double x_bar, int depth);

// Round trip through both duality maps: the max over enumerated periodic
// orbits of |Birkhoff average of L*(L(A)) - Birkhoff average of A|.  Zero
// (at tested resolution) exactly when the round trip changes A by a
// coboundary plus constant.
double dual_roundtrip_residual(const ExpandingMap& map, const Potential& pot, double x_bar,
                               const EventuallyPeriodicPoint& omega_bar, int depth, int max_period);

} // namespace ergopt
