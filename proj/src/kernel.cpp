#include "ergopt/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

#include "ergopt/errors.hpp"

namespace ergopt {

namespace {

// Geometric tail estimate: fit the constant from the last few observed
// defects against the declared contraction factor, take the worst fit and a
// safety factor.  defects holds (depth, |value change at that depth|).
double geometric_tail(const std::deque<std::pair<int, double>>& defects, int depth,
                      double lambda) {
    double bound = 0.0;
    for (const auto& [k, d] : defects) {
        bound = std::max(bound, d * std::pow(lambda, depth + 1 - k));
    }
    return 2.0 * bound / (1.0 - lambda);
}

void push_defect(std::deque<std::pair<int, double>>& defects, int depth, double d) {
    defects.emplace_back(depth, d);
    if (defects.size() > 3) defects.pop_front();
}

double lipschitz_estimate(const Potential& pot) {
    const int n = 512;
    double lip = 0.0;
    double prev = pot.A(0.0);
    for (int i = 1; i <= n; ++i) {
        double x = static_cast<double>(i) / n;
        double cur = pot.A(x);
        lip = std::max(lip, std::abs(cur - prev) * n);
        prev = cur;
    }
    return 2.0 * lip;
}

} // namespace

KernelContext::KernelContext(const ExpandingMap& map, const Potential& pot, double x_bar,
                             EventuallyPeriodicPoint omega_bar, KernelSettings settings)
    : map_(map),
      pot_(pot),
      x_bar_(x_bar),
      omega_bar_(std::move(omega_bar)),
      settings_(settings) {
    if (x_bar_ < 0.0 || x_bar_ > 1.0) throw ConfigError("anchor x_bar must lie in [0, 1]");
    if (omega_bar_.alphabet() != map.degree())
        throw ConfigError("anchor omega_bar uses a different alphabet than the map");
}

const EigenData& KernelContext::eigen(double beta) const {
    auto it = eigen_cache_.find(beta);
    if (it != eigen_cache_.end()) return it->second;
    EigenData eig = leading_eigen(map_, pot_, beta, settings_.grid_n, settings_.eigen_tol,
                                  settings_.eigen_max_iter);
    return eigen_cache_.emplace(beta, std::move(eig)).first->second;
}

HKernel::HKernel(const KernelContext& ctx, EventuallyPeriodicPoint omega, double beta,
                 int max_depth)
    : ctx_(ctx), omega_(std::move(omega)), beta_(beta), max_depth_(max_depth) {
    if (max_depth_ < 1) throw ConfigError("kernel depth must be positive");
    const EigenData& eig = ctx_.eigen(beta_);
    log_alpha_ = eig.log_alpha;
    syms_.reserve(static_cast<std::size_t>(max_depth_));
    for (int j = 0; j < max_depth_; ++j) syms_.push_back(omega_.symbol_at(static_cast<std::size_t>(j)));
    masses_ = std::make_unique<MassChain>(ctx_.map(), ctx_.potential(), eig, omega_, max_depth_);
}

double HKernel::log_h(double x, int depth) const {
    if (depth < 1 || depth > max_depth_) throw ConfigError("kernel evaluation depth out of range");
    const ExpandingMap& map = ctx_.map();
    const Potential& pot = ctx_.potential();
    double z = x;
    double sum = 0.0;
    for (int j = 0; j < depth; ++j) {
        z = map.branch(syms_[static_cast<std::size_t>(j)], z);
        sum += beta_ * pot.A(z);
    }
    return sum - depth * log_alpha_ - masses_->log_mass(depth);
}

ConvergedValue HKernel::limit_log_h(double x, double tol) const {
    double lambda = ctx_.map().contraction();
    std::deque<std::pair<int, double>> defects;
    double prev = log_h(x, 1);
    double cur = prev;
    int depth = 1;
    for (int k = 2; k <= max_depth_; ++k) {
        cur = log_h(x, k);
        push_defect(defects, k, std::abs(cur - prev));
        prev = cur;
        depth = k;
        if (k >= 4 && geometric_tail(defects, k, lambda) <= tol) break;
    }
    return {cur, depth, geometric_tail(defects, depth, lambda)};
}

ConvergedValue h_limit(const KernelContext& ctx, const EventuallyPeriodicPoint& omega, double x,
                       double beta, double tol) {
    HKernel hk(ctx, omega, beta, ctx.settings().depth_cap);
    return hk.limit_log_h(x, tol);
}

double log_scaling_at_depth(const KernelContext& ctx, const EventuallyPeriodicPoint& omega,
                            double beta, int depth) {
    if (depth < 1) throw ConfigError("scaling depth must be positive");
    const EigenData& eig = ctx.eigen(beta);
    MassChain mw(ctx.map(), ctx.potential(), eig, omega, depth);
    MassChain ms(ctx.map(), ctx.potential(), eig, omega.shifted(), depth - 1);
    return mw.log_mass(depth) - ms.log_mass(depth - 1);
}

ConvergedValue scaling_function(const KernelContext& ctx, const EventuallyPeriodicPoint& omega,
                                double beta, double tol) {
    const EigenData& eig = ctx.eigen(beta);
    int cap = ctx.settings().depth_cap;
    MassChain mw(ctx.map(), ctx.potential(), eig, omega, cap);
    MassChain ms(ctx.map(), ctx.potential(), eig, omega.shifted(), cap - 1);
    double lambda = ctx.map().contraction();

    std::deque<std::pair<int, double>> defects;
    double prev = mw.log_mass(1) - ms.log_mass(0);
    double cur = prev;
    int depth = 1;
    for (int k = 2; k <= cap; ++k) {
        cur = mw.log_mass(k) - ms.log_mass(k - 1);
        push_defect(defects, k, std::abs(cur - prev));
        prev = cur;
        depth = k;
        if (k >= 4 && geometric_tail(defects, k, lambda) <= tol) break;
    }
    double s = std::exp(cur);
    double log_tail = geometric_tail(defects, depth, lambda);
    return {s, depth, s * std::expm1(log_tail)};
}

double dual_potential(const KernelContext& ctx, const EventuallyPeriodicPoint& omega, double beta,
                      DualMode mode, int depth) {
    if (mode == DualMode::scaling) {
        const EigenData& eig = ctx.eigen(beta);
        return eig.log_alpha + log_scaling_at_depth(ctx, omega, beta, depth);
    }
    double at_anchor = series_dual(ctx.map(), ctx.potential(), beta, omega, ctx.x_bar(), depth);
    double lambda = ctx.map().contraction();
    double audit_tol = std::max(
        1e-9, 4.0 * beta * lipschitz_estimate(ctx.potential()) * std::pow(lambda, depth) /
                  (1.0 - lambda));
    for (double probe : {0.25, 0.75}) {
        double other = series_dual(ctx.map(), ctx.potential(), beta, omega, probe, depth);
        if (std::abs(other - at_anchor) > audit_tol)
            throw ConvergenceError("dual series retains base-point dependence at this depth",
                                   std::abs(other - at_anchor));
    }
    return at_anchor;
}

double involution_residual(const KernelContext& ctx, const EventuallyPeriodicPoint& omega, double x,
                           double beta, int depth) {
    if (depth < 2) throw ConfigError("involution residual needs depth at least 2");
    const EigenData& eig = ctx.eigen(beta);
    const ExpandingMap& map = ctx.map();
    const Potential& pot = ctx.potential();
    EventuallyPeriodicPoint shifted = omega.shifted();

    MassChain mw(map, pot, eig, omega, depth);
    MassChain ms(map, pot, eig, shifted, depth);

    auto log_h_at = [&](const EventuallyPeriodicPoint& pt, const MassChain& masses, double base,
                        int k) {
        double z = base;
        double sum = 0.0;
        for (int j = 0; j < k; ++j) {
            z = map.branch(pt.symbol_at(static_cast<std::size_t>(j)), z);
            sum += beta * pot.A(z);
        }
        return sum - k * eig.log_alpha - masses.log_mass(k);
    };

    double y = map.branch(omega.symbol_at(0), x);
    double log_g_star = eig.log_alpha + mw.log_mass(depth) - ms.log_mass(depth - 1);
    double rhs = beta * pot.A(y) + log_h_at(shifted, ms, y, depth) - log_h_at(omega, mw, x, depth);
    return std::abs(log_g_star - rhs);
}

ConvergedValue H_beta(const KernelContext& ctx, const EventuallyPeriodicPoint& omega, double x,
                      double beta, double tol) {
    HKernel hk(ctx, omega, beta, ctx.settings().depth_cap);
    ConvergedValue cv = hk.limit_log_h(x, tol * beta);
    return {cv.value / beta, cv.depth_used, cv.tail_bound / beta};
}

HInfinityResult H_infinity(const KernelContext& ctx, const EventuallyPeriodicPoint& omega, double x,
                           const std::vector<double>& schedule, double tol) {
    if (schedule.size() < 3) throw ConfigError("beta schedule needs at least 3 entries");
    if (!std::is_sorted(schedule.begin(), schedule.end()) ||
        std::adjacent_find(schedule.begin(), schedule.end()) != schedule.end())
        throw ConfigError("beta schedule must be strictly increasing");

    HInfinityResult out;
    std::vector<double> defects;
    for (double beta : schedule) {
        ConvergedValue cv = H_beta(ctx, omega, x, beta, tol);
        if (!out.per_beta.empty())
            defects.push_back(std::abs(cv.value - out.per_beta.back().value));
        out.per_beta.push_back({beta, cv.value});
    }
    out.value = out.per_beta.back().value;
    out.tail_bound = defects.back();
    for (std::size_t i = 1; i < defects.size(); ++i) {
        if (defects[i] > defects[i - 1] + 1e-12) out.defect_decreasing = false;
    }
    return out;
}

double delta_series(const ExpandingMap& map, const Potential& pot, double beta,
                    const EventuallyPeriodicPoint& nu, double x, double y, int depth) {
    double ux = x;
    double uy = y;
    double sum = 0.0;
    for (int n = 0; n < depth; ++n) {
        int s = nu.symbol_at(static_cast<std::size_t>(n));
        ux = map.branch(s, ux);
        uy = map.branch(s, uy);
        sum += beta * (pot.A(ux) - pot.A(uy));
    }
    return sum;
}

double series_dual(const ExpandingMap& map, const Potential& pot, double beta,
                   const EventuallyPeriodicPoint& omega, double x_bar, int depth) {
    double y = map.branch(omega.symbol_at(0), x_bar);
    return beta * pot.A(y) + delta_series(map, pot, beta, omega.shifted(), y, x_bar, depth);
}

double dual_roundtrip_residual(const ExpandingMap& map, const Potential& pot, double x_bar,
                               const EventuallyPeriodicPoint& omega_bar, int depth,
                               int max_period) {
    auto A = [&](double x) { return pot.A(x); };
    std::vector<PeriodicOrbit> orbits = enumerate_periodic_orbits(map, max_period, A);

    // L(A) as a function on sequences, truncated at the shared depth.  The
    // same prepended words recur across rotations of each orbit, so memoize.
    std::unordered_map<EventuallyPeriodicPoint, double> cache;
    auto LA = [&](const EventuallyPeriodicPoint& w) {
        auto it = cache.find(w);
        if (it != cache.end()) return it->second;
        double val = series_dual(map, pot, 1.0, w, x_bar, depth);
        cache.emplace(w, val);
        return val;
    };

    // L*(psi)(x) follows the forward itinerary of x, which for an orbit
    // point is a rotation of the orbit word.
    auto Lstar_at = [&](const Word& itinerary, std::size_t start) {
        std::size_t p = itinerary.size();
        double acc = LA(omega_bar);
        std::vector<int> front;  // (j_n, ..., j_0)
        for (int n = 0; n < depth; ++n) {
            int jn = itinerary[(start + static_cast<std::size_t>(n)) % p];
            front.insert(front.begin(), jn);
            Word wa(front, itinerary.alphabet);
            std::vector<int> without_last(front.begin(), front.end() - 1);
            double term = LA(omega_bar.prepended(wa));
            if (without_last.empty()) {
                term -= LA(omega_bar);
            } else {
                term -= LA(omega_bar.prepended(Word(without_last, itinerary.alphabet)));
            }
            acc += term;
        }
        return acc;
    };

    double worst = 0.0;
    for (const PeriodicOrbit& orb : orbits) {
        double avg = 0.0;
        for (std::size_t j = 0; j < orb.points.size(); ++j)
            avg += Lstar_at(orb.itinerary, j);
        avg /= static_cast<double>(orb.points.size());
        worst = std::max(worst, std::abs(avg - orb.average));
    }
    return worst;
}

} // namespace ergopt
