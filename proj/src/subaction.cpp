#include "ergopt/subaction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ergopt/errors.hpp"
#include "ergopt/kernel.hpp"
#include "ergopt/parallel.hpp"

namespace ergopt {

ErgodicOptimum max_ergodic_average(const ExpandingMap& map, const std::function<double(double)>& A,
                                   int max_period) {
    ErgodicOptimum out;
    out.orbits = enumerate_periodic_orbits(map, max_period, A);
    out.maximizer = out.orbits.front();
    out.m = out.maximizer.average;
    return out;
}

PiecewiseLinearFn::PiecewiseLinearFn(int n) {
    if (n < 2) throw ConfigError("piecewise linear grid needs at least 2 nodes");
    values_.assign(static_cast<std::size_t>(n), 0.0);
}

double PiecewiseLinearFn::operator()(double x) const {
    int n = size();
    double t = std::clamp(x, 0.0, 1.0) * (n - 1);
    int j = std::min(static_cast<int>(t), n - 2);
    double f = t - j;
    return values_[static_cast<std::size_t>(j)] * (1.0 - f) +
           values_[static_cast<std::size_t>(j) + 1] * f;
}

namespace {

// Shared stopping logic for the value iterations.  Once the shape has
// converged the increment is a constant vector: a visible constant means the
// supplied maximal average is wrong and iterating further would never settle,
// while a tiny one is the grid's own discretization of that average and the
// normalized iterate has already converged.
bool increments_settled(const std::vector<double>& diff, int iter, double tol, const char* what) {
    if (iter < 20) return false;
    auto [lo, hi] = std::minmax_element(diff.begin(), diff.end());
    double spread = *hi - *lo;
    if (spread >= std::max(tol, 1e-10)) return false;
    double mean = 0.0;
    for (double d : diff) mean += d;
    mean /= static_cast<double>(diff.size());
    if (std::abs(mean) > 1e-8)
        throw ConvergenceError(std::string(what) +
                                   " drifts by a constant per step; the supplied value "
                                   "of the maximal average looks off by about that amount",
                               mean);
    return spread < tol;
}

} // namespace

SubactionResult calibrated_subaction(const ExpandingMap& map, const std::function<double(double)>& A,
                                     double m, double x_bar, SubactionParams params) {
    int n = params.grid_n;
    int d = map.degree();
    PiecewiseLinearFn V(n);

    // Branch images and potential values at the nodes do not change across
    // iterations, so evaluate the expressions once.
    std::vector<double> y(static_cast<std::size_t>(n) * d);
    std::vector<double> a(static_cast<std::size_t>(n) * d);
    for (int j = 0; j < n; ++j) {
        double x = V.node(j);
        for (int i = 0; i < d; ++i) {
            double yy = map.branch(i, x);
            y[static_cast<std::size_t>(j) * d + i] = yy;
            a[static_cast<std::size_t>(j) * d + i] = A(yy);
        }
    }

    std::vector<double> next(static_cast<std::size_t>(n));
    std::vector<double> diff(static_cast<std::size_t>(n));
    SubactionResult out{std::move(V), m, 0, 0.0, 0.0};
    bool converged = false;
    for (int iter = 1; iter <= params.max_iter; ++iter) {
        for (int j = 0; j < n; ++j) {
            double best = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < d; ++i) {
                std::size_t idx = static_cast<std::size_t>(j) * d + i;
                best = std::max(best, out.V(y[idx]) + a[idx]);
            }
            next[static_cast<std::size_t>(j)] = best - m;
            diff[static_cast<std::size_t>(j)] =
                next[static_cast<std::size_t>(j)] - out.V.values()[static_cast<std::size_t>(j)];
        }
        out.V.values() = next;
        out.iterations = iter;
        out.delta = 0.0;
        for (double dv : diff) out.delta = std::max(out.delta, std::abs(dv));
        if (out.delta < params.tol ||
            increments_settled(diff, iter, params.tol, "Lax-Oleinik iteration")) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw ConvergenceError("Lax-Oleinik iteration did not reach the requested tolerance",
                               out.delta);

    double shift = out.V(x_bar);
    for (double& v : out.V.values()) v -= shift;

    for (int j = 0; j < n; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < d; ++i) {
            std::size_t idx = static_cast<std::size_t>(j) * d + i;
            best = std::max(best, out.V(y[idx]) + a[idx]);
        }
        out.calibration_residual = std::max(
            out.calibration_residual,
            std::abs(best - m - out.V.values()[static_cast<std::size_t>(j)]));
    }
    return out;
}

double error_R(const ExpandingMap& map, const std::function<double(double)>& A,
               const std::function<double(double)>& V, double m, double x) {
    double fx = map.forward_step(x).first;
    return V(fx) - V(x) - A(x) + m;
}

DeviationValue deviation_I(const ExpandingMap& map, const std::function<double(double)>& A,
                           const std::function<double(double)>& V, double m, double x,
                           int n_terms) {
    DeviationValue out;
    double cur = x;
    for (int i = 0; i < n_terms; ++i) {
        out.terms.push_back(error_R(map, A, V, m, cur));
        cur = map.forward_step(cur).first;
    }
    double tail = 0.0;
    for (std::size_t i = out.terms.size() >= 10 ? out.terms.size() - 10 : 0; i < out.terms.size();
         ++i)
        tail = std::max(tail, out.terms[i]);
    // A non-vanishing tail signals I(x) = +inf; the value still reports the
    // truncated sum so callers can see how fast it grows.
    out.finite = tail <= 0.01;
    out.value = 0.0;
    for (double t : out.terms) out.value += t;
    return out;
}

namespace {

struct ChainSearch {
    const ExpandingMap& map;
    const std::function<double(double)>& A;
    double m;
    double x;
    ChainSearchParams params;
    int min_len;

    double gain_cap = 0.0;  // best possible gain of one more step
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> best_chain;
    std::vector<int> chain;
    long nodes = 0;

    void run(double y) {
        const int samples = 4096;
        double sup_a = -std::numeric_limits<double>::infinity();
        for (int i = 0; i <= samples; ++i)
            sup_a = std::max(sup_a, A(static_cast<double>(i) / samples));
        gain_cap = sup_a + 1e-9 - m;
        descend(y, 0.0, 0);
    }

    void descend(double u, double gain, int depth) {
        if (depth >= params.max_n) return;
        for (int s = 0; s < map.degree(); ++s) {
            if (++nodes > params.node_budget)
                throw ConvergenceError("backward chain search exhausted its node budget",
                                       static_cast<double>(nodes));
            double u2 = map.branch(s, u);
            double gain2 = gain + A(u2) - m;
            chain.push_back(s);
            if (depth + 1 >= min_len && std::abs(u2 - x) < params.eps && gain2 > best) {
                best = gain2;
                best_chain = chain;
            }
            double future = gain2 + (gain_cap > 0.0
                                         ? (params.max_n - depth - 1) * gain_cap
                                         : gain_cap);
            if (future > best) descend(u2, gain2, depth + 1);
            chain.pop_back();
        }
    }
};

ManeValue chain_supremum(const ExpandingMap& map, const std::function<double(double)>& A, double m,
                         double x, double y, const ChainSearchParams& params, int min_len) {
    if (params.max_n < min_len) throw ConfigError("chain length cap below the minimum length");
    ChainSearch search{map, A, m, x, params, min_len};
    search.run(y);
    ManeValue out;
    out.nodes_visited = search.nodes;
    if (std::isfinite(search.best)) {
        out.value = search.best;
        out.attained = true;
        out.chain = Word(search.best_chain, map.degree());
    } else {
        out.value = -std::numeric_limits<double>::infinity();
    }
    return out;
}

} // namespace

ManeValue mane_potential(const ExpandingMap& map, const std::function<double(double)>& A, double m,
                         double x, double y, ChainSearchParams params) {
    return chain_supremum(map, A, m, x, y, params, 1);
}

ManeValue peierls_barrier(const ExpandingMap& map, const std::function<double(double)>& A, double m,
                          double x, double y, ChainSearchParams params) {
    return chain_supremum(map, A, m, x, y, params, params.k_min);
}

bool aubry_test(const ExpandingMap& map, const std::function<double(double)>& A, double m, double x,
                ChainSearchParams params, double tol) {
    ManeValue s = mane_potential(map, A, m, x, x, params);
    return s.attained && s.value >= -tol;
}

// ---------------------------------------------------------------------------

MaximizingSet MaximizingSet::from_orbit(const PeriodicOrbit& orbit) {
    MaximizingSet out;
    out.cycle = orbit.itinerary.reversed();
    Word empty_head;
    empty_head.alphabet = out.cycle.alphabet;
    for (std::size_t j = 0; j < out.cycle.size(); ++j)
        out.points.emplace_back(empty_head, out.cycle.rotated_left(j));
    out.anchor = EventuallyPeriodicPoint(empty_head, out.cycle.min_rotation());
    return out;
}

bool MaximizingSet::contains(const EventuallyPeriodicPoint& w) const {
    return std::find(points.begin(), points.end(), w) != points.end();
}

double dual_max_average(const ExpandingMap& map, const Potential& pot, double x_bar, int max_period,
                        int series_depth) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Word& c : primitive_necklaces(map.degree(), max_period)) {
        Word empty_head;
        empty_head.alphabet = c.alphabet;
        EventuallyPeriodicPoint w(empty_head, c);
        double sum = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j)
            sum += series_dual(map, pot, 1.0, w.shifted(j), x_bar, series_depth);
        best = std::max(best, sum / static_cast<double>(c.size()));
    }
    return best;
}

DualSubactionTable::DualSubactionTable(const ExpandingMap& map, const Potential& pot, double x_bar,
                                       MaximizingSet M, double m_star, DualParams params)
    : map_(map), pot_(pot), x_bar_(x_bar), M_(std::move(M)), m_star_(m_star), params_(params) {
    depth_ = params_.cylinder_depth;
    alphabet_ = map.degree();
    if (depth_ < 1) throw ConfigError("cylinder depth must be positive");
    double size_check = std::pow(static_cast<double>(alphabet_), depth_);
    if (size_check > (1 << 22))
        throw ConfigError("cylinder depth too large for a dense table at this alphabet size");
    long n = 1;
    for (int i = 0; i < depth_; ++i) n *= alphabet_;

    // A* at the exact preimage points s + rep(i); along the cycle of M these
    // are exactly the points of M, so the critical cycle carries no cylinder
    // truncation error.
    std::vector<double> a_pre(static_cast<std::size_t>(n) * alphabet_);
    parallel_for(n, [&](long i) {
        EventuallyPeriodicPoint rep_i = representative(i);
        for (int s = 0; s < alphabet_; ++s)
            a_pre[static_cast<std::size_t>(i) * alphabet_ + s] =
                series_dual(map_, pot_, 1.0, rep_i.prepended(s), x_bar_, params_.series_depth);
    });

    values_.assign(static_cast<std::size_t>(n), 0.0);
    std::vector<double> next(static_cast<std::size_t>(n));
    std::vector<double> diff(static_cast<std::size_t>(n));
    long tail_div = n / alphabet_;
    double delta = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int iter = 1; iter <= params_.max_iter; ++iter) {
        for (long i = 0; i < n; ++i) {
            double bestv = -std::numeric_limits<double>::infinity();
            for (int s = 0; s < alphabet_; ++s) {
                long j = static_cast<long>(s) * tail_div + i / alphabet_;
                double cand = values_[static_cast<std::size_t>(j)] +
                              a_pre[static_cast<std::size_t>(i) * alphabet_ + s];
                bestv = std::max(bestv, cand);
            }
            next[static_cast<std::size_t>(i)] = bestv - m_star_;
            diff[static_cast<std::size_t>(i)] =
                next[static_cast<std::size_t>(i)] - values_[static_cast<std::size_t>(i)];
        }
        values_ = next;
        iterations_ = iter;
        delta = 0.0;
        for (double dv : diff) delta = std::max(delta, std::abs(dv));
        if (delta < params_.tol ||
            increments_settled(diff, iter, params_.tol, "dual Lax-Oleinik iteration")) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw ConvergenceError("dual Lax-Oleinik iteration did not reach the requested tolerance",
                               delta);

    double shift = values_[static_cast<std::size_t>(index_of(M_.anchor.truncation(
        static_cast<std::size_t>(depth_))))];
    for (double& v : values_) v -= shift;

    for (long i = 0; i < n; ++i) {
        double bestv = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < alphabet_; ++s) {
            long j = static_cast<long>(s) * tail_div + i / alphabet_;
            bestv = std::max(bestv, values_[static_cast<std::size_t>(j)] +
                                        a_pre[static_cast<std::size_t>(i) * alphabet_ + s]);
        }
        residual_ = std::max(residual_,
                             std::abs(bestv - m_star_ - values_[static_cast<std::size_t>(i)]));
    }

    // Cylinder truncation error: estimate the Hoelder constant of A* by
    // comparing two tail extensions of the same depth-k word, then push the
    // bound through the value iteration (geometric series in the symbol
    // contraction 1/2).
    double hoelder = 0.0;
    long step = std::max<long>(1, n / 64);
    double scale = std::pow(2.0, depth_);
    for (long i = 0; i < n; i += step) {
        EventuallyPeriodicPoint rep_i = representative(i);
        Word head = word_of(i);
        Word other_cycle(std::vector<int>{(head.symbols.back() + 1) % alphabet_}, alphabet_);
        EventuallyPeriodicPoint alt(head, other_cycle);
        double da = series_dual(map_, pot_, 1.0, rep_i, x_bar_, params_.series_depth) -
                    series_dual(map_, pot_, 1.0, alt, x_bar_, params_.series_depth);
        hoelder = std::max(hoelder, std::abs(da) * scale);
    }
    approx_error_ = 2.0 * hoelder / scale;
}

long DualSubactionTable::index_of(const Word& w) const {
    if (static_cast<int>(w.size()) != depth_)
        throw ConfigError("cylinder word length does not match the table depth");
    long idx = 0;
    for (int s : w.symbols) idx = idx * alphabet_ + s;
    return idx;
}

Word DualSubactionTable::word_of(long idx) const {
    std::vector<int> syms(static_cast<std::size_t>(depth_));
    for (int i = depth_ - 1; i >= 0; --i) {
        syms[static_cast<std::size_t>(i)] = static_cast<int>(idx % alphabet_);
        idx /= alphabet_;
    }
    return Word(std::move(syms), alphabet_);
}

EventuallyPeriodicPoint DualSubactionTable::representative(long idx) const {
    return EventuallyPeriodicPoint(word_of(idx), M_.cycle);
}

double DualSubactionTable::value(const EventuallyPeriodicPoint& w) const {
    return values_[static_cast<std::size_t>(
        index_of(w.truncation(static_cast<std::size_t>(depth_))))];
}

double DualSubactionTable::a_star(const EventuallyPeriodicPoint& w) const {
    return series_dual(map_, pot_, 1.0, w, x_bar_, params_.series_depth);
}

double R_star(const DualSubactionTable& table, const EventuallyPeriodicPoint& w) {
    return table.value(w.shifted()) - table.value(w) - (table.a_star(w) - table.m_star());
}

DeviationValue I_star(const DualSubactionTable& table, const EventuallyPeriodicPoint& w) {
    DeviationValue out;
    const MaximizingSet& M = table.maximizing_set();
    std::size_t cap = w.head().size() + w.cycle().size();
    EventuallyPeriodicPoint cur = w;
    for (std::size_t n = 0; n <= cap; ++n) {
        if (M.contains(cur)) {
            out.value = 0.0;
            for (double t : out.terms) out.value += t;
            return out;
        }
        out.terms.push_back(R_star(table, cur));
        cur = cur.shifted();
    }
    // The orbit has entered its eventual cycle without meeting M, so the
    // remaining terms repeat with a positive sum.
    out.finite = false;
    out.value = std::numeric_limits<double>::infinity();
    return out;
}

RStarReport r_star_scan(const MaximizingSet& M, int alphabet,
                        const std::function<double(const EventuallyPeriodicPoint&)>& r_star_fn,
                        double a_star_spread, double threshold) {
    if (a_star_spread < 1e-12)
        throw RefusalError(
            "dual potential is numerically constant, every word is maximizing and the "
            "gap condition is vacuous");
    RStarReport out;
    out.threshold = threshold;
    for (const EventuallyPeriodicPoint& pt : M.points) {
        for (int s = 0; s < alphabet; ++s) {
            EventuallyPeriodicPoint w = pt.prepended(s);
            if (M.contains(w)) continue;
            out.witnesses.push_back({w, r_star_fn(w)});
        }
    }
    if (out.witnesses.empty())
        throw RefusalError("the maximizing set absorbs all of its shift preimages");
    std::stable_sort(out.witnesses.begin(), out.witnesses.end(),
                     [](const RStarWitness& a, const RStarWitness& b) { return a.r_star < b.r_star; });
    out.min_value = out.witnesses.front().r_star;
    out.good = out.min_value > threshold;
    return out;
}

RStarReport r_star_good(const DualSubactionTable& table, double threshold) {
    long n = 1;
    for (int i = 0; i < table.depth(); ++i) n *= table.alphabet();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    long step = std::max<long>(1, n / 256);
    for (long i = 0; i < n; i += step) {
        double a = table.a_star(table.representative(i));
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    return r_star_scan(
        table.maximizing_set(), table.alphabet(),
        [&table](const EventuallyPeriodicPoint& w) { return R_star(table, w); }, hi - lo,
        threshold);
}

} // namespace ergopt
