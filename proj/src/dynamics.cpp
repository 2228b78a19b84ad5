#include "ergopt/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace ergopt {

namespace {
constexpr double kEndpointTol = 1e-9;
}

ExpandingMap::ExpandingMap(std::vector<Expression> branches, double lambda, Orientation orientation)
    : branches_(std::move(branches)), lambda_(lambda), orientation_(orientation) {
    if (branches_.size() < 2) throw ConfigError("an expanding map needs at least 2 inverse branches");
    if (!(lambda_ > 0.0 && lambda_ < 1.0))
        throw ConfigError("contraction factor lambda must lie in (0,1)");

    cells_.reserve(branches_.size());
    for (const auto& psi : branches_) {
        double a = psi(0.0), b = psi(1.0);
        if (a > b) std::swap(a, b);
        cells_.emplace_back(a, b);
    }
    if (std::abs(cells_.front().first) > kEndpointTol || std::abs(cells_.back().second - 1.0) > kEndpointTol)
        throw ConfigError("branch images must cover [0,1]");
    for (std::size_t i = 0; i + 1 < cells_.size(); ++i)
        if (std::abs(cells_[i].second - cells_[i + 1].first) > kEndpointTol)
            throw ConfigError(
                "branch images must tile [0,1] and be listed left to right; cells " +
                std::to_string(i) + " and " + std::to_string(i + 1) + " do not meet");

    // Orientation declared must match the branch slopes.
    for (std::size_t i = 0; i < branches_.size(); ++i) {
        double slope = branches_[i](0.75) - branches_[i](0.25);
        bool increasing = slope > 0.0;
        if ((orientation_ == Orientation::preserving) != increasing)
            throw ConfigError("declared orientation disagrees with branch " + std::to_string(i));
    }
}

double ExpandingMap::branch(int i, double x) const {
    return branches_[static_cast<std::size_t>(i)](x);
}

double ExpandingMap::word_map(const Word& w, double x) const {
    double y = x;
    for (std::size_t j = 0; j < w.size(); ++j) y = branch(w[j], y);
    return y;
}

std::pair<double, double> ExpandingMap::cylinder_interval(const Word& w) const {
    double a = word_map(w, 0.0), b = word_map(w, 1.0);
    if (a > b) std::swap(a, b);
    return {a, b};
}

int ExpandingMap::locate_branch(double x) const {
    if (x < 0.0 || x > 1.0) throw Error("point outside [0,1]");
    for (std::size_t i = 0; i + 1 < cells_.size(); ++i)
        if (x < cells_[i + 1].first) return static_cast<int>(i);
    return degree() - 1;
}

std::pair<double, int> ExpandingMap::forward_step(double x) const {
    int i = locate_branch(x);
    const Expression& psi = branches_[static_cast<std::size_t>(i)];
    // Solve psi(y) = x by bisection; psi is monotone on [0,1].
    double lo = 0.0, hi = 1.0;
    double flo = psi(lo) - x, fhi = psi(hi) - x;
    if (flo == 0.0) return {lo, i};
    if (fhi == 0.0) return {hi, i};
    if (flo * fhi > 0.0) {
        // x sits at a cell edge within endpoint tolerance; clamp.
        return {std::abs(flo) < std::abs(fhi) ? lo : hi, i};
    }
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        double fm = psi(mid) - x;
        if (fm == 0.0) return {mid, i};
        if ((fm > 0.0) == (fhi > 0.0)) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
        if (hi - lo < 1e-16) break;
    }
    double y = 0.5 * (lo + hi);
    if (std::abs(psi(y) - x) > 1e-12) throw Error("forward step failed to invert a branch");
    return {y, i};
}

double ExpandingMap::periodic_point(const Word& w) const {
    if (w.empty()) throw ConfigError("periodic point needs a nonempty word");
    double x = 0.5;
    for (int iter = 0; iter < 400; ++iter) {
        double next = word_map(w, x);
        if (std::abs(next - x) < 1e-16) return next;
        x = next;
    }
    return x;
}

ExpandingMap::ContractionAudit ExpandingMap::contraction_audit(int samples) const {
    if (samples < 2) throw ConfigError("contraction audit needs at least 2 samples");
    double worst = 0.0;
    double h = 1e-6;
    for (int i = 0; i < degree(); ++i) {
        for (int s = 0; s < samples; ++s) {
            double x = static_cast<double>(s) / (samples - 1);
            double a = std::max(0.0, x - h), b = std::min(1.0, x + h);
            double deriv = std::abs(branch(i, b) - branch(i, a)) / (b - a);
            worst = std::max(worst, deriv);
        }
    }
    return {lambda_, worst, worst <= lambda_ + 1e-6};
}

std::vector<PeriodicOrbit> enumerate_periodic_orbits(const ExpandingMap& map, int max_period,
                                                     const std::function<double(double)>& A) {
    if (max_period < 1) throw ConfigError("max_period must be at least 1");
    std::vector<PeriodicOrbit> orbits;
    for (const Word& w : primitive_necklaces(map.degree(), max_period)) {
        int p = static_cast<int>(w.size());
        PeriodicOrbit orbit;
        orbit.itinerary = w;
        orbit.points.reserve(static_cast<std::size_t>(p));
        double sum = 0.0;
        for (int j = 0; j < p; ++j) {
            // points[j] has forward itinerary w rotated left by j, so it is
            // the fixed point of the reversed rotated word.
            double x = map.periodic_point(w.rotated_left(static_cast<std::size_t>(j)).reversed());
            orbit.points.push_back(x);
            sum += A(x);
        }
        orbit.average = sum / p;
        orbits.push_back(std::move(orbit));
    }
    std::stable_sort(orbits.begin(), orbits.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
        if (a.average != b.average) return a.average > b.average;
        if (a.period() != b.period()) return a.period() < b.period();
        return a.itinerary.symbols < b.itinerary.symbols;
    });
    return orbits;
}

} // namespace ergopt
