#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "ergopt/expression.hpp"
#include "ergopt/symbolic.hpp"

namespace ergopt {

enum class Orientation { preserving, reversing };

// Full-branch expanding map of [0,1] described by its inverse branches
// psi_0, ..., psi_{d-1}, listed left to right (psi_i([0,1]) = I_i and the
// I_i tile [0,1] in order).  Branch cells are half-open on the right except
// the last, so a shared endpoint belongs to the cell it starts.
class ExpandingMap {
public:
    ExpandingMap(std::vector<Expression> branches, double lambda, Orientation orientation);

    int degree() const { return static_cast<int>(branches_.size()); }
    double contraction() const { return lambda_; }
    Orientation orientation() const { return orientation_; }

    double branch(int i, double x) const;

    // psi_w with the first symbol innermost: psi_w = psi_{w[k-1]} o ... o psi_{w[0]}.
    double word_map(const Word& w, double x) const;

    // I_w = psi_w([0,1]) with sorted endpoints.
    std::pair<double, double> cylinder_interval(const Word& w) const;

    const std::vector<std::pair<double, double>>& branch_intervals() const { return cells_; }

    int locate_branch(double x) const;

    // (f(x), symbol of the cell containing x).
    std::pair<double, int> forward_step(double x) const;

    // Fixed point of psi_w; the forward itinerary of the result reads w
    // from the last symbol to the first.
    double periodic_point(const Word& w) const;

    struct ContractionAudit {
        double lambda_declared;
        double lambda_empirical;
        bool ok;
    };
    ContractionAudit contraction_audit(int samples) const;

private:
    std::vector<Expression> branches_;
    std::vector<std::pair<double, double>> cells_;  // sorted endpoints of I_i
    double lambda_;
    Orientation orientation_;
};

// Periodic orbit of the forward map.  itinerary[j] is the branch cell of
// points[j] and f(points[j]) = points[(j+1) mod p].  The stored itinerary is
// the lexicographically minimal rotation of the cycle.
struct PeriodicOrbit {
    Word itinerary;
    std::vector<double> points;
    double average = 0.0;  // Birkhoff average of the potential used during enumeration

    int period() const { return static_cast<int>(points.size()); }
};

// All periodic orbits of period <= max_period (one representative per orbit,
// primitive itineraries only), sorted by Birkhoff average of A, descending.
std::vector<PeriodicOrbit> enumerate_periodic_orbits(const ExpandingMap& map, int max_period,
                                                     const std::function<double(double)>& A);

} // namespace ergopt
