#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "ergopt/errors.hpp"

namespace ergopt {

// Chebyshev-Lobatto grid on [0,1] with barycentric interpolation and
// Clenshaw-Curtis quadrature weights (normalized so the weights integrate
// over [0,1], i.e. they sum to 1).
class ChebyshevGrid {
public:
    explicit ChebyshevGrid(int n);

    int size() const { return static_cast<int>(nodes_.size()); }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& quad_weights() const { return quad_; }

    double interpolate(std::span<const double> values, double x) const;

    // Lagrange basis coefficients L_l(x), so interp(values, x) = sum L_l * values[l].
    void basis_at(double x, std::vector<double>& out) const;

    static std::shared_ptr<const ChebyshevGrid> shared(int n);

private:
    std::vector<double> nodes_;
    std::vector<double> bary_;  // barycentric weights
    std::vector<double> quad_;
};

// Function samples on a shared Chebyshev grid, evaluable anywhere in [0,1].
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(std::shared_ptr<const ChebyshevGrid> grid, std::vector<double> values);
    static GridFunction sample(std::shared_ptr<const ChebyshevGrid> grid,
                               const std::function<double(double)>& f);

    double operator()(double x) const { return grid_->interpolate(values_, x); }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    const ChebyshevGrid& grid() const { return *grid_; }
    std::shared_ptr<const ChebyshevGrid> grid_ptr() const { return grid_; }

    double quadrature() const;  // integral over [0,1] via the grid weights

private:
    std::shared_ptr<const ChebyshevGrid> grid_;
    std::vector<double> values_;
};

} // namespace ergopt
