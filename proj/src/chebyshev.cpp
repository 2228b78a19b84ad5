#include "ergopt/chebyshev.hpp"

#include <cmath>

namespace ergopt {

ChebyshevGrid::ChebyshevGrid(int n) {
    if (n < 8) throw ConfigError("grid needs at least 8 nodes");
    nodes_.resize(static_cast<std::size_t>(n));
    bary_.resize(static_cast<std::size_t>(n));
    quad_.resize(static_cast<std::size_t>(n));
    int m = n - 1;
    for (int j = 0; j <= m; ++j) {
        // increasing nodes: x_0 = 0, x_m = 1
        nodes_[static_cast<std::size_t>(j)] = 0.5 * (1.0 - std::cos(M_PI * j / m));
        double w = (j % 2 == 0) ? 1.0 : -1.0;
        if (j == 0 || j == m) w *= 0.5;
        bary_[static_cast<std::size_t>(j)] = w;
    }
    // Clenshaw-Curtis weights for the Lobatto nodes, scaled to [0,1].
    for (int j = 0; j <= m; ++j) {
        double s = 1.0;
        for (int k = 1; k <= m / 2; ++k) {
            double b = (2 * k == m) ? 1.0 : 2.0;
            s -= b * std::cos(2.0 * k * j * M_PI / m) / (4.0 * k * k - 1.0);
        }
        double c = (j == 0 || j == m) ? 1.0 : 2.0;
        quad_[static_cast<std::size_t>(j)] = 0.5 * c * s / m;
    }
}

double ChebyshevGrid::interpolate(std::span<const double> values, double x) const {
    std::size_t n = nodes_.size();
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double diff = x - nodes_[j];
        if (diff == 0.0) return values[j];
        double t = bary_[j] / diff;
        num += t * values[j];
        den += t;
    }
    return num / den;
}

void ChebyshevGrid::basis_at(double x, std::vector<double>& out) const {
    std::size_t n = nodes_.size();
    out.assign(n, 0.0);
    double den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double diff = x - nodes_[j];
        if (diff == 0.0) {
            out.assign(n, 0.0);
            out[j] = 1.0;
            return;
        }
        out[j] = bary_[j] / diff;
        den += out[j];
    }
    for (std::size_t j = 0; j < n; ++j) out[j] /= den;
}

std::shared_ptr<const ChebyshevGrid> ChebyshevGrid::shared(int n) {
    return std::make_shared<const ChebyshevGrid>(n);
}

GridFunction::GridFunction(std::shared_ptr<const ChebyshevGrid> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(grid_->size()))
        throw ConfigError("grid function value count does not match the grid");
}

GridFunction GridFunction::sample(std::shared_ptr<const ChebyshevGrid> grid,
                                  const std::function<double(double)>& f) {
    std::vector<double> v;
    v.reserve(grid->nodes().size());
    for (double x : grid->nodes()) v.push_back(f(x));
    return GridFunction(std::move(grid), std::move(v));
}

double GridFunction::quadrature() const {
    const auto& w = grid_->quad_weights();
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * values_[j];
    return s;
}

} // namespace ergopt
