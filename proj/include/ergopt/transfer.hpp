#pragma once

#include <memory>
#include <vector>

#include "ergopt/chebyshev.hpp"
#include "ergopt/dynamics.hpp"
#include "ergopt/expression.hpp"

namespace ergopt {

// Positive weight function g with A = log g.  Constructed from either form;
// positivity of g is checked on a sample grid at construction.
class Potential {
public:
    static Potential from_g(Expression g);
    static Potential from_A(Expression A);

    double g(double x) const;
    double A(double x) const;

    // Sampled upper bound for sup A (with a safety margin); used by
    // branch-and-bound chain searches.
    double max_A() const { return max_A_; }

    bool given_as_g() const { return as_g_; }
    const std::string& source() const { return expr_.source(); }

private:
    Potential(Expression e, bool as_g);
    Expression expr_;
    bool as_g_;
    double max_A_;
};

// Leading eigendata of the weighted transfer operator
//   (P q)(x) = sum_i g(psi_i(x))^beta q(psi_i(x)),
// normalized so mu(1) = 1 and mu(v) = 1.
struct EigenData {
    double beta = 1.0;
    double alpha = 0.0;
    double log_alpha = 0.0;
    GridFunction v;      // positive eigenfunction
    GridFunction log_v;  // log v, interpolated in log space for stability
    std::vector<double> mu;  // eigenmeasure quadrature weights at the grid nodes
    double residual = 0.0;
    int iterations = 0;

    double mu_integral(const GridFunction& q) const;
    std::shared_ptr<const ChebyshevGrid> grid;
};

GridFunction transfer_apply(const ExpandingMap& map, const Potential& pot, double beta,
                            const GridFunction& q);

EigenData leading_eigen(const ExpandingMap& map, const Potential& pot, double beta, int grid_n,
                        double tol = 1e-12, int max_iter = 5000);

// Log-masses log mu(I_{omega_k}) of the nested cylinders of a sequence,
// computed through the pull-back identity
//   mu(I_w) = alpha^{-|w|} integral of htilde_w d mu,
// evaluated in log space so deep or low-temperature masses do not underflow.
class MassChain {
public:
    MassChain(const ExpandingMap& map, const Potential& pot, const EigenData& eig,
              const EventuallyPeriodicPoint& omega, int depth);
    MassChain(const ExpandingMap& map, const Potential& pot, const EigenData& eig, const Word& w);

    int depth() const { return static_cast<int>(log_mass_.size()) - 1; }
    double log_mass(int k) const { return log_mass_[static_cast<std::size_t>(k)]; }

private:
    void build(const ExpandingMap& map, const Potential& pot, const EigenData& eig,
               const std::vector<int>& syms);
    std::vector<double> log_mass_;
};

double log_cylinder_mass(const ExpandingMap& map, const Potential& pot, const EigenData& eig,
                         const Word& w);
// exp of the above; refuses (throws) when the result would underflow to 0.
double cylinder_mass(const ExpandingMap& map, const Potential& pot, const EigenData& eig,
                     const Word& w);

// mu(C_w) = integral of v over I_w against the eigenmeasure; the projection
// of the invariant density onto the cylinder partition.
double word_measure(const ExpandingMap& map, const Potential& pot, const EigenData& eig,
                    const Word& w);

// rho^k(x) = sum over |w| = k of h_w(x) * integral of z over I_w, the k-th
// spectral projection polygon; converges to v(x) * mu(z).
double spectral_projection_rho(const ExpandingMap& map, const Potential& pot, const EigenData& eig,
                               const GridFunction& z, int k, double x);

// (1/beta)(log v - log v(x_bar)) as a grid function.
GridFunction log_eigenfunction_scaled(const EigenData& eig, double x_bar);

// log h_beta(w, x) for the finite word w (first symbol innermost):
//   log htilde_w(x) - |w| log alpha - log mu(I_w).
double log_h_word(const ExpandingMap& map, const Potential& pot, const EigenData& eig,
                  const Word& w, double x);

} // namespace ergopt
