#include "ergopt/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ergopt {

Potential::Potential(Expression e, bool as_g) : expr_(std::move(e)), as_g_(as_g) {
    const int samples = 4096;
    double m = -std::numeric_limits<double>::infinity();
    for (int s = 0; s <= samples; ++s) {
        double x = static_cast<double>(s) / samples;
        if (as_g_) {
            double gv = expr_(x);
            if (!(gv > 0.0))
                throw ConfigError("g must be positive on [0,1]; g(" + std::to_string(x) +
                                  ") = " + std::to_string(gv));
            m = std::max(m, std::log(gv));
        } else {
            m = std::max(m, expr_(x));
        }
    }
    max_A_ = m + 1e-9;
}

Potential Potential::from_g(Expression g) { return Potential(std::move(g), true); }
Potential Potential::from_A(Expression A) { return Potential(std::move(A), false); }

double Potential::g(double x) const { return as_g_ ? expr_(x) : std::exp(expr_(x)); }

double Potential::A(double x) const {
    if (!as_g_) return expr_(x);
    double gv = expr_(x);
    if (!(gv > 0.0)) throw DomainError("g must be positive to take log g", 0);
    return std::log(gv);
}

double EigenData::mu_integral(const GridFunction& q) const {
    const auto& vals = q.values();
    double s = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) s += mu[j] * vals[j];
    return s;
}

GridFunction transfer_apply(const ExpandingMap& map, const Potential& pot, double beta,
                            const GridFunction& q) {
    auto grid = q.grid_ptr();
    std::vector<double> out(grid->nodes().size(), 0.0);
    for (std::size_t j = 0; j < out.size(); ++j) {
        double x = grid->nodes()[j];
        double s = 0.0;
        for (int i = 0; i < map.degree(); ++i) {
            double y = map.branch(i, x);
            s += std::exp(beta * pot.A(y)) * q(y);
        }
        out[j] = s;
    }
    return GridFunction(grid, std::move(out));
}

namespace {

double log_sum_exp(const double* vals, int n) {
    double m = vals[0];
    for (int i = 1; i < n; ++i) m = std::max(m, vals[i]);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::exp(vals[i] - m);
    return m + std::log(s);
}

} // namespace

EigenData leading_eigen(const ExpandingMap& map, const Potential& pot, double beta, int grid_n,
                        double tol, int max_iter) {
    auto grid = ChebyshevGrid::shared(grid_n);
    const auto& nodes = grid->nodes();
    std::size_t n = nodes.size();
    int d = map.degree();

    // Branch data at the nodes.
    std::vector<std::vector<double>> y(static_cast<std::size_t>(d)), ba(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        y[static_cast<std::size_t>(i)].resize(n);
        ba[static_cast<std::size_t>(i)].resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            double yy = map.branch(i, nodes[j]);
            y[static_cast<std::size_t>(i)][j] = yy;
            ba[static_cast<std::size_t>(i)][j] = beta * pot.A(yy);
        }
    }

    // Power iteration on u = log v, renormalized to max u = 0.  Working in
    // log space keeps the eigenfunction meaningful at low temperature where
    // v spans hundreds of orders of magnitude.
    std::vector<double> u(n, 0.0), w(n), terms(static_cast<std::size_t>(d));
    double log_alpha = 0.0, delta = std::numeric_limits<double>::infinity();
    int iters = 0;
    double best_delta = delta;
    int stalled = 0;
    for (iters = 1; iters <= max_iter; ++iters) {
        for (std::size_t j = 0; j < n; ++j) {
            for (int i = 0; i < d; ++i)
                terms[static_cast<std::size_t>(i)] =
                    ba[static_cast<std::size_t>(i)][j] +
                    grid->interpolate(u, y[static_cast<std::size_t>(i)][j]);
            w[j] = log_sum_exp(terms.data(), d);
        }
        double shift = *std::max_element(w.begin(), w.end());
        delta = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double nu = w[j] - shift;
            delta = std::max(delta, std::abs(nu - u[j]));
            u[j] = nu;
        }
        log_alpha = shift;
        if (delta <= tol) break;
        if (delta < best_delta * 0.999) {
            best_delta = delta;
            stalled = 0;
        } else if (++stalled > 200) {
            throw ConvergenceError(
                "eigenfunction iteration stopped contracting (oscillating quotient, possible "
                "spectral gap collapse)",
                delta);
        }
    }
    if (delta > tol)
        throw ConvergenceError("eigenfunction iteration did not converge in " +
                                   std::to_string(max_iter) + " iterations",
                               delta);

    // Adjoint iteration on quadrature weights: pull each node weight through
    // the inverse branches and redistribute it onto the grid through the
    // interpolation basis.
    std::vector<double> m = grid->quad_weights();
    {
        double s0 = 0.0;
        for (double mv : m) s0 += mv;
        for (double& mv : m) mv /= s0;
    }
    std::vector<double> mp(n), basis;
    double dual_delta = std::numeric_limits<double>::infinity();
    int dual_iters = 0;
    for (dual_iters = 1; dual_iters <= max_iter; ++dual_iters) {
        std::fill(mp.begin(), mp.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (m[j] == 0.0) continue;
            for (int i = 0; i < d; ++i) {
                double wgt = m[j] * std::exp(ba[static_cast<std::size_t>(i)][j] - log_alpha);
                if (wgt == 0.0) continue;
                grid->basis_at(y[static_cast<std::size_t>(i)][j], basis);
                for (std::size_t l = 0; l < n; ++l) mp[l] += wgt * basis[l];
            }
        }
        double total = 0.0;
        for (double v : mp) total += v;
        if (!(total > 0.0)) throw ConvergenceError("adjoint iteration lost positivity", total);
        dual_delta = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            mp[l] /= total;
            dual_delta = std::max(dual_delta, std::abs(mp[l] - m[l]));
        }
        m.swap(mp);
        if (dual_delta <= tol) break;
    }
    if (dual_delta > tol)
        throw ConvergenceError("eigenmeasure iteration did not converge in " +
                                   std::to_string(max_iter) + " iterations",
                               dual_delta);

    // Final residual of the eigen relations at the nodes.
    double residual = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        for (int i = 0; i < d; ++i)
            terms[static_cast<std::size_t>(i)] =
                ba[static_cast<std::size_t>(i)][j] +
                grid->interpolate(u, y[static_cast<std::size_t>(i)][j]);
        residual = std::max(residual, std::abs(log_sum_exp(terms.data(), d) - log_alpha - u[j]));
    }

    // Normalize: mu already sums to 1; scale v so mu(v) = 1.
    std::vector<double> vvals(n), logv(n);
    double c = 0.0;
    for (std::size_t j = 0; j < n; ++j) c += m[j] * std::exp(u[j]);
    double log_c = std::log(c);
    for (std::size_t j = 0; j < n; ++j) {
        logv[j] = u[j] - log_c;
        vvals[j] = std::exp(logv[j]);
    }

    EigenData eig;
    eig.beta = beta;
    eig.log_alpha = log_alpha;
    eig.alpha = std::exp(log_alpha);
    eig.v = GridFunction(grid, std::move(vvals));
    eig.log_v = GridFunction(grid, std::move(logv));
    eig.mu = std::move(m);
    eig.residual = std::max(residual, dual_delta);
    eig.iterations = iters + dual_iters;
    eig.grid = grid;
    return eig;
}

namespace {

// Shared walker for cylinder integrals: carries the branch images of all
// grid nodes along a word together with log htilde at the nodes.
struct NodeChain {
    std::vector<double> z;  // psi_w(x_j)
    std::vector<double> t;  // log htilde_w(x_j)

    void init(const std::vector<double>& nodes) {
        z = nodes;
        t.assign(nodes.size(), 0.0);
    }
    void extend(const ExpandingMap& map, const Potential& pot, double beta, int symbol) {
        for (std::size_t j = 0; j < z.size(); ++j) {
            z[j] = map.branch(symbol, z[j]);
            t[j] += beta * pot.A(z[j]);
        }
    }
};

// integral of F over I_w against mu, as log of a positive value, given the
// chain state at depth k.  F = 1 gives the cylinder mass.
double log_pullback(const NodeChain& chain, const EigenData& eig, int k,
                    const std::function<double(double)>& F) {
    const auto& mu = eig.mu;
    double s = -std::numeric_limits<double>::infinity();
    for (double tv : chain.t) s = std::max(s, tv);
    double acc = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
        double f = F ? F(chain.z[j]) : 1.0;
        acc += mu[j] * std::exp(chain.t[j] - s) * f;
    }
    if (!(acc > 0.0))
        throw ConvergenceError("cylinder integral lost positivity (eigenmeasure weights too rough)",
                               acc);
    return s + std::log(acc) - k * eig.log_alpha;
}

} // namespace

void MassChain::build(const ExpandingMap& map, const Potential& pot, const EigenData& eig,
                      const std::vector<int>& syms) {
    NodeChain chain;
    chain.init(eig.grid->nodes());
    log_mass_.reserve(syms.size() + 1);
    log_mass_.push_back(0.0);  // mu([0,1]) = 1
    for (std::size_t k = 0; k < syms.size(); ++k) {
        chain.extend(map, pot, eig.beta, syms[k]);
        log_mass_.push_back(log_pullback(chain, eig, static_cast<int>(k) + 1, nullptr));
    }
}

MassChain::MassChain(const ExpandingMap& map, const Potential& pot, const EigenData& eig,
                     const EventuallyPeriodicPoint& omega, int depth) {
    std::vector<int> syms;
    syms.reserve(static_cast<std::size_t>(depth));
    for (int k = 0; k < depth; ++k) syms.push_back(omega.symbol_at(static_cast<std::size_t>(k)));
    build(map, pot, eig, syms);
}

MassChain::MassChain(const ExpandingMap& map, const Potential& pot, const EigenData& eig,
                     const Word& w) {
    build(map, pot, eig, w.symbols);
}

double log_cylinder_mass(const ExpandingMap& map, const Potential& pot, const EigenData& eig,
                         const Word& w) {
    MassChain mc(map, pot, eig, w);
    return mc.log_mass(static_cast<int>(w.size()));
}

double cylinder_mass(const ExpandingMap& map, const Potential& pot, const EigenData& eig,
                     const Word& w) {
    double lm = log_cylinder_mass(map, pot, eig, w);
    double mass = std::exp(lm);
    if (mass == 0.0)
        throw Error("cylinder mass underflows (log-mass " + std::to_string(lm) +
                    "); use log_cylinder_mass");
    return mass;
}

double word_measure(const ExpandingMap& map, const Potential& pot, const EigenData& eig,
                    const Word& w) {
    NodeChain chain;
    chain.init(eig.grid->nodes());
    for (std::size_t k = 0; k < w.size(); ++k) chain.extend(map, pot, eig.beta, w[k]);
    const GridFunction& v = eig.v;
    return std::exp(log_pullback(chain, eig, static_cast<int>(w.size()),
                                 [&](double x) { return v(x); }));
}

double spectral_projection_rho(const ExpandingMap& map, const Potential& pot, const EigenData& eig,
                               const GridFunction& z, int k, double x) {
    if (k < 1 || k > 16) throw ConfigError("spectral projection depth must lie in [1,16]");
    int d = map.degree();
    std::size_t n = eig.grid->nodes().size();

    // Depth-first walk over all words of length k.  Level state: node chain
    // plus the chain of the evaluation point.
    struct Level {
        NodeChain chain;
        double ze, te;
    };
    std::vector<Level> levels(static_cast<std::size_t>(k) + 1);
    levels[0].chain.init(eig.grid->nodes());
    levels[0].ze = x;
    levels[0].te = 0.0;

    const auto& mu = eig.mu;
    double rho = 0.0;
    std::vector<int> sym(static_cast<std::size_t>(k), 0);
    int depth = 0;
    while (depth >= 0) {
        if (depth == k) {
            const Level& L = levels[static_cast<std::size_t>(k)];
            double s = -std::numeric_limits<double>::infinity();
            for (double tv : L.chain.t) s = std::max(s, tv);
            double sm = 0.0, sz = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                double wgt = mu[j] * std::exp(L.chain.t[j] - s);
                sm += wgt;
                sz += wgt * z(L.chain.z[j]);
            }
            if (!(sm > 0.0)) throw ConvergenceError("cylinder mass lost positivity", sm);
            // h_w(x) * integral z = exp(te - k log alpha) * sz / sm
            rho += std::exp(L.te - k * eig.log_alpha) * (sz / sm);
            --depth;
            continue;
        }
        int s = sym[static_cast<std::size_t>(depth)];
        if (s >= d) {
            sym[static_cast<std::size_t>(depth)] = 0;
            --depth;
            continue;
        }
        Level& cur = levels[static_cast<std::size_t>(depth)];
        Level& nxt = levels[static_cast<std::size_t>(depth) + 1];
        nxt.chain = cur.chain;
        nxt.chain.extend(map, pot, eig.beta, s);
        nxt.ze = map.branch(s, cur.ze);
        nxt.te = cur.te + eig.beta * pot.A(nxt.ze);
        sym[static_cast<std::size_t>(depth)] += 1;
        ++depth;
        if (depth < k) sym[static_cast<std::size_t>(depth)] = 0;
    }
    return rho;
}

GridFunction log_eigenfunction_scaled(const EigenData& eig, double x_bar) {
    double base = eig.log_v(x_bar);
    std::vector<double> out = eig.log_v.values();
    for (double& v : out) v = (v - base) / eig.beta;
    return GridFunction(eig.grid, std::move(out));
}

double log_h_word(const ExpandingMap& map, const Potential& pot, const EigenData& eig,
                  const Word& w, double x) {
    if (w.empty()) throw ConfigError("kernel word must be nonempty");
    double zx = x, tx = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        zx = map.branch(w[k], zx);
        tx += eig.beta * pot.A(zx);
    }
    double lm = log_cylinder_mass(map, pot, eig, w);
    return tx - static_cast<double>(w.size()) * eig.log_alpha - lm;
}

} // namespace ergopt
