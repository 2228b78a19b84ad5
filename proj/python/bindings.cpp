#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ergopt/piecewise.hpp"
#include "ergopt/problem.hpp"

namespace py = pybind11;
using namespace ergopt;

namespace {

ExpandingMap make_map(const std::vector<std::string>& branches, double lambda,
                      const std::string& orientation) {
    std::vector<Expression> psi;
    psi.reserve(branches.size());
    for (const std::string& s : branches) psi.push_back(Expression::parse(s));
    if (orientation != "preserving" && orientation != "reversing")
        throw ConfigError("orientation must be \"preserving\" or \"reversing\"");
    return ExpandingMap(std::move(psi), lambda,
                        orientation == "preserving" ? Orientation::preserving
                                                    : Orientation::reversing);
}

EventuallyPeriodicPoint parse_point(const std::string& s, int alphabet) {
    return EventuallyPeriodicPoint::parse(s, alphabet);
}

py::dict orbit_dict(const PeriodicOrbit& o) {
    py::dict d;
    d["itinerary"] = o.itinerary.to_string();
    d["period"] = o.period();
    d["average"] = o.average;
    d["points"] = o.points;
    return d;
}

} // namespace

PYBIND11_MODULE(_ergopt, m) {
    m.doc() = "transfer operators, involution kernels, and calibrated subactions "
              "for full-branch expanding interval maps";

    auto base = py::register_exception<Error>(m, "ErgoptError");
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
    py::register_exception<RefusalError>(m, "RefusalError", base.ptr());

    py::class_<ExpandingMap>(m, "ExpandingMap")
        .def(py::init(&make_map), py::arg("inverse_branches"), py::arg("lambda_"),
             py::arg("orientation"))
        .def_property_readonly("degree", &ExpandingMap::degree)
        .def_property_readonly("contraction", &ExpandingMap::contraction)
        .def("branch", &ExpandingMap::branch, py::arg("i"), py::arg("x"))
        .def("forward", [](const ExpandingMap& map, double x) { return map.forward_step(x); })
        .def("periodic_point", [](const ExpandingMap& map, const std::string& w) {
            return map.periodic_point(Word::parse(w, map.degree()));
        });

    py::class_<Potential>(m, "Potential")
        .def_static("from_g",
                    [](const std::string& s) { return Potential::from_g(Expression::parse(s)); })
        .def_static("from_A",
                    [](const std::string& s) { return Potential::from_A(Expression::parse(s)); })
        .def("A", &Potential::A)
        .def("g", &Potential::g);

    m.def("evaluate", [](const std::string& src, double x) { return Expression::parse(src)(x); },
          py::arg("expression"), py::arg("x"));

    m.def(
        "leading_eigen",
        [](const ExpandingMap& map, const Potential& pot, double beta, int grid_n, double tol) {
            EigenData eig = leading_eigen(map, pot, beta, grid_n, tol);
            py::dict d;
            d["beta"] = eig.beta;
            d["alpha"] = eig.alpha;
            d["log_alpha"] = eig.log_alpha;
            d["residual"] = eig.residual;
            d["iterations"] = eig.iterations;
            d["nodes"] = eig.grid->nodes();
            d["v"] = eig.v.values();
            d["mu"] = eig.mu;
            return d;
        },
        py::arg("map"), py::arg("potential"), py::arg("beta") = 1.0, py::arg("grid_n") = 128,
        py::arg("tol") = 1e-12);

    m.def(
        "max_ergodic_average",
        [](const ExpandingMap& map, const Potential& pot, int max_period) {
            ErgodicOptimum opt =
                max_ergodic_average(map, [&pot](double x) { return pot.A(x); }, max_period);
            py::dict d;
            d["m"] = opt.m;
            d["maximizer"] = orbit_dict(opt.maximizer);
            d["orbit_count"] = opt.orbits.size();
            return d;
        },
        py::arg("map"), py::arg("potential"), py::arg("max_period") = 8);

    m.def(
        "calibrated_subaction",
        [](const ExpandingMap& map, const Potential& pot, double m, double x_bar, int grid_n) {
            SubactionParams params;
            params.grid_n = grid_n;
            SubactionResult res = calibrated_subaction(
                map, [&pot](double x) { return pot.A(x); }, m, x_bar, params);
            py::dict d;
            d["m"] = res.m;
            d["values"] = res.V.values();
            d["iterations"] = res.iterations;
            d["calibration_residual"] = res.calibration_residual;
            return d;
        },
        py::arg("map"), py::arg("potential"), py::arg("m"), py::arg("x_bar") = 1.0,
        py::arg("grid_n") = 8193);

    m.def(
        "series_dual",
        [](const ExpandingMap& map, const Potential& pot, double beta, const std::string& omega,
           double x_bar, int depth) {
            return series_dual(map, pot, beta, parse_point(omega, map.degree()), x_bar, depth);
        },
        py::arg("map"), py::arg("potential"), py::arg("beta"), py::arg("omega"),
        py::arg("x_bar") = 1.0, py::arg("depth") = 40);

    m.def(
        "involution_residual",
        [](const ExpandingMap& map, const Potential& pot, const std::string& omega, double x,
           double beta, int depth, double x_bar, const std::string& omega_bar) {
            KernelContext ctx(map, pot, x_bar, parse_point(omega_bar, map.degree()));
            return involution_residual(ctx, parse_point(omega, map.degree()), x, beta, depth);
        },
        py::arg("map"), py::arg("potential"), py::arg("omega"), py::arg("x"),
        py::arg("beta") = 1.0, py::arg("depth") = 40, py::arg("x_bar") = 1.0,
        py::arg("omega_bar") = "|1");

    m.def(
        "dual_max_average",
        [](const ExpandingMap& map, const Potential& pot, double x_bar, int max_period,
           int depth) { return dual_max_average(map, pot, x_bar, max_period, depth); },
        py::arg("map"), py::arg("potential"), py::arg("x_bar") = 1.0, py::arg("max_period") = 8,
        py::arg("depth") = 40);

    m.def(
        "mane_potential",
        [](const ExpandingMap& map, const Potential& pot, double m, double x, double y,
           double eps, int max_n) {
            ChainSearchParams params;
            params.eps = eps;
            params.max_n = max_n;
            ManeValue v = mane_potential(map, [&pot](double t) { return pot.A(t); }, m, x, y,
                                         params);
            py::dict d;
            d["attained"] = v.attained;
            d["value"] = v.value;
            d["chain"] = v.chain.to_string();
            d["nodes_visited"] = v.nodes_visited;
            return d;
        },
        py::arg("map"), py::arg("potential"), py::arg("m"), py::arg("x"), py::arg("y"),
        py::arg("eps") = 1e-3, py::arg("max_n") = 20);

    m.def(
        "run_piecewise",
        [](const ExpandingMap& map, const Potential& pot, double x_bar) {
            PiecewiseReport r = run_piecewise(map, pot, x_bar);
            py::dict d;
            d["m"] = r.optimum.m;
            d["m_star"] = r.m_star;
            d["maximizer"] = orbit_dict(r.optimum.maximizer);
            std::vector<std::string> words;
            for (const auto& w : r.breakpoints.segment_words) words.push_back(w.to_string());
            d["segment_words"] = words;
            d["breakpoints"] = r.breakpoints.breakpoints;
            d["monotone_words"] = r.breakpoints.monotone;
            d["r_star_good"] = r.r_star.good;
            d["closure_certified"] = r.closure.certified;
            d["sup_dual_vs_lax"] = r.cross.sup_dual_vs_lax;
            return d;
        },
        py::arg("map"), py::arg("potential"), py::arg("x_bar") = 1.0);

    py::class_<Problem>(m, "Problem")
        .def_static("from_json_text", &Problem::from_json_text)
        .def_static("from_file", &Problem::from_file)
        .def_readonly("map", &Problem::map)
        .def_readonly("potential", &Problem::potential)
        .def_readonly("x_bar", &Problem::x_bar);
}
