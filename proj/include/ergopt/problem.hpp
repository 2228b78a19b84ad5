#pragma once

#include <string>

#include "ergopt/kernel.hpp"
#include "ergopt/piecewise.hpp"
#include "ergopt/subaction.hpp"

namespace ergopt {

struct Numerics {
    int grid_n = 128;         // collocation grid for eigendata
    int lax_grid_n = 8193;    // dense grid for the Lax-Oleinik iteration
    int depth_cap = 60;       // cylinder depth cap for kernel limits
    int series_depth = 40;    // truncation of the telescoping series
    int cylinder_depth = 12;  // dual subaction table depth
    std::vector<double> beta_schedule = {8.0, 16.0, 32.0, 64.0};
    double tol = 1e-12;
    int max_period = 8;
    int n_bar = 3;
    double tie_tol = 1e-7;
    double refine_tol = 1e-4;
    int scan_grid = 1025;
    ChainSearchParams mane;
};

// A fully parsed problem: the map, the potential, the anchors, and the
// numeric knobs.  Everything downstream reads from here.
struct Problem {
    ExpandingMap map;
    Potential potential;
    double x_bar = 1.0;
    EventuallyPeriodicPoint omega_bar;
    Numerics numerics;

    static Problem from_json_text(const std::string& text);
    static Problem from_file(const std::string& path);

    KernelSettings kernel_settings() const;
    SubactionParams subaction_params() const;
    DualParams dual_params() const;
    PiecewiseParams piecewise_params() const;
    KernelContext make_kernel_context() const;
};

} // namespace ergopt
