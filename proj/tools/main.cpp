#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ergopt/io_util.hpp"
#include "ergopt/parallel.hpp"
#include "ergopt/piecewise.hpp"
#include "ergopt/problem.hpp"

using namespace ergopt;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("config", o.config_path, "problem config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--threads", o.threads, "worker cap (0 = ERGOPT_THREADS or hardware)");
}

Problem load(const CommonOpts& o) {
    if (o.threads > 0) set_default_threads(o.threads);
    std::filesystem::create_directories(o.out_dir);
    return Problem::from_file(o.config_path);
}

std::string out_path(const CommonOpts& o, const char* name) {
    return (std::filesystem::path(o.out_dir) / name).string();
}

void save_json(const CommonOpts& o, const char* name, const ordered_json& j) {
    write_text_file(out_path(o, name), j.dump(2) + "\n");
}

std::string fmt(double x) { return format_double(x); }

// Human line plus a machine-readable mirror, both on stderr.
void diagnostic(const char* severity, const char* kind, const std::string& message) {
    std::fprintf(stderr, "%s: %s\n", severity, message.c_str());
    ordered_json j;
    j["diagnostic"] = {{"severity", severity}, {"kind", kind}, {"message", message}};
    std::fprintf(stderr, "%s\n", j.dump().c_str());
}

ordered_json orbit_json(const PeriodicOrbit& o) {
    ordered_json j;
    j["itinerary"] = o.itinerary.to_string();
    j["period"] = o.period();
    j["average"] = o.average;
    j["points"] = o.points;
    return j;
}

std::function<double(double)> potential_A(const Problem& p) {
    return [&pot = p.potential](double x) { return pot.A(x); };
}

int run_eigen(const CommonOpts& o, double beta) {
    Problem p = load(o);
    EigenData eig = leading_eigen(p.map, p.potential, beta, p.numerics.grid_n, p.numerics.tol);

    CsvWriter csv({"x", "v", "log_v", "mu_weight", "grid_n", "tol"});
    for (int j = 0; j < eig.grid->size(); ++j)
        csv.add_row({fmt(eig.grid->nodes()[j]), fmt(eig.v.values()[j]),
                     fmt(eig.log_v.values()[j]), fmt(eig.mu[j]),
                     std::to_string(p.numerics.grid_n), fmt(p.numerics.tol)});
    csv.save(out_path(o, "eigen.csv"));

    ordered_json j;
    j["beta"] = beta;
    j["alpha"] = eig.alpha;
    j["log_alpha"] = eig.log_alpha;
    j["residual"] = eig.residual;
    j["iterations"] = eig.iterations;
    j["grid_n"] = p.numerics.grid_n;
    j["tol"] = p.numerics.tol;
    save_json(o, "eigen.json", j);
    std::printf("eigen: beta=%s alpha=%s residual=%s\n", fmt(beta).c_str(), fmt(eig.alpha).c_str(),
                fmt(eig.residual).c_str());
    return 0;
}

int run_anneal(const CommonOpts& o, std::vector<double> schedule) {
    Problem p = load(o);
    if (schedule.empty()) schedule = p.numerics.beta_schedule;

    CsvWriter csv({"beta", "alpha", "log_alpha", "m_estimate", "sup_defect_prev", "residual",
                   "iterations", "grid_n", "tol"});
    ordered_json steps = ordered_json::array();
    GridFunction prev;
    bool have_prev = false;
    bool decreasing = true;
    double last_defect = 0.0;
    for (double beta : schedule) {
        EigenData eig = leading_eigen(p.map, p.potential, beta, p.numerics.grid_n, p.numerics.tol);
        GridFunction scaled = log_eigenfunction_scaled(eig, p.x_bar);
        double defect = 0.0;
        if (have_prev)
            for (int j = 0; j < eig.grid->size(); ++j)
                defect = std::max(defect,
                                  std::abs(scaled.values()[j] - prev(eig.grid->nodes()[j])));
        if (have_prev && last_defect > 0.0 && defect >= last_defect) decreasing = false;
        csv.add_row({fmt(beta), fmt(eig.alpha), fmt(eig.log_alpha), fmt(eig.log_alpha / beta),
                     have_prev ? fmt(defect) : std::string("nan"), fmt(eig.residual),
                     std::to_string(eig.iterations), std::to_string(p.numerics.grid_n),
                     fmt(p.numerics.tol)});
        ordered_json s;
        s["beta"] = beta;
        s["alpha"] = eig.alpha;
        s["m_estimate"] = eig.log_alpha / beta;
        if (have_prev) s["sup_defect_prev"] = defect;
        steps.push_back(s);
        if (have_prev) last_defect = defect;
        prev = scaled;
        have_prev = true;
    }
    csv.save(out_path(o, "anneal.csv"));

    ordered_json j;
    j["schedule"] = schedule;
    j["steps"] = steps;
    j["defect_decreasing"] = decreasing;
    j["grid_n"] = p.numerics.grid_n;
    save_json(o, "anneal.json", j);
    std::printf("anneal: %zu stages, defects %s\n", schedule.size(),
                decreasing ? "decreasing" : "not decreasing");
    return 0;
}

int run_subaction(const CommonOpts& o) {
    Problem p = load(o);
    auto A = potential_A(p);
    ErgodicOptimum opt = max_ergodic_average(p.map, A, p.numerics.max_period);
    SubactionResult res = calibrated_subaction(p.map, A, opt.m, p.x_bar, p.subaction_params());
    auto V = [&res](double x) { return res.V(x); };

    CsvWriter csv({"x", "V", "R", "grid_n", "tol"});
    for (int j = 0; j < res.V.size(); ++j) {
        double x = res.V.node(j);
        csv.add_row({fmt(x), fmt(res.V.values()[j]), fmt(error_R(p.map, A, V, opt.m, x)),
                     std::to_string(res.V.size()), fmt(p.numerics.tol)});
    }
    csv.save(out_path(o, "subaction.csv"));

    ordered_json j;
    j["m"] = opt.m;
    j["maximizer"] = orbit_json(opt.maximizer);
    j["max_period"] = p.numerics.max_period;
    j["x_bar"] = p.x_bar;
    j["iterations"] = res.iterations;
    j["delta"] = res.delta;
    j["calibration_residual"] = res.calibration_residual;
    j["grid_n"] = res.V.size();
    j["tol"] = p.numerics.tol;
    save_json(o, "subaction.json", j);
    std::printf("subaction: m=%s residual=%s iterations=%d\n", fmt(opt.m).c_str(),
                fmt(res.calibration_residual).c_str(), res.iterations);
    return 0;
}

int run_dual(const CommonOpts& o) {
    Problem p = load(o);
    auto A = potential_A(p);
    ErgodicOptimum opt = max_ergodic_average(p.map, A, p.numerics.max_period);
    MaximizingSet M = MaximizingSet::from_orbit(opt.maximizer);
    double m_star = dual_max_average(p.map, p.potential, p.x_bar, p.numerics.max_period,
                                     p.numerics.series_depth);
    DualSubactionTable table(p.map, p.potential, p.x_bar, M, m_star, p.dual_params());

    CsvWriter csv({"index", "word", "v_star", "a_star", "depth", "tol"});
    long n = static_cast<long>(table.table().size());
    for (long i = 0; i < n; ++i) {
        EventuallyPeriodicPoint rep = table.representative(i);
        csv.add_row({std::to_string(i), table.word_of(i).to_string(), fmt(table.table()[i]),
                     fmt(table.a_star(rep)), std::to_string(table.depth()),
                     fmt(p.numerics.tol)});
    }
    csv.save(out_path(o, "dual_table.csv"));

    bool warning = false;
    RStarReport report;
    try {
        report = r_star_good(table);
    } catch (const RefusalError& e) {
        warning = true;
        diagnostic("warning", "refusal", e.what());
    }

    ordered_json j;
    j["m"] = opt.m;
    j["m_star"] = m_star;
    j["duality_gap"] = std::abs(opt.m - m_star);
    j["depth"] = table.depth();
    j["calibration_residual"] = table.calibration_residual();
    j["approx_error"] = table.approx_error();
    j["iterations"] = table.iterations();
    j["maximizing_set"] = ordered_json::array();
    for (const auto& w : M.points) j["maximizing_set"].push_back(w.to_string());
    if (!warning) {
        ordered_json r;
        r["good"] = report.good;
        r["min_value"] = report.min_value;
        r["threshold"] = report.threshold;
        r["witnesses"] = ordered_json::array();
        for (const auto& wit : report.witnesses)
            r["witnesses"].push_back({{"point", wit.point.to_string()}, {"r_star", wit.r_star}});
        j["r_star"] = r;
    } else {
        j["r_star"] = nullptr;
    }
    save_json(o, "dual.json", j);
    std::printf("dual: m=%s m_star=%s gap=%s\n", fmt(opt.m).c_str(), fmt(m_star).c_str(),
                fmt(std::abs(opt.m - m_star)).c_str());
    if (!warning && !report.good) {
        diagnostic("error", "certified",
                   "R* vanishes at " + report.witnesses.front().point.to_string() +
                       ": duality gap not certified");
        return 2;
    }
    return 0;
}

int run_kernel(const CommonOpts& o, const std::string& omega_str, double x, double beta) {
    Problem p = load(o);
    EventuallyPeriodicPoint omega = EventuallyPeriodicPoint::parse(omega_str, p.map.degree());
    KernelContext ctx = p.make_kernel_context();
    HKernel h(ctx, omega, beta, p.numerics.depth_cap);
    ConvergedValue limit = h.limit_log_h(x, p.numerics.tol);

    CsvWriter csv({"depth", "log_h", "defect_prev", "beta", "tol"});
    double prev = 0.0;
    for (int k = 1; k <= limit.depth_used; ++k) {
        double cur = h.log_h(x, k);
        csv.add_row({std::to_string(k), fmt(cur), k > 1 ? fmt(std::abs(cur - prev)) : "nan",
                     fmt(beta), fmt(p.numerics.tol)});
        prev = cur;
    }
    csv.save(out_path(o, "kernel.csv"));

    ordered_json j;
    j["omega"] = omega.to_string();
    j["x"] = x;
    j["beta"] = beta;
    j["log_h"] = {{"value", limit.value}, {"depth_used", limit.depth_used},
                  {"tail_bound", limit.tail_bound}};
    j["W_series_vs_anchor"] =
        delta_series(p.map, p.potential, beta, omega, x, p.x_bar, p.numerics.series_depth);
    j["a_star_series"] =
        series_dual(p.map, p.potential, beta, omega, p.x_bar, p.numerics.series_depth);
    j["a_star_scaling"] =
        dual_potential(ctx, omega, beta, DualMode::scaling, p.numerics.cylinder_depth);
    j["involution_residual"] =
        involution_residual(ctx, omega, x, beta, p.numerics.series_depth);
    j["series_depth"] = p.numerics.series_depth;
    j["depth_cap"] = p.numerics.depth_cap;
    save_json(o, "kernel.json", j);
    std::printf("kernel: omega=%s x=%s log_h=%s (depth %d, tail %s)\n", omega.to_string().c_str(),
                fmt(x).c_str(), fmt(limit.value).c_str(), limit.depth_used,
                fmt(limit.tail_bound).c_str());
    return 0;
}

int run_piecewise_cmd(const CommonOpts& o) {
    Problem p = load(o);
    PiecewiseReport report = run_piecewise(p.map, p.potential, p.x_bar, p.piecewise_params());

    CsvWriter sel({"x", "value", "v_dual", "v_lax", "word_plus", "word_minus", "tie_tol"});
    const SelectionFunction& s = report.selection;
    for (std::size_t j = 0; j < s.xs.size(); ++j)
        sel.add_row({fmt(s.xs[j]), fmt(s.value[j]), fmt(report.v_dual[j]), fmt(report.v_lax[j]),
                     report.candidates.words[s.u_plus[j]].to_string(),
                     report.candidates.words[s.u_minus[j]].to_string(), fmt(s.tie_tol)});
    sel.save(out_path(o, "selection.csv"));

    CsvWriter bp({"index", "location", "word_left", "word_right", "refine_tol"});
    for (std::size_t j = 0; j < report.breakpoints.breakpoints.size(); ++j)
        bp.add_row({std::to_string(j), fmt(report.breakpoints.breakpoints[j]),
                    report.breakpoints.segment_words[j].to_string(),
                    report.breakpoints.segment_words[j + 1].to_string(),
                    fmt(report.breakpoints.refine_tol)});
    bp.save(out_path(o, "breakpoints.csv"));

    ordered_json j;
    j["m"] = report.optimum.m;
    j["m_star"] = report.m_star;
    j["maximizer"] = orbit_json(report.optimum.maximizer);
    ordered_json cand = ordered_json::array();
    for (std::size_t i = 0; i < report.candidates.words.size(); ++i)
        cand.push_back({{"word", report.candidates.words[i].to_string()},
                        {"i_star", report.candidates.i_star[i]}});
    j["candidates"] = cand;
    j["segments"] = ordered_json::array();
    for (std::size_t i = 0; i < report.breakpoints.segment_words.size(); ++i) {
        ordered_json seg;
        seg["word"] = report.breakpoints.segment_words[i].to_string();
        seg["lo"] = report.breakpoints.certificates[i].lo;
        seg["hi"] = report.breakpoints.certificates[i].hi;
        seg["constant"] = report.breakpoints.certificates[i].constant;
        j["segments"].push_back(seg);
    }
    j["breakpoints"] = report.breakpoints.breakpoints;
    j["segments_certified"] = report.breakpoints.certified;
    j["monotone_words"] = report.breakpoints.monotone;
    j["r_star"] = {{"good", report.r_star.good},
                   {"warning", report.r_star_warning},
                   {"min_value", report.r_star.min_value}};
    j["twist"] = {{"ok", report.twist.ok},
                  {"degenerate", report.twist.degenerate},
                  {"min_margin", report.twist.min_margin},
                  {"violations", report.twist.violations}};
    j["closure"] = {{"k_max", report.closure.k_max},
                    {"min_shell_i_star", report.closure.min_shell_i_star},
                    {"slack", report.closure.slack},
                    {"certified", report.closure.certified}};
    j["cross"] = {{"sup_dual_vs_lax", report.cross.sup_dual_vs_lax},
                  {"beta_trend_decreasing", report.cross.beta_trend_decreasing}};
    ordered_json bs = ordered_json::array();
    for (const ScheduleValue& v : report.cross.beta_sup)
        bs.push_back({{"beta", v.beta}, {"sup", v.value}});
    j["cross"]["beta_sup"] = bs;
    j["tie_tol"] = report.breakpoints.tie_tol;
    j["refine_tol"] = report.breakpoints.refine_tol;
    save_json(o, "piecewise.json", j);

    std::printf("piecewise: %zu segment(s), sup|V_dual - V_lax|=%s\n",
                report.breakpoints.segment_words.size(),
                fmt(report.cross.sup_dual_vs_lax).c_str());
    if (!report.r_star_warning && !report.r_star.good) {
        diagnostic("error", "certified", "R* gap condition failed: piecewise structure not certified");
        return 2;
    }
    return 0;
}

int run_orbits(const CommonOpts& o, int max_period) {
    Problem p = load(o);
    if (max_period <= 0) max_period = p.numerics.max_period;
    auto A = potential_A(p);
    std::vector<PeriodicOrbit> orbits = enumerate_periodic_orbits(p.map, max_period, A);

    CsvWriter csv({"itinerary", "period", "average", "points", "max_period"});
    for (const PeriodicOrbit& orb : orbits) {
        std::string pts;
        for (std::size_t j = 0; j < orb.points.size(); ++j) {
            if (j) pts += ';';
            pts += fmt(orb.points[j]);
        }
        csv.add_row({orb.itinerary.to_string(), std::to_string(orb.period()), fmt(orb.average),
                     pts, std::to_string(max_period)});
    }
    csv.save(out_path(o, "orbits.csv"));

    ordered_json j;
    j["count"] = orbits.size();
    j["max_period"] = max_period;
    j["m"] = orbits.empty() ? 0.0 : orbits.front().average;
    if (!orbits.empty()) j["maximizer"] = orbit_json(orbits.front());
    save_json(o, "orbits.json", j);
    std::printf("orbits: %zu up to period %d, m=%s\n", orbits.size(), max_period,
                fmt(j["m"].get<double>()).c_str());
    return 0;
}

int run_mane(const CommonOpts& o, double x, double y) {
    Problem p = load(o);
    auto A = potential_A(p);
    ErgodicOptimum opt = max_ergodic_average(p.map, A, p.numerics.max_period);
    ManeValue S = mane_potential(p.map, A, opt.m, x, y, p.numerics.mane);
    ManeValue h = peierls_barrier(p.map, A, opt.m, x, y, p.numerics.mane);

    ordered_json j;
    j["x"] = x;
    j["y"] = y;
    j["m"] = opt.m;
    auto chain_json = [](const ManeValue& v) {
        ordered_json c;
        c["attained"] = v.attained;
        if (v.attained) {
            c["value"] = v.value;
            c["chain"] = v.chain.to_string();
        }
        c["nodes_visited"] = v.nodes_visited;
        return c;
    };
    j["mane_potential"] = chain_json(S);
    j["peierls_barrier"] = chain_json(h);
    j["aubry_x"] = aubry_test(p.map, A, opt.m, x, p.numerics.mane);
    j["params"] = {{"eps", p.numerics.mane.eps},
                   {"max_n", p.numerics.mane.max_n},
                   {"k_min", p.numerics.mane.k_min}};
    save_json(o, "mane.json", j);
    std::printf("mane: S=%s h=%s aubry(x)=%s\n",
                S.attained ? fmt(S.value).c_str() : "-inf",
                h.attained ? fmt(h.value).c_str() : "-inf", j["aubry_x"].get<bool>() ? "true" : "false");
    return 0;
}

int run_validate(const CommonOpts& o) {
    Problem p = load(o);
    auto audit = p.map.contraction_audit(1024);

    // involution residual smoke test on a few fixed probes
    KernelContext ctx = p.make_kernel_context();
    std::vector<std::string> probes = {"|1", "0|1", "01|10"};
    if (p.map.degree() > 2) probes = {"|1", "0|21", "02|10"};
    double worst = 0.0;
    ordered_json res = ordered_json::array();
    for (const std::string& s : probes) {
        EventuallyPeriodicPoint w = EventuallyPeriodicPoint::parse(s, p.map.degree());
        for (double x : {0.2, 0.8}) {
            double r = std::abs(involution_residual(ctx, w, x, 1.0, p.numerics.series_depth));
            worst = std::max(worst, r);
            res.push_back({{"omega", w.to_string()}, {"x", x}, {"residual", r}});
        }
    }

    bool pass = audit.ok && worst <= 1e-6;
    ordered_json j;
    j["contraction"] = {{"declared", audit.lambda_declared},
                        {"empirical", audit.lambda_empirical},
                        {"ok", audit.ok}};
    j["g_positive"] = true;  // checked at construction
    j["involution_residuals"] = res;
    j["max_involution_residual"] = worst;
    j["series_depth"] = p.numerics.series_depth;
    j["pass"] = pass;
    save_json(o, "validate.json", j);
    std::printf("validate: %s (lambda %s vs %s, max residual %s)\n", pass ? "PASS" : "FAIL",
                fmt(audit.lambda_empirical).c_str(), fmt(audit.lambda_declared).c_str(),
                fmt(worst).c_str());
    if (!pass) {
        diagnostic("error", "certified", "validation failed");
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"transfer-operator eigendata, involution kernels, dual potentials, and "
                 "calibrated subactions for full-branch expanding interval maps"};
    app.require_subcommand(1);

    CommonOpts eigen_o, anneal_o, sub_o, dual_o, kernel_o, piece_o, orbits_o, mane_o, val_o;
    double eigen_beta = 1.0;
    std::vector<double> anneal_schedule;
    std::string kernel_omega = "|1";
    double kernel_x = 0.5, kernel_beta = 1.0;
    int orbits_max_period = 0;
    double mane_x = 0.0, mane_y = 0.0;

    CLI::App* c_eigen = app.add_subcommand("eigen", "leading transfer-operator eigendata");
    add_common(c_eigen, eigen_o);
    c_eigen->add_option("--beta", eigen_beta, "inverse temperature")->capture_default_str();

    CLI::App* c_anneal = app.add_subcommand("anneal", "eigendata along a beta schedule");
    add_common(c_anneal, anneal_o);
    c_anneal->add_option("--schedule", anneal_schedule, "comma-separated betas")
        ->delimiter(',');

    CLI::App* c_sub = app.add_subcommand("subaction", "calibrated subaction on the interval");
    add_common(c_sub, sub_o);

    CLI::App* c_dual = app.add_subcommand("dual", "dual potential and shift-side subaction");
    add_common(c_dual, dual_o);

    CLI::App* c_kernel = app.add_subcommand("kernel", "involution kernel at one (omega, x)");
    add_common(c_kernel, kernel_o);
    c_kernel->add_option("--omega", kernel_omega, "eventually periodic point, head|cycle")
        ->capture_default_str();
    c_kernel->add_option("--x", kernel_x, "evaluation point")->capture_default_str();
    c_kernel->add_option("--beta", kernel_beta, "inverse temperature")->capture_default_str();

    CLI::App* c_piece = app.add_subcommand("piecewise", "piecewise-analytic subaction pipeline");
    add_common(c_piece, piece_o);

    CLI::App* c_orbits = app.add_subcommand("orbits", "periodic orbits by Birkhoff average");
    add_common(c_orbits, orbits_o);
    c_orbits->add_option("--max-period", orbits_max_period, "period cap (0 = config value)");

    CLI::App* c_mane = app.add_subcommand("mane", "Mane potential and Peierls barrier");
    add_common(c_mane, mane_o);
    c_mane->add_option("--x", mane_x, "chain target")->required();
    c_mane->add_option("--y", mane_y, "chain start")->required();

    CLI::App* c_val = app.add_subcommand("validate", "config and numeric smoke checks");
    add_common(c_val, val_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (c_eigen->parsed()) return run_eigen(eigen_o, eigen_beta);
        if (c_anneal->parsed()) return run_anneal(anneal_o, anneal_schedule);
        if (c_sub->parsed()) return run_subaction(sub_o);
        if (c_dual->parsed()) return run_dual(dual_o);
        if (c_kernel->parsed()) return run_kernel(kernel_o, kernel_omega, kernel_x, kernel_beta);
        if (c_piece->parsed()) return run_piecewise_cmd(piece_o);
        if (c_orbits->parsed()) return run_orbits(orbits_o, orbits_max_period);
        if (c_mane->parsed()) return run_mane(mane_o, mane_x, mane_y);
        if (c_val->parsed()) return run_validate(val_o);
    } catch (const RefusalError& e) {
        diagnostic("error", "refusal", e.what());
        return 2;
    } catch (const ConvergenceError& e) {
        diagnostic("error", "convergence", e.what());
        return 1;
    } catch (const ParseError& e) {
        diagnostic("error", "parse", e.what());
        return 1;
    } catch (const DomainError& e) {
        diagnostic("error", "domain", e.what());
        return 1;
    } catch (const ConfigError& e) {
        diagnostic("error", "config", e.what());
        return 1;
    } catch (const Error& e) {
        diagnostic("error", "internal", e.what());
        return 1;
    } catch (const std::exception& e) {
        diagnostic("error", "internal", e.what());
        return 1;
    }
    return 0;
}
