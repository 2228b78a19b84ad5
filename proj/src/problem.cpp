#include "ergopt/problem.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "ergopt/errors.hpp"
#include "ergopt/io_util.hpp"

#include "json.hpp"

namespace ergopt {

namespace {

using nlohmann::json;

// "_note" keys (and any key starting with "_note") carry human commentary and
// are ignored everywhere in the document.
bool is_note_key(const std::string& key) {
    return key.rfind("_note", 0) == 0;
}

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
    for (const auto& item : obj.items()) {
        if (is_note_key(item.key())) continue;
        if (!allowed.count(item.key()))
            throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
    }
}

const json* find(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double as_number(const json& value, const std::string& where) {
    if (!value.is_number())
        throw ConfigError(where + " must be a number");
    return value.get<double>();
}

int as_int(const json& value, const std::string& where) {
    if (!value.is_number_integer())
        throw ConfigError(where + " must be an integer");
    return value.get<int>();
}

std::string as_string(const json& value, const std::string& where) {
    if (!value.is_string())
        throw ConfigError(where + " must be a string");
    return value.get<std::string>();
}

ExpandingMap parse_map(const json& obj) {
    if (!obj.is_object()) throw ConfigError("\"map\" must be an object");
    require_keys(obj, "map", {"inverse_branches", "lambda", "orientation"});

    const json* branches = find(obj, "inverse_branches");
    if (!branches || !branches->is_array() || branches->size() < 2)
        throw ConfigError("map.inverse_branches must list at least two expressions");
    std::vector<Expression> psi;
    psi.reserve(branches->size());
    for (const json& b : *branches)
        psi.push_back(Expression::parse(as_string(b, "map.inverse_branches entry")));

    const json* lambda = find(obj, "lambda");
    if (!lambda) throw ConfigError("map.lambda is required");
    double lam = as_number(*lambda, "map.lambda");

    const json* orient = find(obj, "orientation");
    if (!orient) throw ConfigError("map.orientation is required");
    std::string o = as_string(*orient, "map.orientation");
    Orientation orientation;
    if (o == "preserving") orientation = Orientation::preserving;
    else if (o == "reversing") orientation = Orientation::reversing;
    else throw ConfigError("map.orientation must be \"preserving\" or \"reversing\"");

    return ExpandingMap(std::move(psi), lam, orientation);
}

Potential parse_potential(const json& obj) {
    if (!obj.is_object()) throw ConfigError("\"potential\" must be an object");
    require_keys(obj, "potential", {"g", "A"});
    const json* g = find(obj, "g");
    const json* A = find(obj, "A");
    if ((g != nullptr) == (A != nullptr))
        throw ConfigError("potential needs exactly one of \"g\" or \"A\"");
    if (g) return Potential::from_g(Expression::parse(as_string(*g, "potential.g")));
    return Potential::from_A(Expression::parse(as_string(*A, "potential.A")));
}

void parse_numerics(const json& obj, Numerics& num) {
    if (!obj.is_object()) throw ConfigError("\"numerics\" must be an object");
    require_keys(obj, "numerics",
                 {"grid_n", "lax_grid_n", "depth_cap", "series_depth",
                  "cylinder_depth", "beta_schedule", "tol", "max_period",
                  "N_bar", "tie_tol", "refine_tol", "scan_grid", "mane_eps",
                  "mane_max_n", "mane_k_min", "mane_node_budget"});
    if (const json* v = find(obj, "grid_n")) num.grid_n = as_int(*v, "numerics.grid_n");
    if (const json* v = find(obj, "lax_grid_n")) num.lax_grid_n = as_int(*v, "numerics.lax_grid_n");
    if (const json* v = find(obj, "depth_cap")) num.depth_cap = as_int(*v, "numerics.depth_cap");
    if (const json* v = find(obj, "series_depth")) num.series_depth = as_int(*v, "numerics.series_depth");
    if (const json* v = find(obj, "cylinder_depth")) num.cylinder_depth = as_int(*v, "numerics.cylinder_depth");
    if (const json* v = find(obj, "tol")) num.tol = as_number(*v, "numerics.tol");
    if (const json* v = find(obj, "max_period")) num.max_period = as_int(*v, "numerics.max_period");
    if (const json* v = find(obj, "N_bar")) num.n_bar = as_int(*v, "numerics.N_bar");
    if (const json* v = find(obj, "tie_tol")) num.tie_tol = as_number(*v, "numerics.tie_tol");
    if (const json* v = find(obj, "refine_tol")) num.refine_tol = as_number(*v, "numerics.refine_tol");
    if (const json* v = find(obj, "scan_grid")) num.scan_grid = as_int(*v, "numerics.scan_grid");
    if (const json* v = find(obj, "mane_eps")) num.mane.eps = as_number(*v, "numerics.mane_eps");
    if (const json* v = find(obj, "mane_max_n")) num.mane.max_n = as_int(*v, "numerics.mane_max_n");
    if (const json* v = find(obj, "mane_k_min")) num.mane.k_min = as_int(*v, "numerics.mane_k_min");
    if (const json* v = find(obj, "mane_node_budget"))
        num.mane.node_budget = as_int(*v, "numerics.mane_node_budget");
    if (const json* v = find(obj, "beta_schedule")) {
        if (!v->is_array() || v->empty())
            throw ConfigError("numerics.beta_schedule must be a non-empty array");
        num.beta_schedule.clear();
        for (const json& b : *v)
            num.beta_schedule.push_back(as_number(b, "numerics.beta_schedule entry"));
    }
}

} // namespace

Problem Problem::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    require_keys(doc, "config", {"map", "potential", "numerics", "anchors"});

    const json* map_obj = find(doc, "map");
    if (!map_obj) throw ConfigError("config needs a \"map\" section");
    const json* pot_obj = find(doc, "potential");
    if (!pot_obj) throw ConfigError("config needs a \"potential\" section");

    Problem p{parse_map(*map_obj), parse_potential(*pot_obj),
              1.0, EventuallyPeriodicPoint::parse("|1", 2), Numerics{}};
    // Default cycle anchor must live in the actual alphabet.
    if (p.map.degree() != 2)
        p.omega_bar = EventuallyPeriodicPoint::parse(
            "|" + std::to_string(p.map.degree() - 1), p.map.degree());

    if (const json* num = find(doc, "numerics")) parse_numerics(*num, p.numerics);

    if (const json* anchors = find(doc, "anchors")) {
        if (!anchors->is_object()) throw ConfigError("\"anchors\" must be an object");
        require_keys(*anchors, "anchors", {"x_bar", "omega_bar"});
        if (const json* v = find(*anchors, "x_bar"))
            p.x_bar = as_number(*v, "anchors.x_bar");
        if (const json* v = find(*anchors, "omega_bar"))
            p.omega_bar = EventuallyPeriodicPoint::parse(
                as_string(*v, "anchors.omega_bar"), p.map.degree());
    }

    if (p.x_bar < 0.0 || p.x_bar > 1.0)
        throw ConfigError("anchors.x_bar must lie in [0,1]");
    return p;
}

Problem Problem::from_file(const std::string& path) {
    return from_json_text(read_text_file(path));
}

KernelSettings Problem::kernel_settings() const {
    KernelSettings s;
    s.grid_n = numerics.grid_n;
    s.eigen_tol = numerics.tol;
    s.depth_cap = numerics.depth_cap;
    s.series_depth = numerics.series_depth;
    return s;
}

SubactionParams Problem::subaction_params() const {
    SubactionParams s;
    s.grid_n = numerics.lax_grid_n;
    s.tol = numerics.tol;
    return s;
}

DualParams Problem::dual_params() const {
    DualParams d;
    d.cylinder_depth = numerics.cylinder_depth;
    d.series_depth = numerics.series_depth;
    d.tol = numerics.tol;
    d.max_period = numerics.max_period;
    return d;
}

PiecewiseParams Problem::piecewise_params() const {
    PiecewiseParams p;
    p.n_bar = numerics.n_bar;
    p.tie_tol = numerics.tie_tol;
    p.scan_grid = numerics.scan_grid;
    p.refine_tol = numerics.refine_tol;
    p.max_period = numerics.max_period;
    p.beta_schedule = numerics.beta_schedule;
    p.eigen_grid = numerics.grid_n;
    p.dual = dual_params();
    p.lax = subaction_params();
    return p;
}

KernelContext Problem::make_kernel_context() const {
    return KernelContext(map, potential, x_bar, omega_bar, kernel_settings());
}

} // namespace ergopt
