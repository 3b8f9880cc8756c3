#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "dsrc/control/value.hpp"
#include "dsrc/core/errors.hpp"
#include "dsrc/model/registry.hpp"
#include "dsrc/util/hash.hpp"

namespace dsrc {

using Json = nlohmann::json;

/// One scenario: grid, model, initial data, lattice, Monte Carlo budgets,
/// plus the raw `run` block for subcommand-specific knobs. The config hash
/// covers everything that affects numerical output: the parallelism degree
/// and output paths are excluded, so runs that differ only in those are
/// byte-identical.
struct ScenarioConfig {
    Json root;
    TimeGrid grid = make_grid_no_delay(0.0, 1.0, 0.1);
    Model model;
    PathSegment initial;
    ControlLattice lattice;
    McConfig mc;
    std::string config_hash;
    std::string output_dir = "out";

    const Json& run() const {
        static const Json empty = Json::object();
        auto it = root.find("run");
        return it == root.end() ? empty : *it;
    }
};

namespace detail {

inline ParamMap param_map(const Json& j) {
    ParamMap out;
    if (j.is_null()) return out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_number())
            throw ConfigError("parameter '" + it.key() + "' must be a number");
        out[it.key()] = it.value().get<double>();
    }
    return out;
}

inline TimeGrid parse_grid(const Json& j) {
    if (!j.is_object()) throw ConfigError("model.grid must be an object");
    const double t0 = j.value("t0", 0.0);
    const double horizon = j.at("T").get<double>();
    const double delta = j.value("delta", 0.0);
    if (delta == 0.0) {
        if (!j.contains("h"))
            throw ConfigError("model.grid: delta = 0 requires an explicit h");
        return make_grid_no_delay(t0, horizon, j.at("h").get<double>());
    }
    return make_grid(t0, horizon, delta, j.value("lag_steps", std::size_t{1}),
                     j.value("steps_per_lag", std::size_t{1}));
}

inline PathSegment parse_initial(const Json& j, const TimeGrid& grid) {
    if (j.contains("constant"))
        return PathSegment::constant_initial(grid, j.at("constant").get<double>());
    if (j.contains("values")) {
        const auto vals = j.at("values").get<std::vector<double>>();
        if (vals.size() != grid.lag_steps() + 1)
            throw ConfigError("model.initial.values needs lag_steps + 1 samples");
        PathSegment seg;
        seg.anchor = grid.t0();
        seg.step = grid.step();
        seg.dim = 1;
        seg.values = vals;
        return seg;
    }
    throw ConfigError("model.initial needs 'constant' or 'values'");
}

inline ControlLattice parse_lattice(const Json& j, const TimeGrid& grid) {
    ControlLattice lattice;
    if (j.is_null()) {
        lattice = singleton_lattice({0.0}, grid.t0());
        return lattice;
    }
    lattice.values = j.at("values").get<std::vector<std::vector<double>>>();
    lattice.switch_times =
        j.value("switch_times", std::vector<double>{grid.t0()});
    lattice.box_lo = j.value("box_lo", std::vector<double>{});
    lattice.box_hi = j.value("box_hi", std::vector<double>{});
    lattice.validate();
    return lattice;
}

inline McConfig parse_mc(const Json& j) {
    McConfig mc;
    if (j.is_null()) return mc;
    mc.n_paths = j.value("n_paths", mc.n_paths);
    mc.seed = j.value("seed", mc.seed);
    mc.basis_degree = j.value("basis_degree", mc.basis_degree);
    mc.threads = j.value("threads", mc.threads);
    mc.newton_tol = j.value("newton_tol", mc.newton_tol);
    mc.newton_max_iter = j.value("newton_max_iter", mc.newton_max_iter);
    mc.enumeration_budget = j.value("enumeration_budget", mc.enumeration_budget);
    mc.inner_paths = j.value("inner_paths", mc.inner_paths);
    mc.cost_cap = j.value("cost_cap", mc.cost_cap);
    const std::string scheme = j.value("scheme", std::string("implicit"));
    if (scheme == "implicit") mc.scheme = BsdeScheme::ImplicitY;
    else if (scheme == "explicit") mc.scheme = BsdeScheme::ExplicitY;
    else throw ConfigError("mc.scheme must be 'implicit' or 'explicit'");
    return mc;
}

} // namespace detail

/// Canonical text for hashing: the effective config minus the knobs that
/// must not change numerical content (parallelism, output paths).
inline std::string canonical_config_text(Json root) {
    if (root.contains("mc") && root["mc"].contains("threads"))
        root["mc"].erase("threads");
    root.erase("output");
    return root.dump();  // nlohmann objects are key-sorted: deterministic
}

/// Build a scenario from parsed JSON (already merged with CLI overrides).
inline ScenarioConfig scenario_from_json(Json root) {
    ScenarioConfig cfg;
    if (!root.is_object()) throw ConfigError("scenario config must be a JSON object");
    const Json& model = root.at("model");
    cfg.grid = detail::parse_grid(model.at("grid"));

    const Json& coeff = model.at("coefficients");
    cfg.model.coefficients = make_coefficients(
        coeff.at("name").get<std::string>(),
        detail::param_map(coeff.value("params", Json())));

    const Json& terminal = model.at("terminal");
    TerminalFn phi = make_terminal(terminal.at("name").get<std::string>(),
                                   detail::param_map(terminal.value("params", Json())));
    const Json& generator = model.at("generator");
    cfg.model.generator = make_generator(
        generator.at("name").get<std::string>(),
        detail::param_map(generator.value("params", Json())), std::move(phi));

    cfg.initial = detail::parse_initial(model.at("initial"), cfg.grid);
    cfg.lattice = detail::parse_lattice(model.value("lattice", Json()), cfg.grid);
    cfg.mc = detail::parse_mc(root.value("mc", Json()));
    if (root.contains("output") && root["output"].contains("dir"))
        cfg.output_dir = root["output"]["dir"].get<std::string>();
    cfg.config_hash = config_digest(canonical_config_text(root));
    cfg.root = std::move(root);
    return cfg;
}

/// Load a scenario file. Parse errors surface as ConfigError.
inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    Json root;
    try {
        root = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("malformed scenario file " + path + ": " + e.what());
    }
    return scenario_from_json(std::move(root));
}

} // namespace dsrc
