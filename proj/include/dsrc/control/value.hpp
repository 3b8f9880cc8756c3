#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dsrc/bsde/solver.hpp"
#include "dsrc/core/control_lattice.hpp"
#include "dsrc/core/errors.hpp"
#include "dsrc/core/specs.hpp"
#include "dsrc/sdde/ensemble.hpp"

namespace dsrc {

/// Monte Carlo budgets and scheme knobs shared by the control-layer
/// operations. Identical configs and seeds give bit-identical results for
/// any thread count.
struct McConfig {
    std::size_t n_paths = 1000;
    std::uint64_t seed = 1;
    std::size_t basis_degree = 2;
    unsigned threads = 1;
    double newton_tol = 1e-12;
    std::size_t newton_max_iter = 100;
    BsdeScheme scheme = BsdeScheme::ImplicitY;

    /// Cap on enumerated lattice controls per maximization.
    std::size_t enumeration_budget = 4096;
    /// Inner budgets for nested estimation (dpp_residual).
    std::size_t inner_paths = 100;
    /// Cap on pre-estimated total path-steps of a nested computation.
    double cost_cap = 5e9;

    BsdeConfig bsde() const {
        BsdeConfig c;
        c.scheme = scheme;
        c.basis_degree = basis_degree;
        c.newton_tol = newton_tol;
        c.newton_max_iter = newton_max_iter;
        c.threads = threads;
        return c;
    }
};

struct CostValue {
    double value = 0.0;
    double stderr_estimate = 0.0;
};

/// Recursive cost J(t, gamma; v): simulate forward from (t, gamma) under
/// the control, solve the BSDE backward, return the initial value.
inline CostValue cost_functional(double t, const PathSegment& seg,
                                 const LatticeControl& control, const Model& model,
                                 const TimeGrid& grid, const McConfig& mc) {
    if (std::abs(seg.anchor - t) > 1e-12)
        throw ConfigError("cost_functional: segment must be anchored at t");
    if (grid.index_of(t) == grid.end_node())
        return {model.generator.phi(seg), 0.0};  // J(T, gamma; v) = Phi(gamma)
    const TimeGrid sub = (t == grid.t0()) ? grid : grid.window(t, grid.horizon());
    PathSegment init = seg;
    init.anchor = sub.t0();
    const PathEnsemble ens = simulate(model.coefficients, init, control, sub,
                                      mc.n_paths, mc.seed, mc.threads);
    const BsdeSolution sol = solve(ens, model.generator, control, mc.bsde());
    const InitialValue iv = initial_value(sol);
    return {iv.value, iv.stderr_estimate};
}

/// Value estimate at (t, gamma): exhaustive maximum of J over the
/// enumerated lattice controls.
struct ValueEstimate {
    double t = 0.0;
    PathSegment segment;
    double value = 0.0;
    std::size_t argmax_control = 0;  // enumeration index; ties break low
    double stderr_estimate = 0.0;
    std::size_t controls_enumerated = 0;
    std::string config_hash;  // filled by the CLI layer
};

/// Max over the enumerated lattice, common random numbers across controls
/// (one seed for every candidate). Enumeration beyond the declared budget
/// is rejected up front with the count.
inline ValueEstimate value_function(double t, const PathSegment& seg,
                                    const Model& model, const TimeGrid& grid,
                                    const ControlLattice& lattice,
                                    const McConfig& mc) {
    lattice.validate();
    const double count = lattice.enumeration_count(t, grid.horizon());
    if (count > static_cast<double>(mc.enumeration_budget))
        throw BudgetError("value_function: lattice enumeration of " +
                              std::to_string(static_cast<std::uint64_t>(count)) +
                              " controls exceeds budget " +
                              std::to_string(mc.enumeration_budget),
                          count);
    const auto starts = lattice.intervals_from(t, grid.horizon());
    const std::size_t n_controls = static_cast<std::size_t>(count);

    ValueEstimate best;
    best.t = t;
    best.segment = seg;
    best.controls_enumerated = n_controls;
    for (std::size_t e = 0; e < n_controls; ++e) {
        const LatticeControl control(lattice, starts, e);
        const CostValue j = cost_functional(t, seg, control, model, grid, mc);
        if (e == 0 || j.value > best.value) {
            best.value = j.value;
            best.argmax_control = e;
            best.stderr_estimate = j.stderr_estimate;
        }
    }
    return best;
}

} // namespace dsrc
