#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dsrc/control/value.hpp"
#include "dsrc/core/rng.hpp"

namespace dsrc {

/// Backward semigroup G_{theta,s}[xi]: the BSDE solved on window steps
/// [theta_j, s_j] of the ensemble with per-path terminal data xi instead of
/// Phi(X_T). Returns the per-path values at theta_j. With xi = Y(s) this
/// reproduces Y(theta) exactly (the backward recursion has no cross-step
/// state, so composition is the identity on the scheme).
inline std::vector<double> backward_semigroup(const PathEnsemble& ens,
                                              const GeneratorSpec& gen,
                                              const LatticeControl& control,
                                              std::size_t theta_j, std::size_t s_j,
                                              std::span<const double> xi,
                                              const BsdeConfig& config = {}) {
    if (theta_j > s_j) throw ConfigError("backward_semigroup: need theta <= s");
    for (double v : xi)
        if (!std::isfinite(v))
            throw ConfigError("backward_semigroup: non-finite terminal data");
    if (theta_j == s_j) return {xi.begin(), xi.end()};  // empty interval: G[xi] = xi
    const BsdeSolution sol = solve_window(ens, gen, control, theta_j, s_j, xi, config);
    std::vector<double> out(ens.n_paths);
    for (std::size_t p = 0; p < ens.n_paths; ++p) out[p] = sol.y_at(p, theta_j);
    return out;
}

/// Numerical dynamic-programming-principle residual at (t, gamma, tau).
struct DppResult {
    double residual = 0.0;
    double lhs = 0.0;           // value_function(t, gamma)
    double rhs = 0.0;           // max_v mean G_{t,t+tau}[ u(t+tau, X_{t+tau}) ]
    double lhs_stderr = 0.0;
    double rhs_stderr = 0.0;
    double estimated_cost = 0.0;  // path-steps, as gated against the cap
};

/// lhs: plain lattice maximization at (t, gamma). rhs: for each lattice
/// control on [t, t+tau], simulate outer paths, estimate the inner value
/// u(t+tau, X_{t+tau}) path-wise by a nested lattice maximization with
/// inner_paths, and roll it back through the backward semigroup; maximize
/// the mean. tau = 0 collapses to the s = theta identity and returns an
/// exact zero residual.
inline DppResult dpp_residual(double t, const PathSegment& seg, double tau,
                              const Model& model, const TimeGrid& grid,
                              const ControlLattice& lattice, const McConfig& mc) {
    if (tau < 0.0 || t + tau > grid.horizon() + 1e-12)
        throw ConfigError("dpp_residual: need 0 <= tau <= T - t");
    const ValueEstimate lhs = value_function(t, seg, model, grid, lattice, mc);

    DppResult result;
    result.lhs = lhs.value;
    result.lhs_stderr = lhs.stderr_estimate;
    if (tau == 0.0) {
        result.rhs = lhs.value;
        result.rhs_stderr = lhs.stderr_estimate;
        result.residual = 0.0;
        return result;
    }

    const double t_mid = t + tau;
    const std::size_t mid_index = grid.index_of(t_mid);  // validates grid multiple
    const TimeGrid outer_grid = grid.window(t, t_mid);
    const std::size_t outer_steps = outer_grid.n_steps();

    const auto outer_starts = lattice.intervals_from(t, t_mid);
    const double n_outer = lattice.enumeration_count(t, t_mid);
    const double n_inner = (mid_index == grid.end_node())
                               ? 0.0
                               : lattice.enumeration_count(t_mid, grid.horizon());
    const double inner_steps =
        static_cast<double>(grid.end_node() - mid_index);

    // Pre-estimated cost in path-steps: outer simulations plus the nested
    // inner solves (simulate + backward sweep each, hence the factor 2).
    result.estimated_cost =
        n_outer * static_cast<double>(mc.n_paths) *
        (static_cast<double>(outer_steps) +
         n_inner * static_cast<double>(mc.inner_paths) * inner_steps * 2.0);
    if (result.estimated_cost > mc.cost_cap)
        throw BudgetError("dpp_residual: estimated cost " +
                              std::to_string(result.estimated_cost) +
                              " path-steps exceeds cap " + std::to_string(mc.cost_cap),
                          result.estimated_cost);
    if (n_outer > static_cast<double>(mc.enumeration_budget))
        throw BudgetError("dpp_residual: outer enumeration exceeds budget", n_outer);

    // Inner solves run single-threaded inside a parallel outer-path loop;
    // xi slots are disjoint, so threading cannot change the result.
    McConfig inner_mc = mc;
    inner_mc.n_paths = mc.inner_paths;
    inner_mc.threads = 1;

    PathSegment init = seg;
    init.anchor = outer_grid.t0();

    double best = 0.0, best_se = 0.0;
    bool first = true;
    for (std::size_t e = 0; e < static_cast<std::size_t>(n_outer); ++e) {
        const LatticeControl outer_control(lattice, outer_starts, e);
        const PathEnsemble ens = simulate(model.coefficients, init, outer_control,
                                          outer_grid, mc.n_paths, mc.seed, mc.threads);
        std::vector<double> xi(mc.n_paths);
        parallel_for(mc.n_paths, mc.threads, [&](std::size_t p) {
            PathSegment mid_seg;
            fill_segment(ens, p, ens.grid.end_node(), mid_seg);
            // Inner seed depends on (outer seed, path) only, so the same
            // inner noise is reused across outer candidates.
            McConfig path_mc = inner_mc;
            path_mc.seed = counter_hash(mc.seed, 0x696e6e6572ULL, p, 0);
            xi[p] = value_function(t_mid, mid_seg, model, grid, lattice, path_mc).value;
        });
        const std::vector<double> g_values = backward_semigroup(
            ens, model.generator, outer_control, 0, outer_steps, xi, mc.bsde());
        double mean = 0.0;
        for (double v : g_values) mean += v;
        mean /= static_cast<double>(mc.n_paths);

        // Error indicator for the nested estimate: dispersion of the rolled
        // values when they keep cross-path spread, and dispersion of the
        // terminal data when the final conditional expectation collapses
        // them (the inner-value noise still averages into the mean).
        auto spread_se = [&](const std::vector<double>& values) {
            double m = 0.0;
            for (double v : values) m += v;
            m /= static_cast<double>(values.size());
            double ss = 0.0;
            for (double v : values) ss += (v - m) * (v - m);
            return values.size() > 1
                       ? std::sqrt(ss / static_cast<double>(values.size() - 1) /
                                   static_cast<double>(values.size()))
                       : 0.0;
        };
        const double se = std::max(spread_se(g_values), spread_se(xi));
        if (first || mean > best) {
            best = mean;
            best_se = se;
            first = false;
        }
    }
    result.rhs = best;
    result.rhs_stderr = best_se;
    result.residual = std::abs(result.lhs - result.rhs);
    return result;
}

/// Empirical regularity of the value function: Lipschitz ratios over probe
/// pairs sharing the anchor, and growth ratios |u| / (1 + ||gamma||).
struct RegularityReport {
    double max_lipschitz_ratio = 0.0;
    double max_growth_ratio = 0.0;
    std::vector<double> lipschitz_ratios;
    std::vector<double> growth_ratios;
    std::size_t skipped_pairs = 0;
};

inline RegularityReport value_regularity_probe(
    double t, const std::vector<std::pair<PathSegment, PathSegment>>& pairs,
    const Model& model, const TimeGrid& grid, const ControlLattice& lattice,
    const McConfig& mc) {
    RegularityReport report;
    for (const auto& [ga, gb] : pairs) {
        const ValueEstimate ua = value_function(t, ga, model, grid, lattice, mc);
        report.growth_ratios.push_back(std::abs(ua.value) / (1.0 + sup_norm(ga)));
        const double dist = sup_norm_distance(ga, gb);
        if (dist == 0.0) {
            ++report.skipped_pairs;
            continue;
        }
        const ValueEstimate ub = value_function(t, gb, model, grid, lattice, mc);
        report.growth_ratios.push_back(std::abs(ub.value) / (1.0 + sup_norm(gb)));
        report.lipschitz_ratios.push_back(std::abs(ua.value - ub.value) / dist);
    }
    for (double r : report.lipschitz_ratios)
        report.max_lipschitz_ratio = std::max(report.max_lipschitz_ratio, r);
    for (double r : report.growth_ratios)
        report.max_growth_ratio = std::max(report.max_growth_ratio, r);
    return report;
}

} // namespace dsrc
