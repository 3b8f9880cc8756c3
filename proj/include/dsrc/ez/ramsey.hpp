#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "dsrc/control/value.hpp"
#include "dsrc/ez/epstein_zin.hpp"
#include "dsrc/hjb/hamiltonian.hpp"
#include "dsrc/hjb/viscosity.hpp"

namespace dsrc {

/// Delayed Ramsey capital dynamics under a (pi, c) control:
///   dX = [K pi f(X_t) - c] dt + sigma(X_t) dW,
/// with Epstein-Zin recursive utility and terminal h. Control box
/// [a1, a2] x [b1, b2] for (pi, c).
struct RamseyModel {
    double productivity = 1.0;  // K
    std::function<double(const PathSegment&)> f;           // production input
    std::function<double(const PathSegment&)> sigma;       // volatility
    std::function<double(const PathSegment&)> h_terminal;  // terminal utility
    double a1 = 0.0, a2 = 1.0;  // pi bounds
    double b1 = 0.0, b2 = 1.0;  // c bounds
    double coefficient_lipschitz = 1.0;  // declared (A2) constant
};

/// Demo instance: scalar capital, production reading the lagged value
/// (clamped to [0, f_max]), bounded sigmoid volatility in the current
/// value, bounded terminal mapped into the aggregator domain (negative for
/// regime i, positive for regime ii).
inline RamseyModel ramsey_demo_instance(EzRegime regime, double sigma0 = 0.2,
                                        double f_max = 2.0) {
    RamseyModel m;
    m.productivity = 1.0;
    m.f = [f_max](const PathSegment& seg) {
        return std::clamp(seg.lagged_scalar(), 0.0, f_max);
    };
    m.sigma = [sigma0](const PathSegment& seg) {
        return sigma0 / (1.0 + std::exp(-seg.current_scalar()));
    };
    if (regime == EzRegime::I) {
        // (1-r) h > 0 with r > 1 needs h < 0.
        m.h_terminal = [](const PathSegment& seg) {
            return -0.4 - 0.4 * std::exp(-std::max(seg.current_scalar(), 0.0));
        };
    } else {
        m.h_terminal = [](const PathSegment& seg) {
            return 0.4 + 0.4 * (1.0 - std::exp(-std::max(seg.current_scalar(), 0.0)));
        };
    }
    m.a1 = 0.0;
    m.a2 = 1.0;
    m.b1 = 0.1;
    m.b2 = 1.0;
    // |db| <= K a2 Lf ||dgamma|| + K f_max |dpi| + |dc|, |dsigma| <= sigma0/4.
    m.coefficient_lipschitz = std::sqrt(2.0) * std::max(m.productivity * f_max, 1.0) +
                              m.productivity * m.a2 + sigma0;
    return m;
}

/// Assemble the control-system Model (coefficients + generator) for a
/// Ramsey instance under EZ preferences. Control layout: v = (pi, c).
/// Domain clamps are recorded in `stats` when provided; clean-mode runs
/// require zero clamps afterwards.
inline Model make_ez_model(const RamseyModel& ramsey, const EzParams& params,
                           std::shared_ptr<EzDomainStats> stats = nullptr,
                           double eps_dom = 1e-8, bool allow_clamp = true) {
    Model model;
    model.coefficients.state_dim = 1;
    model.coefficients.noise_dim = 1;
    const double K = ramsey.productivity;
    auto f = ramsey.f;
    auto sig = ramsey.sigma;
    model.coefficients.drift = [K, f](double, const PathSegment& seg, ControlValue v,
                                      std::span<double> out) {
        out[0] = K * v[0] * f(seg) - v[1];
    };
    model.coefficients.diffusion = [sig](double, const PathSegment& seg, ControlValue,
                                         std::span<double> out) {
        out[0] = sig(seg);
    };
    model.coefficients.lipschitz_L = ramsey.coefficient_lipschitz;

    auto h = ramsey.h_terminal;
    model.generator.phi = [h](const PathSegment& seg) { return h(seg); };
    model.generator.g = [params, stats, eps_dom, allow_clamp](
                            double, const PathSegment&, double y,
                            std::span<const double>, ControlValue v) {
        return ez_generator(params, y, v[1], eps_dom, stats.get(), allow_clamp);
    };
    model.generator.z_dependent = false;
    model.generator.monotone_mu = params.monotonicity_bound();
    model.generator.growth_M = 4.0 * params.vartheta *
                               (1.0 + std::abs(params.monotonicity_bound()));
    model.generator.growth_p = std::max(2.0, 1.0 + std::abs(params.theta()));
    model.generator.lipschitz_Ltilde = 1.0;
    return model;
}

/// Product lattice over the (pi, c) box.
inline ControlLattice ez_control_lattice(const RamseyModel& ramsey,
                                         const std::vector<double>& pi_values,
                                         const std::vector<double>& c_values,
                                         std::vector<double> switch_times) {
    ControlLattice lattice;
    for (double pi : pi_values)
        for (double c : c_values) lattice.values.push_back({pi, c});
    lattice.switch_times = std::move(switch_times);
    lattice.box_lo = {ramsey.a1, ramsey.b1};
    lattice.box_hi = {ramsey.a2, ramsey.b2};
    return lattice;
}

/// Value estimate plus per-interval argmax policy and clamp statistics.
struct EzSolveResult {
    ValueEstimate value;
    std::vector<std::vector<double>> policy;  // (pi, c) per switch interval
    std::size_t domain_clamps = 0;
    std::size_t generator_evaluations = 0;
    double min_transformed_utility = 0.0;  // min (1-r) Y seen by the aggregator
};

/// Full consumption-investment solve: lattice maximization of the EZ
/// recursive utility over the Ramsey dynamics. A clean-mode run fails if
/// any evaluation had to clamp the aggregator domain.
inline EzSolveResult solve_ez(const RamseyModel& ramsey, const EzParams& params,
                              const ControlLattice& lattice, const TimeGrid& grid,
                              const PathSegment& init, const McConfig& mc,
                              bool clean_mode = true) {
    const EzRegime regime = params.regime();
    if (regime == EzRegime::Other)
        throw ConfigError("solve_ez: parameters must lie in regime i or ii");
    if (regime != EzRegime::I && ramsey.b1 <= 0.0)
        throw ConfigError("solve_ez: b1 = 0 is only admissible in regime i");

    auto stats = std::make_shared<EzDomainStats>();
    const Model model = make_ez_model(ramsey, params, stats, 1e-8, true);

    EzSolveResult result;
    result.value = value_function(grid.t0(), init, model, grid, lattice, mc);

    const auto starts = lattice.intervals_from(grid.t0(), grid.horizon());
    const LatticeControl argmax(lattice, starts, result.value.argmax_control);
    for (std::size_t i = 0; i < starts.size(); ++i)
        result.policy.push_back(lattice.values[argmax.choices()[i]]);

    result.domain_clamps = stats->clamps.load();
    result.generator_evaluations = stats->evaluations.load();
    result.min_transformed_utility = stats->min_a;
    if (clean_mode && result.domain_clamps > 0)
        throw NumericError("solve_ez: clean-mode run recorded " +
                           std::to_string(result.domain_clamps) +
                           " domain clamps (min (1-r)Y = " +
                           std::to_string(result.min_transformed_utility) + ")");
    return result;
}

/// Residual table of the consumption-investment HJB equation for a
/// candidate value on a k-lag projection grid: at each interior grid point
/// the residual d/dt u + H(t, gamma, u, Du, D2u) with derivatives taken by
/// central finite differences on the supplied grid.
struct EzHjbResidualRow {
    double t = 0.0;
    std::vector<double> coords;
    double residual = 0.0;
    bool interior = true;
};

struct EzHjbResidualReport {
    std::vector<EzHjbResidualRow> rows;
    double max_interior_residual = 0.0;
    double max_terminal_gap = 0.0;  // max |u(T, gamma) - h(gamma)|
};

inline EzHjbResidualReport ez_hjb_residual(
    const RamseyModel& ramsey, const EzParams& params, const ProjectedFn& candidate,
    const LagProjection& proj, const ControlLattice& lattice,
    const std::vector<double>& t_nodes,
    const std::vector<std::vector<double>>& coord_probes, double fd_t, double fd_x) {
    if (params.regime() == EzRegime::Other)
        throw ConfigError("ez_hjb_residual: parameters must lie in regime i or ii");
    const Model model = make_ez_model(ramsey, params, nullptr, 1e-8, false);
    const std::size_t k = proj.coord_dim();
    EzHjbResidualReport report;

    const double t_lo = t_nodes.front();
    const double t_hi = t_nodes.back();
    std::vector<double> grad(k), hess(k * k);
    for (double t : t_nodes) {
        const bool interior = (t > t_lo) && (t < t_hi);
        for (const auto& coords : coord_probes) {
            EzHjbResidualRow row;
            row.t = t;
            row.coords = coords;
            row.interior = interior;
            if (t == t_hi) {
                const PathSegment seg = proj.embed(t, coords);
                const double gap = std::abs(candidate(t, coords) -
                                            model.generator.phi(seg));
                report.max_terminal_gap = std::max(report.max_terminal_gap, gap);
            }
            // Central differences for du/dt, Du, D2u on the probe grid.
            const double du_dt =
                (candidate(t + fd_t, coords) - candidate(t - fd_t, coords)) /
                (2.0 * fd_t);
            std::vector<double> xp(coords), xm(coords);
            for (std::size_t i = 0; i < k; ++i) {
                xp = coords;
                xm = coords;
                xp[i] += fd_x;
                xm[i] -= fd_x;
                grad[i] = (candidate(t, xp) - candidate(t, xm)) / (2.0 * fd_x);
                hess[i * k + i] = (candidate(t, xp) - 2.0 * candidate(t, coords) +
                                   candidate(t, xm)) /
                                  (fd_x * fd_x);
                for (std::size_t j = i + 1; j < k; ++j) {
                    std::vector<double> xpp = coords, xpm = coords, xmp = coords,
                                        xmm = coords;
                    xpp[i] += fd_x; xpp[j] += fd_x;
                    xpm[i] += fd_x; xpm[j] -= fd_x;
                    xmp[i] -= fd_x; xmp[j] += fd_x;
                    xmm[i] -= fd_x; xmm[j] -= fd_x;
                    const double mixed =
                        (candidate(t, xpp) - candidate(t, xpm) - candidate(t, xmp) +
                         candidate(t, xmm)) /
                        (4.0 * fd_x * fd_x);
                    hess[i * k + j] = mixed;
                    hess[j * k + i] = mixed;
                }
            }
            const PathSegment seg = proj.embed(t, coords);
            const SymMatrix A{k, hess};
            row.residual = du_dt + hamiltonian(t, seg, candidate(t, coords), grad, A,
                                               model, lattice, proj);
            if (interior)
                report.max_interior_residual =
                    std::max(report.max_interior_residual, std::abs(row.residual));
            report.rows.push_back(row);
        }
    }
    return report;
}

} // namespace dsrc
