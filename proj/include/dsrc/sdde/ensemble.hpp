#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dsrc/core/control_lattice.hpp"
#include "dsrc/core/errors.hpp"
#include "dsrc/core/rng.hpp"
#include "dsrc/core/specs.hpp"
#include "dsrc/core/time_grid.hpp"
#include "dsrc/util/parallel.hpp"

namespace dsrc {

/// Monte Carlo ensemble of Euler-Maruyama paths of the controlled delay
/// equation. States are stored for every node of [t0 - delta, T]; history
/// nodes repeat the initial segment. Brownian increments are addressed by
/// (seed, path, step), so the ensemble is reproducible path-by-path.
struct PathEnsemble {
    TimeGrid grid;
    std::size_t n_paths = 0;
    std::size_t state_dim = 1;
    std::size_t noise_dim = 1;
    std::uint64_t seed = 0;
    std::vector<double> states;     // [path][node][component]
    std::vector<double> increments; // [path][step][noise component]

    double state(std::size_t path, std::size_t node, std::size_t comp) const {
        return states[(path * grid.n_nodes() + node) * state_dim + comp];
    }

    std::span<const double> state_at(std::size_t path, std::size_t node) const {
        return {states.data() + (path * grid.n_nodes() + node) * state_dim, state_dim};
    }

    double increment(std::size_t path, std::size_t step, std::size_t comp) const {
        return increments[(path * grid.n_steps() + step) * noise_dim + comp];
    }
};

/// Copy the window of lag_steps + 1 samples ending at `node` into `out`.
/// Allocation-free when `out` is reused across calls.
inline void fill_segment(const PathEnsemble& ens, std::size_t path,
                         std::size_t node, PathSegment& out) {
    const std::size_t lag = ens.grid.lag_steps();
    if (node < lag || node > ens.grid.end_node())
        throw ConfigError("segment_at: node " + std::to_string(node) +
                          " has no full window in the stored range");
    out.anchor = ens.grid.node(node);
    out.step = ens.grid.step();
    out.dim = ens.state_dim;
    out.values.resize((lag + 1) * ens.state_dim);
    const double* src =
        ens.states.data() + (path * ens.grid.n_nodes() + node - lag) * ens.state_dim;
    std::copy(src, src + (lag + 1) * ens.state_dim, out.values.begin());
}

/// Segment of path `path` ending at `node` (a copy; see fill_segment for
/// the reusable-buffer form).
inline PathSegment segment_at(const PathEnsemble& ens, std::size_t path,
                              std::size_t node) {
    PathSegment seg;
    fill_segment(ens, path, node, seg);
    return seg;
}

/// Segment fill that reads from a raw per-path state block (used inside the
/// simulation loop before the ensemble is complete).
inline void fill_segment_raw(const PathEnsemble& ens, const double* path_states,
                             std::size_t node, PathSegment& out) {
    const std::size_t lag = ens.grid.lag_steps();
    out.anchor = ens.grid.node(node);
    out.step = ens.grid.step();
    out.dim = ens.state_dim;
    out.values.resize((lag + 1) * ens.state_dim);
    const double* src = path_states + (node - lag) * ens.state_dim;
    std::copy(src, src + (lag + 1) * ens.state_dim, out.values.begin());
}

/// Euler-Maruyama simulation of the controlled SDDE from a deterministic
/// initial segment anchored at grid start. Segment and control arguments
/// enter through their left-endpoint values. Any non-finite state aborts
/// with the offending path and step.
inline PathEnsemble simulate(const CoefficientSpec& coeffs, const PathSegment& init,
                             const LatticeControl& control, const TimeGrid& grid,
                             std::size_t n_paths, std::uint64_t seed,
                             unsigned threads = 1) {
    if (n_paths == 0) throw ConfigError("simulate: need at least one path");
    if (init.lag_steps() != grid.lag_steps())
        throw ConfigError("simulate: initial segment lag does not match grid");
    if (init.dim != coeffs.state_dim)
        throw ConfigError("simulate: initial segment dimension mismatch");
    if (std::abs(init.anchor - grid.t0()) > 1e-12)
        throw ConfigError("simulate: initial segment must be anchored at t0");

    PathEnsemble ens{grid, n_paths, coeffs.state_dim, coeffs.noise_dim, seed, {}, {}};
    const std::size_t nodes = grid.n_nodes();
    const std::size_t steps = grid.n_steps();
    const std::size_t n = coeffs.state_dim;
    const std::size_t d = coeffs.noise_dim;
    ens.states.resize(n_paths * nodes * n);
    ens.increments.resize(n_paths * steps * d);
    const double h = grid.step();
    const double sqrt_h = std::sqrt(h);

    parallel_for(n_paths, threads, [&](std::size_t p) {
        double* path_states = ens.states.data() + p * nodes * n;
        double* path_incr = ens.increments.data() + p * steps * d;

        // History window frozen to the initial segment.
        std::copy(init.values.begin(), init.values.end(), path_states);

        PathSegment seg;  // reused across steps
        std::vector<double> b(n), sig(n * d);
        for (std::size_t k = 0; k < steps; ++k) {
            const std::size_t node = grid.start_node() + k;
            const double t = grid.node(node);
            fill_segment_raw(ens, path_states, node, seg);
            const auto v = control.at(t);
            coeffs.drift(t, seg, v, b);
            coeffs.diffusion(t, seg, v, sig);
            for (std::size_t j = 0; j < d; ++j)
                path_incr[k * d + j] = sqrt_h * normal_draw(seed, p, k, j);

            const double* x = path_states + node * n;
            double* x_next = path_states + (node + 1) * n;
            for (std::size_t c = 0; c < n; ++c) {
                double dx = b[c] * h;
                for (std::size_t j = 0; j < d; ++j)
                    dx += sig[c * d + j] * path_incr[k * d + j];
                x_next[c] = x[c] + dx;
                if (!std::isfinite(x_next[c]))
                    throw NumericError("simulate: non-finite state at path " +
                                       std::to_string(p) + ", step " +
                                       std::to_string(k) + " (coefficient blow-up)");
            }
        }
    });
    return ens;
}

/// Monte Carlo estimate of E[ sup_s ||X_s||_C^{2q} ]: per path, the maximum
/// node norm over the whole stored range, raised to 2q, then averaged.
inline double moment_estimate(const PathEnsemble& ens, double q) {
    if (ens.n_paths == 0) throw ConfigError("moment_estimate: empty ensemble");
    if (q < 1.0) throw ConfigError("moment_estimate: need q >= 1");
    double acc = 0.0;
    for (std::size_t p = 0; p < ens.n_paths; ++p) {
        double sup = 0.0;
        for (std::size_t k = 0; k < ens.grid.n_nodes(); ++k) {
            double s = 0.0;
            for (double v : ens.state_at(p, k)) s += v * v;
            sup = std::max(sup, s);  // squared norm
        }
        acc += std::pow(sup, q);  // (||X||^2)^q = ||X||^{2q}
    }
    return acc / static_cast<double>(ens.n_paths);
}

/// One probe pair result of the initial-condition Lipschitz study.
struct LipschitzProbe {
    double distance = 0.0;  // ||gamma - gamma'||_C
    double ratio = 0.0;     // max_s sqrt(E ||X_s - X'_s||^2) / distance
    bool skipped = false;   // identical pair
};

struct LipschitzProbeReport {
    std::vector<LipschitzProbe> pairs;
    double max_ratio = 0.0;
    std::size_t skipped = 0;
};

/// Empirical version of the flow estimate E||X_s - X'_s||^2 <= C ||g-g'||^2:
/// simulates both members of each pair with common random numbers and
/// reports max over s in [t0, T] of the L2 segment distance over the
/// initial distance. Tests assert boundedness across refinements.
inline LipschitzProbeReport initial_lipschitz_probe(
    const CoefficientSpec& coeffs, const TimeGrid& grid, const LatticeControl& control,
    const std::vector<std::pair<PathSegment, PathSegment>>& pairs,
    std::size_t n_paths, std::uint64_t seed, unsigned threads = 1) {
    LipschitzProbeReport report;
    for (const auto& [ga, gb] : pairs) {
        LipschitzProbe probe;
        probe.distance = sup_norm_distance(ga, gb);
        if (probe.distance == 0.0) {
            probe.skipped = true;
            ++report.skipped;
            report.pairs.push_back(probe);
            continue;
        }
        const PathEnsemble ea = simulate(coeffs, ga, control, grid, n_paths, seed, threads);
        const PathEnsemble eb = simulate(coeffs, gb, control, grid, n_paths, seed, threads);
        double worst = 0.0;
        PathSegment sa, sb;
        for (std::size_t node = grid.start_node(); node <= grid.end_node(); ++node) {
            double mean_sq = 0.0;
            for (std::size_t p = 0; p < n_paths; ++p) {
                fill_segment(ea, p, node, sa);
                fill_segment(eb, p, node, sb);
                const double dist = sup_norm_distance(sa, sb);
                mean_sq += dist * dist;
            }
            mean_sq /= static_cast<double>(n_paths);
            worst = std::max(worst, std::sqrt(mean_sq));
        }
        probe.ratio = worst / probe.distance;
        report.max_ratio = std::max(report.max_ratio, probe.ratio);
        report.pairs.push_back(probe);
    }
    return report;
}

} // namespace dsrc
