#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "dsrc/bsde/regression.hpp"
#include "dsrc/core/control_lattice.hpp"
#include "dsrc/core/errors.hpp"
#include "dsrc/core/specs.hpp"
#include "dsrc/sdde/ensemble.hpp"
#include "dsrc/util/parallel.hpp"

namespace dsrc {

enum class BsdeScheme {
    ImplicitY,  // implicit in Y; tolerates monotone non-Lipschitz drivers
    ExplicitY   // negative control: explicit Euler in Y
};

struct BsdeConfig {
    BsdeScheme scheme = BsdeScheme::ImplicitY;
    std::size_t basis_degree = 2;
    double newton_tol = 1e-12;
    std::size_t newton_max_iter = 100;
    unsigned threads = 1;
};

struct NewtonStats {
    std::size_t solves = 0;
    std::size_t total_iterations = 0;
    std::size_t max_iterations = 0;
};

/// Solve y = a + h * g(t, seg, y, z, v) for the unique root. Monotonicity
/// (A5) with h * max(0, mu) < 1 makes y -> y - h*g strictly increasing, so
/// the root is bracketed and safeguarded Newton (bisection fallback) cannot
/// escape. Residual target is tol * max(1, |a|).
inline double implicit_scalar_step(double a, double t, const PathSegment& seg,
                                   std::span<const double> z, ControlValue v,
                                   const GeneratorSpec& gen, double h,
                                   double tol = 1e-12, std::size_t max_iter = 100,
                                   NewtonStats* stats = nullptr) {
    if (h * std::max(0.0, gen.monotone_mu) >= 1.0)
        throw ConfigError("implicit step: need h * max(0, mu) < 1 (h=" +
                          std::to_string(h) + ", mu=" +
                          std::to_string(gen.monotone_mu) + ")");
    auto residual = [&](double y) {
        const double gy = gen.g(t, seg, y, z, v);
        if (!std::isfinite(gy))
            throw NumericError("implicit step: generator returned non-finite value");
        return y - h * gy - a;
    };
    const double target = tol * std::max(1.0, std::abs(a));
    std::size_t iterations = 0;
    auto done = [&](double r) { return std::abs(r) <= target; };

    double y = a;
    double r = residual(y);
    if (!done(r)) {
        // Bracket the root; residual is strictly increasing in y.
        double lo = y, hi = y, r_lo = r, r_hi = r;
        double w = 0.5 * std::max(1.0, std::abs(a));
        for (std::size_t k = 0; r_lo > 0.0 || r_hi < 0.0; ++k) {
            if (k >= 200)
                throw NumericError("implicit step: failed to bracket the root");
            if (r_lo > 0.0) {
                lo -= w;
                r_lo = residual(lo);
            }
            if (r_hi < 0.0) {
                hi += w;
                r_hi = residual(hi);
            }
            w *= 2.0;
        }
        y = 0.5 * (lo + hi);
        for (;; ++iterations) {
            if (iterations >= max_iter)
                throw NumericError("implicit step: no convergence within " +
                                   std::to_string(max_iter) + " iterations (residual " +
                                   std::to_string(r) + ")");
            r = residual(y);
            if (done(r)) break;
            if (r > 0.0) hi = y;
            else lo = y;
            if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                               std::max(1.0, std::abs(y)))
                break;  // bracket exhausted at machine resolution
            // Newton step from a central-difference slope, clipped to the bracket.
            const double fd = 1e-7 * std::max(1.0, std::abs(y));
            const double slope = (residual(y + fd) - residual(y - fd)) / (2.0 * fd);
            double candidate = (slope > 0.0) ? y - r / slope : lo;
            if (!(candidate > lo && candidate < hi)) candidate = 0.5 * (lo + hi);
            y = candidate;
        }
    }
    if (stats) {
        ++stats->solves;
        stats->total_iterations += iterations;
        stats->max_iterations = std::max(stats->max_iterations, iterations);
    }
    return y;
}

/// Backward solution on a window of step indices [j_from, j_to]: Y per
/// (path, window node), Z per (path, window node, noise component).
struct BsdeSolution {
    std::size_t j_from = 0;  // grid step index of the first window node
    std::size_t j_to = 0;    // grid step index of the terminal window node
    std::size_t n_paths = 0;
    std::size_t noise_dim = 1;
    std::vector<double> y;  // [path][node]
    std::vector<double> z;  // [path][node][component]
    std::vector<double> regression_condition_numbers;  // per backward step
    NewtonStats newton;
    std::string scheme;

    std::size_t n_window_nodes() const { return j_to - j_from + 1; }

    double y_at(std::size_t path, std::size_t j) const {
        return y[path * n_window_nodes() + (j - j_from)];
    }
    std::span<const double> z_at(std::size_t path, std::size_t j) const {
        return {z.data() + (path * n_window_nodes() + (j - j_from)) * noise_dim,
                noise_dim};
    }

    bool all_finite() const {
        for (double v : y)
            if (!std::isfinite(v)) return false;
        for (double v : z)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

namespace detail {

inline bool constant_across(std::span<const double> values) {
    for (double v : values)
        if (v != values[0]) return false;
    return true;
}

inline std::string format_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1e", v);
    return buf;
}

} // namespace detail

/// Backward sweep on [j_from, j_to] with supplied terminal data. Each step:
/// regression estimates of E_k[Y_{k+1}] and Z_k = E_k[Y_{k+1} dW_k] / h on
/// segment features, then the implicit scalar solve per path. When Y_{k+1}
/// is constant across paths the conditional expectation is taken exactly
/// (identity, Z = 0) instead of by regression.
inline BsdeSolution solve_window(const PathEnsemble& ens, const GeneratorSpec& gen,
                                 const LatticeControl& control,
                                 std::size_t j_from, std::size_t j_to,
                                 std::span<const double> terminal,
                                 const BsdeConfig& config = {}) {
    if (j_to > ens.grid.n_steps() || j_from > j_to)
        throw ConfigError("solve_window: invalid window");
    if (terminal.size() != ens.n_paths)
        throw ConfigError("solve_window: terminal data must be per-path");
    for (double v : terminal)
        if (!std::isfinite(v))
            throw ConfigError("solve_window: non-finite terminal data");
    if (config.scheme == BsdeScheme::ImplicitY &&
        ens.grid.step() * std::max(0.0, gen.monotone_mu) >= 1.0)
        throw ConfigError("solve_window: need h * max(0, mu) < 1 for the implicit step");

    const std::size_t P = ens.n_paths;
    const std::size_t d = ens.noise_dim;
    const double h = ens.grid.step();

    BsdeSolution sol;
    sol.j_from = j_from;
    sol.j_to = j_to;
    sol.n_paths = P;
    sol.noise_dim = d;
    sol.scheme = (config.scheme == BsdeScheme::ImplicitY)
                     ? "implicit-y newton(tol=" + detail::format_sci(config.newton_tol) + ")"
                     : "explicit-y";
    const std::size_t W = sol.n_window_nodes();
    sol.y.resize(P * W);
    sol.z.assign(P * W * d, 0.0);
    sol.regression_condition_numbers.reserve(j_to - j_from);

    for (std::size_t p = 0; p < P; ++p) sol.y[p * W + (W - 1)] = terminal[p];

    SegmentBasis basis(ens.state_dim, ens.grid.lag_steps() > 0, config.basis_degree);
    const std::size_t F = basis.size();
    std::vector<double> features(P * F);
    std::vector<double> y_next(P), y_hat(P), response(P), fitted(P);

    for (std::size_t j = j_to; j-- > j_from;) {
        const std::size_t node = ens.grid.start_node() + j;
        const double t = ens.grid.node(node);
        const auto v = control.at(t);

        for (std::size_t p = 0; p < P; ++p) y_next[p] = sol.y[p * W + (j + 1 - j_from)];
        const bool deterministic_data = detail::constant_across(y_next);

        if (deterministic_data) {
            // Exact conditional expectation: E[c | F] = c and E[c dW] = 0.
            y_hat = y_next;
            sol.regression_condition_numbers.push_back(1.0);
        } else {
            parallel_for(P, config.threads, [&](std::size_t p) {
                PathSegment seg;
                fill_segment(ens, p, node, seg);
                basis.eval(seg, {features.data() + p * F, F});
            });
            StepRegression reg(features, P, F);
            reg.fit(y_next, y_hat);
            for (std::size_t c = 0; c < d; ++c) {
                for (std::size_t p = 0; p < P; ++p)
                    response[p] = y_next[p] * ens.increment(p, j, c) / h;
                reg.fit(response, fitted);
                for (std::size_t p = 0; p < P; ++p)
                    sol.z[(p * W + (j - j_from)) * d + c] = fitted[p];
            }
            sol.regression_condition_numbers.push_back(reg.condition_number());
        }

        std::vector<NewtonStats> thread_stats(P);
        parallel_for(P, config.threads, [&](std::size_t p) {
            PathSegment seg;
            fill_segment(ens, p, node, seg);
            const std::span<const double> zp{
                sol.z.data() + (p * W + (j - j_from)) * d, d};
            double value;
            if (config.scheme == BsdeScheme::ImplicitY) {
                value = implicit_scalar_step(y_hat[p], t, seg, zp, v, gen, h,
                                             config.newton_tol, config.newton_max_iter,
                                             &thread_stats[p]);
            } else {
                const double gy = gen.g(t, seg, y_hat[p], zp, v);
                value = y_hat[p] + h * gy;
            }
            if (!std::isfinite(value))
                throw NumericError("bsde: non-finite Y at path " + std::to_string(p) +
                                   ", step " + std::to_string(j));
            sol.y[p * W + (j - j_from)] = value;
        });
        for (const auto& s : thread_stats) {
            sol.newton.solves += s.solves;
            sol.newton.total_iterations += s.total_iterations;
            sol.newton.max_iterations = std::max(sol.newton.max_iterations, s.max_iterations);
        }
    }
    return sol;
}

/// Full backward solve on [t0, T] with terminal condition Phi(X_T).
inline BsdeSolution solve(const PathEnsemble& ens, const GeneratorSpec& gen,
                          const LatticeControl& control, const BsdeConfig& config = {}) {
    const std::size_t N = ens.grid.n_steps();
    std::vector<double> terminal(ens.n_paths);
    PathSegment seg;
    for (std::size_t p = 0; p < ens.n_paths; ++p) {
        fill_segment(ens, p, ens.grid.end_node(), seg);
        terminal[p] = gen.phi(seg);
        if (!std::isfinite(terminal[p]))
            throw NumericError("bsde: non-finite terminal value at path " +
                               std::to_string(p));
    }
    return solve_window(ens, gen, control, 0, N, terminal, config);
}

/// Cross-path mean of Y at window step j.
inline double mean_y(const BsdeSolution& sol, std::size_t j) {
    double acc = 0.0;
    for (std::size_t p = 0; p < sol.n_paths; ++p) acc += sol.y_at(p, j);
    return acc / static_cast<double>(sol.n_paths);
}

/// Cross-path standard error of the mean of Y at window step j. Exactly
/// zero when the values have collapsed to a single double (the conditional
/// expectation at a deterministic node), so callers can detect collapse.
inline double stderr_y(const BsdeSolution& sol, std::size_t j) {
    if (sol.n_paths < 2) return 0.0;
    double lo = sol.y_at(0, j), hi = lo;
    for (std::size_t p = 1; p < sol.n_paths; ++p) {
        lo = std::min(lo, sol.y_at(p, j));
        hi = std::max(hi, sol.y_at(p, j));
    }
    if (lo == hi) return 0.0;
    const double mean = mean_y(sol, j);
    double ss = 0.0;
    for (std::size_t p = 0; p < sol.n_paths; ++p) {
        const double dv = sol.y_at(p, j) - mean;
        ss += dv * dv;
    }
    return std::sqrt(ss / static_cast<double>(sol.n_paths - 1) /
                     static_cast<double>(sol.n_paths));
}

/// Initial value estimate: mean of Y at the window start. The reported
/// standard error falls back to the next node when the start collapsed to
/// a deterministic value through the final conditional expectation.
struct InitialValue {
    double value = 0.0;
    double stderr_estimate = 0.0;
};

inline InitialValue initial_value(const BsdeSolution& sol) {
    InitialValue out;
    out.value = mean_y(sol, sol.j_from);
    out.stderr_estimate = stderr_y(sol, sol.j_from);
    if (out.stderr_estimate == 0.0 && sol.j_to > sol.j_from)
        out.stderr_estimate = stderr_y(sol, sol.j_from + 1);
    return out;
}

} // namespace dsrc
