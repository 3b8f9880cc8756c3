#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "dsrc/core/errors.hpp"

namespace dsrc {

/// Uniform grid on [t0 - delta, T] whose step divides the delay exactly,
/// so the lagged index s - delta always lands on a node. Node k has time
/// t0 + (k - lag_steps) * h, computed from k alone (no accumulated drift).
class TimeGrid {
public:
    double t0() const { return t0_; }
    double horizon() const { return horizon_; }
    double delay() const { return delay_; }
    double step() const { return step_; }

    /// Steps from t0 to T.
    std::size_t n_steps() const { return n_steps_; }
    /// Nodes of the history window before t0 (delta / h).
    std::size_t lag_steps() const { return lag_steps_; }
    /// Total node count on [t0 - delta, T].
    std::size_t n_nodes() const { return lag_steps_ + n_steps_ + 1; }

    /// Time of node k in [0, n_nodes()). Pure arithmetic in k.
    double node(std::size_t k) const {
        return t0_ + (static_cast<double>(k) - static_cast<double>(lag_steps_)) * step_;
    }

    /// Node index of t0.
    std::size_t start_node() const { return lag_steps_; }
    /// Node index of T.
    std::size_t end_node() const { return lag_steps_ + n_steps_; }

    /// Nearest node index for a time in [t0 - delta, T]; rejects times that
    /// are not grid nodes (relative tolerance 1e-9 of a step).
    std::size_t index_of(double t) const {
        const double raw = (t - t0_) / step_ + static_cast<double>(lag_steps_);
        const double rounded = std::round(raw);
        if (std::abs(raw - rounded) > 1e-9 || rounded < 0.0 ||
            rounded > static_cast<double>(end_node())) {
            throw ConfigError("time " + std::to_string(t) + " is not a grid node");
        }
        return static_cast<std::size_t>(rounded);
    }

    /// Grid over [new_t0 - delta, new_T] with the same step and delay.
    /// Both endpoints must be nodes of this grid.
    TimeGrid window(double new_t0, double new_T) const {
        const std::size_t i0 = index_of(new_t0);
        const std::size_t i1 = index_of(new_T);
        if (i0 < start_node() || i1 <= i0)
            throw ConfigError("TimeGrid::window: endpoints must satisfy t0 <= a < b <= T");
        return TimeGrid(node(i0), node(i1), delay_, step_, i1 - i0, lag_steps_);
    }

    friend TimeGrid make_grid(double, double, double, std::size_t, std::size_t);
    friend TimeGrid make_grid_no_delay(double, double, double);

private:
    TimeGrid(double t0, double horizon, double delay, double step,
             std::size_t n_steps, std::size_t lag_steps)
        : t0_(t0), horizon_(horizon), delay_(delay), step_(step),
          n_steps_(n_steps), lag_steps_(lag_steps) {}

    double t0_;
    double horizon_;
    double delay_;
    double step_;
    std::size_t n_steps_;
    std::size_t lag_steps_;
};

namespace detail {

inline std::size_t checked_step_count(double span, double h, const char* what) {
    const double raw = span / h;
    const double rounded = std::round(raw);
    const double remainder = std::abs(raw - rounded) * h;
    if (rounded < 1.0 || std::abs(raw - rounded) > 1e-9) {
        throw ConfigError(std::string(what) +
                          " is not an integer multiple of the step h=" +
                          std::to_string(h) + " (remainder " +
                          std::to_string(remainder) + ")");
    }
    return static_cast<std::size_t>(rounded);
}

} // namespace detail

/// Grid with positive delay: h = delta / (lag_steps * steps_per_lag).
/// steps_per_lag refines the step while keeping delta / h integral, which
/// is how refinement studies shrink h on delayed models.
inline TimeGrid make_grid(double t0, double horizon, double delta,
                          std::size_t lag_steps, std::size_t steps_per_lag = 1) {
    if (!(horizon > t0)) throw ConfigError("make_grid: need T > t0");
    if (delta < 0.0) throw ConfigError("make_grid: need delta >= 0");
    if (steps_per_lag < 1) throw ConfigError("make_grid: steps_per_lag >= 1");
    if (delta == 0.0) {
        if (lag_steps != 0)
            throw ConfigError("make_grid: lag_steps must be 0 when delta = 0; "
                              "use make_grid_no_delay to supply h directly");
        throw ConfigError("make_grid: delta = 0 needs an explicit step; "
                          "use make_grid_no_delay(t0, T, h)");
    }
    if (lag_steps < 1) throw ConfigError("make_grid: need lag_steps >= 1 when delta > 0");
    const std::size_t lag = lag_steps * steps_per_lag;
    const double h = delta / static_cast<double>(lag);
    const std::size_t n_steps = detail::checked_step_count(horizon - t0, h, "horizon T - t0");
    return TimeGrid(t0, horizon, delta, h, n_steps, lag);
}

/// Degenerate no-delay grid: the step is supplied directly.
inline TimeGrid make_grid_no_delay(double t0, double horizon, double h) {
    if (!(horizon > t0)) throw ConfigError("make_grid_no_delay: need T > t0");
    if (!(h > 0.0)) throw ConfigError("make_grid_no_delay: need h > 0");
    const std::size_t n_steps = detail::checked_step_count(horizon - t0, h, "horizon T - t0");
    return TimeGrid(t0, horizon, 0.0, h, n_steps, 0);
}

} // namespace dsrc
