#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dsrc/core/errors.hpp"
#include "dsrc/core/time_grid.hpp"

namespace dsrc {

/// Discretized path segment: lag_steps + 1 samples of the state on
/// [anchor - delta, anchor], stored row-major as (sample, component).
/// The continuous segment norm is approximated by the node-wise maximum.
struct PathSegment {
    double anchor = 0.0;
    double step = 0.0;       // node spacing; irrelevant when lag_steps = 0
    std::size_t dim = 1;     // state dimension n
    std::vector<double> values;  // (lag_steps + 1) * dim

    std::size_t lag_steps() const { return values.size() / dim - 1; }
    std::size_t n_samples() const { return values.size() / dim; }

    std::span<const double> sample(std::size_t i) const {
        return {values.data() + i * dim, dim};
    }
    std::span<double> sample(std::size_t i) {
        return {values.data() + i * dim, dim};
    }

    /// State at the anchor (the "current" value gamma(t)).
    std::span<const double> current() const { return sample(n_samples() - 1); }
    /// State at anchor - delta (the fully lagged value).
    std::span<const double> lagged() const { return sample(0); }

    /// Scalar access for 1-d states.
    double current_scalar() const { return current()[0]; }
    double lagged_scalar() const { return lagged()[0]; }

    /// Constant segment builder.
    static PathSegment constant(double anchor, double step, std::size_t lag_steps,
                                std::vector<double> value) {
        PathSegment seg;
        seg.anchor = anchor;
        seg.step = step;
        seg.dim = value.size();
        seg.values.resize((lag_steps + 1) * seg.dim);
        for (std::size_t i = 0; i <= lag_steps; ++i)
            std::copy(value.begin(), value.end(), seg.values.begin() + i * seg.dim);
        return seg;
    }

    static PathSegment constant(double anchor, double step, std::size_t lag_steps,
                                double value) {
        return constant(anchor, step, lag_steps, std::vector<double>{value});
    }

    /// Constant segment matching a grid's history window at t0.
    static PathSegment constant_initial(const TimeGrid& grid, double value) {
        return constant(grid.t0(), grid.step(), grid.lag_steps(), value);
    }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

namespace detail {

inline double sample_norm(const PathSegment& seg, std::size_t i) {
    double s = 0.0;
    for (double v : seg.sample(i)) s += v * v;
    return std::sqrt(s);
}

} // namespace detail

/// Node-wise maximum Euclidean norm: the grid restriction of ||gamma||_C.
inline double sup_norm(const PathSegment& seg) {
    double m = 0.0;
    for (std::size_t i = 0; i < seg.n_samples(); ++i)
        m = std::max(m, detail::sample_norm(seg, i));
    return m;
}

/// Segment distance. Equal anchors compare node-wise; distinct anchors
/// sweep the union of both node sets and evaluate each segment with its
/// index clamped to its own domain (the (t-delta) v r ^ t reparametrization
/// restricted to nodes). Segments must share lag_steps and step; comparing
/// different lag lengths is rejected rather than guessed.
inline double sup_norm_distance(const PathSegment& a, const PathSegment& b) {
    if (a.dim != b.dim)
        throw ConfigError("sup_norm_distance: mismatched state dimension");
    if (a.lag_steps() != b.lag_steps())
        throw ConfigError("sup_norm_distance: mismatched lag_steps");
    const std::size_t last = a.n_samples() - 1;

    auto sample_distance = [&](std::size_t ia, std::size_t ib) {
        double s = 0.0;
        const auto xa = a.sample(ia);
        const auto xb = b.sample(ib);
        for (std::size_t c = 0; c < a.dim; ++c) {
            const double d = xa[c] - xb[c];
            s += d * d;
        }
        return std::sqrt(s);
    };

    if (a.anchor == b.anchor) {
        double m = 0.0;
        for (std::size_t i = 0; i <= last; ++i)
            m = std::max(m, sample_distance(i, i));
        return m;
    }

    if (a.step != b.step)
        throw ConfigError("sup_norm_distance: mismatched step for distinct anchors");
    if (a.step <= 0.0 && last > 0)
        throw ConfigError("sup_norm_distance: undefined step for lagged segments");

    // Integer node offset between the two anchors.
    const double raw = (b.anchor - a.anchor) / (last > 0 ? a.step : 1.0);
    const double rounded = std::round(raw);
    if (last > 0 && std::abs(raw - rounded) > 1e-9)
        throw ConfigError("sup_norm_distance: anchors are not grid-aligned");
    const long long offset = static_cast<long long>(rounded);

    auto clamp_index = [&](long long i) {
        return static_cast<std::size_t>(
            std::clamp<long long>(i, 0, static_cast<long long>(last)));
    };

    // Sweep indices in a's frame covering both node ranges.
    const long long lo = std::min<long long>(0, offset);
    const long long hi = std::max<long long>(static_cast<long long>(last),
                                             offset + static_cast<long long>(last));
    double m = 0.0;
    for (long long i = lo; i <= hi; ++i)
        m = std::max(m, sample_distance(clamp_index(i), clamp_index(i - offset)));
    return m;
}

} // namespace dsrc
