#pragma once

#include <cstddef>
#include <vector>

#include "dsrc/core/errors.hpp"
#include "dsrc/core/path_segment.hpp"

namespace dsrc {

/// Finite-dimensional stand-in for path-space derivatives: the segment is
/// sampled at k declared lag offsets (in grid steps, offset 0 = the anchor)
/// and embedded back by piecewise-linear fill between offsets. k = 1 with
/// offset {0} recovers the classical no-delay state.
class LagProjection {
public:
    LagProjection(std::vector<std::size_t> lag_offsets, std::size_t state_dim,
                  std::size_t lag_steps, double step)
        : offsets_(std::move(lag_offsets)), state_dim_(state_dim),
          lag_steps_(lag_steps), step_(step) {
        if (offsets_.empty() || offsets_.front() != 0)
            throw ConfigError("lag projection: offsets must start at 0 (the anchor)");
        for (std::size_t i = 1; i < offsets_.size(); ++i)
            if (offsets_[i] <= offsets_[i - 1])
                throw ConfigError("lag projection: offsets must strictly increase");
        if (offsets_.back() > lag_steps_)
            throw ConfigError("lag projection: offset beyond the lag window");
    }

    std::size_t n_offsets() const { return offsets_.size(); }
    std::size_t coord_dim() const { return offsets_.size() * state_dim_; }
    std::size_t state_dim() const { return state_dim_; }
    const std::vector<std::size_t>& offsets() const { return offsets_; }

    /// coords block i = segment value at anchor - offsets[i] * step.
    std::vector<double> project(const PathSegment& seg) const {
        if (seg.dim != state_dim_ || seg.lag_steps() != lag_steps_)
            throw ConfigError("lag projection: segment shape mismatch");
        std::vector<double> coords(coord_dim());
        const std::size_t last = seg.n_samples() - 1;
        for (std::size_t i = 0; i < offsets_.size(); ++i) {
            const auto x = seg.sample(last - offsets_[i]);
            for (std::size_t c = 0; c < state_dim_; ++c)
                coords[i * state_dim_ + c] = x[c];
        }
        return coords;
    }

    /// Segment agreeing with coords at the offsets exactly, linear in
    /// between, constant before the largest offset.
    PathSegment embed(double anchor, std::span<const double> coords) const {
        if (coords.size() != coord_dim())
            throw ConfigError("lag projection: coords dimension mismatch");
        PathSegment seg;
        seg.anchor = anchor;
        seg.step = step_;
        seg.dim = state_dim_;
        seg.values.resize((lag_steps_ + 1) * state_dim_);
        const std::size_t last = lag_steps_;
        for (std::size_t s = 0; s <= lag_steps_; ++s) {
            const std::size_t back = last - s;  // steps behind the anchor
            // Locate the covering offset interval.
            std::size_t i = 0;
            while (i + 1 < offsets_.size() && offsets_[i + 1] <= back) ++i;
            for (std::size_t c = 0; c < state_dim_; ++c) {
                double v;
                if (back <= offsets_.back() && i + 1 < offsets_.size() &&
                    back > offsets_[i]) {
                    const double w =
                        static_cast<double>(back - offsets_[i]) /
                        static_cast<double>(offsets_[i + 1] - offsets_[i]);
                    v = (1.0 - w) * coords[i * state_dim_ + c] +
                        w * coords[(i + 1) * state_dim_ + c];
                } else if (back > offsets_.back()) {
                    v = coords[(offsets_.size() - 1) * state_dim_ + c];
                } else {
                    v = coords[i * state_dim_ + c];  // exactly on an offset
                }
                seg.values[s * state_dim_ + c] = v;
            }
        }
        return seg;
    }

private:
    std::vector<std::size_t> offsets_;
    std::size_t state_dim_;
    std::size_t lag_steps_;
    double step_;
};

} // namespace dsrc
