#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dsrc/core/errors.hpp"
#include "dsrc/core/time_grid.hpp"

namespace dsrc {

/// Finite family of piecewise-constant admissible controls: values drawn
/// from a finite subset of the compact control set U, constant between
/// consecutive switch times. The enumerated family is the computable
/// stand-in for the admissible set.
struct ControlLattice {
    std::vector<std::vector<double>> values;  // points of U, each an m-vector
    std::vector<double> switch_times;         // sorted, starting at the horizon start
    std::vector<double> box_lo, box_hi;       // declared bounding box of U

    std::size_t control_dim() const { return values.empty() ? 0 : values[0].size(); }

    void validate() const {
        if (values.empty()) throw ConfigError("control lattice: empty value set");
        const std::size_t m = values[0].size();
        for (const auto& u : values) {
            if (u.size() != m)
                throw ConfigError("control lattice: inconsistent control dimension");
            for (std::size_t c = 0; c < m; ++c) {
                if (c < box_lo.size() && u[c] < box_lo[c])
                    throw ConfigError("control lattice: value below declared box");
                if (c < box_hi.size() && u[c] > box_hi[c])
                    throw ConfigError("control lattice: value above declared box");
            }
        }
        for (std::size_t i = 1; i < switch_times.size(); ++i)
            if (!(switch_times[i] > switch_times[i - 1]))
                throw ConfigError("control lattice: switch times must increase");
    }

    /// Switch times covering [from, horizon): `from` plus any later declared
    /// switches strictly inside the window.
    std::vector<double> intervals_from(double from, double horizon) const {
        std::vector<double> starts{from};
        for (double s : switch_times)
            if (s > from && s < horizon) starts.push_back(s);
        return starts;
    }

    /// Number of lattice controls on the window starting at `from`.
    double enumeration_count(double from, double horizon) const {
        const std::size_t intervals = intervals_from(from, horizon).size();
        double count = 1.0;
        for (std::size_t i = 0; i < intervals; ++i)
            count *= static_cast<double>(values.size());
        return count;
    }
};

/// One enumerated control: a value index per switch interval. Enumeration
/// index 0 assigns value 0 everywhere; interval 0 is the least significant
/// digit of the mixed-radix index, and argmax ties break to the lowest
/// enumeration index.
class LatticeControl {
public:
    LatticeControl(const ControlLattice& lattice, std::vector<double> interval_starts,
                   std::size_t enumeration_index)
        : lattice_(&lattice), starts_(std::move(interval_starts)) {
        const std::size_t m = lattice.values.size();
        choices_.resize(starts_.size());
        std::size_t e = enumeration_index;
        for (std::size_t i = 0; i < choices_.size(); ++i) {
            choices_[i] = e % m;
            e /= m;
        }
        if (e != 0)
            throw ConfigError("lattice control: enumeration index out of range");
    }

    /// Control value in force at time t (left-continuous step function).
    std::span<const double> at(double t) const {
        std::size_t i = 0;
        while (i + 1 < starts_.size() && t >= starts_[i + 1]) ++i;
        return lattice_->values[choices_[i]];
    }

    const std::vector<std::size_t>& choices() const { return choices_; }
    const std::vector<double>& interval_starts() const { return starts_; }

private:
    const ControlLattice* lattice_;
    std::vector<double> starts_;
    std::vector<std::size_t> choices_;
};

/// Constant control holding a single value over the whole horizon.
inline ControlLattice singleton_lattice(std::vector<double> value, double start) {
    ControlLattice lattice;
    lattice.values.push_back(std::move(value));
    lattice.switch_times = {start};
    return lattice;
}

} // namespace dsrc
