#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <vector>

#include "dsrc/core/audits.hpp"
#include "dsrc/core/errors.hpp"
#include "dsrc/core/specs.hpp"
#include "dsrc/util/quadrature.hpp"

namespace dsrc {

/// Smooth bump rho_n supported on [-1/n, 1/n] with unit mass, realized as
/// a fixed Gauss-Legendre rule on the support. Offsets and weights are kept
/// in symmetric pairs so odd moments cancel bit-exactly.
struct MollifierSpec {
    std::size_t n = 1;             // support parameter
    std::size_t quad_nodes = 64;   // even; pairs straddle zero
    // Positive offsets o_j in (0, 1/n] with paired weights c_j; the bump is
    // even, so the offset -o_j carries the same weight.
    std::vector<double> offsets;
    std::vector<double> pair_weights;

    double support_radius() const { return 1.0 / static_cast<double>(n); }

    /// Sum of all weights (both signs); equals 1 by normalization.
    double total_mass() const {
        double m = 0.0;
        for (double w : pair_weights) m += 2.0 * w;
        return m;
    }

    /// Bump profile value rho_n(a); zero outside the support. Only used by
    /// reporting and tests (evaluation goes through offsets/weights).
    double density(double a) const {
        const double r = support_radius();
        const double x = a / r;
        if (std::abs(x) >= 1.0) return 0.0;
        return normalization_ * std::exp(-1.0 / (1.0 - x * x)) / r;
    }

    double normalization() const { return normalization_; }

    static MollifierSpec make(std::size_t n, std::size_t quad_nodes = 64) {
        if (n < 1) throw ConfigError("mollifier: need n >= 1");
        if (quad_nodes < 2 || quad_nodes % 2 != 0)
            throw ConfigError("mollifier: quad_nodes must be even and >= 2");
        MollifierSpec spec;
        spec.n = n;
        spec.quad_nodes = quad_nodes;

        // Gauss-Legendre on [-1, 1] against the standard bump profile
        // exp(-1/(1-x^2)); nodes come in symmetric +-x pairs.
        const QuadratureRule rule = gauss_legendre(quad_nodes);
        auto profile = [](double x) { return std::exp(-1.0 / (1.0 - x * x)); };
        const std::size_t half = quad_nodes / 2;
        double raw_mass = 0.0;
        spec.offsets.resize(half);
        spec.pair_weights.resize(half);
        for (std::size_t i = 0; i < half; ++i) {
            const double x = rule.nodes[quad_nodes - 1 - i];  // positive half
            const double w = rule.weights[quad_nodes - 1 - i] * profile(x);
            spec.offsets[i] = x / static_cast<double>(n);
            spec.pair_weights[i] = w;
            raw_mass += 2.0 * w;
        }
        // Normalize so the quadrature mass is exactly one.
        for (double& w : spec.pair_weights) w /= raw_mass;
        spec.normalization_ = 1.0 / raw_mass;  // vs the unnormalized profile on [-1,1]
        return spec;
    }

private:
    double normalization_ = 1.0;
};

/// Quadrature convolution of the driver's y-slice with rho_n:
///   g_n(t, gamma, y, v) = sum_j c_j [ g(y - o_j) + g(y + o_j) ].
/// Symmetric pairing reproduces odd functions exactly: for linear g the two
/// offset terms average back to g(y) with no residual. Monotonicity (A5)
/// carries over with the same mu; the growth constant is enlarged to cover
/// the shifted argument.
inline GeneratorSpec mollify(const GeneratorSpec& gen, std::size_t n,
                             const MollifierSpec& spec) {
    if (spec.n != n) throw ConfigError("mollify: spec built for a different n");
    auto base = std::make_shared<GeneratorSpec>(gen);
    auto offsets = std::make_shared<std::vector<double>>(spec.offsets);
    auto weights = std::make_shared<std::vector<double>>(spec.pair_weights);

    GeneratorSpec out = gen;
    out.g = [base, offsets, weights](double t, const PathSegment& seg, double y,
                                     std::span<const double> z, ControlValue v) {
        double acc = 0.0;
        for (std::size_t j = 0; j < offsets->size(); ++j) {
            const double o = (*offsets)[j];
            acc += (*weights)[j] *
                   (base->g(t, seg, y - o, z, v) + base->g(t, seg, y + o, z, v));
        }
        return acc;
    };
    // (A6) for the convolution: |g_n(y) - g_n(0)| <= M (3 + 2^p)(1 + |y|^p).
    out.growth_M = gen.growth_M * (3.0 + std::pow(2.0, gen.growth_p));
    return out;
}

/// Radial clamp of the y = 0 slice (the Pi_m truncation):
///   g_m(t,gamma,y,v) = g(...,y,...) - g(...,0,...) + Pi_m(g(...,0,...)),
/// with Pi_m(x) = min(m, |x|) x / |x| and Pi_m(0) = 0. The y-increment
/// g_m(y) - g_m(0) equals g(y) - g(0); only the zero slice is clamped to
/// [-m, m]. When the clamp is inactive the driver value passes through
/// untouched (no rounding shift).
inline GeneratorSpec truncate(const GeneratorSpec& gen, double m) {
    if (m < 1.0) throw ConfigError("truncate: need m >= 1");
    auto base = std::make_shared<GeneratorSpec>(gen);

    GeneratorSpec out = gen;
    out.g = [base, m](double t, const PathSegment& seg, double y,
                      std::span<const double> z, ControlValue v) {
        const double g0 = base->g(t, seg, 0.0, z, v);
        if (std::abs(g0) <= m) return base->g(t, seg, y, z, v);
        const double clamped = (g0 > 0.0) ? m : -m;
        if (y == 0.0) return clamped;
        return base->g(t, seg, y, z, v) - g0 + clamped;
    };
    // Truncation only shifts the zero slice; gamma-Lipschitz can triple.
    out.lipschitz_Ltilde = 3.0 * gen.lipschitz_Ltilde;
    return out;
}

/// Outcome of the dyadic uniform-convergence search.
struct ConvergenceAuditResult {
    bool converged = false;
    std::size_t achieved_n = 0;
    double achieved_error = 0.0;
    // Full (n, sup-probe-error) table over the schedule that was run.
    std::vector<std::pair<std::size_t, double>> table;
    // Worst probe of the last failed level.
    double worst_probe_y = 0.0;
    double worst_probe_t = 0.0;
};

/// Max |approx - g| over a finite probe set.
inline double sup_probe_error(const GeneratorSpec& gen, const GeneratorSpec& approx,
                              const std::vector<ProbePoint>& probes,
                              double* worst_y = nullptr, double* worst_t = nullptr) {
    double worst = 0.0;
    for (const auto& p : probes) {
        const double a = approx.g(p.t, p.segment, p.y, p.z, p.control);
        const double b = gen.g(p.t, p.segment, p.y, p.z, p.control);
        const double err = std::abs(a - b);
        if (err > worst) {
            worst = err;
            if (worst_y) *worst_y = p.y;
            if (worst_t) *worst_t = p.t;
        }
    }
    return worst;
}

/// Smallest n in a dyadic schedule whose approximation is uniformly within
/// eps of g on the probe set. Exhausting the schedule is a reported failure,
/// not a crash.
template <typename Family>
ConvergenceAuditResult uniform_convergence_audit(const GeneratorSpec& gen,
                                                 Family&& family,
                                                 const std::vector<ProbePoint>& probes,
                                                 double eps,
                                                 std::size_t max_n = 1u << 12) {
    if (probes.empty()) throw ConfigError("convergence audit: empty probe set");
    ConvergenceAuditResult result;
    for (std::size_t n = 1; n <= max_n; n *= 2) {
        const GeneratorSpec approx = family(n);
        double wy = 0.0, wt = 0.0;
        const double err = sup_probe_error(gen, approx, probes, &wy, &wt);
        result.table.emplace_back(n, err);
        if (err <= eps) {
            result.converged = true;
            result.achieved_n = n;
            result.achieved_error = err;
            return result;
        }
        result.worst_probe_y = wy;
        result.worst_probe_t = wt;
    }
    return result;
}

} // namespace dsrc
