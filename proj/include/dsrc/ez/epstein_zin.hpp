#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <mutex>
#include <string>

#include "dsrc/core/errors.hpp"

namespace dsrc {

enum class EzRegime { I, II, Other };

/// Epstein-Zin preference parameters. The regime tag is derived, never
/// stored: (i) r > 1 and psi > 1, (ii) r < 1 and psi < 1. In both regimes
/// the aggregator is monotone in the utility with an explicit bound.
struct EzParams {
    double vartheta;  // rate of time preference, > 0
    double psi;       // elasticity of intertemporal substitution, > 0, != 1
    double r;         // relative risk aversion, > 0, != 1

    EzParams(double vartheta, double psi, double r)
        : vartheta(vartheta), psi(psi), r(r) {
        if (!(vartheta > 0.0)) throw ConfigError("EzParams: need vartheta > 0");
        if (!(psi > 0.0) || psi == 1.0)
            throw ConfigError("EzParams: need 0 < psi != 1");
        if (!(r > 0.0) || r == 1.0) throw ConfigError("EzParams: need 0 < r != 1");
    }

    EzRegime regime() const {
        if (r > 1.0 && psi > 1.0) return EzRegime::I;
        if (r < 1.0 && psi < 1.0) return EzRegime::II;
        return EzRegime::Other;
    }

    double theta() const { return 1.0 - 1.0 / psi; }  // the consumption exponent

    /// One-sided monotonicity bound: d/du g(u, c) <= vartheta (r-1) / theta
    /// throughout the natural domain, in regimes (i) and (ii).
    double monotonicity_bound() const { return vartheta * (r - 1.0) / theta(); }
};

/// Domain-clamp accounting for evaluations with (1-r) u near or past zero.
struct EzDomainStats {
    std::atomic<std::size_t> clamps{0};
    std::atomic<std::size_t> evaluations{0};
    double min_a = std::numeric_limits<double>::infinity();  // min (1-r) u seen
    std::mutex min_mutex;

    void record(double a, bool clamped) {
        evaluations.fetch_add(1, std::memory_order_relaxed);
        if (clamped) clamps.fetch_add(1, std::memory_order_relaxed);
        std::lock_guard<std::mutex> lock(min_mutex);
        min_a = std::min(min_a, a);
    }

    bool clean() const { return clamps.load() == 0; }
};

/// The Epstein-Zin aggregator
///   g(u, c) = vartheta/(1 - 1/psi) (1-r) u [ (c / ((1-r)u)^{1/(1-r)})^{1-1/psi} - 1 ].
/// Natural domain: (1-r) u > 0 (and c > 0 when the exponent is negative).
/// With clamping enabled, (1-r) u is floored at eps_dom and the clamp is
/// recorded; without it, a domain violation throws with the operands.
inline double ez_generator(const EzParams& params, double u, double c,
                           double eps_dom = 1e-8, EzDomainStats* stats = nullptr,
                           bool allow_clamp = true) {
    const double theta = params.theta();
    double a = (1.0 - params.r) * u;
    bool clamped = false;
    if (a < eps_dom) {
        if (!allow_clamp)
            throw NumericError("ez_generator: (1-r)u = " + std::to_string(a) +
                               " outside the domain (u = " + std::to_string(u) +
                               ", c = " + std::to_string(c) + ")");
        a = eps_dom;
        clamped = true;
    }
    if (c < 0.0 || (c == 0.0 && theta < 0.0))
        throw NumericError("ez_generator: consumption c = " + std::to_string(c) +
                           " outside the domain (theta = " + std::to_string(theta) + ")");
    if (stats) stats->record((1.0 - params.r) * u, clamped);

    // (c / a^{1/(1-r)})^theta = c^theta * a^{-theta/(1-r)}, via logs.
    const double log_a = std::log(a);
    const double power = (c == 0.0)
                             ? 0.0
                             : std::exp(theta * std::log(c) -
                                        theta / (1.0 - params.r) * log_a);
    return params.vartheta / theta * a * (power - 1.0);
}

/// Monotonicity audit of the aggregator in u on a probe box inside the
/// natural domain: largest secant slope (g(u) - g(u')) (u - u') / |u - u'|^2
/// and the count of probes exceeding the regime bound.
struct EzMonotonicityReport {
    double mu_hat = -std::numeric_limits<double>::infinity();
    double bound = 0.0;
    std::size_t probes = 0;
    std::size_t violations = 0;
    EzRegime regime = EzRegime::Other;
    bool contractual() const { return regime != EzRegime::Other; }
};

inline EzMonotonicityReport monotonicity_regime_audit(const EzParams& params,
                                                      double u_lo, double u_hi,
                                                      double c_lo, double c_hi,
                                                      std::size_t u_points = 60,
                                                      std::size_t c_points = 20,
                                                      double slack = 1e-9) {
    if ((1.0 - params.r) * u_lo <= 0.0 || (1.0 - params.r) * u_hi <= 0.0)
        throw ConfigError("regime audit: probe box must lie inside (1-r)u > 0");
    EzMonotonicityReport report;
    report.regime = params.regime();
    report.bound = params.monotonicity_bound();
    for (std::size_t ci = 0; ci < c_points; ++ci) {
        const double c = c_lo + (c_hi - c_lo) * static_cast<double>(ci) /
                                    static_cast<double>(c_points - 1);
        for (std::size_t i = 0; i < u_points; ++i) {
            const double u1 = u_lo + (u_hi - u_lo) * static_cast<double>(i) /
                                         static_cast<double>(u_points - 1);
            for (std::size_t j = i + 1; j < u_points; ++j) {
                const double u2 = u_lo + (u_hi - u_lo) * static_cast<double>(j) /
                                             static_cast<double>(u_points - 1);
                const double g1 = ez_generator(params, u1, c, 1e-300, nullptr, false);
                const double g2 = ez_generator(params, u2, c, 1e-300, nullptr, false);
                const double ratio = (u1 - u2) * (g1 - g2) / ((u1 - u2) * (u1 - u2));
                report.mu_hat = std::max(report.mu_hat, ratio);
                ++report.probes;
                if (report.contractual() &&
                    ratio > report.bound + slack * (1.0 + std::abs(report.bound)))
                    ++report.violations;
            }
        }
    }
    return report;
}

} // namespace dsrc
