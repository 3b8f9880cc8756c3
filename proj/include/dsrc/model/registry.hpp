#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <string>

#include "dsrc/core/errors.hpp"
#include "dsrc/core/specs.hpp"
#include "dsrc/ez/epstein_zin.hpp"

namespace dsrc {

/// Named parameters of a registry entry.
using ParamMap = std::map<std::string, double>;

inline double param(const ParamMap& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

inline double require_param(const ParamMap& params, const std::string& key,
                            const std::string& owner) {
    auto it = params.find(key);
    if (it == params.end())
        throw ConfigError(owner + ": missing required parameter '" + key + "'");
    return it->second;
}

// ---------------------------------------------------------------------------
// Coefficient registry. All built-ins are scalar (n = d = 1); the model
// format reference in the README documents each entry and its parameters.
// ---------------------------------------------------------------------------

inline CoefficientSpec make_coefficients(const std::string& name, const ParamMap& p) {
    CoefficientSpec c;
    c.state_dim = 1;
    c.noise_dim = 1;
    auto zero_fn = [](double, const PathSegment&, ControlValue, std::span<double> out) {
        out[0] = 0.0;
    };
    if (name == "zero") {
        // b = 0, sigma = 0 (frozen dynamics)
        c.drift = zero_fn;
        c.diffusion = zero_fn;
        c.lipschitz_L = 0.0;
    } else if (name == "control_drift") {
        // b = v, sigma = sigma0 (steering; deterministic when sigma0 = 0)
        const double sigma0 = param(p, "sigma0", 0.0);
        c.drift = [](double, const PathSegment&, ControlValue v, std::span<double> out) {
            out[0] = v[0];
        };
        c.diffusion = [sigma0](double, const PathSegment&, ControlValue,
                               std::span<double> out) { out[0] = sigma0; };
        c.lipschitz_L = 1.0;
    } else if (name == "gbm") {
        // b = a x(t), sigma = sigma0 x(t)
        const double a = param(p, "a", 0.0);
        const double sigma0 = param(p, "sigma0", 0.0);
        c.drift = [a](double, const PathSegment& seg, ControlValue, std::span<double> out) {
            out[0] = a * seg.current_scalar();
        };
        c.diffusion = [sigma0](double, const PathSegment& seg, ControlValue,
                               std::span<double> out) {
            out[0] = sigma0 * seg.current_scalar();
        };
        c.lipschitz_L = std::abs(a) + std::abs(sigma0);
    } else if (name == "lagged_drift") {
        // b = a x(t - delta), sigma = sigma0 (method-of-steps fixture)
        const double a = param(p, "a", 1.0);
        const double sigma0 = param(p, "sigma0", 0.0);
        c.drift = [a](double, const PathSegment& seg, ControlValue, std::span<double> out) {
            out[0] = a * seg.lagged_scalar();
        };
        c.diffusion = [sigma0](double, const PathSegment&, ControlValue,
                               std::span<double> out) { out[0] = sigma0; };
        c.lipschitz_L = std::abs(a);
    } else if (name == "delayed_gbm") {
        // b = a x(t - delta), sigma = sigma0 x(t): delayed drift, diffusive
        const double a = param(p, "a", 0.5);
        const double sigma0 = param(p, "sigma0", 0.2);
        c.drift = [a](double, const PathSegment& seg, ControlValue, std::span<double> out) {
            out[0] = a * seg.lagged_scalar();
        };
        c.diffusion = [sigma0](double, const PathSegment& seg, ControlValue,
                               std::span<double> out) {
            out[0] = sigma0 * seg.current_scalar();
        };
        c.lipschitz_L = std::abs(a) + std::abs(sigma0);
    } else if (name == "blowup") {
        // b = x(t)^2 with no growth guard: drives the non-finite-state abort
        c.drift = [](double, const PathSegment& seg, ControlValue, std::span<double> out) {
            const double x = seg.current_scalar();
            out[0] = std::exp(x) * x * x;
        };
        c.diffusion = zero_fn;
        c.lipschitz_L = 0.0;  // deliberately wrong; fixture for error paths
    } else {
        throw ConfigError("unknown coefficient registry entry '" + name + "'");
    }
    return c;
}

// ---------------------------------------------------------------------------
// Terminal registry.
// ---------------------------------------------------------------------------

inline TerminalFn make_terminal(const std::string& name, const ParamMap& p) {
    if (name == "const") {
        const double c = param(p, "c", 1.0);
        return [c](const PathSegment&) { return c; };
    }
    if (name == "last_value") {
        return [](const PathSegment& seg) { return seg.current_scalar(); };
    }
    if (name == "neg_square") {
        return [](const PathSegment& seg) {
            const double x = seg.current_scalar();
            return -x * x;
        };
    }
    if (name == "clamped_last") {
        const double lo = param(p, "lo", -1.0);
        const double hi = param(p, "hi", 1.0);
        const double shift = param(p, "shift", 0.0);
        return [lo, hi, shift](const PathSegment& seg) {
            return std::clamp(seg.current_scalar(), lo, hi) + shift;
        };
    }
    if (name == "shifted_tanh") {
        // c0 + c1 tanh(x(T)): bounded, 1-Lipschitz scale c1
        const double c0 = param(p, "c0", 0.0);
        const double c1 = param(p, "c1", 1.0);
        return [c0, c1](const PathSegment& seg) {
            return c0 + c1 * std::tanh(seg.current_scalar());
        };
    }
    throw ConfigError("unknown terminal registry entry '" + name + "'");
}

// ---------------------------------------------------------------------------
// Generator registry. Declared constants (Ltilde, mu, M, p) can be
// overridden from the model file; defaults are the tightest honest bounds
// for each built-in on its intended box.
// ---------------------------------------------------------------------------

inline GeneratorSpec make_generator(const std::string& name, const ParamMap& p,
                                    TerminalFn phi) {
    GeneratorSpec g;
    g.phi = std::move(phi);
    g.z_dependent = false;
    if (name == "zero") {
        g.g = [](double, const PathSegment&, double, std::span<const double>,
                 ControlValue) { return 0.0; };
        g.monotone_mu = 0.0;
        g.growth_M = 0.0;
        g.growth_p = 1.0;
    } else if (name == "linear_y") {
        // g = mu y + c
        const double mu = param(p, "mu", -1.0);
        const double c = param(p, "c", 0.0);
        g.g = [mu, c](double, const PathSegment&, double y, std::span<const double>,
                      ControlValue) { return mu * y + c; };
        g.monotone_mu = mu;
        g.growth_M = std::abs(mu);
        g.growth_p = 1.0;
    } else if (name == "cubic_decay") {
        // g = -y^3: monotone (mu = 0), non-Lipschitz, polynomial growth p = 3
        g.g = [](double, const PathSegment&, double y, std::span<const double>,
                 ControlValue) { return -y * y * y; };
        g.monotone_mu = 0.0;
        g.growth_M = 1.0;
        g.growth_p = 3.0;
    } else if (name == "abs_y") {
        // g = |y| + c: the kink fixture of the mollification studies
        const double c = param(p, "c", 0.0);
        g.g = [c](double, const PathSegment&, double y, std::span<const double>,
                  ControlValue) { return std::abs(y) + c; };
        g.monotone_mu = 1.0;
        g.growth_M = 1.0;
        g.growth_p = 1.0;
    } else if (name == "damped_state") {
        // g = mu y + k tanh(x(t)) + c: state-coupled driver for the
        // comparison and regularity scenarios
        const double mu = param(p, "mu", -1.0);
        const double k = param(p, "k", 0.5);
        const double c = param(p, "c", 0.0);
        g.g = [mu, k, c](double, const PathSegment& seg, double y,
                         std::span<const double>, ControlValue) {
            return mu * y + k * std::tanh(seg.current_scalar()) + c;
        };
        g.monotone_mu = mu;
        g.growth_M = std::abs(mu);
        g.growth_p = 1.0;
        g.lipschitz_Ltilde = std::abs(k);
    } else if (name == "damped_control") {
        // g = mu y + k tanh(x(t)) + q v0: the control enters the driver,
        // so the lattice maximization is non-degenerate
        const double mu = param(p, "mu", -1.0);
        const double k = param(p, "k", 0.5);
        const double q = param(p, "q", 0.3);
        g.g = [mu, k, q](double, const PathSegment& seg, double y,
                         std::span<const double>, ControlValue v) {
            return mu * y + k * std::tanh(seg.current_scalar()) + q * v[0];
        };
        g.monotone_mu = mu;
        g.growth_M = std::abs(mu);
        g.growth_p = 1.0;
        g.lipschitz_Ltilde = std::abs(k);
    } else if (name == "cubic_state") {
        // g = -y^3 + k tanh(x(t-delta)) + c: non-Lipschitz with delayed coupling
        const double k = param(p, "k", 0.5);
        const double c = param(p, "c", 0.0);
        g.g = [k, c](double, const PathSegment& seg, double y, std::span<const double>,
                     ControlValue) {
            return -y * y * y + k * std::tanh(seg.lagged_scalar()) + c;
        };
        g.monotone_mu = 0.0;
        g.growth_M = 1.0;
        g.growth_p = 3.0;
        g.lipschitz_Ltilde = std::abs(k);
    } else if (name == "ez") {
        const EzParams params(require_param(p, "vartheta", "generator ez"),
                              require_param(p, "psi", "generator ez"),
                              require_param(p, "r", "generator ez"));
        // Consumption is control component 1 when present, else component 0.
        g.g = [params](double, const PathSegment&, double y, std::span<const double>,
                       ControlValue v) {
            const double c = v.size() > 1 ? v[1] : v[0];
            return ez_generator(params, y, c);
        };
        g.monotone_mu = params.monotonicity_bound();
        g.growth_M = 4.0 * params.vartheta * (1.0 + std::abs(g.monotone_mu));
        g.growth_p = std::max(2.0, 1.0 + std::abs(params.theta()));
    } else {
        throw ConfigError("unknown generator registry entry '" + name + "'");
    }
    // Declared-constant overrides.
    if (p.count("lipschitz_Ltilde")) g.lipschitz_Ltilde = p.at("lipschitz_Ltilde");
    if (p.count("monotone_mu")) g.monotone_mu = p.at("monotone_mu");
    if (p.count("growth_M")) g.growth_M = p.at("growth_M");
    if (p.count("growth_p")) g.growth_p = p.at("growth_p");
    return g;
}

} // namespace dsrc
