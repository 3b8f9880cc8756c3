#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dsrc/core/path_segment.hpp"

namespace dsrc {

using ControlValue = std::span<const double>;

/// Drift b(t, gamma, v), written into `out` (n values).
using DriftFn =
    std::function<void(double, const PathSegment&, ControlValue, std::span<double>)>;
/// Diffusion sigma(t, gamma, v), written into `out` row-major (n x d).
using DiffusionFn =
    std::function<void(double, const PathSegment&, ControlValue, std::span<double>)>;

/// Coefficients of the controlled state equation with declared regularity.
/// lipschitz_L is the model author's (A2) constant; it is sample-audited,
/// never inferred.
struct CoefficientSpec {
    std::size_t state_dim = 1;
    std::size_t noise_dim = 1;
    DriftFn drift;
    DiffusionFn diffusion;
    double lipschitz_L = 0.0;
};

/// Driver g(t, gamma, y, z, v).
using GeneratorFn = std::function<double(double, const PathSegment&, double,
                                         std::span<const double>, ControlValue)>;
/// Terminal condition Phi(gamma).
using TerminalFn = std::function<double(const PathSegment&)>;

/// BSDE driver and terminal condition with declared (A3)-(A6) metadata:
/// Lipschitz in (gamma, z), one-sided monotone in y with constant mu, and
/// polynomial growth (M, p) of the y-increment. When z_dependent is false
/// the driver ignores its z argument exactly.
struct GeneratorSpec {
    GeneratorFn g;
    TerminalFn phi;
    double lipschitz_Ltilde = 0.0;
    double monotone_mu = 0.0;
    double growth_M = 0.0;
    double growth_p = 1.0;
    bool z_dependent = false;
};

/// A complete problem instance: controlled dynamics plus recursive cost.
struct Model {
    CoefficientSpec coefficients;
    GeneratorSpec generator;
};

/// Convenience builder for drivers of y alone.
inline GeneratorSpec make_y_generator(std::function<double(double)> gy,
                                      TerminalFn phi, double mu, double M,
                                      double p, double Ltilde = 0.0) {
    GeneratorSpec spec;
    spec.g = [gy = std::move(gy)](double, const PathSegment&, double y,
                                  std::span<const double>, ControlValue) {
        return gy(y);
    };
    spec.phi = std::move(phi);
    spec.monotone_mu = mu;
    spec.growth_M = M;
    spec.growth_p = p;
    spec.lipschitz_Ltilde = Ltilde;
    spec.z_dependent = false;
    return spec;
}

} // namespace dsrc
