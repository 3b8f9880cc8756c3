#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "dsrc/core/control_lattice.hpp"
#include "dsrc/core/errors.hpp"
#include "dsrc/core/rng.hpp"
#include "dsrc/core/specs.hpp"
#include "dsrc/hjb/projection.hpp"

namespace dsrc {

/// Dense symmetric matrix in the projected coordinates.
struct SymMatrix {
    std::size_t dim = 0;
    std::vector<double> a;  // row-major dim x dim

    static SymMatrix zero(std::size_t dim) { return {dim, std::vector<double>(dim * dim, 0.0)}; }

    double operator()(std::size_t i, std::size_t j) const { return a[i * dim + j]; }
    double& operator()(std::size_t i, std::size_t j) { return a[i * dim + j]; }

    bool is_symmetric(double tol = 1e-12) const {
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = i + 1; j < dim; ++j)
                if (std::abs(a[i * dim + j] - a[j * dim + i]) >
                    tol * std::max(1.0, std::abs(a[i * dim + j])))
                    return false;
        return true;
    }

    /// X + B^T B for a random B: a PSD-ordered dominator of X.
    static SymMatrix psd_bump(const SymMatrix& x, SequenceRng& rng, double scale = 1.0) {
        SymMatrix y = x;
        std::vector<double> b(x.dim * x.dim);
        for (double& v : b) v = scale * rng.normal();
        for (std::size_t i = 0; i < x.dim; ++i)
            for (std::size_t j = 0; j < x.dim; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < x.dim; ++k)
                    s += b[k * x.dim + i] * b[k * x.dim + j];
                y(i, j) += s;
            }
        return y;
    }

    static SymMatrix random_psd(std::size_t dim, SequenceRng& rng, double scale = 1.0) {
        return psd_bump(zero(dim), rng, scale);
    }
};

/// Hamiltonian of the projected HJB equation at (t, gamma, r, p, A):
/// max over the enumerated control values of
///   <p, b_proj> + 1/2 tr(sigma_proj sigma_proj^T A) + g(t, gamma, r, v),
/// where the coefficients are routed through the current-state block of the
/// projection (lagged coordinates carry no Ito dynamics of their own).
/// Requires a z-independent driver, the standing assumption of the HJB
/// analysis.
inline double hamiltonian(double t, const PathSegment& seg, double r,
                          std::span<const double> p, const SymMatrix& A,
                          const Model& model, const ControlLattice& lattice,
                          const LagProjection& proj) {
    if (model.generator.z_dependent)
        throw ConfigError("hamiltonian: driver must be independent of z");
    if (p.size() != proj.coord_dim() || A.dim != proj.coord_dim())
        throw ConfigError("hamiltonian: p/A dimension mismatch with the projection");
    if (!A.is_symmetric()) throw ConfigError("hamiltonian: A must be symmetric");
    lattice.validate();

    const std::size_t n = model.coefficients.state_dim;
    const std::size_t d = model.coefficients.noise_dim;
    std::vector<double> b(n), sig(n * d);
    const std::vector<double> z_dummy;

    double best = 0.0;
    bool first = true;
    for (const auto& v : lattice.values) {
        model.coefficients.drift(t, seg, v, b);
        model.coefficients.diffusion(t, seg, v, sig);
        double drift_term = 0.0;
        for (std::size_t c = 0; c < n; ++c) drift_term += p[c] * b[c];
        double trace_term = 0.0;
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t cc = 0; cc < n; ++cc) {
                double cov = 0.0;
                for (std::size_t j = 0; j < d; ++j) cov += sig[c * d + j] * sig[cc * d + j];
                trace_term += cov * A(c, cc);
            }
        const double candidate =
            drift_term + 0.5 * trace_term + model.generator.g(t, seg, r, z_dummy, v);
        if (first || candidate > best) {
            best = candidate;
            first = false;
        }
    }
    return best;
}

/// Degenerate-ellipticity audit: for ordered PSD pairs X <= Y (constructed
/// as Y = X + B^T B), count probes where H(..., X) > H(..., Y) + 1e-10.
/// Every Hamiltonian built from `hamiltonian` is trace-monotone, so the
/// count is zero; a sign-flipped fixture must trip it.
struct EllipticityReport {
    std::size_t probes = 0;
    std::size_t violations = 0;
    double worst_gap = 0.0;  // largest H(X) - H(Y) observed
};

inline EllipticityReport ellipticity_audit(
    const std::function<double(const SymMatrix&)>& hamiltonian_of_A, std::size_t dim,
    std::size_t n_probes, std::uint64_t seed, double tol = 1e-10) {
    EllipticityReport report;
    SequenceRng rng(seed);
    for (std::size_t i = 0; i < n_probes; ++i) {
        const SymMatrix x = SymMatrix::random_psd(dim, rng);
        const SymMatrix y = SymMatrix::psd_bump(x, rng);
        const double hx = hamiltonian_of_A(x);
        const double hy = hamiltonian_of_A(y);
        ++report.probes;
        report.worst_gap = std::max(report.worst_gap, hx - hy);
        if (hx > hy + tol) ++report.violations;
    }
    return report;
}

/// Probe point of the Hamiltonian domain.
struct HamiltonianProbe {
    double t = 0.0;
    PathSegment segment;
    double r = 0.0;
    std::vector<double> p;
    SymMatrix A;
};

/// Row of the H_n -> H transfer table.
struct HamiltonianConvergenceRow {
    std::size_t n = 0;
    double h_error = 0.0;   // sup over probes of |H_n - H|
    double g_error = 0.0;   // sup over probes x U of |g_n - g| at the r slot
    bool transfer_ok = false;  // h_error <= g_error (+ float dust)
};

/// For each n in the schedule, compare sup |H_n - H| on the probe lattice
/// against sup_v |g_n - g| at the same points. The inequality is algebraic
/// (identical drift/trace terms cancel), so it must hold up to rounding
/// dust; `dust` is the only slack applied.
template <typename Family>
std::vector<HamiltonianConvergenceRow> hamiltonian_convergence_audit(
    const Model& model, Family&& mollified_generator,
    const std::vector<std::size_t>& schedule,
    const std::vector<HamiltonianProbe>& probes, const ControlLattice& lattice,
    const LagProjection& proj, double dust = 1e-12) {
    std::vector<HamiltonianConvergenceRow> rows;
    const std::vector<double> z_dummy;
    for (std::size_t n : schedule) {
        const GeneratorSpec g_n = mollified_generator(n);
        Model approx = model;
        approx.generator = g_n;
        HamiltonianConvergenceRow row;
        row.n = n;
        for (const auto& probe : probes) {
            const double h0 = hamiltonian(probe.t, probe.segment, probe.r, probe.p,
                                          probe.A, model, lattice, proj);
            const double h1 = hamiltonian(probe.t, probe.segment, probe.r, probe.p,
                                          probe.A, approx, lattice, proj);
            row.h_error = std::max(row.h_error, std::abs(h1 - h0));
            for (const auto& v : lattice.values) {
                const double ga = model.generator.g(probe.t, probe.segment, probe.r,
                                                    z_dummy, v);
                const double gb = g_n.g(probe.t, probe.segment, probe.r, z_dummy, v);
                row.g_error = std::max(row.g_error, std::abs(gb - ga));
            }
        }
        row.transfer_ok = row.h_error <= row.g_error + dust;
        rows.push_back(row);
    }
    return rows;
}

} // namespace dsrc
