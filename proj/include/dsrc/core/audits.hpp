#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dsrc/core/path_segment.hpp"
#include "dsrc/core/rng.hpp"
#include "dsrc/core/specs.hpp"

namespace dsrc {

// Sample audits for the declared regularity constants. The constants are
// assumptions declared by the model author; these checks can only refute
// them on a finite probe set, never certify them.

struct AuditReport {
    std::size_t probes = 0;
    std::size_t violations = 0;
    double worst_ratio = 0.0;  // largest observed ratio vs. the declared bound

    bool clean() const { return violations == 0; }
};

/// Probe point for coefficient/generator audits.
struct ProbePoint {
    double t = 0.0;
    PathSegment segment;
    double y = 0.0;
    std::vector<double> z;
    std::vector<double> control;
};

/// Uniform random segments/controls on declared boxes.
class ProbeGenerator {
public:
    ProbeGenerator(std::uint64_t seed, double t_lo, double t_hi, double step,
                   std::size_t lag_steps, std::size_t dim, double x_lo, double x_hi)
        : rng_(seed), t_lo_(t_lo), t_hi_(t_hi), step_(step), lag_steps_(lag_steps),
          dim_(dim), x_lo_(x_lo), x_hi_(x_hi) {}

    PathSegment segment() {
        PathSegment seg;
        seg.anchor = rng_.uniform(t_lo_, t_hi_);
        seg.step = step_;
        seg.dim = dim_;
        seg.values.resize((lag_steps_ + 1) * dim_);
        for (double& v : seg.values) v = rng_.uniform(x_lo_, x_hi_);
        return seg;
    }

    ProbePoint point(std::size_t z_dim, std::size_t control_dim, double y_lo,
                     double y_hi, double box_lo, double box_hi) {
        ProbePoint p;
        p.segment = segment();
        p.t = p.segment.anchor;
        p.y = rng_.uniform(y_lo, y_hi);
        p.z.resize(z_dim);
        for (double& v : p.z) v = rng_.uniform(-1.0, 1.0);
        p.control.resize(control_dim);
        for (double& v : p.control) v = rng_.uniform(box_lo, box_hi);
        return p;
    }

    SequenceRng& rng() { return rng_; }

private:
    SequenceRng rng_;
    double t_lo_, t_hi_, step_;
    std::size_t lag_steps_, dim_;
    double x_lo_, x_hi_;
};

/// (A2) spot check: |b(p) - b(q)| + |sigma(p) - sigma(q)| against
/// L * (||gamma - gamma'|| + |v - v'|), with multiplicative slack.
inline AuditReport audit_coefficient_lipschitz(const CoefficientSpec& coeffs,
                                               ProbeGenerator& gen,
                                               std::size_t n_pairs,
                                               double control_lo, double control_hi,
                                               std::size_t control_dim,
                                               double slack = 1e-9) {
    AuditReport report;
    std::vector<double> b1(coeffs.state_dim), b2(coeffs.state_dim);
    std::vector<double> s1(coeffs.state_dim * coeffs.noise_dim);
    std::vector<double> s2(coeffs.state_dim * coeffs.noise_dim);
    for (std::size_t i = 0; i < n_pairs; ++i) {
        PathSegment ga = gen.segment();
        PathSegment gb = gen.segment();
        gb.anchor = ga.anchor;  // same time, distinct paths
        std::vector<double> va(control_dim), vb(control_dim);
        for (double& v : va) v = gen.rng().uniform(control_lo, control_hi);
        for (double& v : vb) v = gen.rng().uniform(control_lo, control_hi);

        coeffs.drift(ga.anchor, ga, va, b1);
        coeffs.drift(gb.anchor, gb, vb, b2);
        coeffs.diffusion(ga.anchor, ga, va, s1);
        coeffs.diffusion(gb.anchor, gb, vb, s2);

        double num = 0.0;
        for (std::size_t k = 0; k < b1.size(); ++k) num += (b1[k] - b2[k]) * (b1[k] - b2[k]);
        num = std::sqrt(num);
        double ds = 0.0;
        for (std::size_t k = 0; k < s1.size(); ++k) ds += (s1[k] - s2[k]) * (s1[k] - s2[k]);
        num += std::sqrt(ds);

        double dv = 0.0;
        for (std::size_t k = 0; k < control_dim; ++k) dv += (va[k] - vb[k]) * (va[k] - vb[k]);
        const double den = sup_norm_distance(ga, gb) + std::sqrt(dv);
        if (den == 0.0) continue;

        ++report.probes;
        const double ratio = num / den;
        report.worst_ratio = std::max(report.worst_ratio, ratio);
        if (ratio > coeffs.lipschitz_L * (1.0 + slack) + slack) ++report.violations;
    }
    return report;
}

/// (A5) spot check: (y - y')(g(y) - g(y')) <= mu * |y - y'|^2.
inline AuditReport audit_generator_monotonicity(const GeneratorSpec& gen_spec,
                                                ProbeGenerator& gen,
                                                std::size_t n_pairs,
                                                double y_lo, double y_hi,
                                                double control_lo, double control_hi,
                                                std::size_t control_dim,
                                                std::size_t z_dim,
                                                double slack = 1e-9) {
    AuditReport report;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        ProbePoint p = gen.point(z_dim, control_dim, y_lo, y_hi, control_lo, control_hi);
        const double y2 = gen.rng().uniform(y_lo, y_hi);
        if (p.y == y2) continue;
        const double g1 = gen_spec.g(p.t, p.segment, p.y, p.z, p.control);
        const double g2 = gen_spec.g(p.t, p.segment, y2, p.z, p.control);
        ++report.probes;
        const double dy = p.y - y2;
        const double ratio = dy * (g1 - g2) / (dy * dy);
        report.worst_ratio = std::max(report.worst_ratio, ratio);
        if (ratio > gen_spec.monotone_mu + slack * (1.0 + std::abs(gen_spec.monotone_mu)))
            ++report.violations;
    }
    return report;
}

/// (A6) spot check: |g(y) - g(0)| <= M * (1 + |y|^p).
inline AuditReport audit_generator_growth(const GeneratorSpec& gen_spec,
                                          ProbeGenerator& gen,
                                          std::size_t n_points,
                                          double y_lo, double y_hi,
                                          double control_lo, double control_hi,
                                          std::size_t control_dim,
                                          std::size_t z_dim,
                                          double slack = 1e-9) {
    AuditReport report;
    for (std::size_t i = 0; i < n_points; ++i) {
        ProbePoint p = gen.point(z_dim, control_dim, y_lo, y_hi, control_lo, control_hi);
        const double gy = gen_spec.g(p.t, p.segment, p.y, p.z, p.control);
        const double g0 = gen_spec.g(p.t, p.segment, 0.0, p.z, p.control);
        ++report.probes;
        const double bound = gen_spec.growth_M *
                             (1.0 + std::pow(std::abs(p.y), gen_spec.growth_p));
        const double lhs = std::abs(gy - g0);
        if (bound > 0.0) report.worst_ratio = std::max(report.worst_ratio, lhs / bound);
        if (lhs > bound * (1.0 + slack) + slack) ++report.violations;
    }
    return report;
}

/// Exact z-independence: evaluating with two different z values must agree
/// bit-for-bit when the spec declares z_dependent = false.
inline bool check_z_independent(const GeneratorSpec& gen_spec, ProbeGenerator& gen,
                                std::size_t n_points, std::size_t z_dim,
                                std::size_t control_dim, double control_lo,
                                double control_hi) {
    for (std::size_t i = 0; i < n_points; ++i) {
        ProbePoint p = gen.point(z_dim, control_dim, -2.0, 2.0, control_lo, control_hi);
        std::vector<double> z2(z_dim);
        for (double& v : z2) v = gen.rng().uniform(-5.0, 5.0);
        const double g1 = gen_spec.g(p.t, p.segment, p.y, p.z, p.control);
        const double g2 = gen_spec.g(p.t, p.segment, p.y, z2, p.control);
        if (g1 != g2) return false;
    }
    return true;
}

} // namespace dsrc
