#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dsrc/bsde/solver.hpp"
#include "dsrc/core/specs.hpp"
#include "dsrc/sdde/ensemble.hpp"

namespace dsrc {

/// Result of the executable comparison theorem. The theorem is exact in
/// continuous time; the discrete scheme leaks O(h), absorbed by
/// slack = slack_per_h * h. When the sample-verified ordering precondition
/// fails the check is inapplicable, not failed.
struct ComparisonReport {
    bool applicable = true;
    std::string precondition_witness;  // first violation of the ordering, if any
    std::size_t pairs_checked = 0;     // (path, node) pairs compared
    std::size_t violations = 0;        // Y1 > Y2 + slack
    double violation_fraction = 0.0;
    double max_violation = 0.0;        // largest Y1 - Y2 - slack observed
    double terminal_gap_min = 0.0;     // min over paths of Y2(T) - Y1(T)

    bool passes(double quantile) const {
        return applicable && violation_fraction <= quantile;
    }
};

/// Verify Phi1 <= Phi2 path-wise and g1 <= g2 along (Y2, Z2) sample-wise,
/// then count (path, node) pairs with Y1 > Y2 + slack_per_h * h.
inline ComparisonReport comparison_check(const BsdeSolution& sol1,
                                         const BsdeSolution& sol2,
                                         const GeneratorSpec& gen1,
                                         const GeneratorSpec& gen2,
                                         const PathEnsemble& ens,
                                         const LatticeControl& control,
                                         double slack_per_h,
                                         double precondition_slack = 1e-12) {
    if (sol1.j_from != sol2.j_from || sol1.j_to != sol2.j_to ||
        sol1.n_paths != sol2.n_paths)
        throw ConfigError("comparison_check: solutions on different windows");

    ComparisonReport report;
    const double h = ens.grid.step();
    const double slack = slack_per_h * h;
    PathSegment seg;

    // Precondition: terminal ordering.
    double terminal_gap_min = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < ens.n_paths; ++p) {
        fill_segment(ens, p, ens.grid.end_node(), seg);
        const double p1 = gen1.phi(seg);
        const double p2 = gen2.phi(seg);
        terminal_gap_min = std::min(terminal_gap_min, p2 - p1);
        if (p1 > p2 + precondition_slack) {
            report.applicable = false;
            report.precondition_witness =
                "Phi1 > Phi2 at path " + std::to_string(p) + " (" +
                std::to_string(p1) + " > " + std::to_string(p2) + ")";
            return report;
        }
    }
    report.terminal_gap_min = terminal_gap_min;

    // Precondition: driver ordering along the second solution.
    for (std::size_t j = sol2.j_from; j < sol2.j_to; ++j) {
        const std::size_t node = ens.grid.start_node() + j;
        const double t = ens.grid.node(node);
        const auto v = control.at(t);
        for (std::size_t p = 0; p < ens.n_paths; ++p) {
            fill_segment(ens, p, node, seg);
            const auto z = sol2.z_at(p, j);
            const double y = sol2.y_at(p, j);
            const double g1 = gen1.g(t, seg, y, z, v);
            const double g2 = gen2.g(t, seg, y, z, v);
            if (g1 > g2 + precondition_slack) {
                report.applicable = false;
                report.precondition_witness =
                    "g1 > g2 witnessed at path " + std::to_string(p) + ", step " +
                    std::to_string(j) + " (" + std::to_string(g1) + " > " +
                    std::to_string(g2) + ")";
                return report;
            }
        }
    }

    for (std::size_t j = sol1.j_from; j <= sol1.j_to; ++j) {
        for (std::size_t p = 0; p < sol1.n_paths; ++p) {
            ++report.pairs_checked;
            const double excess = sol1.y_at(p, j) - sol2.y_at(p, j) - slack;
            if (excess > 0.0) {
                ++report.violations;
                report.max_violation = std::max(report.max_violation, excess);
            }
        }
    }
    report.violation_fraction =
        static_cast<double>(report.violations) /
        static_cast<double>(std::max<std::size_t>(1, report.pairs_checked));
    return report;
}

/// Moment and continuity audit of a solved BSDE, mirroring the a priori
/// estimate E sup |Y|^2 <= C(1 + ||gamma||^2 + ...).
struct EstimateAuditReport {
    double mean_sup_y_sq = 0.0;            // E[ sup_k |Y_k|^2 ]
    std::vector<double> continuity_ratios; // |Y(t0;g) - Y(t0;g')| / ||g - g'||
    double max_continuity_ratio = 0.0;
    std::size_t skipped_pairs = 0;
};

/// E[sup |Y|^2] of a solution plus initial-condition continuity ratios over
/// probe pairs. `resolve` maps an initial segment to the solved initial
/// value under identical (control, seed, scheme) choices.
template <typename Resolve>
EstimateAuditReport estimate_audit(
    const BsdeSolution& sol, Resolve&& resolve,
    const std::vector<std::pair<PathSegment, PathSegment>>& probe_pairs) {
    EstimateAuditReport report;
    for (std::size_t p = 0; p < sol.n_paths; ++p) {
        double sup = 0.0;
        for (std::size_t j = sol.j_from; j <= sol.j_to; ++j)
            sup = std::max(sup, sol.y_at(p, j) * sol.y_at(p, j));
        report.mean_sup_y_sq += sup;
    }
    report.mean_sup_y_sq /= static_cast<double>(std::max<std::size_t>(1, sol.n_paths));

    for (const auto& [ga, gb] : probe_pairs) {
        const double dist = sup_norm_distance(ga, gb);
        if (dist == 0.0) {
            ++report.skipped_pairs;
            continue;
        }
        const double ya = resolve(ga);
        const double yb = resolve(gb);
        const double ratio = std::abs(ya - yb) / dist;
        report.continuity_ratios.push_back(ratio);
        report.max_continuity_ratio = std::max(report.max_continuity_ratio, ratio);
    }
    return report;
}

} // namespace dsrc
