#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "dsrc/core/errors.hpp"
#include "dsrc/core/path_segment.hpp"

namespace dsrc {

/// Polynomial features of a segment: all monomials of total degree <= degree
/// in the current state gamma(s) and, when the grid carries a lag, the fully
/// lagged state gamma(s - delta). Monomial order is fixed (graded
/// lexicographic over exponent vectors) so feature indices are stable.
class SegmentBasis {
public:
    SegmentBasis(std::size_t state_dim, bool include_lagged, std::size_t degree)
        : state_dim_(state_dim), include_lagged_(include_lagged), degree_(degree) {
        const std::size_t coords = coord_count();
        std::vector<std::size_t> expo(coords, 0);
        enumerate(expo, 0, degree_);
    }

    std::size_t size() const { return exponents_.size(); }
    std::size_t coord_count() const { return state_dim_ * (include_lagged_ ? 2 : 1); }

    /// Thread-safe: reads the segment directly, no shared scratch.
    void eval(const PathSegment& seg, std::span<double> out) const {
        const std::size_t coords = coord_count();
        auto coord = [&](std::size_t c) {
            return c < state_dim_ ? seg.current()[c] : seg.lagged()[c - state_dim_];
        };
        for (std::size_t f = 0; f < exponents_.size(); ++f) {
            double v = 1.0;
            for (std::size_t c = 0; c < coords; ++c)
                for (std::size_t e = 0; e < exponents_[f][c]; ++e)
                    v *= coord(c);
            out[f] = v;
        }
    }

private:
    void enumerate(std::vector<std::size_t>& expo, std::size_t pos, std::size_t budget) {
        if (pos == expo.size()) {
            exponents_.push_back(expo);
            return;
        }
        for (std::size_t e = 0; e <= budget; ++e) {
            expo[pos] = e;
            enumerate(expo, pos + 1, budget - e);
        }
        expo[pos] = 0;
    }

    std::size_t state_dim_;
    bool include_lagged_;
    std::size_t degree_;
    std::vector<std::vector<std::size_t>> exponents_;
};

/// Least-squares conditional expectation operator for one time step:
/// fit once against the feature matrix, then apply to several responses
/// (the Y regression and each Z component share the design matrix).
///
/// Degenerate designs are resolved before factorization:
///  - responses with zero cross-sectional spread pass through unchanged
///    (the deterministic conditional expectation), and
///  - designs with no informative column collapse to the sample mean.
/// A genuinely rank-deficient informative design is an error.
class StepRegression {
public:
    /// features: row-major [paths x n_features]; first column need not be 1,
    /// an intercept is always prepended internally.
    StepRegression(const std::vector<double>& features, std::size_t n_paths,
                   std::size_t n_features, double rank_tolerance = 1e-12)
        : n_paths_(n_paths) {
        // Informative columns: spread above an absolute-relative hybrid floor.
        for (std::size_t f = 0; f < n_features; ++f) {
            double lo = features[f], hi = features[f];
            for (std::size_t p = 1; p < n_paths; ++p) {
                const double v = features[p * n_features + f];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
            if (hi - lo > 1e-13 * scale) informative_.push_back(f);
        }
        if (informative_.empty()) return;  // mean-only operator

        const std::size_t cols = informative_.size() + 1;
        design_.resize(n_paths, cols);
        for (std::size_t p = 0; p < n_paths; ++p) {
            design_(static_cast<Eigen::Index>(p), 0) = 1.0;
            for (std::size_t j = 0; j < informative_.size(); ++j)
                design_(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j + 1)) =
                    features[p * n_features + informative_[j]];
        }
        // Column scaling for conditioning; Gram built once in column order.
        col_scale_ = design_.colwise().norm() / std::sqrt(static_cast<double>(n_paths));
        for (Eigen::Index c = 0; c < design_.cols(); ++c)
            if (col_scale_(c) > 0.0) design_.col(c) /= col_scale_(c);

        // Eigen-truncated normal equations. Exactly collinear columns (the
        // frozen lag window of a delayed model duplicates coordinates) are
        // projected out; the fitted values are the unique projection onto
        // the column span either way. Only a design with no usable
        // direction at all is an error.
        const Eigen::MatrixXd gram = design_.transpose() * design_;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        if (eig.info() != Eigen::Success)
            throw NumericError("regression: eigendecomposition of the Gram matrix failed");
        const Eigen::VectorXd& lambda = eig.eigenvalues();
        const double max_eig = lambda.maxCoeff();
        if (!(max_eig > 0.0) || !std::isfinite(max_eig))
            throw NumericError("regression: rank-deficient design (condition number inf)");
        double min_retained = max_eig;
        Eigen::VectorXd inv_lambda = Eigen::VectorXd::Zero(lambda.size());
        for (Eigen::Index i = 0; i < lambda.size(); ++i) {
            if (lambda(i) > rank_tolerance * max_eig) {
                inv_lambda(i) = 1.0 / lambda(i);
                min_retained = std::min(min_retained, lambda(i));
            } else {
                ++truncated_directions_;
            }
        }
        condition_ = max_eig / min_retained;
        pseudo_inverse_ = eig.eigenvectors() * inv_lambda.asDiagonal() *
                          eig.eigenvectors().transpose();
    }

    /// Fitted values of the response (per-path conditional expectation
    /// estimate), written into `out`.
    void fit(std::span<const double> response, std::span<double> out) const {
        // Deterministic response: conditional expectation is the value itself.
        double lo = response[0], hi = response[0];
        for (double v : response) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (lo == hi) {
            std::fill(out.begin(), out.end(), lo);
            return;
        }
        if (informative_.empty()) {
            double mean = 0.0;
            for (double v : response) mean += v;
            mean /= static_cast<double>(n_paths_);
            std::fill(out.begin(), out.end(), mean);
            return;
        }
        Eigen::Map<const Eigen::VectorXd> y(response.data(),
                                            static_cast<Eigen::Index>(n_paths_));
        const Eigen::VectorXd beta = pseudo_inverse_ * (design_.transpose() * y);
        Eigen::Map<Eigen::VectorXd> fitted(out.data(),
                                           static_cast<Eigen::Index>(n_paths_));
        fitted = design_ * beta;
    }

    /// True when every response collapses to its sample mean (or itself).
    bool mean_only() const { return informative_.empty(); }
    double condition_number() const { return condition_; }
    std::size_t truncated_directions() const { return truncated_directions_; }

private:
    std::size_t n_paths_;
    std::vector<std::size_t> informative_;
    Eigen::MatrixXd design_;
    Eigen::RowVectorXd col_scale_;
    Eigen::MatrixXd pseudo_inverse_;
    double condition_ = 1.0;
    std::size_t truncated_directions_ = 0;
};

} // namespace dsrc
