#pragma once

#include <span>

#include <Eigen/Dense>

#include "mtt/kinematics.hpp"

namespace mtt {

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Gate and likelihood matrices for one frame. Rows are measurements,
/// columns are tracks. A pair is gated exactly when its likelihood is > 0.
class ValidationContext {
public:
    ValidationContext() = default;

    /// Builds the gate matrix from `likelihoods` (entry > 0 means gated).
    /// Throws ShapeError on negative or non-finite entries.
    ValidationContext(double gate_threshold, Eigen::MatrixXd likelihoods);

    double gate_threshold() const noexcept { return gate_threshold_; }
    const BoolMatrix& gate() const noexcept { return gate_; }
    const Eigen::MatrixXd& likelihoods() const noexcept { return likelihoods_; }

    Eigen::Index measurement_count() const noexcept { return likelihoods_.rows(); }
    Eigen::Index track_count() const noexcept { return likelihoods_.cols(); }

    bool gated(Eigen::Index measurement, Eigen::Index track) const { return gate_(measurement, track); }
    double likelihood(Eigen::Index measurement, Eigen::Index track) const {
        return likelihoods_(measurement, track);
    }

private:
    double gate_threshold_ = 0.0;
    Eigen::MatrixXd likelihoods_;
    BoolMatrix gate_;
};

/// Chi-square quantile gamma with CDF_dim(gamma) = P_G. Closed form
/// -2 ln(1 - P_G) for dim = 2.
double gate_threshold_from_pg(double gating_probability, int dim = 2);

/// Squared Mahalanobis distance of z from the prediction.
double mahalanobis_squared(const Vec2& z, const MeasurementPrediction& pred);

/// P_G^-1 * N(z; z_hat, S) inside the gate (d^2 <= gamma), exactly 0 outside.
double gated_likelihood(const Vec2& z, const MeasurementPrediction& pred, double gating_probability,
                        double gamma);

ValidationContext build_validation_context(std::span<const MeasurementPrediction> tracks,
                                           std::span<const Vec2> measurements,
                                           double gating_probability, double gamma);

/// Same as above with gamma derived from P_G for two dimensions.
ValidationContext build_validation_context(std::span<const MeasurementPrediction> tracks,
                                           std::span<const Vec2> measurements,
                                           double gating_probability);

}  // namespace mtt
