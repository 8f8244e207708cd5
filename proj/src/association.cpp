#include "mtt/association.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "mtt/error.hpp"

namespace mtt {

ValidationContext::ValidationContext(double gate_threshold, Eigen::MatrixXd likelihoods)
    : gate_threshold_(gate_threshold), likelihoods_(std::move(likelihoods)) {
    if (!likelihoods_.allFinite() || (likelihoods_.array() < 0.0).any())
        throw ShapeError("validation context: likelihoods must be finite and non-negative");
    gate_ = likelihoods_.array() > 0.0;
}

double gate_threshold_from_pg(double gating_probability, int dim) {
    if (!(gating_probability > 0.0 && gating_probability < 1.0))
        throw DomainError("gating probability must lie strictly inside (0, 1)");
    if (dim < 1) throw DomainError("gate dimension must be >= 1");
    if (dim == 2) return -2.0 * std::log1p(-gating_probability);
    boost::math::chi_squared dist(static_cast<double>(dim));
    return boost::math::quantile(dist, gating_probability);
}

double mahalanobis_squared(const Vec2& z, const MeasurementPrediction& pred) {
    Eigen::LLT<Mat2> llt(pred.S);
    if (llt.info() != Eigen::Success)
        throw SingularInnovationError("innovation covariance is not positive definite");
    const Vec2 nu = z - pred.z_hat;
    const Vec2 w = llt.matrixL().solve(nu);
    return w.squaredNorm();
}

double gated_likelihood(const Vec2& z, const MeasurementPrediction& pred, double gating_probability,
                        double gamma) {
    Eigen::LLT<Mat2> llt(pred.S);
    if (llt.info() != Eigen::Success)
        throw SingularInnovationError("innovation covariance is not positive definite");
    const Vec2 nu = z - pred.z_hat;
    const double d2 = llt.matrixL().solve(nu).squaredNorm();
    if (!(d2 <= gamma)) return 0.0;
    // sqrt(det S) from the Cholesky diagonal.
    const Mat2 l = llt.matrixL();
    const double sqrt_det = l(0, 0) * l(1, 1);
    const double density = std::exp(-0.5 * d2) / (2.0 * std::numbers::pi * sqrt_det);
    return density / gating_probability;
}

ValidationContext build_validation_context(std::span<const MeasurementPrediction> tracks,
                                           std::span<const Vec2> measurements,
                                           double gating_probability, double gamma) {
    const auto m = static_cast<Eigen::Index>(measurements.size());
    const auto n = static_cast<Eigen::Index>(tracks.size());
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        try {
            for (Eigen::Index i = 0; i < m; ++i)
                g(i, j) = gated_likelihood(measurements[static_cast<std::size_t>(i)],
                                           tracks[static_cast<std::size_t>(j)], gating_probability, gamma);
        } catch (const SingularInnovationError& e) {
            throw SingularInnovationError(e.what(), static_cast<int>(j));
        }
    }
    return ValidationContext(gamma, std::move(g));
}

ValidationContext build_validation_context(std::span<const MeasurementPrediction> tracks,
                                           std::span<const Vec2> measurements,
                                           double gating_probability) {
    return build_validation_context(tracks, measurements, gating_probability,
                                    gate_threshold_from_pg(gating_probability, 2));
}

}  // namespace mtt
