#pragma once

#include <span>

#include <Eigen/Dense>

namespace mtt {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Mat42 = Eigen::Matrix<double, 4, 2>;

/// Constant-velocity state, ordered [x, vx, y, vy].
struct GaussianState {
    Vec4 mean = Vec4::Zero();
    Mat4 covariance = Mat4::Zero();
};

struct MotionParams {
    double dt = 0.04;       ///< frame period [s]
    double sigma_q = 0.836; ///< white-noise acceleration deviation [u/s^2]
    double sigma_r = 0.141; ///< position measurement deviation [u]

    /// Throws ParameterError unless every field is finite and strictly positive.
    void validate() const;
};

struct MeasurementPrediction {
    Vec2 z_hat = Vec2::Zero();
    Mat2 S = Mat2::Identity();
    Mat42 gain = Mat42::Zero();
};

/// Per-axis transition [[1, dt], [0, 1]] laid out block-diagonally.
Mat4 transition_matrix(double dt);

/// Discrete white-noise-acceleration covariance, per axis
/// sigma_q^2 * [[dt^4/4, dt^3/2], [dt^3/2, dt^2]].
Mat4 process_noise(double dt, double sigma_q);

/// Selects [x, y] from the state.
Eigen::Matrix<double, 2, 4> measurement_matrix();

GaussianState predict_state(const GaussianState& s, const MotionParams& p);

/// Throws SingularInnovationError when S cannot be Cholesky-factorized or its
/// condition number exceeds 1e12.
MeasurementPrediction predict_measurement(const GaussianState& s, const MotionParams& p);

/// Soft Kalman correction with association weights.
///
/// The mean moves along the beta-weighted innovation; the covariance loses
/// (1 - beta0) of the gain term and gains the spread of the individual
/// innovations around their weighted mean. With beta0 = 1 and no
/// measurements the state is returned unchanged.
///
/// Throws AssociationContractError unless betas are non-negative, aligned
/// with measurements and sum to one together with beta0 (within 1e-9).
GaussianState jipda_update(const GaussianState& s, const MeasurementPrediction& pred,
                           std::span<const Vec2> measurements, std::span<const double> betas,
                           double beta0);

/// (M + M^T) / 2.
Mat4 symmetrized(const Mat4& m);

/// Symmetrizes and floors negative eigenvalues at zero.
Mat4 clamp_psd(const Mat4& m);

/// Symmetric within 1e-9 and smallest eigenvalue >= -1e-9 * largest.
bool satisfies_covariance_invariants(const Mat4& m);

}  // namespace mtt
