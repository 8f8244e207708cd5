#include "mtt/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtt/error.hpp"

namespace mtt {

namespace {

constexpr double kMaxConditionNumber = 1e12;
constexpr double kBetaSumTolerance = 1e-9;

bool all_finite(const GaussianState& s) {
    return s.mean.allFinite() && s.covariance.allFinite();
}

}  // namespace

void MotionParams::validate() const {
    auto check = [](double v, const char* name) {
        if (!std::isfinite(v) || v <= 0.0)
            throw ParameterError(std::string("motion parameter ") + name + " must be finite and > 0");
    };
    check(dt, "dt");
    check(sigma_q, "sigma_q");
    check(sigma_r, "sigma_r");
}

Mat4 transition_matrix(double dt) {
    Mat4 f = Mat4::Identity();
    f(0, 1) = dt;
    f(2, 3) = dt;
    return f;
}

Mat4 process_noise(double dt, double sigma_q) {
    const double q = sigma_q * sigma_q;
    const double dt2 = dt * dt;
    Eigen::Matrix2d block;
    block << dt2 * dt2 / 4.0, dt2 * dt / 2.0,
             dt2 * dt / 2.0, dt2;
    Mat4 out = Mat4::Zero();
    out.block<2, 2>(0, 0) = q * block;
    out.block<2, 2>(2, 2) = q * block;
    return out;
}

Eigen::Matrix<double, 2, 4> measurement_matrix() {
    Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
    h(0, 0) = 1.0;
    h(1, 2) = 1.0;
    return h;
}

Mat4 symmetrized(const Mat4& m) { return 0.5 * (m + m.transpose()); }

Mat4 clamp_psd(const Mat4& m) {
    Mat4 sym = symmetrized(m);
    Eigen::SelfAdjointEigenSolver<Mat4> eig(sym);
    if (eig.eigenvalues().minCoeff() >= 0.0) return sym;
    Vec4 floored = eig.eigenvalues().cwiseMax(0.0);
    return symmetrized(eig.eigenvectors() * floored.asDiagonal() * eig.eigenvectors().transpose());
}

bool satisfies_covariance_invariants(const Mat4& m) {
    if (!m.allFinite()) return false;
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) return false;
    Eigen::SelfAdjointEigenSolver<Mat4> eig(symmetrized(m), Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    return lo >= -1e-9 * std::max(hi, 0.0);
}

GaussianState predict_state(const GaussianState& s, const MotionParams& p) {
    if (!all_finite(s)) throw ModelInputError("predict_state: non-finite state");
    p.validate();
    const Mat4 f = transition_matrix(p.dt);
    GaussianState out;
    out.mean = f * s.mean;
    out.covariance = symmetrized(f * s.covariance * f.transpose() + process_noise(p.dt, p.sigma_q));
    return out;
}

MeasurementPrediction predict_measurement(const GaussianState& s, const MotionParams& p) {
    if (!all_finite(s)) throw ModelInputError("predict_measurement: non-finite state");
    p.validate();
    const auto h = measurement_matrix();
    MeasurementPrediction out;
    out.z_hat = h * s.mean;
    Mat2 S = h * s.covariance * h.transpose();
    S = 0.5 * (S + S.transpose());
    S += p.sigma_r * p.sigma_r * Mat2::Identity();

    Eigen::SelfAdjointEigenSolver<Mat2> eig(S, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxConditionNumber)
        throw SingularInnovationError("innovation covariance is singular or ill-conditioned");

    Eigen::LLT<Mat2> llt(S);
    if (llt.info() != Eigen::Success)
        throw SingularInnovationError("innovation covariance Cholesky factorization failed");

    out.S = S;
    // K = P H^T S^-1, solved as S K^T = H P.
    const Eigen::Matrix<double, 2, 4> hp = h * s.covariance;
    out.gain = llt.solve(hp).transpose();
    return out;
}

GaussianState jipda_update(const GaussianState& s, const MeasurementPrediction& pred,
                           std::span<const Vec2> measurements, std::span<const double> betas,
                           double beta0) {
    if (measurements.size() != betas.size())
        throw AssociationContractError("jipda_update: betas not aligned with measurements");
    if (!std::isfinite(beta0) || beta0 < 0.0)
        throw AssociationContractError("jipda_update: beta0 must be a finite non-negative weight");
    double total = beta0;
    for (double b : betas) {
        if (!std::isfinite(b) || b < 0.0)
            throw AssociationContractError("jipda_update: betas must be finite and non-negative");
        total += b;
    }
    if (std::abs(total - 1.0) > kBetaSumTolerance)
        throw AssociationContractError("jipda_update: beta0 + sum(betas) = " + std::to_string(total) +
                                       ", expected 1");
    if (!all_finite(s)) throw ModelInputError("jipda_update: non-finite state");

    Vec2 combined = Vec2::Zero();
    Mat2 second_moment = Mat2::Zero();
    for (std::size_t i = 0; i < measurements.size(); ++i) {
        const Vec2 nu = measurements[i] - pred.z_hat;
        combined += betas[i] * nu;
        second_moment += betas[i] * nu * nu.transpose();
    }
    const Mat42& k = pred.gain;
    const Mat2 spread = second_moment - combined * combined.transpose();

    GaussianState out;
    out.mean = s.mean + k * combined;
    Mat4 cov = s.covariance - (1.0 - beta0) * k * pred.S * k.transpose() + k * spread * k.transpose();
    out.covariance = clamp_psd(cov);
    return out;
}

}  // namespace mtt
