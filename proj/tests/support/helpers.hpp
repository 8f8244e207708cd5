#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "mtt/kinematics.hpp"

namespace testing {

// Random covariance with eigenvalues spread over a few decades.
inline mtt::Mat4 random_covariance(std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> e(0.01, 1.0);
    mtt::Mat4 a;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = n(rng);
    const Eigen::HouseholderQR<mtt::Mat4> qr(a);
    const mtt::Mat4 q = qr.householderQ();
    mtt::Vec4 d;
    for (int i = 0; i < 4; ++i) d(i) = scale * e(rng);
    const mtt::Mat4 c = q * d.asDiagonal() * q.transpose();
    return (c + c.transpose()) / 2.0;
}

inline mtt::Vec4 random_vec4(std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    return {n(rng), n(rng), n(rng), n(rng)};
}

inline Eigen::VectorXd random_unit(std::mt19937_64& rng, Eigen::Index dim) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) v(k) = n(rng);
    return v.normalized();
}

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("mtt-" + tag + "-" + std::to_string(rd()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

}  // namespace testing
