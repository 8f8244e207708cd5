#pragma once

#include <Eigen/Dense>

namespace mtt {

inline constexpr int kDefaultEmbeddingDim = 64;

/// Unit-norm appearance descriptor. Normalized on construction; a zero or
/// non-finite input throws ModelInputError.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    explicit EmbeddingVector(Eigen::VectorXd values);

    const Eigen::VectorXd& values() const noexcept { return values_; }
    Eigen::Index dim() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.size() == 0; }

    double dot(const EmbeddingVector& other) const;

    friend bool operator==(const EmbeddingVector& a, const EmbeddingVector& b) {
        return a.values_.size() == b.values_.size() && a.values_ == b.values_;
    }

private:
    Eigen::VectorXd values_;
};

}  // namespace mtt
