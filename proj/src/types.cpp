#include "mtt/types.hpp"

#include <algorithm>
#include <cmath>

#include "mtt/error.hpp"

namespace mtt {

EmbeddingVector::EmbeddingVector(Eigen::VectorXd values) : values_(std::move(values)) {
    if (!values_.allFinite()) throw ModelInputError("embedding contains non-finite values");
    const double norm = values_.norm();
    if (!(norm > 0.0)) throw ModelInputError("embedding has zero norm");
    values_ /= norm;
}

double EmbeddingVector::dot(const EmbeddingVector& other) const {
    if (dim() != other.dim())
        throw ShapeError("embedding dimension mismatch: " + std::to_string(dim()) + " vs " +
                         std::to_string(other.dim()));
    return values_.dot(other.values_);
}

double intersection_over_union(const Box& a, const Box& b) {
    const double ix = std::max(0.0, std::min(a.left + a.width, b.left + b.width) - std::max(a.left, b.left));
    const double iy = std::max(0.0, std::min(a.top + a.height, b.top + b.height) - std::max(a.top, b.top));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::string_view to_string(TrackStatus s) {
    switch (s) {
        case TrackStatus::tentative: return "tentative";
        case TrackStatus::confirmed: return "confirmed";
        case TrackStatus::deleted: return "deleted";
    }
    return "unknown";
}

}  // namespace mtt
