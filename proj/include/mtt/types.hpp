#pragma once

#include <optional>
#include <string_view>

#include "mtt/embedding.hpp"
#include "mtt/kinematics.hpp"

namespace mtt {

/// Image-space bounding box (left, top, width, height).
struct Box {
    double left = 0.0;
    double top = 0.0;
    double width = 0.0;
    double height = 0.0;

    Vec2 foot() const { return {left + width / 2.0, top + height}; }
    double area() const { return width * height; }

    friend bool operator==(const Box&, const Box&) = default;
};

double intersection_over_union(const Box& a, const Box& b);

struct Detection {
    int frame = 1;
    Vec2 position = Vec2::Zero();
    std::optional<Box> box;
    double confidence = 1.0;
    /// Row index of this detection within its frame in the source file,
    /// used to look up its embedding.
    std::optional<int> embedding_index;
};

enum class TrackStatus { tentative, confirmed, deleted };

std::string_view to_string(TrackStatus s);

struct Track {
    int id = 0;
    GaussianState state;
    double existence = 0.0;
    TrackStatus status = TrackStatus::tentative;
    int age = 0;                ///< frames since birth
    int hits = 0;               ///< frames with an associated detection
    int frames_since_update = 0;
    std::optional<EmbeddingVector> embedding;
    std::optional<Box> box;     ///< last associated detection box

    Vec2 position() const { return {state.mean(0), state.mean(2)}; }
    bool active() const { return status != TrackStatus::deleted; }
};

/// Monotone identity source; one per sequence.
class TrackIdCounter {
public:
    explicit TrackIdCounter(int first = 1) : next_(first) {}
    int next() { return next_++; }
    int peek() const { return next_; }

private:
    int next_;
};

}  // namespace mtt
