#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mtt/types.hpp"

namespace mtt {

struct AnnotatedObject {
    int id = 0;
    Vec2 position = Vec2::Zero();
    std::optional<Box> box;
};

struct FrameAnnotations {
    int frame = 1;
    std::vector<AnnotatedObject> objects;
};

enum class MetricMode { point, box };

std::string_view to_string(MetricMode m);
MetricMode parse_metric_mode(std::string_view text);

struct EvalParams {
    MetricMode mode = MetricMode::point;
    /// Point mode: largest matching distance. Box mode: smallest matching IoU.
    double threshold = 1.0;

    static EvalParams defaults_for(MetricMode mode);
};

struct MotScore {
    double mota = 0.0;
    /// Point mode: 1 - mean distance / threshold. Box mode: mean IoU.
    double motp = 0.0;
    long fp = 0;
    long fn = 0;
    long ids = 0;
    long gt_total = 0;
    long hyp_total = 0;
    long matches = 0;
    /// Sum of matched Euclidean distances (point) or of 1 - IoU (box).
    double distance_sum = 0.0;
};

/// CLEAR-MOT scoring. Frames are paired by index and must carry the same
/// frame numbers. Correspondences from the previous frame are kept while
/// still within the threshold; the rest are matched by minimum total
/// distance. Throws EvaluationError on misaligned sequences, duplicate
/// identities within a frame, missing boxes in box mode or when the ground
/// truth is empty.
MotScore evaluate(std::span<const FrameAnnotations> gt, std::span<const FrameAnnotations> hyp,
                  const EvalParams& params);

}  // namespace mtt
