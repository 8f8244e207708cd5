#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mtt/io.hpp"
#include "mtt/metrics.hpp"
#include "mtt/types.hpp"

namespace mtt {

struct Area {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 100.0;
    double ymax = 100.0;

    double volume() const { return (xmax - xmin) * (ymax - ymin); }
};

/// Frames (inclusive, 1-based) during which a target exists. death <= 0
/// means "until the end".
struct TargetWindow {
    int birth = 1;
    int death = 0;
};

enum class Layout {
    random,   ///< uniform start position and heading
    crossing  ///< evenly spaced on a circle, heading for the center at staggered speeds
};

struct ScenarioSpec {
    std::string name = "synthetic";
    std::uint64_t seed = 1;
    int duration = 500;  ///< frames
    Area area;
    int n_targets = 5;
    std::vector<TargetWindow> windows;  ///< per target; missing entries span the whole run
    Layout layout = Layout::random;
    double frame_rate = 25.0;
    double sigma_q = 0.836;
    double sigma_r = 0.141;
    double p_detection = 0.99;
    double clutter_count = 15.0;  ///< lambda * V, expected false alarms per frame
    double speed_min = 0.8;
    double speed_max = 1.6;
    int embedding_dim = kDefaultEmbeddingDim;
    double embedding_noise = 0.15;
    /// Frame-to-frame correlation of the per-identity appearance noise.
    double embedding_correlation = 0.8;

    /// Throws ConfigError on out-of-range fields.
    void validate() const;
};

struct Scenario {
    SequenceInfo info;
    std::vector<FrameAnnotations> ground_truth;  ///< frames 1..duration
    std::vector<Detection> detections;           ///< sorted by frame
    EmbeddingTable detection_embeddings;         ///< keyed by (frame, row within frame)
    EmbeddingTable gt_embeddings;                ///< keyed by (frame, gt row within frame)
};

/// Deterministic in `spec` (including the seed). Targets follow CV dynamics
/// with white-noise acceleration and reflect off the area boundary.
/// Embeddings are the identity's mean direction plus AR(1) Gaussian noise
/// with stationary deviation embedding_noise, renormalized; clutter
/// embeddings are fresh random directions.
Scenario generate(const ScenarioSpec& spec);

/// Writes seqinfo.ini, det/det.txt, det/embeddings.txt, gt/gt.txt and
/// gt/embeddings.txt under `dir`.
void write_scenario(const Scenario& scenario, const std::filesystem::path& dir);

/// key=value scenario description; unknown keys throw ConfigError.
ScenarioSpec parse_scenario_spec(std::istream& in, const std::string& source = "<stream>");
ScenarioSpec load_scenario_spec(const std::filesystem::path& path);

/// The fixed regression scenario: five targets crossing the center of a
/// 200 x 200 area for 500 frames at the reference noise and clutter levels.
ScenarioSpec crossing_benchmark_spec();

}  // namespace mtt
