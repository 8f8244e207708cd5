#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mtt/appearance.hpp"
#include "mtt/io.hpp"
#include "mtt/jipda.hpp"
#include "mtt/kinematics.hpp"
#include "mtt/metrics.hpp"

namespace mtt {

enum class TrackerMode { jipda, gnn };

std::string_view to_string(TrackerMode m);
TrackerMode parse_tracker_mode(std::string_view text);

struct RunConfig {
    TrackerMode mode = TrackerMode::jipda;

    double sigma_q = 0.836;
    double sigma_r = 0.141;
    double frame_rate = 25.0;  ///< used when a sequence has no frameRate
    JipdaParams jipda;         ///< clutter_density is derived per sequence
    double clutter_count = 15.0;  ///< lambda * V, expected false alarms per frame
    std::optional<double> surveillance_area;  ///< used when a sequence has no surveillanceArea

    GnnParams gnn;
    double loss_alpha = 0.7853981633974483;  ///< radians
    double loss_margin = 0.1;

    MetricMode metric_mode = MetricMode::point;
    std::optional<double> metric_threshold;

    std::optional<std::filesystem::path> seq_dir;
    std::optional<std::filesystem::path> out_dir;

    std::set<std::string> overridden;   ///< keys set by the config file or flags
    std::vector<std::string> warnings;  ///< unknown keys and similar

    /// dt = 1 / frameRate from the sequence, else the configured fallback.
    MotionParams motion_for(const SequenceInfo& info) const;
    /// lambda = clutter_count / V with V from the sequence, else the
    /// configured fallback. Throws ConfigError when neither is known.
    JipdaParams jipda_for(const SequenceInfo& info) const;
    EvalParams eval_params() const;

    /// Applies one key. Unknown keys are recorded as warnings.
    void set(const std::string& key, const std::string& value);

    /// Throws ConfigError when parameters are out of range or referenced
    /// paths do not exist.
    void validate() const;
};

/// Empty path or an empty file yields the defaults.
RunConfig parse_config(std::istream& in, const std::string& source = "<stream>");
RunConfig load_config(const std::filesystem::path& path);

/// Every key with its value and origin: "published" (reference operating
/// point), "assumed" (chosen by this implementation) or "config" (set by
/// the user). Unknown keys appear as warnings.
std::string effective_config_dump(const RunConfig& config);

/// 64-bit FNV-1a of `text`, as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace mtt
