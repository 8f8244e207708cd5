#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mtt/association.hpp"
#include "mtt/kinematics.hpp"
#include "mtt/types.hpp"

namespace mtt {

inline constexpr std::size_t kDefaultEventCap = 5'000'000;

struct JipdaParams {
    double p_survival = 0.999;
    double p_detection = 0.990;
    double p_gating = 0.990;
    double clutter_density = 15.0 / 10000.0; ///< lambda, false alarms per unit area per frame
    double init_threshold = 0.7;
    double w_init = 0.65;
    double w_confirm = 0.85;
    double w_delete = 0.003;
    double conf_threshold = 0.95;
    double v0_std = 10.0;                    ///< initial velocity deviation of a newborn track [u/s]
    std::size_t event_cap = kDefaultEventCap;

    void validate() const;
};

/// One-to-one partial assignment. measurement_for_track[j] is the
/// measurement index given to track j, or -1 when track j is missed.
struct JointEvent {
    std::vector<int> measurement_for_track;
    double weight = 0.0;

    /// Inverse map of length `measurement_count`, -1 for clutter.
    std::vector<int> track_for_measurement(std::size_t measurement_count) const;
};

struct AssociationPosterior {
    Eigen::MatrixXd beta;      ///< measurements x tracks
    Eigen::VectorXd beta0;     ///< per track missed-detection mass
    Eigen::VectorXd existence; ///< per track posterior existence

    /// Largest |beta0_j + sum_i beta_ij - 1| over tracks with existence > 0.
    double max_normalization_error() const;
};

double predict_existence(double p_prev, double p_survival);

/// Depth-first over tracks; each track takes "missed" first, then every
/// gated measurement not yet taken in increasing index order. Returns the
/// number of events visited. Throws CombinatorialBlowupError once more than
/// `cap` events have been produced.
std::size_t for_each_joint_event(const ValidationContext& ctx, std::size_t cap,
                                 const std::function<void(std::span<const int>)>& visit);

std::vector<JointEvent> enumerate_joint_events(const ValidationContext& ctx,
                                               std::size_t cap = kDefaultEventCap);

/// Unnormalized joint-event weight: prod over missed tracks of
/// (1 - P_D P_G P_j) times prod over assigned pairs of P_D P_G P_j g_ij / lambda,
/// where P_j is the predicted existence.
double event_probability(const JointEvent& e, const ValidationContext& ctx,
                         std::span<const double> predicted_existence, const JipdaParams& params);
double event_probability(const JointEvent& e, const ValidationContext& ctx, std::span<const Track> tracks,
                         const JipdaParams& params);

/// Posterior existence and association probabilities from an exhaustive
/// event list. Weights are recomputed from the context, the `weight` field
/// of the events is ignored. beta0_j is the missed-detection mass divided by
/// the posterior existence; a track with zero posterior existence gets
/// beta0 = 1 and zero betas.
AssociationPosterior compute_posterior(std::span<const JointEvent> events, const ValidationContext& ctx,
                                       std::span<const double> predicted_existence,
                                       const JipdaParams& params);
AssociationPosterior compute_posterior(std::span<const JointEvent> events, const ValidationContext& ctx,
                                       std::span<const Track> tracks, const JipdaParams& params);

/// Same result as enumerate + compute_posterior without materializing the
/// event list. `event_count`, when given, receives the number of events.
AssociationPosterior compute_posterior_streaming(const ValidationContext& ctx,
                                                 std::span<const double> predicted_existence,
                                                 const JipdaParams& params,
                                                 std::size_t* event_count = nullptr);

/// Tentative track at the detection's position with zero velocity and an
/// inflated velocity covariance.
Track spawn_track(const Detection& detection, const JipdaParams& params, const MotionParams& motion,
                  TrackIdCounter& ids);

/// Applies confirm/delete thresholds to `tracks` (whose existence already
/// holds the posterior) and appends a newborn for every detection whose
/// unassociated mass 1 - sum_j beta_ij exceeds init_threshold. Deleted
/// tracks stay in the returned list with status `deleted`.
std::vector<Track> lifecycle_update(std::vector<Track> tracks, const AssociationPosterior& posterior,
                                    std::span<const Detection> detections, const JipdaParams& params,
                                    const MotionParams& motion, TrackIdCounter& ids);

struct JipdaStepResult {
    std::vector<Track> tracks;  ///< surviving, newly deleted and newborn tracks
    AssociationPosterior posterior;
    std::size_t event_count = 0;
};

/// One full recursion step over the active `tracks`. Detections are
/// expected to be confidence-filtered already. `frame` is only used to
/// label errors.
JipdaStepResult jipda_step(std::span<const Track> tracks, std::span<const Detection> detections,
                           const JipdaParams& params, const MotionParams& motion, TrackIdCounter& ids,
                           long frame = -1);

/// Sequence-level driver that keeps the active set between frames.
class JipdaTracker {
public:
    JipdaTracker(JipdaParams params, MotionParams motion);

    /// Advances one frame and returns the tracks after the step (active and
    /// those deleted in this frame).
    const JipdaStepResult& step(std::span<const Detection> detections, long frame = -1);

    const std::vector<Track>& active_tracks() const noexcept { return active_; }
    std::size_t max_event_count() const noexcept { return max_events_; }
    std::size_t total_event_count() const noexcept { return total_events_; }
    int tracks_started() const noexcept { return ids_.peek() - 1; }

private:
    JipdaParams params_;
    MotionParams motion_;
    TrackIdCounter ids_;
    std::vector<Track> active_;
    JipdaStepResult last_;
    std::size_t max_events_ = 0;
    std::size_t total_events_ = 0;
};

}  // namespace mtt
