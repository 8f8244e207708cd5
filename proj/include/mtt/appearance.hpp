#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mtt/embedding.hpp"
#include "mtt/types.hpp"

namespace mtt {

/// Inner product mapped to [0, 1]: (1 + <a, b>) / 2.
double similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Triplet loss on the angle at the negative example, with margin:
/// max(0, m + |r - p| - 4 tan^2(alpha) |q - c|), c = (r + p) / 2.
/// Throws DomainError unless 0 < alpha < pi/2, ShapeError on size mismatch.
double angular_margin_loss(const Eigen::VectorXd& r, const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                           double alpha, double margin);
double angular_margin_loss(const EmbeddingVector& r, const EmbeddingVector& p, const EmbeddingVector& q,
                           double alpha, double margin);

struct AngularLossGradient {
    Eigen::VectorXd r;
    Eigen::VectorXd p;
    Eigen::VectorXd q;
};

/// Analytic gradient of angular_margin_loss with respect to r, p and q.
/// All zero while the hinge is inactive (loss == 0). A zero-length
/// difference contributes a zero norm-gradient.
AngularLossGradient angular_margin_loss_grad(const Eigen::VectorXd& r, const Eigen::VectorXd& p,
                                             const Eigen::VectorXd& q, double alpha, double margin);

struct GnnParams {
    double sim_gate = 0.5;   ///< minimum similarity to accept a match
    int max_age = 30;        ///< unmatched frames before deletion
    int min_hits = 2;        ///< observations before a track is reported
    double smoothing = 0.3;  ///< weight of the new detection in the embedding update
    bool smooth_embeddings = true; ///< false: the track keeps only the latest detection embedding

    void validate() const;
};

/// Smoothed update normalize((1 - rho) e + rho e_det).
EmbeddingVector blend_embedding(const EmbeddingVector& track, const EmbeddingVector& detection, double rho);

struct GnnStepResult {
    std::vector<Track> tracks;  ///< surviving, newly deleted and newborn tracks
    std::vector<std::pair<int, int>> matches; ///< (track id, detection index)
    double assignment_cost = 0.0; ///< optimal cost before the similarity gate
};

/// Appearance-only global nearest neighbor step. Builds cost 1 - similarity
/// between every active track and detection, solves the assignment exactly,
/// drops pairs below the similarity gate and spawns tracks for the
/// leftover detections. No kinematic gating is applied.
GnnStepResult gnn_step(std::span<const Track> tracks, std::span<const Detection> detections,
                       std::span<const EmbeddingVector> detection_embeddings, const GnnParams& params,
                       TrackIdCounter& ids);

/// Reported tracks are confirmed and matched in the current frame.
bool gnn_reportable(const Track& t);

class GnnTracker {
public:
    explicit GnnTracker(GnnParams params);

    const GnnStepResult& step(std::span<const Detection> detections,
                              std::span<const EmbeddingVector> detection_embeddings);

    const std::vector<Track>& active_tracks() const noexcept { return active_; }
    int tracks_started() const noexcept { return ids_.peek() - 1; }

private:
    GnnParams params_;
    TrackIdCounter ids_;
    std::vector<Track> active_;
    GnnStepResult last_;
};

}  // namespace mtt
