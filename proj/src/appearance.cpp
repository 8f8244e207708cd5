#include "mtt/appearance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mtt/assignment.hpp"
#include "mtt/error.hpp"

namespace mtt {

namespace {

double margin_scale(double alpha) {
    if (!(alpha > 0.0 && alpha < std::numbers::pi / 2.0))
        throw DomainError("angular loss alpha must lie in (0, pi/2)");
    const double t = std::tan(alpha);
    return 4.0 * t * t;
}

void check_triplet(const Eigen::VectorXd& r, const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    if (r.size() != p.size() || r.size() != q.size())
        throw ShapeError("angular loss: triplet dimension mismatch");
}

}  // namespace

double similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    return std::clamp((1.0 + a.dot(b)) / 2.0, 0.0, 1.0);
}

double angular_margin_loss(const Eigen::VectorXd& r, const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                           double alpha, double margin) {
    check_triplet(r, p, q);
    const double k = margin_scale(alpha);
    const Eigen::VectorXd c = 0.5 * (r + p);
    return std::max(0.0, margin + (r - p).norm() - k * (q - c).norm());
}

double angular_margin_loss(const EmbeddingVector& r, const EmbeddingVector& p, const EmbeddingVector& q,
                           double alpha, double margin) {
    return angular_margin_loss(r.values(), p.values(), q.values(), alpha, margin);
}

AngularLossGradient angular_margin_loss_grad(const Eigen::VectorXd& r, const Eigen::VectorXd& p,
                                             const Eigen::VectorXd& q, double alpha, double margin) {
    check_triplet(r, p, q);
    const double k = margin_scale(alpha);
    const Eigen::Index dim = r.size();
    AngularLossGradient g{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim)};

    const Eigen::VectorXd pos = r - p;
    const Eigen::VectorXd neg = q - 0.5 * (r + p);
    const double pos_norm = pos.norm();
    const double neg_norm = neg.norm();
    if (!(margin + pos_norm - k * neg_norm > 0.0)) return g;

    const Eigen::VectorXd u = pos_norm > 0.0 ? Eigen::VectorXd(pos / pos_norm) : Eigen::VectorXd::Zero(dim);
    const Eigen::VectorXd w = neg_norm > 0.0 ? Eigen::VectorXd(neg / neg_norm) : Eigen::VectorXd::Zero(dim);
    // d|q - c|/dr = d|q - c|/dp = -w/2.
    g.r = u + 0.5 * k * w;
    g.p = -u + 0.5 * k * w;
    g.q = -k * w;
    return g;
}

void GnnParams::validate() const {
    if (!(sim_gate >= 0.0 && sim_gate <= 1.0)) throw ParameterError("sim_gate must lie in [0, 1]");
    if (max_age < 1) throw ParameterError("max_age must be >= 1");
    if (min_hits < 1) throw ParameterError("min_hits must be >= 1");
    if (!(smoothing > 0.0 && smoothing <= 1.0)) throw ParameterError("embedding smoothing must lie in (0, 1]");
}

EmbeddingVector blend_embedding(const EmbeddingVector& track, const EmbeddingVector& detection, double rho) {
    if (track.dim() != detection.dim()) throw ShapeError("embedding dimension mismatch");
    const Eigen::VectorXd mixed = (1.0 - rho) * track.values() + rho * detection.values();
    // Antipodal inputs with rho = 1/2 cancel; keep the newer observation.
    if (!(mixed.norm() > 1e-12)) return detection;
    return EmbeddingVector(mixed);
}

bool gnn_reportable(const Track& t) {
    return t.status == TrackStatus::confirmed && t.frames_since_update == 0;
}

GnnStepResult gnn_step(std::span<const Track> tracks, std::span<const Detection> detections,
                       std::span<const EmbeddingVector> detection_embeddings, const GnnParams& params,
                       TrackIdCounter& ids) {
    params.validate();
    if (detections.size() != detection_embeddings.size())
        throw ShapeError("gnn_step: one embedding per detection is required");
    for (const auto& t : tracks)
        if (!t.embedding) throw ShapeError("gnn_step: track " + std::to_string(t.id) + " has no embedding");

    const auto n = static_cast<Eigen::Index>(tracks.size());
    const auto m = static_cast<Eigen::Index>(detections.size());
    Eigen::MatrixXd cost(n, m);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < m; ++i)
            cost(j, i) = 1.0 - similarity(*tracks[static_cast<std::size_t>(j)].embedding,
                                          detection_embeddings[static_cast<std::size_t>(i)]);
    const AssignmentResult assignment = solve_assignment(cost);

    GnnStepResult result;
    result.assignment_cost = assignment.total_cost;
    result.tracks.assign(tracks.begin(), tracks.end());
    std::vector<char> used(static_cast<std::size_t>(m), 0);

    for (std::size_t j = 0; j < result.tracks.size(); ++j) {
        Track& t = result.tracks[j];
        ++t.age;
        const int i = assignment.col_for_row[j];
        const bool matched = i >= 0 && 1.0 - cost(static_cast<Eigen::Index>(j), i) >= params.sim_gate;
        if (!matched) {
            if (++t.frames_since_update > params.max_age) t.status = TrackStatus::deleted;
            continue;
        }
        const auto& det = detections[static_cast<std::size_t>(i)];
        const auto& emb = detection_embeddings[static_cast<std::size_t>(i)];
        used[static_cast<std::size_t>(i)] = 1;
        result.matches.emplace_back(t.id, i);
        t.embedding = params.smooth_embeddings ? blend_embedding(*t.embedding, emb, params.smoothing) : emb;
        t.state.mean << det.position.x(), 0.0, det.position.y(), 0.0;
        t.box = det.box;
        t.frames_since_update = 0;
        ++t.hits;
        if (t.status == TrackStatus::tentative && t.hits >= params.min_hits) t.status = TrackStatus::confirmed;
    }

    for (Eigen::Index i = 0; i < m; ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        const auto& det = detections[static_cast<std::size_t>(i)];
        Track t;
        t.id = ids.next();
        t.state.mean << det.position.x(), 0.0, det.position.y(), 0.0;
        t.existence = 1.0;
        t.hits = 1;
        t.status = params.min_hits <= 1 ? TrackStatus::confirmed : TrackStatus::tentative;
        t.embedding = detection_embeddings[static_cast<std::size_t>(i)];
        t.box = det.box;
        result.tracks.push_back(std::move(t));
    }
    return result;
}

GnnTracker::GnnTracker(GnnParams params) : params_(std::move(params)) { params_.validate(); }

const GnnStepResult& GnnTracker::step(std::span<const Detection> detections,
                                      std::span<const EmbeddingVector> detection_embeddings) {
    last_ = gnn_step(active_, detections, detection_embeddings, params_, ids_);
    active_.clear();
    for (const auto& t : last_.tracks)
        if (t.active()) active_.push_back(t);
    return last_;
}

}  // namespace mtt
