#include "mtt/jipda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mtt/error.hpp"

namespace mtt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool open_probability(double p) { return p > 0.0 && p < 1.0; }

void check_existences(std::span<const double> existence, Eigen::Index tracks) {
    if (static_cast<Eigen::Index>(existence.size()) != tracks)
        throw ShapeError("existence vector does not match the track count of the context");
    for (double p : existence)
        if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("existence probability outside [0, 1]");
}

std::vector<double> existences_of(std::span<const Track> tracks) {
    std::vector<double> out;
    out.reserve(tracks.size());
    for (const auto& t : tracks) out.push_back(t.existence);
    return out;
}

/// Log-domain factors of the joint-event weight.
struct EventFactors {
    Eigen::VectorXd log_missed;  // per track
    Eigen::MatrixXd log_hit;     // measurements x tracks, -inf where not gated

    EventFactors(const ValidationContext& ctx, std::span<const double> existence, const JipdaParams& params) {
        const double d = params.p_detection * params.p_gating;
        const Eigen::Index n = ctx.track_count();
        const Eigen::Index m = ctx.measurement_count();
        log_missed.resize(n);
        log_hit.setConstant(m, n, kNegInf);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double p = existence[static_cast<std::size_t>(j)];
            log_missed(j) = std::log1p(-d * p);
            if (p <= 0.0) continue;
            for (Eigen::Index i = 0; i < m; ++i)
                if (ctx.gated(i, j))
                    log_hit(i, j) = std::log(d * p) + std::log(ctx.likelihood(i, j)) -
                                    std::log(params.clutter_density);
        }
    }

    double log_weight(std::span<const int> measurement_for_track) const {
        double total = 0.0;
        for (std::size_t j = 0; j < measurement_for_track.size(); ++j) {
            const int i = measurement_for_track[j];
            total += i < 0 ? log_missed(static_cast<Eigen::Index>(j))
                           : log_hit(i, static_cast<Eigen::Index>(j));
        }
        return total;
    }
};

/// Sums normalized event mass per (measurement, track) and per missed track.
/// Weights are kept relative to the largest log-weight seen so far.
class PosteriorAccumulator {
public:
    PosteriorAccumulator(Eigen::Index measurements, Eigen::Index tracks)
        : missed_(Eigen::VectorXd::Zero(tracks)), assoc_(Eigen::MatrixXd::Zero(measurements, tracks)) {}

    void add(std::span<const int> measurement_for_track, double log_weight) {
        if (log_weight == kNegInf) return;
        if (log_weight > log_scale_) {
            const double rescale = log_scale_ == kNegInf ? 0.0 : std::exp(log_scale_ - log_weight);
            total_ *= rescale;
            missed_ *= rescale;
            assoc_ *= rescale;
            log_scale_ = log_weight;
        }
        const double w = std::exp(log_weight - log_scale_);
        total_ += w;
        for (std::size_t j = 0; j < measurement_for_track.size(); ++j) {
            const int i = measurement_for_track[j];
            if (i < 0)
                missed_(static_cast<Eigen::Index>(j)) += w;
            else
                assoc_(i, static_cast<Eigen::Index>(j)) += w;
        }
    }

    AssociationPosterior finish(const ValidationContext& ctx, std::span<const double> existence,
                                const JipdaParams& params) const {
        const Eigen::Index n = ctx.track_count();
        const Eigen::Index m = ctx.measurement_count();
        if (!(total_ > 0.0)) throw ConsistencyError("joint-event weights sum to zero");
        const double d = params.p_detection * params.p_gating;

        AssociationPosterior out;
        out.beta = Eigen::MatrixXd::Zero(m, n);
        out.beta0 = Eigen::VectorXd::Ones(n);
        out.existence = Eigen::VectorXd::Zero(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double p = existence[static_cast<std::size_t>(j)];
            const double missed_mass = missed_(j) / total_;
            const double undetected = (1.0 - params.p_detection * params.p_gating) * p / (1.0 - d * p) * missed_mass;
            double detected = 0.0;
            for (Eigen::Index i = 0; i < m; ++i)
                if (ctx.gated(i, j)) detected += assoc_(i, j) / total_;
            const double post = undetected + detected;
            if (!(post > 0.0)) {
                if (detected > 0.0 || undetected > 0.0)
                    throw ConsistencyError("track " + std::to_string(j) +
                                           ": zero posterior existence with nonzero association mass");
                continue;
            }
            for (Eigen::Index i = 0; i < m; ++i)
                if (ctx.gated(i, j)) out.beta(i, j) = assoc_(i, j) / total_ / post;
            out.beta0(j) = undetected / post;
            out.existence(j) = std::min(post, 1.0);
        }
        return out;
    }

private:
    double log_scale_ = kNegInf;
    double total_ = 0.0;
    Eigen::VectorXd missed_;
    Eigen::MatrixXd assoc_;
};

}  // namespace

void JipdaParams::validate() const {
    if (!open_probability(p_survival)) throw ParameterError("P_S must lie in (0, 1)");
    if (!open_probability(p_detection)) throw ParameterError("P_D must lie in (0, 1)");
    if (!open_probability(p_gating)) throw ParameterError("P_G must lie in (0, 1)");
    if (!(clutter_density > 0.0) || !std::isfinite(clutter_density))
        throw ParameterError("clutter density lambda must be finite and > 0");
    if (!(init_threshold >= 0.0 && init_threshold < 1.0)) throw ParameterError("init_threshold must lie in [0, 1)");
    if (!open_probability(w_init) || !open_probability(w_confirm) || !open_probability(w_delete))
        throw ParameterError("existence thresholds must lie in (0, 1)");
    if (!(w_delete < w_init && w_init < w_confirm))
        throw ParameterError("existence thresholds must satisfy w_delete < w_init < w_confirm");
    if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) throw ParameterError("conf_threshold must lie in [0, 1]");
    if (!(v0_std > 0.0) || !std::isfinite(v0_std)) throw ParameterError("v0_std must be finite and > 0");
    if (event_cap == 0) throw ParameterError("event cap must be positive");
}

std::vector<int> JointEvent::track_for_measurement(std::size_t measurement_count) const {
    std::vector<int> out(measurement_count, -1);
    for (std::size_t j = 0; j < measurement_for_track.size(); ++j)
        if (measurement_for_track[j] >= 0) out[static_cast<std::size_t>(measurement_for_track[j])] = static_cast<int>(j);
    return out;
}

double AssociationPosterior::max_normalization_error() const {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta0.size(); ++j) {
        if (!(existence(j) > 0.0)) continue;
        worst = std::max(worst, std::abs(beta0(j) + beta.col(j).sum() - 1.0));
    }
    return worst;
}

double predict_existence(double p_prev, double p_survival) { return p_survival * p_prev; }

std::size_t for_each_joint_event(const ValidationContext& ctx, std::size_t cap,
                                 const std::function<void(std::span<const int>)>& visit) {
    const auto n = static_cast<std::size_t>(ctx.track_count());
    const Eigen::Index m = ctx.measurement_count();

    std::vector<std::vector<int>> candidates(n);
    for (std::size_t j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < m; ++i)
            if (ctx.gated(i, static_cast<Eigen::Index>(j))) candidates[j].push_back(static_cast<int>(i));

    std::vector<int> assignment(n, -1);
    std::vector<char> taken(static_cast<std::size_t>(m), 0);
    std::size_t count = 0;

    auto recurse = [&](auto&& self, std::size_t j) -> void {
        if (j == n) {
            if (++count > cap)
                throw CombinatorialBlowupError("joint-event count exceeds cap of " + std::to_string(cap));
            visit(assignment);
            return;
        }
        assignment[j] = -1;
        self(self, j + 1);
        for (int i : candidates[j]) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            taken[static_cast<std::size_t>(i)] = 1;
            assignment[j] = i;
            self(self, j + 1);
            taken[static_cast<std::size_t>(i)] = 0;
        }
        assignment[j] = -1;
    };
    recurse(recurse, 0);
    return count;
}

std::vector<JointEvent> enumerate_joint_events(const ValidationContext& ctx, std::size_t cap) {
    std::vector<JointEvent> events;
    for_each_joint_event(ctx, cap, [&](std::span<const int> a) {
        events.push_back(JointEvent{{a.begin(), a.end()}, 0.0});
    });
    return events;
}

double event_probability(const JointEvent& e, const ValidationContext& ctx,
                         std::span<const double> predicted_existence, const JipdaParams& params) {
    if (!(params.clutter_density > 0.0)) throw ParameterError("clutter density lambda must be > 0");
    check_existences(predicted_existence, ctx.track_count());
    if (static_cast<Eigen::Index>(e.measurement_for_track.size()) != ctx.track_count())
        throw ShapeError("joint event does not match the track count of the context");
    const double d = params.p_detection * params.p_gating;
    double w = 1.0;
    for (std::size_t j = 0; j < e.measurement_for_track.size(); ++j) {
        const double p = predicted_existence[j];
        const int i = e.measurement_for_track[j];
        if (i < 0) {
            w *= 1.0 - d * p;
        } else {
            if (i >= ctx.measurement_count() || !ctx.gated(i, static_cast<Eigen::Index>(j)))
                throw AssociationContractError("joint event assigns an ungated pair");
            w *= d * p * ctx.likelihood(i, static_cast<Eigen::Index>(j)) / params.clutter_density;
        }
    }
    return w;
}

double event_probability(const JointEvent& e, const ValidationContext& ctx, std::span<const Track> tracks,
                         const JipdaParams& params) {
    const auto p = existences_of(tracks);
    return event_probability(e, ctx, p, params);
}

AssociationPosterior compute_posterior(std::span<const JointEvent> events, const ValidationContext& ctx,
                                       std::span<const double> predicted_existence,
                                       const JipdaParams& params) {
    if (!(params.clutter_density > 0.0)) throw ParameterError("clutter density lambda must be > 0");
    check_existences(predicted_existence, ctx.track_count());
    const EventFactors factors(ctx, predicted_existence, params);
    PosteriorAccumulator acc(ctx.measurement_count(), ctx.track_count());
    for (const auto& e : events) {
        if (static_cast<Eigen::Index>(e.measurement_for_track.size()) != ctx.track_count())
            throw ShapeError("joint event does not match the track count of the context");
        acc.add(e.measurement_for_track, factors.log_weight(e.measurement_for_track));
    }
    return acc.finish(ctx, predicted_existence, params);
}

AssociationPosterior compute_posterior(std::span<const JointEvent> events, const ValidationContext& ctx,
                                       std::span<const Track> tracks, const JipdaParams& params) {
    const auto p = existences_of(tracks);
    return compute_posterior(events, ctx, p, params);
}

AssociationPosterior compute_posterior_streaming(const ValidationContext& ctx,
                                                 std::span<const double> predicted_existence,
                                                 const JipdaParams& params, std::size_t* event_count) {
    if (!(params.clutter_density > 0.0)) throw ParameterError("clutter density lambda must be > 0");
    check_existences(predicted_existence, ctx.track_count());
    const EventFactors factors(ctx, predicted_existence, params);
    PosteriorAccumulator acc(ctx.measurement_count(), ctx.track_count());
    const std::size_t count = for_each_joint_event(
        ctx, params.event_cap, [&](std::span<const int> a) { acc.add(a, factors.log_weight(a)); });
    if (event_count) *event_count = count;
    return acc.finish(ctx, predicted_existence, params);
}

Track spawn_track(const Detection& detection, const JipdaParams& params, const MotionParams& motion,
                  TrackIdCounter& ids) {
    Track t;
    t.id = ids.next();
    t.state.mean << detection.position.x(), 0.0, detection.position.y(), 0.0;
    const double r2 = motion.sigma_r * motion.sigma_r;
    const double v2 = params.v0_std * params.v0_std;
    t.state.covariance = Vec4(r2, v2, r2, v2).asDiagonal();
    t.existence = params.w_init;
    t.status = TrackStatus::tentative;
    t.hits = 1;
    t.box = detection.box;
    return t;
}

std::vector<Track> lifecycle_update(std::vector<Track> tracks, const AssociationPosterior& posterior,
                                    std::span<const Detection> detections, const JipdaParams& params,
                                    const MotionParams& motion, TrackIdCounter& ids) {
    for (auto& t : tracks) {
        if (!t.active()) continue;
        if (t.existence < params.w_delete)
            t.status = TrackStatus::deleted;
        else if (t.status == TrackStatus::tentative && t.existence > params.w_confirm)
            t.status = TrackStatus::confirmed;
    }
    for (std::size_t i = 0; i < detections.size(); ++i) {
        double associated = 0.0;
        if (posterior.beta.rows() > static_cast<Eigen::Index>(i))
            associated = posterior.beta.row(static_cast<Eigen::Index>(i)).sum();
        if (1.0 - associated > params.init_threshold)
            tracks.push_back(spawn_track(detections[i], params, motion, ids));
    }
    return tracks;
}

JipdaStepResult jipda_step(std::span<const Track> tracks, std::span<const Detection> detections,
                           const JipdaParams& params, const MotionParams& motion, TrackIdCounter& ids,
                           long frame) {
    params.validate();
    motion.validate();

    const double gamma = gate_threshold_from_pg(params.p_gating, 2);
    std::vector<Track> predicted(tracks.begin(), tracks.end());
    std::vector<MeasurementPrediction> preds;
    std::vector<double> existence;
    preds.reserve(predicted.size());
    existence.reserve(predicted.size());
    for (std::size_t j = 0; j < predicted.size(); ++j) {
        auto& t = predicted[j];
        t.state = predict_state(t.state, motion);
        t.existence = predict_existence(t.existence, params.p_survival);
        ++t.age;
        try {
            preds.push_back(predict_measurement(t.state, motion));
        } catch (const SingularInnovationError& e) {
            throw SingularInnovationError(std::string(e.what()) + " at frame " + std::to_string(frame),
                                          static_cast<int>(j));
        }
        existence.push_back(t.existence);
    }

    std::vector<Vec2> z;
    z.reserve(detections.size());
    for (const auto& d : detections) z.push_back(d.position);

    const ValidationContext ctx = build_validation_context(preds, z, params.p_gating, gamma);

    JipdaStepResult result;
    try {
        result.posterior = compute_posterior_streaming(ctx, existence, params, &result.event_count);
    } catch (const CombinatorialBlowupError& e) {
        throw CombinatorialBlowupError(e.what(), frame);
    }
    const auto& post = result.posterior;

    std::vector<Vec2> gated_z;
    std::vector<double> gated_beta;
    for (std::size_t j = 0; j < predicted.size(); ++j) {
        auto& t = predicted[j];
        const auto col = static_cast<Eigen::Index>(j);
        gated_z.clear();
        gated_beta.clear();
        for (Eigen::Index i = 0; i < ctx.measurement_count(); ++i) {
            if (!ctx.gated(i, col) || post.beta(i, col) == 0.0) continue;
            gated_z.push_back(z[static_cast<std::size_t>(i)]);
            gated_beta.push_back(post.beta(i, col));
        }
        if (post.existence(col) > 0.0)
            t.state = jipda_update(t.state, preds[j], gated_z, gated_beta, post.beta0(col));
        t.existence = post.existence(col);
        if (1.0 - post.beta0(col) > 0.5) {
            ++t.hits;
            t.frames_since_update = 0;
        } else {
            ++t.frames_since_update;
        }
        // The last confidently associated detection supplies the output box.
        Eigen::Index best = -1;
        for (Eigen::Index i = 0; i < ctx.measurement_count(); ++i)
            if (post.beta(i, col) > 0.5) best = i;
        if (best >= 0) t.box = detections[static_cast<std::size_t>(best)].box;
    }

    result.tracks = lifecycle_update(std::move(predicted), post, detections, params, motion, ids);
    return result;
}

JipdaTracker::JipdaTracker(JipdaParams params, MotionParams motion)
    : params_(std::move(params)), motion_(std::move(motion)) {
    params_.validate();
    motion_.validate();
}

const JipdaStepResult& JipdaTracker::step(std::span<const Detection> detections, long frame) {
    last_ = jipda_step(active_, detections, params_, motion_, ids_, frame);
    max_events_ = std::max(max_events_, last_.event_count);
    total_events_ += last_.event_count;
    active_.clear();
    for (const auto& t : last_.tracks)
        if (t.active()) active_.push_back(t);
    return last_;
}

}  // namespace mtt
