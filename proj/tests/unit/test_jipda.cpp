#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "helpers.hpp"
#include "jipda_bruteforce.hpp"
#include "mtt/error.hpp"
#include "mtt/jipda.hpp"

using namespace mtt;

namespace {

ValidationContext context_from(const std::vector<std::vector<double>>& g, std::size_t tracks) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(tracks));
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < tracks; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g[i][j];
    return ValidationContext(9.21, m);
}

ValidationContext gate_only(std::initializer_list<std::initializer_list<int>> rows, std::size_t tracks) {
    std::vector<std::vector<double>> g;
    for (auto r : rows) {
        std::vector<double> row;
        for (int v : r) row.push_back(v ? 1.0 : 0.0);
        g.push_back(row);
    }
    return context_from(g, tracks);
}

JipdaParams params_with_lambda(double lambda) {
    JipdaParams p;
    p.clutter_density = lambda;
    return p;
}

Track confirmed_track(int id, Vec2 pos, Vec2 vel, double existence) {
    Track t;
    t.id = id;
    t.state.mean << pos.x(), vel.x(), pos.y(), vel.y();
    t.state.covariance = Vec4(0.02, 0.1, 0.02, 0.1).asDiagonal();
    t.existence = existence;
    t.status = TrackStatus::confirmed;
    return t;
}

Detection detection_at(Vec2 p, int frame = 1) {
    Detection d;
    d.frame = frame;
    d.position = p;
    return d;
}

}  // namespace

TEST_SUITE("jipda") {

TEST_CASE("existence prediction") {
    CHECK(predict_existence(0.85, 0.999) == 0.85 * 0.999);
    CHECK(predict_existence(0.85, 0.999) == doctest::Approx(0.84915).epsilon(1e-14));
    CHECK(predict_existence(0.0, 0.999) == 0.0);
    CHECK(predict_existence(1.0, 1.0) == 1.0);
}

TEST_CASE("event enumeration counts") {
    CHECK(enumerate_joint_events(gate_only({{1}}, 1)).size() == 2);
    CHECK(enumerate_joint_events(gate_only({{1, 1}, {1, 1}}, 2)).size() == 7);
    CHECK(enumerate_joint_events(gate_only({{1, 0}, {0, 1}}, 2)).size() == 4);
    CHECK(enumerate_joint_events(gate_only({}, 3)).size() == 1);
    // 3 tracks, 3 measurements all gated: sum_k C(3,k)^2 k! = 1 + 9 + 18 + 6
    CHECK(enumerate_joint_events(gate_only({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}, 3)).size() == 34);
}

TEST_CASE("events are injective, gated and unique") {
    std::mt19937_64 rng(31);
    std::bernoulli_distribution coin(0.6);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> g(4, std::vector<double>(3));
        for (auto& row : g)
            for (auto& v : row) v = coin(rng) ? 1.0 : 0.0;
        const auto ctx = context_from(g, 3);
        const auto events = enumerate_joint_events(ctx);
        std::set<std::vector<int>> seen;
        bool empty_present = false;
        for (const auto& e : events) {
            CHECK(seen.insert(e.measurement_for_track).second);
            std::set<int> used;
            bool empty = true;
            for (std::size_t j = 0; j < e.measurement_for_track.size(); ++j) {
                const int i = e.measurement_for_track[j];
                if (i < 0) continue;
                empty = false;
                CHECK(used.insert(i).second);
                CHECK(ctx.gated(i, static_cast<Eigen::Index>(j)));
            }
            empty_present |= empty;
            const auto inverse = e.track_for_measurement(4);
            for (std::size_t j = 0; j < e.measurement_for_track.size(); ++j)
                if (e.measurement_for_track[j] >= 0)
                    CHECK(inverse[static_cast<std::size_t>(e.measurement_for_track[j])] == static_cast<int>(j));
        }
        CHECK(empty_present);
        // the mixed-radix oracle counts the same feasible set
        oracle::JipdaInstance in{4, 3, g, {0.5, 0.5, 0.5}};
        CHECK(oracle::bruteforce_posterior(in).events == events.size());
    }
}

TEST_CASE("depth-first order: missed first, then measurements by index") {
    const auto events = enumerate_joint_events(gate_only({{1}, {1}}, 1));
    REQUIRE(events.size() == 3);
    CHECK(events[0].measurement_for_track[0] == -1);
    CHECK(events[1].measurement_for_track[0] == 0);
    CHECK(events[2].measurement_for_track[0] == 1);
}

TEST_CASE("event cap") {
    const auto ctx = gate_only({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}, 3);
    CHECK_THROWS_AS(enumerate_joint_events(ctx, 33), CombinatorialBlowupError);
    CHECK(enumerate_joint_events(ctx, 34).size() == 34);
}

TEST_CASE("blowup error names the frame") {
    JipdaParams params;
    params.event_cap = 2;
    std::vector<Track> tracks{confirmed_track(1, Vec2(0, 0), Vec2(0, 0), 0.9),
                              confirmed_track(2, Vec2(0.05, 0), Vec2(0, 0), 0.9)};
    std::vector<Detection> dets{detection_at(Vec2(0, 0))};
    TrackIdCounter ids(3);
    try {
        jipda_step(tracks, dets, params, MotionParams{}, ids, 42);
        FAIL("expected CombinatorialBlowupError");
    } catch (const CombinatorialBlowupError& e) {
        CHECK(e.frame() == 42);
    }
}

TEST_CASE("event weight for a single track") {
    const JipdaParams params = params_with_lambda(2.0);
    const double d = params.p_detection * params.p_gating;
    const auto ctx = context_from({{0.8}}, 1);
    const std::vector<double> p{0.7};
    CHECK(event_probability(JointEvent{{-1}}, ctx, p, params) == doctest::Approx(1.0 - d * 0.7));
    CHECK(event_probability(JointEvent{{0}}, ctx, p, params) == doctest::Approx(d * 0.7 * 0.8 / 2.0));
}

TEST_CASE("event weight errors") {
    const auto ctx = context_from({{0.0}}, 1);
    const std::vector<double> p{0.5};
    CHECK_THROWS_AS(event_probability(JointEvent{{0}}, ctx, p, JipdaParams{}), AssociationContractError);
    CHECK_THROWS_AS(event_probability(JointEvent{{-1}}, ctx, p, params_with_lambda(0.0)), ParameterError);
    CHECK_THROWS_AS(event_probability(JointEvent{{-1, -1}}, ctx, p, JipdaParams{}), ShapeError);
}

TEST_CASE("two-event posterior by hand") {
    const JipdaParams params = params_with_lambda(0.5);
    const double d = params.p_detection * params.p_gating;
    const double g = 0.3;
    const double l = g / params.clutter_density;
    const auto ctx = context_from({{g}}, 1);
    const std::vector<double> p{1.0};
    const auto post = compute_posterior(enumerate_joint_events(ctx), ctx, p, params);
    const double b1 = d * l / ((1 - d) + d * l);
    CHECK(post.existence(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(post.beta(0, 0) == doctest::Approx(b1).epsilon(1e-12));
    CHECK(post.beta0(0) == doctest::Approx((1 - d) / ((1 - d) + d * l)).epsilon(1e-12));
}

TEST_CASE("track without gated measurements") {
    const JipdaParams params;
    const double d = params.p_detection * params.p_gating;
    for (double p : {0.1, 0.5, 0.65, 0.9, 0.999}) {
        const auto ctx = context_from({{0.0}}, 1);
        const std::vector<double> pv{p};
        const auto post = compute_posterior(enumerate_joint_events(ctx), ctx, pv, params);
        CHECK(post.existence(0) == doctest::Approx((1 - d) * p / (1 - d * p)).epsilon(1e-12));
        CHECK(post.existence(0) < p);
        CHECK(post.beta0(0) == doctest::Approx(1.0));
        CHECK(post.beta(0, 0) == 0.0);
    }
}

TEST_CASE("zero existence") {
    const auto ctx = context_from({{0.4}, {0.2}}, 1);
    const std::vector<double> p{0.0};
    const auto post = compute_posterior(enumerate_joint_events(ctx), ctx, p, JipdaParams{});
    CHECK(post.existence(0) == 0.0);
    CHECK(post.beta0(0) == 1.0);
    CHECK(post.beta.col(0).isZero());
}

TEST_CASE("all existences zero leave only the empty event") {
    const auto ctx = context_from({{0.4, 0.3}, {0.2, 0.5}}, 2);
    const std::vector<double> p{0.0, 0.0};
    const JipdaParams params;
    for (const auto& e : enumerate_joint_events(ctx)) {
        const bool empty = std::all_of(e.measurement_for_track.begin(), e.measurement_for_track.end(),
                                       [](int i) { return i < 0; });
        CHECK((event_probability(e, ctx, p, params) > 0.0) == empty);
    }
}

TEST_CASE("posterior matches the brute-force oracle") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> size(0, 3);
    for (int trial = 0; trial < 300; ++trial) {
        oracle::JipdaInstance in;
        in.tracks = static_cast<std::size_t>(std::max(1, size(rng)));
        in.measurements = static_cast<std::size_t>(size(rng));
        in.lambda = 0.01 + u(rng);
        in.pd = 0.5 + 0.49 * u(rng);
        in.pg = 0.5 + 0.49 * u(rng);
        in.g.assign(in.measurements, std::vector<double>(in.tracks, 0.0));
        for (auto& row : in.g)
            for (auto& v : row) v = u(rng) < 0.3 ? 0.0 : u(rng) * 2.0;
        for (std::size_t j = 0; j < in.tracks; ++j) in.existence.push_back(u(rng));

        JipdaParams params;
        params.clutter_density = in.lambda;
        params.p_detection = in.pd;
        params.p_gating = in.pg;
        const auto ctx = context_from(in.g, in.tracks);
        const auto ref = oracle::bruteforce_posterior(in);
        const auto got = compute_posterior(enumerate_joint_events(ctx), ctx, in.existence, params);
        const auto streamed = compute_posterior_streaming(ctx, in.existence, params);
        for (std::size_t j = 0; j < in.tracks; ++j) {
            const auto c = static_cast<Eigen::Index>(j);
            CHECK(std::abs(got.existence(c) - ref.existence[j]) <= 1e-9);
            CHECK(std::abs(got.beta0(c) - ref.beta0[j]) <= 1e-9);
            for (std::size_t i = 0; i < in.measurements; ++i)
                CHECK(std::abs(got.beta(static_cast<Eigen::Index>(i), c) - ref.beta[i][j]) <= 1e-9);
        }
        CHECK(got.max_normalization_error() <= 1e-9);
        CHECK(got.existence == streamed.existence);
        CHECK(got.beta0 == streamed.beta0);
        if (in.measurements > 0) {
            CHECK(got.beta == streamed.beta);
            CHECK(got.beta.minCoeff() >= 0.0);
            CHECK(got.beta.maxCoeff() <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("extreme likelihood ratios stay normalized") {
    // log-domain accumulation must survive weights far outside double range
    const auto ctx = context_from({{1e200, 1e-200}, {1e-200, 1e200}}, 2);
    const std::vector<double> p{0.9, 0.9};
    const auto post = compute_posterior_streaming(ctx, p, params_with_lambda(1e-100));
    CHECK(post.max_normalization_error() <= 1e-9);
    CHECK(post.beta(0, 0) == doctest::Approx(1.0));
    CHECK(post.beta(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("spawned track") {
    JipdaParams params;
    MotionParams motion;
    TrackIdCounter ids;
    Detection d = detection_at(Vec2(3, 4));
    d.box = Box{1, 2, 3, 4};
    const Track t = spawn_track(d, params, motion, ids);
    CHECK(t.id == 1);
    CHECK(t.state.mean == Vec4(3, 0, 4, 0));
    CHECK(t.state.covariance.diagonal() == Vec4(motion.sigma_r * motion.sigma_r, 100.0,
                                                 motion.sigma_r * motion.sigma_r, 100.0));
    CHECK(t.existence == 0.65);
    CHECK(t.status == TrackStatus::tentative);
    CHECK(t.box == d.box);
    CHECK(spawn_track(d, params, motion, ids).id == 2);
}

TEST_CASE("lifecycle thresholds") {
    JipdaParams params;
    MotionParams motion;
    TrackIdCounter ids(10);
    std::vector<Track> tracks(3);
    tracks[0].existence = 0.002;
    tracks[0].status = TrackStatus::confirmed;
    tracks[1].existence = 0.86;
    tracks[2].existence = 0.5;
    AssociationPosterior post;
    post.beta = Eigen::MatrixXd::Zero(0, 3);
    const auto out = lifecycle_update(tracks, post, {}, params, motion, ids);
    CHECK(out[0].status == TrackStatus::deleted);
    CHECK(out[1].status == TrackStatus::confirmed);
    CHECK(out[2].status == TrackStatus::tentative);

    // confirmed never goes back to tentative
    std::vector<Track> again{out[1]};
    again[0].existence = 0.5;
    post.beta = Eigen::MatrixXd::Zero(0, 1);
    CHECK(lifecycle_update(again, post, {}, params, motion, ids)[0].status == TrackStatus::confirmed);
}

TEST_CASE("birth test uses mass over existing tracks") {
    JipdaParams params;
    MotionParams motion;
    TrackIdCounter ids;
    std::vector<Track> tracks(1);
    tracks[0].existence = 0.9;
    AssociationPosterior post;
    post.beta.resize(3, 1);
    post.beta << 0.0, 0.29, 0.31;
    const std::vector<Detection> dets{detection_at(Vec2(0, 0)), detection_at(Vec2(1, 0)), detection_at(Vec2(2, 0))};
    const auto out = lifecycle_update(tracks, post, dets, params, motion, ids);
    REQUIRE(out.size() == 3);  // 1 - 0 and 1 - 0.29 exceed 0.7, 1 - 0.31 does not
    CHECK(out[1].position() == Vec2(0, 0));
    CHECK(out[2].position() == Vec2(1, 0));
}

TEST_CASE("fresh scene spawns one tentative track per detection") {
    TrackIdCounter ids;
    const std::vector<Detection> dets{detection_at(Vec2(0, 0)), detection_at(Vec2(30, 0)), detection_at(Vec2(0, 30))};
    const auto r = jipda_step({}, dets, JipdaParams{}, MotionParams{}, ids, 1);
    REQUIRE(r.tracks.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(r.tracks[k].id == static_cast<int>(k + 1));
        CHECK(r.tracks[k].existence == 0.65);
        CHECK(r.tracks[k].status == TrackStatus::tentative);
    }
    CHECK(r.event_count == 1);
}

TEST_CASE("coasting track decays per the missed-detection formula") {
    JipdaParams params;
    MotionParams motion;
    TrackIdCounter ids(2);
    const Track t = confirmed_track(1, Vec2(10, 10), Vec2(1, -1), 0.95);
    const std::vector<Track> tracks{t};
    const auto r = jipda_step(tracks, {}, params, motion, ids);
    REQUIRE(r.tracks.size() == 1);
    const double p = predict_existence(0.95, params.p_survival);
    const double d = params.p_detection * params.p_gating;
    CHECK(r.tracks[0].existence == doctest::Approx((1 - d) * p / (1 - d * p)).epsilon(1e-12));
    const auto predicted = predict_state(t.state, motion);
    CHECK((r.tracks[0].state.mean - predicted.mean).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((r.tracks[0].state.covariance - predicted.covariance).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(r.tracks[0].age == 1);
    CHECK(r.tracks[0].frames_since_update == 1);
}

TEST_CASE("separated tracks each take their own measurement") {
    JipdaParams params;
    MotionParams motion;
    TrackIdCounter ids(3);
    const std::vector<Track> tracks{confirmed_track(1, Vec2(0, 0), Vec2(0, 0), 0.99),
                                    confirmed_track(2, Vec2(50, 50), Vec2(0, 0), 0.99)};
    const std::vector<Detection> dets{detection_at(Vec2(50.1, 49.95)), detection_at(Vec2(0.1, -0.05))};
    const auto r = jipda_step(tracks, dets, params, motion, ids);
    REQUIRE(r.tracks.size() == 2);
    CHECK(r.posterior.beta(1, 0) > 0.99);
    CHECK(r.posterior.beta(0, 1) > 0.99);
    CHECK(r.posterior.beta(0, 0) == 0.0);
    CHECK((r.tracks[0].position() - Vec2(0.1, -0.05)).norm() < Vec2(0.1, -0.05).norm());
    CHECK((r.tracks[1].position() - Vec2(50.1, 49.95)).norm() < Vec2(0.1, -0.05).norm());
    CHECK(r.tracks[0].hits == 1);
    CHECK(r.tracks[0].frames_since_update == 0);
}

TEST_CASE("tracker is deterministic and keeps its invariants") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    std::normal_distribution<double> n(0.0, 0.141);
    std::vector<std::vector<Detection>> frames;
    for (int k = 1; k <= 100; ++k) {
        std::vector<Detection> dets;
        for (int t = 0; t < 3; ++t) dets.push_back(detection_at(Vec2(20.0 * (t + 1) + 0.04 * k + n(rng), 50.0 + n(rng)), k));
        for (int c = 0; c < 2; ++c) dets.push_back(detection_at(Vec2(u(rng), u(rng)), k));
        frames.push_back(dets);
    }
    auto run = [&] {
        JipdaTracker tracker(JipdaParams{}, MotionParams{});
        std::vector<std::vector<int>> ids;
        std::vector<std::vector<double>> xs;
        for (std::size_t k = 0; k < frames.size(); ++k) {
            const auto& r = tracker.step(frames[k], static_cast<long>(k + 1));
            CHECK(r.posterior.max_normalization_error() <= 1e-9);
            std::vector<int> idk;
            std::vector<double> xk;
            for (const auto& t : r.tracks) {
                CHECK(t.existence >= 0.0);
                CHECK(t.existence <= 1.0);
                CHECK(satisfies_covariance_invariants(t.state.covariance));
                idk.push_back(t.id);
                xk.push_back(t.state.mean(0));
            }
            ids.push_back(idk);
            xs.push_back(xk);
        }
        return std::pair{ids, xs};
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
}

TEST_CASE("parameter validation") {
    JipdaParams p;
    CHECK_NOTHROW(p.validate());
    p.p_detection = 1.0;
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p = JipdaParams{};
    p.w_delete = 0.7;
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p = JipdaParams{};
    p.clutter_density = 0.0;
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p = JipdaParams{};
    p.v0_std = -1.0;
    CHECK_THROWS_AS(p.validate(), ParameterError);
}

}
