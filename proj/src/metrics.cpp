#include "mtt/metrics.hpp"

#include <map>
#include <set>
#include <string>

#include "mtt/assignment.hpp"
#include "mtt/error.hpp"

namespace mtt {

std::string_view to_string(MetricMode m) { return m == MetricMode::point ? "point" : "box"; }

MetricMode parse_metric_mode(std::string_view text) {
    if (text == "point") return MetricMode::point;
    if (text == "box") return MetricMode::box;
    throw ConfigError("unknown metric mode '" + std::string(text) + "' (expected point or box)");
}

EvalParams EvalParams::defaults_for(MetricMode mode) {
    return mode == MetricMode::point ? EvalParams{MetricMode::point, 1.0} : EvalParams{MetricMode::box, 0.5};
}

namespace {

void check_unique(const FrameAnnotations& f, const char* which) {
    std::set<int> seen;
    for (const auto& o : f.objects)
        if (!seen.insert(o.id).second)
            throw EvaluationError(std::string(which) + " frame " + std::to_string(f.frame) +
                                  " repeats identity " + std::to_string(o.id));
}

void check_boxes(const FrameAnnotations& f, const char* which) {
    for (const auto& o : f.objects)
        if (!o.box)
            throw EvaluationError(std::string(which) + " frame " + std::to_string(f.frame) + " identity " +
                                  std::to_string(o.id) + " has no box (needed in box mode)");
}

class PairScorer {
public:
    explicit PairScorer(const EvalParams& params) : params_(params) {}

    /// Distance used for ranking; Euclidean or 1 - IoU.
    double distance(const AnnotatedObject& g, const AnnotatedObject& h) const {
        if (params_.mode == MetricMode::point) return (g.position - h.position).norm();
        if (!g.box || !h.box) throw EvaluationError("box-mode evaluation needs boxes on every object");
        return 1.0 - intersection_over_union(*g.box, *h.box);
    }

    bool feasible(double dist) const {
        return params_.mode == MetricMode::point ? dist <= params_.threshold : 1.0 - dist >= params_.threshold;
    }

    double max_feasible() const { return params_.mode == MetricMode::point ? params_.threshold : 1.0; }

private:
    EvalParams params_;
};

}  // namespace

MotScore evaluate(std::span<const FrameAnnotations> gt, std::span<const FrameAnnotations> hyp,
                  const EvalParams& params) {
    if (gt.size() != hyp.size())
        throw EvaluationError("frame count mismatch: " + std::to_string(gt.size()) + " ground-truth vs " +
                              std::to_string(hyp.size()) + " hypothesis frames");
    if (!(params.threshold > 0.0)) throw EvaluationError("matching threshold must be > 0");
    if (params.mode == MetricMode::box && params.threshold > 1.0)
        throw EvaluationError("IoU threshold must not exceed 1");

    const PairScorer scorer(params);
    MotScore score;
    std::map<int, int> last_match;  // gt id -> hypothesis id

    for (std::size_t k = 0; k < gt.size(); ++k) {
        const auto& g = gt[k];
        const auto& h = hyp[k];
        if (g.frame != h.frame)
            throw EvaluationError("frame " + std::to_string(k) + " misaligned: ground truth " +
                                  std::to_string(g.frame) + " vs hypothesis " + std::to_string(h.frame));
        check_unique(g, "ground-truth");
        check_unique(h, "hypothesis");
        if (params.mode == MetricMode::box) {
            check_boxes(g, "ground-truth");
            check_boxes(h, "hypothesis");
        }

        const std::size_t ng = g.objects.size();
        const std::size_t nh = h.objects.size();
        std::vector<int> hyp_for_gt(ng, -1);
        std::vector<char> hyp_taken(nh, 0);
        std::vector<double> dist_for_gt(ng, 0.0);

        // Keep still-valid correspondences from earlier frames.
        for (std::size_t a = 0; a < ng; ++a) {
            const auto it = last_match.find(g.objects[a].id);
            if (it == last_match.end()) continue;
            for (std::size_t b = 0; b < nh; ++b) {
                if (hyp_taken[b] || h.objects[b].id != it->second) continue;
                const double d = scorer.distance(g.objects[a], h.objects[b]);
                if (scorer.feasible(d)) {
                    hyp_for_gt[a] = static_cast<int>(b);
                    hyp_taken[b] = 1;
                    dist_for_gt[a] = d;
                }
                break;
            }
        }

        std::vector<std::size_t> free_gt, free_hyp;
        for (std::size_t a = 0; a < ng; ++a)
            if (hyp_for_gt[a] < 0) free_gt.push_back(a);
        for (std::size_t b = 0; b < nh; ++b)
            if (!hyp_taken[b]) free_hyp.push_back(b);

        if (!free_gt.empty() && !free_hyp.empty()) {
            const auto rows = static_cast<Eigen::Index>(free_gt.size());
            const auto cols = static_cast<Eigen::Index>(free_hyp.size());
            // Infeasible pairs cost more than any feasible matching in total.
            const double forbidden = scorer.max_feasible() * static_cast<double>(rows + cols + 1) + 1.0;
            Eigen::MatrixXd cost(rows, cols);
            Eigen::MatrixXd dist(rows, cols);
            for (Eigen::Index r = 0; r < rows; ++r)
                for (Eigen::Index c = 0; c < cols; ++c) {
                    const double d = scorer.distance(g.objects[free_gt[static_cast<std::size_t>(r)]],
                                                     h.objects[free_hyp[static_cast<std::size_t>(c)]]);
                    dist(r, c) = d;
                    cost(r, c) = scorer.feasible(d) ? d : forbidden;
                }
            const auto solved = solve_assignment(cost);
            for (Eigen::Index r = 0; r < rows; ++r) {
                const int c = solved.col_for_row[static_cast<std::size_t>(r)];
                if (c < 0 || !scorer.feasible(dist(r, c))) continue;
                const std::size_t a = free_gt[static_cast<std::size_t>(r)];
                hyp_for_gt[a] = static_cast<int>(free_hyp[static_cast<std::size_t>(c)]);
                dist_for_gt[a] = dist(r, c);
            }
        }

        long frame_matches = 0;
        for (std::size_t a = 0; a < ng; ++a) {
            if (hyp_for_gt[a] < 0) continue;
            ++frame_matches;
            const int gid = g.objects[a].id;
            const int hid = h.objects[static_cast<std::size_t>(hyp_for_gt[a])].id;
            const auto it = last_match.find(gid);
            if (it != last_match.end() && it->second != hid) ++score.ids;
            last_match[gid] = hid;
            score.distance_sum += dist_for_gt[a];
        }
        score.matches += frame_matches;
        score.fn += static_cast<long>(ng) - frame_matches;
        score.fp += static_cast<long>(nh) - frame_matches;
        score.gt_total += static_cast<long>(ng);
        score.hyp_total += static_cast<long>(nh);
    }

    if (score.gt_total == 0) throw EvaluationError("ground truth is empty; MOTA is undefined");
    score.mota = 1.0 - static_cast<double>(score.fp + score.fn + score.ids) / static_cast<double>(score.gt_total);
    if (score.matches > 0) {
        const double mean = score.distance_sum / static_cast<double>(score.matches);
        score.motp = params.mode == MetricMode::point ? 1.0 - mean / params.threshold : 1.0 - mean;
    }
    return score;
}

}  // namespace mtt
