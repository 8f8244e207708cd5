#include "mtt/simhist.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mtt/appearance.hpp"
#include "mtt/error.hpp"

namespace mtt {

double SimilaritySample::mean() const {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double SimilaritySample::quantile(double q) const {
    if (values.empty()) return 0.0;
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

void add_sample(SimilaritySample& s, double value, int bins) {
    s.values.push_back(value);
    const int bin = std::clamp(static_cast<int>(std::floor(value * bins)), 0, bins - 1);
    ++s.counts[static_cast<std::size_t>(bin)];
}

}  // namespace

SimilarityStudy similarity_study(std::span<const FrameAnnotations> gt, const EmbeddingTable& embeddings,
                                 const SimilarityStudyParams& params) {
    if (params.lags.empty()) throw ConfigError("similarity study needs at least one lag");
    for (int lag : params.lags)
        if (lag < 1) throw ConfigError("lags must be >= 1");
    if (params.bins < 1) throw ConfigError("bin count must be >= 1");

    SimilarityStudy study;
    study.bins = params.bins;
    study.lags = params.lags;
    study.same_identity.resize(params.lags.size());
    for (auto& s : study.same_identity) s.counts.assign(static_cast<std::size_t>(params.bins), 0);
    study.cross_identity.counts.assign(static_cast<std::size_t>(params.bins), 0);

    // identity -> frame -> (raw, template) embedding
    struct Entry {
        EmbeddingVector raw;
        EmbeddingVector reference;
    };
    std::map<int, std::map<int, Entry>> by_identity;
    for (const auto& frame : gt) {
        std::vector<const EmbeddingVector*> in_frame;
        for (std::size_t row = 0; row < frame.objects.size(); ++row) {
            const auto* e = embeddings.find(frame.frame, static_cast<int>(row));
            if (!e)
                throw ParseError("no embedding for frame " + std::to_string(frame.frame) + " row " +
                                 std::to_string(row));
            in_frame.push_back(e);
            auto& track = by_identity[frame.objects[row].id];
            EmbeddingVector reference = *e;
            if (params.smoothed && !track.empty())
                reference = blend_embedding(track.rbegin()->second.reference, *e, params.smoothing);
            track.insert_or_assign(frame.frame, Entry{*e, reference});
        }
        for (std::size_t a = 0; a < in_frame.size(); ++a)
            for (std::size_t b = a + 1; b < in_frame.size(); ++b)
                if (frame.objects[a].id != frame.objects[b].id)
                    add_sample(study.cross_identity, similarity(*in_frame[a], *in_frame[b]), params.bins);
    }

    for (const auto& [id, frames] : by_identity) {
        for (const auto& [frame, entry] : frames) {
            for (std::size_t l = 0; l < params.lags.size(); ++l) {
                const auto later = frames.find(frame + params.lags[l]);
                if (later == frames.end()) continue;
                add_sample(study.same_identity[l], similarity(entry.reference, later->second.raw), params.bins);
            }
        }
    }
    return study;
}

std::string format_similarity_table(const SimilarityStudy& study) {
    std::string out = "bin_lo,bin_hi";
    for (int lag : study.lags) out += ",lag" + std::to_string(lag);
    out += ",cross\n";
    for (int b = 0; b < study.bins; ++b) {
        out += format_number(static_cast<double>(b) / study.bins) + "," +
               format_number(static_cast<double>(b + 1) / study.bins);
        for (const auto& s : study.same_identity) out += "," + std::to_string(s.counts[static_cast<std::size_t>(b)]);
        out += "," + std::to_string(study.cross_identity.counts[static_cast<std::size_t>(b)]) + "\n";
    }
    return out;
}

}  // namespace mtt
