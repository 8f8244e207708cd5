#pragma once

#include <span>
#include <string>
#include <vector>

#include "mtt/io.hpp"
#include "mtt/metrics.hpp"

namespace mtt {

struct SimilaritySample {
    std::vector<double> values;
    std::vector<long> counts;  ///< histogram over [0, 1]

    double mean() const;
    /// Linear-interpolated quantile of the sorted values, q in [0, 1].
    double quantile(double q) const;
};

struct SimilarityStudy {
    int bins = 50;
    std::vector<int> lags;
    std::vector<SimilaritySample> same_identity;  ///< one per lag
    SimilaritySample cross_identity;              ///< distinct identities within a frame
};

struct SimilarityStudyParams {
    std::vector<int> lags{1, 3, 5};
    int bins = 50;
    /// Compare the identity's running template (exponentially smoothed)
    /// instead of its raw per-frame embedding at the earlier frame.
    bool smoothed = false;
    double smoothing = 0.3;
};

/// Same-identity similarities between frames t and t + lag and
/// cross-identity similarities within each frame. Embeddings are looked up
/// by (frame, row of the object within that frame). Throws ConfigError on
/// an empty or non-positive lag list and ParseError when an object has no
/// embedding.
SimilarityStudy similarity_study(std::span<const FrameAnnotations> gt, const EmbeddingTable& embeddings,
                                 const SimilarityStudyParams& params);

/// Comma-separated table: bin_lo,bin_hi,lag<L>...,cross.
std::string format_similarity_table(const SimilarityStudy& study);

}  // namespace mtt
