#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtt/embedding.hpp"
#include "mtt/metrics.hpp"
#include "mtt/types.hpp"

namespace mtt {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Locale-independent decimal parse of a whole field (surrounding blanks
/// allowed). Returns nullopt on any trailing garbage.
std::optional<double> parse_number(std::string_view text);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

// -- MOTChallenge text rows: frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z

/// Rows with conf below `conf_threshold` are dropped. Position comes from
/// (x, y) when finite; when a box is present and (x, y, z) is the all-zero
/// or all -1 placeholder, or absent, the box foot is used instead. Output
/// is sorted by frame, file order within a frame.
std::vector<Detection> parse_detections(std::istream& in, double conf_threshold,
                                        const std::string& source = "<stream>");
std::vector<Detection> read_detections(const std::filesystem::path& path, double conf_threshold);

struct ResultRow {
    int frame = 1;
    int id = 0;
    std::optional<Box> box;
    double confidence = 1.0;
    Vec2 position = Vec2::Zero();

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// Sorted by (frame, id); boxes absent are written as -1 fields, z as 0.
std::string format_results(std::span<const ResultRow> rows);
void write_results(const std::filesystem::path& path, std::span<const ResultRow> rows);

std::vector<ResultRow> parse_results(std::istream& in, const std::string& source = "<stream>");
std::vector<ResultRow> read_results(const std::filesystem::path& path);

/// Ground-truth style file. Rows whose conf field is exactly 0 (ignore
/// flag) are skipped.
std::vector<ResultRow> read_annotation_rows(const std::filesystem::path& path);

/// Dense frames 1..frame_count. Throws EvaluationError for rows outside.
std::vector<FrameAnnotations> to_frame_sequence(std::span<const ResultRow> rows, int frame_count);

// -- Embedding sidecar: frame,det_index,v1,...,vD

class EmbeddingTable {
public:
    using Key = std::pair<int, int>;  ///< (frame, det_index)

    void insert(int frame, int index, EmbeddingVector v);
    const EmbeddingVector* find(int frame, int index) const;
    Eigen::Index dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return rows_.size(); }
    const std::map<Key, EmbeddingVector>& rows() const noexcept { return rows_; }

private:
    Eigen::Index dim_ = 0;
    std::map<Key, EmbeddingVector> rows_;
};

/// Vectors are re-normalized on load. Inconsistent D throws FormatError.
EmbeddingTable parse_embeddings(std::istream& in, const std::string& source = "<stream>");
EmbeddingTable read_embeddings(const std::filesystem::path& path);
std::string format_embeddings(const EmbeddingTable& table);

// -- Sequence metadata (seqinfo.ini style key=value)

struct SequenceInfo {
    std::string name;
    std::optional<double> frame_rate;
    std::optional<int> seq_length;
    std::optional<double> surveillance_area;
};

SequenceInfo parse_sequence_info(std::istream& in, const std::string& source = "<stream>");
SequenceInfo read_sequence_info(const std::filesystem::path& path);
std::string format_sequence_info(const SequenceInfo& info);

/// Parses a key=value text. '#' and ';' start comments, [section] lines
/// are ignored, blanks around keys and values are trimmed. Duplicate keys
/// keep the last value. Returns (key, value, line) triples in file order.
struct KeyValue {
    std::string key;
    std::string value;
    long line = 0;
};
std::vector<KeyValue> parse_key_values(std::istream& in, const std::string& source = "<stream>");

}  // namespace mtt
