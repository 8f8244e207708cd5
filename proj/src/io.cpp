#include "mtt/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "mtt/error.hpp"

namespace mtt {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    const auto is_blank = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_blank(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_blank(s.back())) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool skippable(std::string_view line) {
    const auto t = trim(line);
    return t.empty() || t.front() == '#';
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file", path.string());
    return in;
}

/// Common parse of a MOT row; `numbers` holds every field as a double.
struct MotRow {
    int frame = 0;
    int id = 0;
    std::optional<Box> box;
    double confidence = 0.0;
    Vec2 position = Vec2::Zero();
};

int integral_field(double v, const char* name, const std::string& source, long line) {
    if (!std::isfinite(v) || v != std::floor(v) || std::abs(v) > 2e9)
        throw ParseError(std::string("field '") + name + "' is not an integer", source, line);
    return static_cast<int>(v);
}

MotRow parse_mot_row(std::string_view line, const std::string& source, long line_no) {
    const auto fields = split_fields(line);
    if (fields.size() < 7 || fields.size() > 10)
        throw ParseError("expected 7 to 10 comma-separated fields, got " + std::to_string(fields.size()), source,
                         line_no);
    std::array<double, 10> v{};
    for (std::size_t k = 0; k < fields.size(); ++k) {
        const auto parsed = parse_number(fields[k]);
        if (!parsed) throw ParseError("malformed number '" + std::string(fields[k]) + "'", source, line_no);
        v[k] = *parsed;
    }
    MotRow row;
    row.frame = integral_field(v[0], "frame", source, line_no);
    if (row.frame < 1) throw ParseError("frame numbers start at 1", source, line_no);
    row.id = integral_field(v[1], "id", source, line_no);
    if (std::isfinite(v[4]) && std::isfinite(v[5]) && v[4] > 0.0 && v[5] > 0.0)
        row.box = Box{v[2], v[3], v[4], v[5]};
    row.confidence = v[6];

    const bool has_xy = fields.size() >= 9 && std::isfinite(v[7]) && std::isfinite(v[8]);
    const bool has_z = fields.size() >= 10;
    const bool zero_placeholder = v[7] == 0.0 && v[8] == 0.0 && (!has_z || v[9] == 0.0);
    const bool neg_placeholder = v[7] == -1.0 && v[8] == -1.0 && (!has_z || v[9] == -1.0);
    if (has_xy && !(row.box && (zero_placeholder || neg_placeholder))) {
        row.position = Vec2(v[7], v[8]);
    } else if (row.box) {
        row.position = row.box->foot();
    } else {
        throw ParseError("row has neither a world position nor a valid box", source, line_no);
    }
    return row;
}

void append_box(std::string& out, const std::optional<Box>& box) {
    if (box) {
        out += format_number(box->left) + "," + format_number(box->top) + "," + format_number(box->width) + "," +
               format_number(box->height);
    } else {
        out += "-1,-1,-1,-1";
    }
}

template <class RowFn>
void for_each_line(std::istream& in, RowFn&& fn) {
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        fn(std::string_view(line), line_no);
    }
}

}  // namespace

std::string format_number(double value) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc()) throw ModelInputError("cannot format number");
    return std::string(buf.data(), ptr);
}

std::optional<double> parse_number(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    auto in = open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<Detection> parse_detections(std::istream& in, double conf_threshold, const std::string& source) {
    std::vector<Detection> out;
    std::map<int, int> rows_in_frame;
    for_each_line(in, [&](std::string_view line, long line_no) {
        const MotRow row = parse_mot_row(line, source, line_no);
        const int index = rows_in_frame[row.frame]++;
        if (row.confidence < conf_threshold) return;
        Detection d;
        d.frame = row.frame;
        d.position = row.position;
        d.box = row.box;
        d.confidence = row.confidence;
        d.embedding_index = index;
        out.push_back(d);
    });
    std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) { return a.frame < b.frame; });
    return out;
}

std::vector<Detection> read_detections(const fs::path& path, double conf_threshold) {
    auto in = open_input(path);
    return parse_detections(in, conf_threshold, path.string());
}

std::string format_results(std::span<const ResultRow> rows) {
    std::vector<ResultRow> sorted(rows.begin(), rows.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const ResultRow& a, const ResultRow& b) {
        return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
    });
    std::string out;
    for (const auto& r : sorted) {
        out += std::to_string(r.frame) + "," + std::to_string(r.id) + ",";
        append_box(out, r.box);
        out += "," + format_number(r.confidence) + "," + format_number(r.position.x()) + "," +
               format_number(r.position.y()) + ",0\n";
    }
    return out;
}

void write_results(const fs::path& path, std::span<const ResultRow> rows) {
    write_file_atomic(path, format_results(rows));
}

std::vector<ResultRow> parse_results(std::istream& in, const std::string& source) {
    std::vector<ResultRow> out;
    for_each_line(in, [&](std::string_view line, long line_no) {
        const MotRow row = parse_mot_row(line, source, line_no);
        out.push_back(ResultRow{row.frame, row.id, row.box, row.confidence, row.position});
    });
    return out;
}

std::vector<ResultRow> read_results(const fs::path& path) {
    auto in = open_input(path);
    return parse_results(in, path.string());
}

std::vector<ResultRow> read_annotation_rows(const fs::path& path) {
    auto rows = read_results(path);
    std::erase_if(rows, [](const ResultRow& r) { return r.confidence == 0.0; });
    return rows;
}

std::vector<FrameAnnotations> to_frame_sequence(std::span<const ResultRow> rows, int frame_count) {
    std::vector<FrameAnnotations> frames(static_cast<std::size_t>(std::max(frame_count, 0)));
    for (std::size_t k = 0; k < frames.size(); ++k) frames[k].frame = static_cast<int>(k) + 1;
    for (const auto& r : rows) {
        if (r.frame < 1 || r.frame > frame_count)
            throw EvaluationError("frame count mismatch: row for frame " + std::to_string(r.frame) +
                                  " outside 1.." + std::to_string(frame_count));
        frames[static_cast<std::size_t>(r.frame - 1)].objects.push_back(AnnotatedObject{r.id, r.position, r.box});
    }
    return frames;
}

void EmbeddingTable::insert(int frame, int index, EmbeddingVector v) {
    if (rows_.empty())
        dim_ = v.dim();
    else if (v.dim() != dim_)
        throw FormatError("embedding dimension " + std::to_string(v.dim()) + " differs from " + std::to_string(dim_));
    rows_.insert_or_assign(Key{frame, index}, std::move(v));
}

const EmbeddingVector* EmbeddingTable::find(int frame, int index) const {
    const auto it = rows_.find(Key{frame, index});
    return it == rows_.end() ? nullptr : &it->second;
}

EmbeddingTable parse_embeddings(std::istream& in, const std::string& source) {
    EmbeddingTable table;
    for_each_line(in, [&](std::string_view line, long line_no) {
        const auto fields = split_fields(line);
        if (fields.size() < 3) throw ParseError("embedding row needs frame, index and values", source, line_no);
        std::vector<double> v;
        v.reserve(fields.size());
        for (const auto f : fields) {
            const auto parsed = parse_number(f);
            if (!parsed) throw ParseError("malformed number '" + std::string(f) + "'", source, line_no);
            v.push_back(*parsed);
        }
        const int frame = integral_field(v[0], "frame", source, line_no);
        const int index = integral_field(v[1], "det_index", source, line_no);
        const auto dim = static_cast<Eigen::Index>(v.size() - 2);
        if (table.size() > 0 && dim != table.dim())
            throw FormatError("embedding dimension " + std::to_string(dim) + " differs from " +
                                  std::to_string(table.dim()),
                              source, line_no);
        try {
            table.insert(frame, index, EmbeddingVector(Eigen::Map<const Eigen::VectorXd>(v.data() + 2, dim)));
        } catch (const ModelInputError& e) {
            throw FormatError(e.what(), source, line_no);
        }
    });
    return table;
}

EmbeddingTable read_embeddings(const fs::path& path) {
    auto in = open_input(path);
    return parse_embeddings(in, path.string());
}

std::string format_embeddings(const EmbeddingTable& table) {
    std::string out;
    for (const auto& [key, v] : table.rows()) {
        out += std::to_string(key.first) + "," + std::to_string(key.second);
        for (Eigen::Index k = 0; k < v.dim(); ++k) out += "," + format_number(v.values()(k));
        out += "\n";
    }
    return out;
}

std::vector<KeyValue> parse_key_values(std::istream& in, const std::string& source) {
    std::vector<KeyValue> out;
    std::string raw;
    long line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string_view::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty() || line.front() == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key=value", source, line_no);
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError("empty key", source, line_no);
        out.push_back(KeyValue{std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
    }
    return out;
}

SequenceInfo parse_sequence_info(std::istream& in, const std::string& source) {
    SequenceInfo info;
    for (const auto& kv : parse_key_values(in, source)) {
        auto number = [&]() {
            const auto v = parse_number(kv.value);
            if (!v) throw ParseError("malformed number for '" + kv.key + "'", source, kv.line);
            return *v;
        };
        if (kv.key == "name") {
            info.name = kv.value;
        } else if (kv.key == "frameRate") {
            const double v = number();
            if (!(v > 0.0)) throw ParseError("frameRate must be > 0", source, kv.line);
            info.frame_rate = v;
        } else if (kv.key == "seqLength") {
            info.seq_length = integral_field(number(), "seqLength", source, kv.line);
        } else if (kv.key == "surveillanceArea") {
            const double v = number();
            if (!(v > 0.0)) throw ParseError("surveillanceArea must be > 0", source, kv.line);
            info.surveillance_area = v;
        }
    }
    return info;
}

SequenceInfo read_sequence_info(const fs::path& path) {
    auto in = open_input(path);
    return parse_sequence_info(in, path.string());
}

std::string format_sequence_info(const SequenceInfo& info) {
    std::string out = "[Sequence]\n";
    out += "name=" + info.name + "\n";
    if (info.frame_rate) out += "frameRate=" + format_number(*info.frame_rate) + "\n";
    if (info.seq_length) out += "seqLength=" + std::to_string(*info.seq_length) + "\n";
    if (info.surveillance_area) out += "surveillanceArea=" + format_number(*info.surveillance_area) + "\n";
    return out;
}

}  // namespace mtt
