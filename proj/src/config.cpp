#include "mtt/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>

#include "mtt/error.hpp"

namespace mtt {

namespace fs = std::filesystem;

std::string_view to_string(TrackerMode m) { return m == TrackerMode::jipda ? "jipda" : "gnn"; }

TrackerMode parse_tracker_mode(std::string_view text) {
    if (text == "jipda") return TrackerMode::jipda;
    if (text == "gnn") return TrackerMode::gnn;
    throw ConfigError("unknown tracker mode '" + std::string(text) + "' (expected jipda or gnn)");
}

namespace {

enum class Origin { published, assumed };

struct KeySpec {
    const char* name;
    Origin origin;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

double number_of(const std::string& key, const std::string& value) {
    const auto v = parse_number(value);
    if (!v || !std::isfinite(*v)) throw ConfigError("key '" + key + "': '" + value + "' is not a finite number");
    return *v;
}

int integer_of(const std::string& key, const std::string& value) {
    const double v = number_of(key, value);
    if (v != std::floor(v) || std::abs(v) > 2e9) throw ConfigError("key '" + key + "': '" + value + "' is not an integer");
    return static_cast<int>(v);
}

bool bool_of(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("key '" + key + "': '" + value + "' is not a boolean");
}

template <class Member>
KeySpec number_key(const char* name, Origin origin, Member member) {
    return {name, origin, [member, name](RunConfig& c, const std::string& v) { member(c) = number_of(name, v); },
            [member](const RunConfig& c) { return format_number(member(c)); }};
}

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = [] {
        std::vector<KeySpec> t;
        t.push_back({"mode", Origin::assumed,
                     [](RunConfig& c, const std::string& v) { c.mode = parse_tracker_mode(v); },
                     [](const RunConfig& c) { return std::string(to_string(c.mode)); }});
        t.push_back(number_key("sigma_q", Origin::published, [](auto& c) -> auto& { return c.sigma_q; }));
        t.push_back(number_key("sigma_r", Origin::published, [](auto& c) -> auto& { return c.sigma_r; }));
        t.push_back(number_key("P_S", Origin::published, [](auto& c) -> auto& { return c.jipda.p_survival; }));
        t.push_back(number_key("P_D", Origin::published, [](auto& c) -> auto& { return c.jipda.p_detection; }));
        t.push_back(number_key("P_G", Origin::published, [](auto& c) -> auto& { return c.jipda.p_gating; }));
        t.push_back(number_key("clutter_count", Origin::published, [](auto& c) -> auto& { return c.clutter_count; }));
        t.push_back(number_key("init_threshold", Origin::published,
                               [](auto& c) -> auto& { return c.jipda.init_threshold; }));
        t.push_back(number_key("w_init", Origin::published, [](auto& c) -> auto& { return c.jipda.w_init; }));
        t.push_back(number_key("w_confirm", Origin::published, [](auto& c) -> auto& { return c.jipda.w_confirm; }));
        t.push_back(number_key("w_delete", Origin::published, [](auto& c) -> auto& { return c.jipda.w_delete; }));
        t.push_back(number_key("conf_threshold", Origin::published,
                               [](auto& c) -> auto& { return c.jipda.conf_threshold; }));
        t.push_back(number_key("v0_std", Origin::assumed, [](auto& c) -> auto& { return c.jipda.v0_std; }));
        t.push_back(number_key("frame_rate", Origin::assumed, [](auto& c) -> auto& { return c.frame_rate; }));
        t.push_back({"surveillance_area", Origin::assumed,
                     [](RunConfig& c, const std::string& v) { c.surveillance_area = number_of("surveillance_area", v); },
                     [](const RunConfig& c) {
                         return c.surveillance_area ? format_number(*c.surveillance_area) : std::string("from-sequence");
                     }});
        t.push_back({"event_cap", Origin::assumed,
                     [](RunConfig& c, const std::string& v) {
                         const int cap = integer_of("event_cap", v);
                         if (cap < 1) throw ConfigError("event_cap must be >= 1");
                         c.jipda.event_cap = static_cast<std::size_t>(cap);
                     },
                     [](const RunConfig& c) { return std::to_string(c.jipda.event_cap); }});
        t.push_back(number_key("gnn.sim_gate", Origin::assumed, [](auto& c) -> auto& { return c.gnn.sim_gate; }));
        t.push_back({"gnn.max_age", Origin::assumed,
                     [](RunConfig& c, const std::string& v) { c.gnn.max_age = integer_of("gnn.max_age", v); },
                     [](const RunConfig& c) { return std::to_string(c.gnn.max_age); }});
        t.push_back({"gnn.min_hits", Origin::assumed,
                     [](RunConfig& c, const std::string& v) { c.gnn.min_hits = integer_of("gnn.min_hits", v); },
                     [](const RunConfig& c) { return std::to_string(c.gnn.min_hits); }});
        t.push_back(number_key("gnn.smoothing", Origin::assumed, [](auto& c) -> auto& { return c.gnn.smoothing; }));
        t.push_back({"gnn.smooth_embeddings", Origin::assumed,
                     [](RunConfig& c, const std::string& v) {
                         c.gnn.smooth_embeddings = bool_of("gnn.smooth_embeddings", v);
                     },
                     [](const RunConfig& c) { return std::string(c.gnn.smooth_embeddings ? "true" : "false"); }});
        t.push_back({"loss.alpha_deg", Origin::assumed,
                     [](RunConfig& c, const std::string& v) {
                         c.loss_alpha = number_of("loss.alpha_deg", v) * std::numbers::pi / 180.0;
                     },
                     [](const RunConfig& c) { return format_number(c.loss_alpha * 180.0 / std::numbers::pi); }});
        t.push_back(number_key("loss.margin", Origin::assumed, [](auto& c) -> auto& { return c.loss_margin; }));
        t.push_back({"metric.mode", Origin::assumed,
                     [](RunConfig& c, const std::string& v) { c.metric_mode = parse_metric_mode(v); },
                     [](const RunConfig& c) { return std::string(to_string(c.metric_mode)); }});
        t.push_back({"metric.threshold", Origin::assumed,
                     [](RunConfig& c, const std::string& v) { c.metric_threshold = number_of("metric.threshold", v); },
                     [](const RunConfig& c) { return format_number(c.eval_params().threshold); }});
        t.push_back({"seq_dir", Origin::assumed, [](RunConfig& c, const std::string& v) { c.seq_dir = fs::path(v); },
                     [](const RunConfig& c) { return c.seq_dir ? c.seq_dir->string() : std::string("unset"); }});
        t.push_back({"out", Origin::assumed, [](RunConfig& c, const std::string& v) { c.out_dir = fs::path(v); },
                     [](const RunConfig& c) { return c.out_dir ? c.out_dir->string() : std::string("unset"); }});
        return t;
    }();
    return table;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    for (const auto& spec : key_table()) {
        if (key != spec.name) continue;
        spec.set(*this, value);
        overridden.insert(key);
        return;
    }
    warnings.push_back("unknown key '" + key + "' ignored");
}

MotionParams RunConfig::motion_for(const SequenceInfo& info) const {
    MotionParams m;
    m.dt = 1.0 / info.frame_rate.value_or(frame_rate);
    m.sigma_q = sigma_q;
    m.sigma_r = sigma_r;
    return m;
}

JipdaParams RunConfig::jipda_for(const SequenceInfo& info) const {
    const auto area = info.surveillance_area ? info.surveillance_area : surveillance_area;
    if (!area)
        throw ConfigError("surveillance area unknown for sequence '" + info.name +
                          "': set surveillanceArea in its seqinfo.ini or surveillance_area in the config");
    JipdaParams p = jipda;
    p.clutter_density = clutter_count / *area;
    return p;
}

EvalParams RunConfig::eval_params() const {
    EvalParams p = EvalParams::defaults_for(metric_mode);
    if (metric_threshold) p.threshold = *metric_threshold;
    return p;
}

void RunConfig::validate() const {
    try {
        MotionParams m{1.0 / frame_rate, sigma_q, sigma_r};
        m.validate();
        JipdaParams p = jipda;
        p.clutter_density = 1.0;
        p.validate();
        gnn.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    if (!(clutter_count > 0.0)) throw ConfigError("clutter_count must be > 0");
    if (surveillance_area && !(*surveillance_area > 0.0)) throw ConfigError("surveillance_area must be > 0");
    if (!(loss_alpha > 0.0 && loss_alpha < std::numbers::pi / 2.0)) throw ConfigError("loss.alpha_deg must lie in (0, 90)");
    if (metric_threshold && !(*metric_threshold > 0.0)) throw ConfigError("metric.threshold must be > 0");
    if (seq_dir && !fs::exists(*seq_dir)) throw ConfigError("seq_dir does not exist: " + seq_dir->string());
}

RunConfig parse_config(std::istream& in, const std::string& source) {
    RunConfig config;
    for (const auto& kv : parse_key_values(in, source)) {
        try {
            config.set(kv.key, kv.value);
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(kv.line) + ": " + e.what());
        }
    }
    config.validate();
    return config;
}

RunConfig load_config(const fs::path& path) {
    if (path.empty()) return RunConfig{};
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    try {
        return parse_config(in, path.string());
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
}

std::string effective_config_dump(const RunConfig& config) {
    std::string out = "# effective configuration\n";
    out += "# origin: published = reference operating point, assumed = chosen by this implementation, "
           "config = set explicitly\n";
    for (const auto& spec : key_table()) {
        std::string origin = config.overridden.count(spec.name)
                                 ? "config"
                                 : (spec.origin == Origin::published ? "published" : "assumed");
        out += std::string(spec.name) + "=" + spec.get(config) + " # " + origin + "\n";
    }
    for (const auto& w : config.warnings) out += "# warning: " + w + "\n";
    return out;
}

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace mtt
