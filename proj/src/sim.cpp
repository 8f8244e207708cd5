#include "mtt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "mtt/error.hpp"

namespace mtt {

namespace fs = std::filesystem;

namespace {

enum Stream : std::uint32_t { kMotion = 1, kSensor = 2, kAppearance = 3 };

std::mt19937_64 make_engine(std::uint64_t seed, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

struct Rng {
    std::mt19937_64 engine;
    std::normal_distribution<double> normal{0.0, 1.0};
    std::uniform_real_distribution<double> unit{0.0, 1.0};

    double gauss(double sigma) { return sigma * normal(engine); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(engine); }

    Eigen::VectorXd gauss_vector(Eigen::Index dim, double sigma) {
        Eigen::VectorXd v(dim);
        for (Eigen::Index k = 0; k < dim; ++k) v(k) = gauss(sigma);
        return v;
    }

    Eigen::VectorXd direction(Eigen::Index dim) {
        Eigen::VectorXd v = gauss_vector(dim, 1.0);
        while (!(v.norm() > 0.0)) v = gauss_vector(dim, 1.0);
        return v / v.norm();
    }
};

void reflect(double& pos, double& vel, double lo, double hi) {
    for (int guard = 0; guard < 8 && (pos < lo || pos > hi); ++guard) {
        if (pos < lo) pos = 2.0 * lo - pos;
        if (pos > hi) pos = 2.0 * hi - pos;
        vel = -vel;
    }
    pos = std::clamp(pos, lo, hi);
}

struct TargetSim {
    int id = 0;
    int birth = 1;
    int death = 0;
    Vec4 initial = Vec4::Zero();
    Vec4 state = Vec4::Zero();
    Eigen::VectorXd mean_direction;
    Eigen::VectorXd appearance_noise;

    bool alive(int frame) const { return frame >= birth && frame <= death; }
};

Vec4 initial_state(const ScenarioSpec& spec, int index, Rng& rng) {
    const Area& a = spec.area;
    const double cx = 0.5 * (a.xmin + a.xmax);
    const double cy = 0.5 * (a.ymin + a.ymax);
    if (spec.layout == Layout::crossing) {
        const int n = std::max(spec.n_targets, 1);
        const double frac = n > 1 ? static_cast<double>(index) / (n - 1) : 0.5;
        const double speed = spec.speed_min + (spec.speed_max - spec.speed_min) * frac;
        const double angle = 2.0 * std::numbers::pi * index / n;
        // Arrival at the center is staggered over the middle of the run.
        const double arrival = (0.3 + 0.4 * frac) * spec.duration / spec.frame_rate;
        const double radius = std::min(speed * arrival, 0.45 * std::min(a.xmax - a.xmin, a.ymax - a.ymin));
        const double ux = std::cos(angle);
        const double uy = std::sin(angle);
        return {cx + radius * ux, -speed * ux, cy + radius * uy, -speed * uy};
    }
    const double mx = 0.1 * (a.xmax - a.xmin);
    const double my = 0.1 * (a.ymax - a.ymin);
    const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double speed = rng.uniform(spec.speed_min, spec.speed_max);
    return {rng.uniform(a.xmin + mx, a.xmax - mx), speed * std::cos(heading), rng.uniform(a.ymin + my, a.ymax - my),
            speed * std::sin(heading)};
}

EmbeddingVector noisy_embedding(const TargetSim& t) {
    return EmbeddingVector(t.mean_direction + t.appearance_noise);
}

}  // namespace

void ScenarioSpec::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("scenario: " + what); };
    if (duration < 1) fail("frames must be >= 1");
    if (!(area.volume() > 0.0) || area.xmax <= area.xmin || area.ymax <= area.ymin) fail("area must have positive extent");
    if (n_targets < 0) fail("n_targets must be >= 0");
    if (static_cast<int>(windows.size()) > n_targets) fail("more target windows than targets");
    for (const auto& w : windows)
        if (w.birth < 1 || (w.death > 0 && w.death < w.birth)) fail("target window must satisfy 1 <= birth <= death");
    if (!(frame_rate > 0.0)) fail("frame_rate must be > 0");
    if (!(sigma_q >= 0.0) || !(sigma_r >= 0.0)) fail("noise deviations must be >= 0");
    if (!(p_detection > 0.0 && p_detection <= 1.0)) fail("P_D must lie in (0, 1]");
    if (!(clutter_count >= 0.0) || !std::isfinite(clutter_count)) fail("clutter_count must be finite and >= 0");
    if (!(speed_min >= 0.0 && speed_min <= speed_max)) fail("speeds must satisfy 0 <= speed_min <= speed_max");
    if (embedding_dim < 1) fail("embedding_dim must be >= 1");
    if (!(embedding_noise >= 0.0)) fail("embedding_noise must be >= 0");
    if (!(embedding_correlation >= 0.0 && embedding_correlation < 1.0)) fail("embedding_correlation must lie in [0, 1)");
}

Scenario generate(const ScenarioSpec& spec) {
    spec.validate();
    Rng motion{make_engine(spec.seed, kMotion)};
    Rng sensor{make_engine(spec.seed, kSensor)};
    Rng look{make_engine(spec.seed, kAppearance)};

    const double dt = 1.0 / spec.frame_rate;
    const Mat4 f = transition_matrix(dt);
    const auto dim = static_cast<Eigen::Index>(spec.embedding_dim);
    const double a = spec.embedding_correlation;
    const double innovation = std::sqrt(1.0 - a * a);

    std::vector<TargetSim> targets(static_cast<std::size_t>(spec.n_targets));
    for (int i = 0; i < spec.n_targets; ++i) {
        auto& t = targets[static_cast<std::size_t>(i)];
        t.id = i + 1;
        if (i < static_cast<int>(spec.windows.size())) {
            t.birth = spec.windows[static_cast<std::size_t>(i)].birth;
            t.death = spec.windows[static_cast<std::size_t>(i)].death;
        }
        if (t.death <= 0) t.death = spec.duration;
        t.initial = initial_state(spec, i, motion);
        t.mean_direction = look.direction(dim);
        t.appearance_noise = look.gauss_vector(dim, spec.embedding_noise);
    }

    Scenario out;
    out.info.name = spec.name;
    out.info.frame_rate = spec.frame_rate;
    out.info.seq_length = spec.duration;
    out.info.surveillance_area = spec.area.volume();
    out.ground_truth.resize(static_cast<std::size_t>(spec.duration));

    struct Pending {
        Vec2 position;
        EmbeddingVector embedding;
    };
    std::poisson_distribution<int> clutter(spec.clutter_count > 0.0 ? spec.clutter_count : 1.0);

    for (int k = 1; k <= spec.duration; ++k) {
        auto& frame = out.ground_truth[static_cast<std::size_t>(k - 1)];
        frame.frame = k;
        std::vector<Pending> pending;
        for (auto& t : targets) {
            if (!t.alive(k)) continue;
            if (k == t.birth) {
                t.state = t.initial;
            } else {
                t.state = f * t.state;
                // White-noise acceleration: one scalar draw per axis.
                const double ax = motion.gauss(spec.sigma_q);
                const double ay = motion.gauss(spec.sigma_q);
                t.state(0) += 0.5 * dt * dt * ax;
                t.state(1) += dt * ax;
                t.state(2) += 0.5 * dt * dt * ay;
                t.state(3) += dt * ay;
                reflect(t.state(0), t.state(1), spec.area.xmin, spec.area.xmax);
                reflect(t.state(2), t.state(3), spec.area.ymin, spec.area.ymax);
                t.appearance_noise = a * t.appearance_noise + innovation * look.gauss_vector(dim, spec.embedding_noise);
            }
            const Vec2 truth(t.state(0), t.state(2));
            const EmbeddingVector appearance = noisy_embedding(t);
            out.gt_embeddings.insert(k, static_cast<int>(frame.objects.size()), appearance);
            frame.objects.push_back(AnnotatedObject{t.id, truth, std::nullopt});

            if (sensor.unit(sensor.engine) < spec.p_detection) {
                const Vec2 z = truth + Vec2(sensor.gauss(spec.sigma_r), sensor.gauss(spec.sigma_r));
                pending.push_back(Pending{z, appearance});
            }
        }
        const int n_clutter = spec.clutter_count > 0.0 ? clutter(sensor.engine) : 0;
        for (int c = 0; c < n_clutter; ++c) {
            const Vec2 z(sensor.uniform(spec.area.xmin, spec.area.xmax), sensor.uniform(spec.area.ymin, spec.area.ymax));
            pending.push_back(Pending{z, EmbeddingVector(look.direction(dim))});
        }
        std::shuffle(pending.begin(), pending.end(), sensor.engine);
        for (std::size_t i = 0; i < pending.size(); ++i) {
            Detection d;
            d.frame = k;
            d.position = pending[i].position;
            d.confidence = 1.0;
            d.embedding_index = static_cast<int>(i);
            out.detections.push_back(d);
            out.detection_embeddings.insert(k, static_cast<int>(i), pending[i].embedding);
        }
    }
    return out;
}

void write_scenario(const Scenario& scenario, const fs::path& dir) {
    write_file_atomic(dir / "seqinfo.ini", format_sequence_info(scenario.info));

    std::string det;
    for (const auto& d : scenario.detections) {
        det += std::to_string(d.frame) + ",-1,-1,-1,-1,-1," + format_number(d.confidence) + "," +
               format_number(d.position.x()) + "," + format_number(d.position.y()) + ",0\n";
    }
    write_file_atomic(dir / "det" / "det.txt", det);
    write_file_atomic(dir / "det" / "embeddings.txt", format_embeddings(scenario.detection_embeddings));

    std::vector<ResultRow> gt;
    for (const auto& frame : scenario.ground_truth)
        for (const auto& o : frame.objects) gt.push_back(ResultRow{frame.frame, o.id, o.box, 1.0, o.position});
    write_file_atomic(dir / "gt" / "gt.txt", format_results(gt));
    write_file_atomic(dir / "gt" / "embeddings.txt", format_embeddings(scenario.gt_embeddings));
}

ScenarioSpec parse_scenario_spec(std::istream& in, const std::string& source) {
    ScenarioSpec spec;
    for (const auto& kv : parse_key_values(in, source)) {
        const auto where = source + ":" + std::to_string(kv.line) + ": ";
        auto number = [&]() {
            const auto v = parse_number(kv.value);
            if (!v || !std::isfinite(*v)) throw ConfigError(where + "'" + kv.value + "' is not a finite number");
            return *v;
        };
        auto integer = [&]() {
            const double v = number();
            if (v != std::floor(v)) throw ConfigError(where + "'" + kv.value + "' is not an integer");
            return static_cast<long long>(v);
        };
        const std::string& key = kv.key;
        if (key == "name") spec.name = kv.value;
        else if (key == "seed") spec.seed = static_cast<std::uint64_t>(integer());
        else if (key == "frames") spec.duration = static_cast<int>(integer());
        else if (key == "n_targets") spec.n_targets = static_cast<int>(integer());
        else if (key == "frame_rate") spec.frame_rate = number();
        else if (key == "sigma_q") spec.sigma_q = number();
        else if (key == "sigma_r") spec.sigma_r = number();
        else if (key == "P_D") spec.p_detection = number();
        else if (key == "clutter_count") spec.clutter_count = number();
        else if (key == "speed_min") spec.speed_min = number();
        else if (key == "speed_max") spec.speed_max = number();
        else if (key == "embedding_dim") spec.embedding_dim = static_cast<int>(integer());
        else if (key == "embedding_noise") spec.embedding_noise = number();
        else if (key == "embedding_correlation") spec.embedding_correlation = number();
        else if (key == "layout") {
            if (kv.value == "random") spec.layout = Layout::random;
            else if (kv.value == "crossing") spec.layout = Layout::crossing;
            else throw ConfigError(where + "layout must be random or crossing");
        } else if (key == "area") {
            std::vector<double> v;
            std::string_view rest = kv.value;
            while (true) {
                const auto comma = rest.find(',');
                const auto parsed = parse_number(rest.substr(0, comma));
                if (!parsed) throw ConfigError(where + "area must be xmin,ymin,xmax,ymax");
                v.push_back(*parsed);
                if (comma == std::string_view::npos) break;
                rest.remove_prefix(comma + 1);
            }
            if (v.size() != 4) throw ConfigError(where + "area must be xmin,ymin,xmax,ymax");
            spec.area = Area{v[0], v[1], v[2], v[3]};
        } else if (key.rfind("target.", 0) == 0) {
            // target.<n>.birth / target.<n>.death, n is 1-based
            const auto dot = key.find('.', 7);
            const auto n = dot == std::string::npos ? std::nullopt : parse_number(key.substr(7, dot - 7));
            const std::string field = dot == std::string::npos ? "" : key.substr(dot + 1);
            if (!n || *n < 1 || *n != std::floor(*n) || (field != "birth" && field != "death"))
                throw ConfigError(where + "expected target.<n>.birth or target.<n>.death");
            const auto index = static_cast<std::size_t>(*n) - 1;
            if (spec.windows.size() <= index) spec.windows.resize(index + 1);
            (field == "birth" ? spec.windows[index].birth : spec.windows[index].death) = static_cast<int>(integer());
        } else {
            throw ConfigError(where + "unknown scenario key '" + key + "'");
        }
    }
    spec.validate();
    return spec;
}

ScenarioSpec load_scenario_spec(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open scenario file " + path.string());
    try {
        return parse_scenario_spec(in, path.string());
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
}

ScenarioSpec crossing_benchmark_spec() {
    ScenarioSpec spec;
    spec.name = "crossing5";
    spec.seed = 7;
    spec.duration = 500;
    spec.area = Area{0.0, 0.0, 200.0, 200.0};
    spec.n_targets = 5;
    spec.layout = Layout::crossing;
    spec.frame_rate = 25.0;
    spec.sigma_q = 0.836;
    spec.sigma_r = 0.141;
    spec.p_detection = 0.99;
    spec.clutter_count = 15.0;
    return spec;
}

}  // namespace mtt
