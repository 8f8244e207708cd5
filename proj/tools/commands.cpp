#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "mtt/appearance.hpp"
#include "mtt/error.hpp"
#include "mtt/io.hpp"
#include "mtt/jipda.hpp"
#include "mtt/sim.hpp"
#include "mtt/simhist.hpp"

namespace mtt::cli {

namespace fs = std::filesystem;

int exit_code_for_current_exception(std::ostream& err) {
    try {
        throw;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const ParameterError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kParse;
    } catch (const CombinatorialBlowupError& e) {
        err << "combinatorial blowup: " << e.what() << "\n";
        return kBlowup;
    } catch (const EvaluationError& e) {
        err << "evaluation error: " << e.what() << "\n";
        return kEvaluation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

namespace {

bool is_sequence_dir(const fs::path& p) {
    return fs::is_regular_file(p / "det" / "det.txt") || fs::is_regular_file(p / "gt" / "gt.txt");
}

SequenceInfo sequence_info(const fs::path& dir) {
    SequenceInfo info;
    if (fs::is_regular_file(dir / "seqinfo.ini")) info = read_sequence_info(dir / "seqinfo.ini");
    if (info.name.empty()) info.name = fs::absolute(dir).lexically_normal().filename().string();
    if (info.name.empty()) info.name = fs::absolute(dir).lexically_normal().parent_path().filename().string();
    return info;
}

std::string kv(const std::string& key, const std::string& value) { return key + "=" + value + "\n"; }

std::string score_block(const MotScore& s) {
    return kv("mota", format_number(s.mota)) + kv("motp", format_number(s.motp)) + kv("fp", std::to_string(s.fp)) +
           kv("fn", std::to_string(s.fn)) + kv("ids", std::to_string(s.ids)) +
           kv("gt_total", std::to_string(s.gt_total));
}

/// Runs `job(i)` for i in [0, count) on up to `workers` threads.
template <class Job>
void parallel_for(std::size_t count, int workers, Job&& job) {
    const auto threads = std::clamp<std::size_t>(
        workers > 0 ? static_cast<std::size_t>(workers) : std::max(1u, std::thread::hardware_concurrency()), 1, count);
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) job(i);
        });
}

struct SequenceRun {
    std::string name;
    std::vector<ResultRow> rows;
    std::string report;
    std::exception_ptr error;
};

SequenceRun track_sequence(const fs::path& dir, const RunConfig& config, bool timing) {
    SequenceRun run;
    const SequenceInfo info = sequence_info(dir);
    run.name = info.name;

    const auto detections = read_detections(dir / "det" / "det.txt", config.jipda.conf_threshold);
    int frame_count = info.seq_length.value_or(0);
    for (const auto& d : detections) frame_count = std::max(frame_count, d.frame);
    std::vector<std::vector<Detection>> per_frame(static_cast<std::size_t>(frame_count));
    for (const auto& d : detections) per_frame[static_cast<std::size_t>(d.frame - 1)].push_back(d);

    const auto start = std::chrono::steady_clock::now();
    std::string stats;
    if (config.mode == TrackerMode::jipda) {
        JipdaTracker tracker(config.jipda_for(info), config.motion_for(info));
        for (int k = 1; k <= frame_count; ++k) {
            const auto& step = tracker.step(per_frame[static_cast<std::size_t>(k - 1)], k);
            for (const auto& t : step.tracks)
                if (t.status == TrackStatus::confirmed)
                    run.rows.push_back(ResultRow{k, t.id, t.box, t.existence, t.position()});
        }
        const double mean_events =
            frame_count > 0 ? static_cast<double>(tracker.total_event_count()) / frame_count : 0.0;
        stats = kv("tracks_started", std::to_string(tracker.tracks_started())) +
                kv("max_joint_events", std::to_string(tracker.max_event_count())) +
                kv("mean_joint_events", format_number(mean_events));
    } else {
        const auto table = read_embeddings(dir / "det" / "embeddings.txt");
        GnnTracker tracker(config.gnn);
        for (int k = 1; k <= frame_count; ++k) {
            const auto& dets = per_frame[static_cast<std::size_t>(k - 1)];
            std::vector<EmbeddingVector> embeddings;
            embeddings.reserve(dets.size());
            for (const auto& d : dets) {
                const auto* e = d.embedding_index ? table.find(k, *d.embedding_index) : nullptr;
                if (!e)
                    throw ParseError("no embedding for frame " + std::to_string(k) + " detection " +
                                         std::to_string(d.embedding_index.value_or(-1)),
                                     (dir / "det" / "embeddings.txt").string());
                embeddings.push_back(*e);
            }
            const auto& step = tracker.step(dets, embeddings);
            for (const auto& t : step.tracks)
                if (gnn_reportable(t)) run.rows.push_back(ResultRow{k, t.id, t.box, 1.0, t.position()});
        }
        stats = kv("tracks_started", std::to_string(tracker.tracks_started()));
    }
    const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    run.report = "[sequence " + run.name + "]\n" + kv("frames", std::to_string(frame_count)) +
                 kv("detections", std::to_string(detections.size())) +
                 kv("result_rows", std::to_string(run.rows.size())) + stats;
    if (fs::is_regular_file(dir / "gt" / "gt.txt")) {
        const auto gt_rows = read_annotation_rows(dir / "gt" / "gt.txt");
        int gt_frames = frame_count;
        for (const auto& r : gt_rows) gt_frames = std::max(gt_frames, r.frame);
        const auto gt = to_frame_sequence(gt_rows, gt_frames);
        const auto hyp = to_frame_sequence(run.rows, gt_frames);
        run.report += score_block(evaluate(gt, hyp, config.eval_params()));
    }
    if (timing && frame_count > 0) run.report += kv("wall_ms_per_frame", format_number(elapsed / frame_count));
    return run;
}

RunConfig resolve_config(const fs::path& path) { return load_config(path); }

}  // namespace

std::vector<fs::path> discover_sequences(const fs::path& root) {
    if (!fs::is_directory(root)) throw ConfigError("sequence directory does not exist: " + root.string());
    if (is_sequence_dir(root)) return {root};
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory() && is_sequence_dir(entry.path())) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw ConfigError("no sequences found under " + root.string());
    return out;
}

MotScore evaluate_sequence(const fs::path& seq_dir, const fs::path& results_file, const EvalParams& params) {
    const SequenceInfo info = sequence_info(seq_dir);
    const auto gt_rows = read_annotation_rows(seq_dir / "gt" / "gt.txt");
    int frame_count = info.seq_length.value_or(0);
    if (!info.seq_length)
        for (const auto& r : gt_rows) frame_count = std::max(frame_count, r.frame);
    const auto gt = to_frame_sequence(gt_rows, frame_count);
    if (!fs::is_regular_file(results_file)) throw EvaluationError("missing results file " + results_file.string());
    const auto hyp_rows = read_results(results_file);
    const auto hyp = to_frame_sequence(hyp_rows, frame_count);
    return evaluate(gt, hyp, params);
}

std::string format_score_table(const std::vector<SequenceScore>& scores) {
    std::string out = "sequence,mota,motp,fp,fn,ids,gt_total,hyp_total,matches\n";
    MotScore total;
    double motp_weighted = 0.0;
    auto row = [](const std::string& name, const MotScore& s) {
        return name + "," + format_number(s.mota) + "," + format_number(s.motp) + "," + std::to_string(s.fp) + "," +
               std::to_string(s.fn) + "," + std::to_string(s.ids) + "," + std::to_string(s.gt_total) + "," +
               std::to_string(s.hyp_total) + "," + std::to_string(s.matches) + "\n";
    };
    for (const auto& s : scores) {
        out += row(s.name, s.score);
        total.fp += s.score.fp;
        total.fn += s.score.fn;
        total.ids += s.score.ids;
        total.gt_total += s.score.gt_total;
        total.hyp_total += s.score.hyp_total;
        total.matches += s.score.matches;
        motp_weighted += s.score.motp * static_cast<double>(s.score.matches);
    }
    if (total.gt_total > 0)
        total.mota = 1.0 - static_cast<double>(total.fp + total.fn + total.ids) / static_cast<double>(total.gt_total);
    if (total.matches > 0) total.motp = motp_weighted / static_cast<double>(total.matches);
    out += row("TOTAL", total);
    return out;
}

int cmd_track(const TrackOptions& options, std::ostream& out) {
    RunConfig config = resolve_config(options.config);
    if (options.mode) config.set("mode", *options.mode);
    if (options.seq_dir) config.set("seq_dir", options.seq_dir->string());
    if (options.out) config.set("out", options.out->string());
    config.validate();
    if (!config.seq_dir) throw ConfigError("no sequence directory: pass --seq-dir or set seq_dir");
    if (!config.out_dir) throw ConfigError("no output directory: pass --out or set out");

    const std::string dump = effective_config_dump(config);
    if (options.emit_effective_config) {
        if (options.emit_effective_config->string() == "-")
            out << dump;
        else
            write_file_atomic(*options.emit_effective_config, dump);
    }
    write_file_atomic(*config.out_dir / "effective_config.txt", dump);

    const auto sequences = discover_sequences(*config.seq_dir);
    std::vector<SequenceRun> runs(sequences.size());
    parallel_for(sequences.size(), options.workers, [&](std::size_t i) {
        try {
            runs[i] = track_sequence(sequences[i], config, options.timing);
        } catch (...) {
            runs[i].error = std::current_exception();
        }
    });

    out << "[run]\n" << kv("command", "track") << kv("mode", std::string(to_string(config.mode)))
        << kv("config_hash", fnv1a_hex(dump)) << kv("sequences", std::to_string(sequences.size()));
    for (const auto& w : config.warnings) out << kv("warning", w);
    for (const auto& run : runs) {
        if (run.error) std::rethrow_exception(run.error);
        write_results(*config.out_dir / (run.name + ".txt"), run.rows);
        out << run.report;
    }
    return kOk;
}

int cmd_eval(const EvalOptions& options, std::ostream& out) {
    RunConfig config = resolve_config(options.config);
    if (options.mode) config.set("metric.mode", *options.mode);
    if (options.seq_dir) config.set("seq_dir", options.seq_dir->string());
    config.validate();
    if (!config.seq_dir) throw ConfigError("no ground-truth directory: pass --seq-dir or set seq_dir");

    const auto sequences = discover_sequences(*config.seq_dir);
    const bool results_is_dir = fs::is_directory(options.results);
    if (!results_is_dir && sequences.size() != 1)
        throw ConfigError("--results must be a directory when evaluating several sequences");

    std::vector<SequenceScore> scores;
    for (const auto& seq : sequences) {
        if (!fs::is_regular_file(seq / "gt" / "gt.txt")) continue;
        const std::string name = sequence_info(seq).name;
        const fs::path results = results_is_dir ? options.results / (name + ".txt") : options.results;
        scores.push_back(SequenceScore{name, evaluate_sequence(seq, results, config.eval_params())});
    }
    if (scores.empty()) throw EvaluationError("no sequence with ground truth under " + config.seq_dir->string());
    const std::string table = format_score_table(scores);
    if (options.out) write_file_atomic(*options.out, table);
    out << table;
    return kOk;
}

int cmd_simulate(const SimulateOptions& options, std::ostream& out) {
    ScenarioSpec spec = options.config.empty() ? ScenarioSpec{} : load_scenario_spec(options.config);
    if (options.seed) spec.seed = *options.seed;
    if (options.out.empty()) throw ConfigError("no output directory: pass --out");
    const Scenario scenario = generate(spec);
    const fs::path dir = options.out / spec.name;
    write_scenario(scenario, dir);

    std::size_t gt_objects = 0;
    for (const auto& f : scenario.ground_truth) gt_objects += f.objects.size();
    out << "[simulate]\n" << kv("name", spec.name) << kv("seed", std::to_string(spec.seed))
        << kv("frames", std::to_string(spec.duration)) << kv("targets", std::to_string(spec.n_targets))
        << kv("gt_objects", std::to_string(gt_objects))
        << kv("detections", std::to_string(scenario.detections.size()))
        << kv("surveillance_area", format_number(spec.area.volume()));
    return kOk;
}

int cmd_simhist(const SimhistOptions& options, std::ostream& out) {
    if (!options.seq_dir) throw ConfigError("no sequence directory: pass --seq-dir");
    const fs::path& dir = *options.seq_dir;
    const auto rows = read_results(dir / "gt" / "gt.txt");
    int frame_count = 0;
    for (const auto& r : rows) frame_count = std::max(frame_count, r.frame);
    const auto gt = to_frame_sequence(rows, frame_count);
    const auto embeddings = read_embeddings(dir / "gt" / "embeddings.txt");

    SimilarityStudyParams params;
    params.lags = options.lags;
    params.bins = options.bins;
    params.smoothed = options.smoothed;
    const auto study = similarity_study(gt, embeddings, params);
    const std::string table = format_similarity_table(study);
    if (options.out) {
        write_file_atomic(*options.out, table);
        for (std::size_t l = 0; l < study.lags.size(); ++l) {
            const auto& s = study.same_identity[l];
            const std::string key = "lag" + std::to_string(study.lags[l]);
            out << kv(key + "_pairs", std::to_string(s.values.size())) << kv(key + "_mean", format_number(s.mean()))
                << kv(key + "_q25", format_number(s.quantile(0.25)))
                << kv(key + "_q75", format_number(s.quantile(0.75)));
        }
        const auto& c = study.cross_identity;
        out << kv("cross_pairs", std::to_string(c.values.size())) << kv("cross_mean", format_number(c.mean()))
            << kv("cross_q25", format_number(c.quantile(0.25))) << kv("cross_q75", format_number(c.quantile(0.75)));
    } else {
        out << table;
    }
    return kOk;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-target tracking: JIPDA and appearance GNN trackers, simulator and CLEAR-MOT evaluation"};
    app.require_subcommand(1);

    TrackOptions track;
    std::string track_config;
    auto* track_cmd = app.add_subcommand("track", "Run a tracker over every sequence in --seq-dir");
    track_cmd->add_option("--config", track_config, "key=value run configuration");
    track_cmd->add_option("--mode", track.mode, "jipda or gnn");
    track_cmd->add_option("--seq-dir", track.seq_dir, "sequence directory or directory of sequences");
    track_cmd->add_option("--out", track.out, "output directory for result files");
    track_cmd->add_option("--emit-effective-config", track.emit_effective_config,
                          "also write the effective configuration here ('-' for stdout)");
    track_cmd->add_flag("--timing", track.timing, "report wall-clock time per frame (not reproducible)");
    track_cmd->add_option("--workers", track.workers, "worker threads, 0 = one per core");

    EvalOptions eval;
    std::string eval_config;
    auto* eval_cmd = app.add_subcommand("eval", "Score result files against ground truth");
    eval_cmd->add_option("--config", eval_config, "key=value run configuration");
    eval_cmd->add_option("--mode", eval.mode, "point or box");
    eval_cmd->add_option("--seq-dir", eval.seq_dir, "ground-truth sequence directory or directory of sequences");
    eval_cmd->add_option("--results", eval.results, "results file or directory of <sequence>.txt")->required();
    eval_cmd->add_option("--out", eval.out, "also write the score table here");

    SimulateOptions sim;
    std::string sim_config;
    std::optional<std::uint64_t> sim_seed;
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic scenario directory");
    sim_cmd->add_option("--config", sim_config, "key=value scenario description");
    sim_cmd->add_option("--seed", sim_seed, "random seed, overrides the scenario file");
    sim_cmd->add_option("--out", sim.out, "parent directory of the generated sequence")->required();

    SimhistOptions hist;
    std::string lags_text = "1,3,5";
    auto* hist_cmd = app.add_subcommand("simhist", "Histogram same-identity and cross-identity similarities");
    hist_cmd->add_option("--seq-dir", hist.seq_dir, "sequence with gt/gt.txt and gt/embeddings.txt")->required();
    hist_cmd->add_option("--lags", lags_text, "comma-separated frame lags");
    hist_cmd->add_option("--bins", hist.bins, "histogram bins over [0, 1]");
    hist_cmd->add_flag("--smoothed", hist.smoothed, "compare against the smoothed identity template");
    hist_cmd->add_option("--out", hist.out, "write the table here and a summary to stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*track_cmd) {
            track.config = track_config;
            return cmd_track(track, out);
        }
        if (*eval_cmd) {
            eval.config = eval_config;
            return cmd_eval(eval, out);
        }
        if (*sim_cmd) {
            sim.config = sim_config;
            sim.seed = sim_seed;
            return cmd_simulate(sim, out);
        }
        if (*hist_cmd) {
            hist.lags.clear();
            std::string_view rest = lags_text;
            while (!rest.empty()) {
                const auto comma = rest.find(',');
                const auto v = parse_number(rest.substr(0, comma));
                if (!v || *v != static_cast<int>(*v)) throw ConfigError("--lags must be comma-separated integers");
                hist.lags.push_back(static_cast<int>(*v));
                if (comma == std::string_view::npos) break;
                rest.remove_prefix(comma + 1);
            }
            return cmd_simhist(hist, out);
        }
    } catch (...) {
        return exit_code_for_current_exception(err);
    }
    return kUsage;
}

}  // namespace mtt::cli
