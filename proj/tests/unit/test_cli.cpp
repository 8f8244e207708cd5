#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "commands.hpp"
#include "helpers.hpp"
#include "mtt/error.hpp"
#include "mtt/io.hpp"
#include "mtt/sim.hpp"

using namespace mtt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "mtt");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::map<std::string, std::string> key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

fs::path fixture(const std::string& name) { return fs::path(MTT_TEST_DATA_DIR) / "metrics" / name; }

// Small simulated sequence written to <dir>/<name>.
fs::path simulated(const testing::TempDir& dir, const std::string& name, int frames = 40) {
    ScenarioSpec spec;
    spec.name = name;
    spec.duration = frames;
    spec.n_targets = 3;
    spec.embedding_dim = 16;
    write_scenario(generate(spec), dir / name);
    return dir / name;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors") {
    CHECK(run_cli({}).code == cli::kUsage);
    CHECK(run_cli({"frobnicate"}).code == cli::kUsage);
    CHECK(run_cli({"eval", "--seq-dir", "x"}).code == cli::kUsage);  // --results is required
    CHECK(run_cli({"--help"}).code == cli::kOk);
}

TEST_CASE("eval reproduces the fixture scores") {
    for (const char* name : {"perfect", "mota_0_6", "sticky"}) {
        CAPTURE(name);
        const auto dir = fixture(name);
        const auto r = run_cli({"eval", "--seq-dir", dir.string(), "--results", (dir / "results.txt").string()});
        REQUIRE(r.code == cli::kOk);
        std::istringstream table(r.out);
        std::string header, row;
        std::getline(table, header);
        std::getline(table, row);
        CHECK(header == "sequence,mota,motp,fp,fn,ids,gt_total,hyp_total,matches");

        std::vector<std::string> cells;
        std::istringstream cs(row);
        for (std::string c; std::getline(cs, c, ',');) cells.push_back(c);
        REQUIRE(cells.size() == 9);
        CHECK(cells[0] == name);

        const auto expected = key_values(read_file(dir / "expected.txt"));
        CHECK(*parse_number(cells[1]) == doctest::Approx(*parse_number(expected.at("mota"))).epsilon(1e-12));
        CHECK(*parse_number(cells[2]) == doctest::Approx(*parse_number(expected.at("motp"))).epsilon(1e-12));
        CHECK(cells[3] == expected.at("fp"));
        CHECK(cells[4] == expected.at("fn"));
        CHECK(cells[5] == expected.at("ids"));
        CHECK(cells[6] == expected.at("gt_total"));
        CHECK(cells[8] == expected.at("matches"));
    }
}

TEST_CASE("eval writes the table with --out") {
    testing::TempDir tmp("cli");
    const auto dir = fixture("sticky");
    const auto r = run_cli({"eval", "--seq-dir", dir.string(), "--results", (dir / "results.txt").string(), "--out",
                            (tmp / "scores.csv").string()});
    REQUIRE(r.code == cli::kOk);
    CHECK(read_file(tmp / "scores.csv") == r.out);
}

TEST_CASE("results beyond the sequence are an evaluation error") {
    testing::TempDir tmp("cli");
    std::ofstream(tmp / "late.txt") << "99,1,-1,-1,-1,-1,1,0,0,0\n";
    const auto r = run_cli({"eval", "--seq-dir", fixture("sticky").string(), "--results", (tmp / "late.txt").string()});
    CHECK(r.code == cli::kEvaluation);
    CHECK(r.err.find("evaluation error") != std::string::npos);
}

TEST_CASE("track writes results, the effective config and a report") {
    testing::TempDir tmp("cli");
    const auto seq = simulated(tmp, "walk");
    const auto out = tmp / "out";
    const auto r = run_cli({"track", "--seq-dir", seq.string(), "--out", out.string(), "--emit-effective-config", "-"});
    REQUIRE(r.code == cli::kOk);
    CHECK(fs::is_regular_file(out / "effective_config.txt"));
    CHECK(fs::is_regular_file(out / "walk.txt"));
    CHECK(r.out.find(read_file(out / "effective_config.txt")) == 0);
    CHECK(r.out.find("[run]\ncommand=track\nmode=jipda\n") != std::string::npos);
    CHECK(r.out.find("[sequence walk]\nframes=40\n") != std::string::npos);
    CHECK(r.out.find("wall_ms_per_frame") == std::string::npos);
    const auto kv = key_values(r.out);
    CHECK(kv.at("config_hash") == fnv1a_hex(read_file(out / "effective_config.txt")));
    CHECK(kv.count("mota") == 1);
    CHECK(kv.count("max_joint_events") == 1);
    CHECK_NOTHROW(read_results(out / "walk.txt"));

    const auto again = run_cli({"track", "--seq-dir", seq.string(), "--out", (tmp / "out2").string(),
                                "--emit-effective-config", "-"});
    CHECK(read_file(out / "walk.txt") == read_file(tmp / "out2" / "walk.txt"));

    const auto timed = run_cli({"track", "--seq-dir", seq.string(), "--out", out.string(), "--timing"});
    CHECK(timed.out.find("wall_ms_per_frame=") != std::string::npos);
}

TEST_CASE("track over several sequences in either mode") {
    testing::TempDir tmp("cli");
    simulated(tmp, "b");
    simulated(tmp, "a");
    for (const char* mode : {"jipda", "gnn"}) {
        CAPTURE(mode);
        const auto out = tmp / (std::string("out-") + mode);
        const auto r = run_cli({"track", "--mode", mode, "--seq-dir", tmp.path().string(), "--out", out.string(),
                                "--workers", "2"});
        REQUIRE(r.code == cli::kOk);
        CHECK(r.out.find("sequences=2") != std::string::npos);
        CHECK(r.out.find("[sequence a]") < r.out.find("[sequence b]"));
        CHECK(fs::is_regular_file(out / "a.txt"));
        CHECK(fs::is_regular_file(out / "b.txt"));
    }
}

TEST_CASE("track errors map to exit codes") {
    testing::TempDir tmp("cli");
    CHECK(run_cli({"track", "--out", (tmp / "o").string()}).code == cli::kConfig);
    CHECK(run_cli({"track", "--seq-dir", (tmp / "nope").string(), "--out", (tmp / "o").string()}).code ==
          cli::kConfig);
    CHECK(run_cli({"track", "--seq-dir", tmp.path().string(), "--out", (tmp / "o").string(), "--mode", "kalman"})
              .code == cli::kConfig);

    fs::create_directories(tmp / "bad" / "det");
    std::ofstream(tmp / "bad" / "det" / "det.txt") << "1,-1,1,2,3\n";
    const auto r = run_cli({"track", "--seq-dir", (tmp / "bad").string(), "--out", (tmp / "o").string()});
    CHECK(r.code == cli::kParse);

    const auto seq = simulated(tmp, "crowd", 5);
    std::ofstream(tmp / "tight.ini") << "event_cap=1\n";
    const auto blow = run_cli({"track", "--config", (tmp / "tight.ini").string(), "--seq-dir", seq.string(), "--out",
                               (tmp / "o").string()});
    CHECK(blow.code == cli::kBlowup);

    std::ofstream(tmp / "crowd" / "det" / "embeddings.txt") << "";
    const auto gnn = run_cli({"track", "--mode", "gnn", "--seq-dir", seq.string(), "--out", (tmp / "o").string()});
    CHECK(gnn.code == cli::kParse);
}

TEST_CASE("sequence discovery") {
    testing::TempDir tmp("cli");
    CHECK_THROWS_AS(cli::discover_sequences(tmp.path()), ConfigError);
    CHECK_THROWS_AS(cli::discover_sequences(tmp / "missing"), ConfigError);
    simulated(tmp, "z", 3);
    simulated(tmp, "m", 3);
    fs::create_directories(tmp / "empty");
    const auto found = cli::discover_sequences(tmp.path());
    REQUIRE(found.size() == 2);
    CHECK(found[0].filename() == "m");
    CHECK(found[1].filename() == "z");
    CHECK(cli::discover_sequences(tmp / "m") == std::vector<fs::path>{tmp / "m"});
}

TEST_CASE("score table totals") {
    MotScore a;
    a.fp = 1;
    a.fn = 2;
    a.ids = 1;
    a.gt_total = 10;
    a.hyp_total = 9;
    a.matches = 8;
    a.mota = 0.6;
    a.motp = 0.5;
    MotScore b;
    b.gt_total = 10;
    b.hyp_total = 2;
    b.matches = 2;
    b.fn = 8;
    b.mota = 0.2;
    b.motp = 1.0;
    const auto table = cli::format_score_table({{"a", a}, {"b", b}});
    CHECK(table.find("\nTOTAL,0.4,0.6,1,10,1,20,11,10\n") != std::string::npos);
}

TEST_CASE("simulate and simhist") {
    testing::TempDir tmp("cli");
    std::ofstream(tmp / "scene.ini") << "name=scene\nframes=30\nn_targets=2\nembedding_dim=8\n";
    const auto r = run_cli({"simulate", "--config", (tmp / "scene.ini").string(), "--seed", "99", "--out",
                            tmp.path().string()});
    REQUIRE(r.code == cli::kOk);
    const auto kv = key_values(r.out);
    CHECK(kv.at("seed") == "99");
    CHECK(kv.at("gt_objects") == "60");
    CHECK(fs::is_regular_file(tmp / "scene" / "gt" / "embeddings.txt"));

    const auto seq = (tmp / "scene").string();
    const auto table = run_cli({"simhist", "--seq-dir", seq, "--lags", "1,2", "--bins", "10"});
    REQUIRE(table.code == cli::kOk);
    CHECK(table.out.rfind("bin_lo,bin_hi,lag1,lag2,cross\n", 0) == 0);

    const auto summary = run_cli({"simhist", "--seq-dir", seq, "--out", (tmp / "hist.csv").string()});
    REQUIRE(summary.code == cli::kOk);
    const auto s = key_values(summary.out);
    CHECK(s.at("lag1_pairs") == "58");
    CHECK(s.at("cross_pairs") == "30");
    CHECK(s.count("lag5_q75") == 1);
    CHECK(read_file(tmp / "hist.csv").rfind("bin_lo,bin_hi,lag1,lag3,lag5,cross\n", 0) == 0);

    CHECK(run_cli({"simhist", "--seq-dir", seq, "--lags", "0"}).code == cli::kConfig);
    CHECK(run_cli({"simulate", "--config", (tmp / "missing.ini").string(), "--out", tmp.path().string()}).code ==
          cli::kConfig);
}

}
