#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mtt/config.hpp"
#include "mtt/metrics.hpp"

namespace mtt::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kConfig = 3,
    kParse = 4,
    kBlowup = 5,
    kEvaluation = 6,
};

/// Maps the exception currently being handled to an exit code and writes
/// its message to `err`.
int exit_code_for_current_exception(std::ostream& err);

struct TrackOptions {
    std::filesystem::path config;
    std::optional<std::string> mode;
    std::optional<std::filesystem::path> seq_dir;
    std::optional<std::filesystem::path> out;
    std::optional<std::filesystem::path> emit_effective_config;
    bool timing = false;
    int workers = 0;  ///< 0 = hardware concurrency
};

struct EvalOptions {
    std::filesystem::path config;
    std::optional<std::string> mode;  ///< point | box
    std::optional<std::filesystem::path> seq_dir;
    std::filesystem::path results;
    std::optional<std::filesystem::path> out;
};

struct SimulateOptions {
    std::filesystem::path config;  ///< scenario description, empty for defaults
    std::optional<std::uint64_t> seed;
    std::filesystem::path out;
};

struct SimhistOptions {
    std::optional<std::filesystem::path> seq_dir;
    std::vector<int> lags{1, 3, 5};
    int bins = 50;
    bool smoothed = false;
    std::optional<std::filesystem::path> out;
};

/// Sequence directories under `root`: `root` itself when it holds
/// det/det.txt or gt/gt.txt, else its subdirectories that do, by name.
std::vector<std::filesystem::path> discover_sequences(const std::filesystem::path& root);

struct SequenceScore {
    std::string name;
    MotScore score;
};

/// Scores one results file against a sequence's ground truth.
MotScore evaluate_sequence(const std::filesystem::path& seq_dir, const std::filesystem::path& results_file,
                           const EvalParams& params);

/// Delimiter-separated score table with a TOTAL row.
std::string format_score_table(const std::vector<SequenceScore>& scores);

int cmd_track(const TrackOptions& options, std::ostream& out);
int cmd_eval(const EvalOptions& options, std::ostream& out);
int cmd_simulate(const SimulateOptions& options, std::ostream& out);
int cmd_simhist(const SimhistOptions& options, std::ostream& out);

/// Parses argv and dispatches; returns the exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace mtt::cli
