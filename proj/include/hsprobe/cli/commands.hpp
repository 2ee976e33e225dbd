#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "hsprobe/model/scorer.hpp"
#include "hsprobe/synthgen/synthgen.hpp"

namespace hsprobe::cli {

namespace fs = std::filesystem;

// Writes data.rxhs + data.jsonl, or train.* and test.* when holdout > 0,
// plus a synth.ini snapshot of the generator settings.
struct SynthOptions {
    SynthSpec spec;
    double holdout = 0.0;  // fraction of subjects held out
    fs::path out_dir;
};
void cmd_synth(const SynthOptions& opts, std::ostream& out);

// Trains per a RunConfig into out_dir: config.ini, metrics.csv, folds.csv,
// fold_<i>.manifest/.bin and model.manifest/.bin. The directory is locked
// for the duration; a second concurrent run fails with kLocked.
struct TrainOptions {
    fs::path config;
    fs::path out_dir;
};
void cmd_train(const TrainOptions& opts, std::ostream& out);

struct ScoreOptions {
    fs::path weights;  // manifest; empty with entropy_baseline
    fs::path hidden;
    fs::path out;
    bool entropy_baseline = false;
    std::optional<fs::path> attention_csv;  // finding_id,token,weight
    std::optional<fs::path> heatmap_svg;
    std::size_t heatmap_rows = 20;
};
void cmd_score(const ScoreOptions& opts, std::ostream& out);

// Prints the overall metric table; with out_dir also writes metrics.csv,
// categories.csv, keywords.csv, curve.csv, curve.svg and, with compare,
// comparison.csv (per-category paired AUGRC difference).
struct EvalOptions {
    fs::path scores;
    fs::path labels;
    std::optional<fs::path> compare;
    std::optional<fs::path> out_dir;
    std::optional<fs::path> keywords;  // defaults to the built-in list
    std::size_t bootstrap = 1000;
    double level = 0.95;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};
void cmd_eval(const EvalOptions& opts, std::ostream& out);

struct EnsembleOptions {
    fs::path a;
    fs::path b;
    double weight_a = 0.8;
    double weight_b = 0.2;
    fs::path out;
};
void cmd_ensemble(const EnsembleOptions& opts, std::ostream& out);

struct GradcheckOptions {
    ScorerConfig model;  // defaults to the tiny configuration
    std::size_t tokens = 5;
    std::uint64_t seed = 0;
    double tolerance = 1e-4;
};
// Returns true when the maximum relative error is below the tolerance.
bool cmd_gradcheck(const GradcheckOptions& opts, std::ostream& out);

struct SegmentOptions {
    fs::path report;
    std::string study_id;
    std::string subject_id;
    fs::path out;
    std::optional<fs::path> rules;  // category rules; built-in by default
};
void cmd_segment(const SegmentOptions& opts, std::ostream& out);

// Labels every finding against its study's reference report. References are
// JSONL lines {"study_id": ..., "report": ...}. Findings that cannot be
// labelled are listed on the error stream and left out of the output, after
// which kLabelingFailure is thrown.
struct LabelOptions {
    fs::path findings;
    fs::path references;
    std::string client = "replay";  // replay | live
    std::optional<fs::path> fixture;
    std::optional<fs::path> record;
    bool severity = false;
    fs::path out;
};
void cmd_label(const LabelOptions& opts, std::ostream& out, std::ostream& err);

// Parses arguments, runs one subcommand and returns the process exit status.
// Failures print one line "error code=<name> exit=<n> message=\"...\"" to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hsprobe::cli
