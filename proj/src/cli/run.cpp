#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <boost/algorithm/string/trim.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "hsprobe/cli/commands.hpp"
#include "hsprobe/error.hpp"
#include "hsprobe/io/binary.hpp"
#include "hsprobe/model/scorer_check.hpp"

namespace hsprobe::cli {

namespace {

constexpr int kUsageExit = 2;

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out += c;
        }
    }
    return out;
}

void error_line(std::ostream& err, std::string_view code, int exit, const std::string& message) {
    err << fmt::format("error code={} exit={} message=\"{}\"\n", code, exit, escape(message));
}

// Fills every option named in a key=value snapshot that was not given on the
// command line.
void apply_snapshot(CLI::App& cmd, const std::string& path) {
    std::istringstream in(io::read_text_file(path));
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        const std::string where = fmt::format("{}:{}", path, line_no);
        require(eq != std::string::npos, ErrorCode::kConfig, where + ": expected key=value");
        const std::string key = boost::algorithm::trim_copy(line.substr(0, eq));
        const std::string value = boost::algorithm::trim_copy(line.substr(eq + 1));
        CLI::Option* opt = key == "config" ? nullptr : cmd.get_option_no_throw("--" + key);
        require(opt != nullptr, ErrorCode::kConfig, where + ": unknown key '" + key + "'");
        if (opt->count() > 0) {
            continue;
        }
        try {
            opt->add_result(value);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            fail(ErrorCode::kConfig, where + ": " + e.what());
        }
    }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    if (!spdlog::get("hsprobe")) {
        auto logger = spdlog::stderr_logger_mt("hsprobe");
        logger->set_pattern("[%l] %v");
        spdlog::set_default_logger(logger);
    }

    CLI::App app{"Hidden-state hallucination scorer: data prep, training, scoring and evaluation"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

    SynthOptions synth;
    std::string mode = "A";
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic hidden-state dataset");
    std::string synth_config;
    synth_cmd->add_option("--config", synth_config, "Read options from a synth.ini snapshot")
        ->check(CLI::ExistingFile);
    synth_cmd->add_option("--mode", mode, "A (token shift) or B (marker order)")->check(CLI::IsMember({"A", "B"}));
    synth_cmd->add_option("--subjects", synth.spec.n_subjects);
    synth_cmd->add_option("--per-subject", synth.spec.findings_per_subject);
    synth_cmd->add_option("--tmin", synth.spec.t_min);
    synth_cmd->add_option("--tmax", synth.spec.t_max);
    synth_cmd->add_option("--dim", synth.spec.dim);
    synth_cmd->add_option("--beta", synth.spec.signal_strength, "Signal strength");
    synth_cmd->add_option("--prevalence", synth.spec.prevalence);
    synth_cmd->add_option("--gamma", synth.spec.entropy_signal, "Entropy shift of hallucinated findings");
    synth_cmd->add_option("--layer", synth.spec.layer_index);
    synth_cmd->add_option("--seed", synth.spec.seed);
    synth_cmd->add_option("--holdout", synth.holdout, "Fraction of subjects written to test.*");
    synth_cmd->add_option("--out", synth.out_dir)->required();

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Cross-validated training from a run config");
    train_cmd->add_option("--config", train.config)->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--out", train.out_dir, "Run directory")->required();

    ScoreOptions score;
    std::string attention;
    std::string heatmap;
    auto* score_cmd = app.add_subcommand("score", "Score findings with trained weights");
    auto* weights_opt = score_cmd->add_option("--weights", score.weights, "Weight manifest");
    auto* entropy_opt = score_cmd->add_flag("--entropy-baseline", score.entropy_baseline,
                                            "Score by normalized mean token entropy instead");
    weights_opt->excludes(entropy_opt);
    score_cmd->add_option("--hidden", score.hidden)->required();
    score_cmd->add_option("--out", score.out)->required();
    score_cmd->add_option("--attention", attention, "Per-token attention CSV");
    score_cmd->add_option("--heatmap", heatmap, "Attention heatmap SVG");
    score_cmd->add_option("--heatmap-rows", score.heatmap_rows);

    EvalOptions eval;
    std::string compare;
    std::string eval_dir;
    std::string keywords;
    auto* eval_cmd = app.add_subcommand("eval", "Metric tables with bootstrap confidence intervals");
    eval_cmd->add_option("--scores", eval.scores)->required();
    eval_cmd->add_option("--labels", eval.labels, "Labelled findings JSONL")->required();
    eval_cmd->add_option("--compare", compare, "Second score file for paired AUGRC differences");
    eval_cmd->add_option("--out-dir", eval_dir);
    eval_cmd->add_option("--keywords", keywords, "Keyword list, one per line");
    eval_cmd->add_option("--bootstrap", eval.bootstrap, "Bootstrap resamples");
    eval_cmd->add_option("--level", eval.level, "Confidence level");
    eval_cmd->add_option("--seed", eval.seed);
    eval_cmd->add_option("--threads", eval.threads);

    EnsembleOptions ens;
    auto* ens_cmd = app.add_subcommand("ensemble", "Weighted combination of two score files");
    ens_cmd->add_option("--a", ens.a)->required();
    ens_cmd->add_option("--b", ens.b)->required();
    ens_cmd->add_option("--wa", ens.weight_a);
    ens_cmd->add_option("--wb", ens.weight_b);
    ens_cmd->add_option("--out", ens.out)->required();

    GradcheckOptions grad;
    grad.model = tiny_scorer_config();
    std::string variant = "self_attention";
    auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of the scorer gradients");
    grad_cmd->add_option("--dim", grad.model.input_dim);
    grad_cmd->add_option("--latent", grad.model.latent_dim);
    grad_cmd->add_option("--heads", grad.model.num_heads);
    grad_cmd->add_option("--head-dim", grad.model.head_dim);
    grad_cmd->add_option("--variant", variant);
    grad_cmd->add_option("--tokens", grad.tokens);
    grad_cmd->add_option("--seed", grad.seed);
    grad_cmd->add_option("--tolerance", grad.tolerance);

    SegmentOptions seg;
    std::string rules;
    auto* seg_cmd = app.add_subcommand("segment", "Split a report into findings");
    seg_cmd->add_option("--report", seg.report, "Report text file")->required();
    seg_cmd->add_option("--study", seg.study_id)->required();
    seg_cmd->add_option("--subject", seg.subject_id)->required();
    seg_cmd->add_option("--rules", rules, "Category rules file");
    seg_cmd->add_option("--out", seg.out)->required();

    LabelOptions label;
    std::string fixture;
    std::string record;
    auto* label_cmd = app.add_subcommand("label", "Entailment (and severity) labels for findings");
    label_cmd->add_option("--findings", label.findings)->required();
    label_cmd->add_option("--references", label.references, "JSONL of {study_id, report}")->required();
    label_cmd->add_option("--client", label.client)->check(CLI::IsMember({"replay", "live"}));
    label_cmd->add_option("--fixture", fixture, "Recorded exchanges for replay");
    label_cmd->add_option("--record", record, "Append exchanges to this fixture");
    label_cmd->add_flag("--severity", label.severity, "Also classify severity tiers");
    label_cmd->add_option("--out", label.out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            if (const CLI::App* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
                out << sub->help();
            }
            return 0;
        }
        error_line(err, "usage", kUsageExit, e.what());
        return kUsageExit;
    }
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (synth_cmd->parsed()) {
            if (!synth_config.empty()) {
                apply_snapshot(*synth_cmd, synth_config);
            }
            synth.spec.mode = parse_synth_mode(mode);
            cmd_synth(synth, out);
        } else if (train_cmd->parsed()) {
            cmd_train(train, out);
        } else if (score_cmd->parsed()) {
            require(score.entropy_baseline || !score.weights.empty(), ErrorCode::kInvalidArgument,
                    "score needs --weights or --entropy-baseline");
            if (!attention.empty()) {
                score.attention_csv = attention;
            }
            if (!heatmap.empty()) {
                score.heatmap_svg = heatmap;
            }
            cmd_score(score, out);
        } else if (eval_cmd->parsed()) {
            if (!compare.empty()) {
                eval.compare = compare;
            }
            if (!eval_dir.empty()) {
                eval.out_dir = eval_dir;
            }
            if (!keywords.empty()) {
                eval.keywords = keywords;
            }
            cmd_eval(eval, out);
        } else if (ens_cmd->parsed()) {
            cmd_ensemble(ens, out);
        } else if (grad_cmd->parsed()) {
            grad.model.variant = parse_variant(variant);
            return cmd_gradcheck(grad, out) ? 0 : 1;
        } else if (seg_cmd->parsed()) {
            if (!rules.empty()) {
                seg.rules = rules;
            }
            cmd_segment(seg, out);
        } else if (label_cmd->parsed()) {
            if (!fixture.empty()) {
                label.fixture = fixture;
            }
            if (!record.empty()) {
                label.record = record;
            }
            cmd_label(label, out, err);
        }
    } catch (const Error& e) {
        const int exit = exit_code_for(e.code());
        error_line(err, error_code_name(e.code()), exit, e.what());
        return exit;
    } catch (const std::exception& e) {
        error_line(err, "internal", 1, e.what());
        return 1;
    }
    return 0;
}

}  // namespace hsprobe::cli
