#include "hsprobe/cli/commands.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <memory>
#include <cstring>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hsprobe/cli/run_config.hpp"
#include "hsprobe/error.hpp"
#include "hsprobe/findings/category.hpp"
#include "hsprobe/findings/client.hpp"
#include "hsprobe/findings/labeling.hpp"
#include "hsprobe/findings/records.hpp"
#include "hsprobe/findings/segment.hpp"
#include "hsprobe/io/binary.hpp"
#include "hsprobe/io/rxhs.hpp"
#include "hsprobe/io/scores.hpp"
#include "hsprobe/metrics/metrics.hpp"
#include "hsprobe/metrics/report.hpp"
#include "hsprobe/metrics/svg.hpp"
#include "hsprobe/model/scorer_check.hpp"
#include "hsprobe/model/weights_io.hpp"
#include "hsprobe/training/split.hpp"
#include "hsprobe/training/trainer.hpp"

namespace hsprobe::cli {

namespace {

// Exclusive ownership of a run directory, released on scope exit.
class RunLock {
public:
    explicit RunLock(fs::path path) : path_(std::move(path)) {
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0) {
            if (errno == EEXIST) {
                fail(ErrorCode::kLocked, "run directory is locked by another process (" + path_.string() + ")");
            }
            fail(ErrorCode::kIo, "cannot create lock " + path_.string() + ": " + std::strerror(errno));
        }
        const std::string pid = std::to_string(::getpid()) + "\n";
        [[maybe_unused]] const auto written = ::write(fd_, pid.data(), pid.size());
    }
    ~RunLock() {
        ::close(fd_);
        std::error_code ec;
        fs::remove(path_, ec);
    }
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    fs::path path_;
    int fd_ = -1;
};

void make_dirs(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec, ErrorCode::kIo, "cannot create directory " + dir.string() + ": " + ec.message());
}

void make_parent(const fs::path& file) {
    if (file.has_parent_path()) {
        make_dirs(file.parent_path());
    }
}

std::string format_number(double v) {
    return std::isfinite(v) ? fmt::format("{:.9g}", v) : std::string("NA");
}

std::string synth_snapshot(const SynthOptions& o) {
    const SynthSpec& s = o.spec;
    std::string text;
    text += fmt::format("mode={}\n", synth_mode_name(s.mode));
    text += fmt::format("subjects={}\n", s.n_subjects);
    text += fmt::format("per-subject={}\n", s.findings_per_subject);
    text += fmt::format("tmin={}\n", s.t_min);
    text += fmt::format("tmax={}\n", s.t_max);
    text += fmt::format("dim={}\n", s.dim);
    text += fmt::format("beta={}\n", s.signal_strength);
    text += fmt::format("prevalence={}\n", s.prevalence);
    text += fmt::format("gamma={}\n", s.entropy_signal);
    text += fmt::format("layer={}\n", s.layer_index);
    text += fmt::format("seed={}\n", s.seed);
    text += fmt::format("holdout={}\n", o.holdout);
    return text;
}

void write_dataset(const Dataset& ds, const fs::path& dir, const std::string& stem, std::size_t layer) {
    io::write_rxhs(dir / (stem + ".rxhs"), ds.hidden_state_file(layer));
    write_findings(dir / (stem + ".jsonl"), ds.findings());
}

}  // namespace

void cmd_synth(const SynthOptions& opts, std::ostream& out) {
    opts.spec.validate();
    require(opts.holdout >= 0.0 && opts.holdout < 1.0, ErrorCode::kConfig, "holdout must lie in [0,1)");
    make_dirs(opts.out_dir);
    const Dataset ds = gen_dataset(opts.spec);
    if (opts.holdout > 0.0) {
        const IndexSplit split = split_holdout(ds, opts.holdout, opts.spec.seed);
        const Dataset train = ds.subset(split.train);
        const Dataset test = ds.subset(split.test);
        write_dataset(train, opts.out_dir, "train", opts.spec.layer_index);
        write_dataset(test, opts.out_dir, "test", opts.spec.layer_index);
        out << fmt::format("wrote {} train and {} test findings to {}\n", train.size(), test.size(),
                           opts.out_dir.string());
    } else {
        write_dataset(ds, opts.out_dir, "data", opts.spec.layer_index);
        out << fmt::format("wrote {} findings to {}\n", ds.size(), opts.out_dir.string());
    }
    io::write_text_file(opts.out_dir / "synth.ini", synth_snapshot(opts));
}

void cmd_train(const TrainOptions& opts, std::ostream& out) {
    const RunConfig cfg = RunConfig::load(opts.config);
    require(!cfg.hidden.empty() && !cfg.findings.empty(), ErrorCode::kConfig,
            "[data] hidden and findings are required");
    make_dirs(opts.out_dir);
    const RunLock lock(opts.out_dir / ".lock");
    io::write_text_file(opts.out_dir / "config.ini", cfg.to_ini());

    const io::HiddenStateFile hidden = io::read_rxhs(cfg.hidden);
    require(hidden.dim == cfg.model.input_dim, ErrorCode::kDimensionMismatch,
            fmt::format("hidden states have width {} but the model expects {}", hidden.dim,
                        cfg.model.input_dim));
    if (hidden.layer_index != cfg.model.layer_index) {
        spdlog::warn("hidden states come from layer {}, config names layer {}", hidden.layer_index,
                     cfg.model.layer_index);
    }
    const std::vector<Finding> findings = read_findings(cfg.findings);
    check_findings_consistent(findings);
    const Dataset ds = Dataset::join(findings, hidden);
    spdlog::info("training {} on {} findings from {} subjects, {} folds",
                 variant_name(cfg.model.variant), ds.size(), ds.subject_index().size(), cfg.train.folds);

    const CvResult result = train_cv(cfg.train, cfg.model, ds, [](std::size_t fold, const EpochRecord& r) {
        spdlog::info("fold {} epoch {} loss {:.6f} val_auroc {}", fold, r.epoch, r.train_loss,
                     format_number(r.val_auroc));
    });

    std::string metrics = "fold,epoch,train_loss,val_auroc\n";
    std::string folds = "fold,val_subjects,val_findings,final_val_auroc\n";
    const std::string k = std::to_string(result.folds.size());
    for (std::size_t i = 0; i < result.folds.size(); ++i) {
        const FoldResult& f = result.folds[i];
        for (const EpochRecord& r : f.history) {
            metrics += fmt::format("{},{},{},{}\n", i, r.epoch, format_number(r.train_loss),
                                   format_number(r.val_auroc));
        }
        const std::size_t val_findings =
            result.folds.size() == 1 ? ds.size() : fold_indices(ds, result.groups, i).test.size();
        folds += fmt::format("{},{},{},{}\n", i, result.groups[i].size(), val_findings,
                             format_number(f.history.empty() ? NAN : f.history.back().val_auroc));
        save_weights(opts.out_dir / fmt::format("fold_{}.manifest", i), f.weights,
                     WeightMetadata{cfg.train.seed, {{"role", "fold"}, {"fold", std::to_string(i)}, {"folds", k}}});
    }
    save_weights(opts.out_dir / "model.manifest", result.weights,
                 WeightMetadata{cfg.train.seed, {{"role", "average"}, {"folds", k}}});
    io::write_text_file(opts.out_dir / "metrics.csv", metrics);
    io::write_text_file(opts.out_dir / "folds.csv", folds);
    out << fmt::format("wrote {}\n", (opts.out_dir / "model.manifest").string());
}

void cmd_score(const ScoreOptions& opts, std::ostream& out) {
    const io::HiddenStateFile hidden = io::read_rxhs(opts.hidden);
    std::vector<io::ScoreRow> rows;
    std::vector<HeatmapRow> heat;
    std::string attention = "finding_id,token,weight\n";
    if (opts.entropy_baseline) {
        require(!opts.attention_csv && !opts.heatmap_svg, ErrorCode::kInvalidArgument,
                "the entropy baseline has no attention to dump");
        const std::vector<double> s = entropy_baseline(std::span<const HiddenSeq>(hidden.sequences));
        for (std::size_t i = 0; i < s.size(); ++i) {
            rows.push_back({hidden.sequences[i].finding_id, s[i]});
        }
    } else {
        const LoadedWeights loaded = load_weights(opts.weights);
        const ScorerWeights& w = loaded.weights;
        require(hidden.dim == w.config.input_dim, ErrorCode::kDimensionMismatch,
                fmt::format("hidden states have width {} but the model expects {}", hidden.dim,
                            w.config.input_dim));
        if (hidden.layer_index != w.config.layer_index) {
            spdlog::warn("hidden states come from layer {}, model was trained on layer {}",
                         hidden.layer_index, w.config.layer_index);
        }
        for (const HiddenSeq& seq : hidden.sequences) {
            RiskScore r = score(w, seq);
            rows.push_back({seq.finding_id, r.value});
            std::vector<double>& weights = r.attention.empty() ? r.token_scores : r.attention;
            if (opts.attention_csv) {
                for (std::size_t t = 0; t < weights.size(); ++t) {
                    attention += fmt::format("{},{},{:.9g}\n", seq.finding_id, t, weights[t]);
                }
            }
            if (opts.heatmap_svg && heat.size() < opts.heatmap_rows) {
                heat.push_back({fmt::format("{} ({:.3f})", seq.finding_id, r.value), std::move(weights)});
            }
        }
    }
    make_parent(opts.out);
    io::write_scores(opts.out, rows);
    if (opts.attention_csv) {
        make_parent(*opts.attention_csv);
        io::write_text_file(*opts.attention_csv, attention);
    }
    if (opts.heatmap_svg) {
        make_parent(*opts.heatmap_svg);
        io::write_text_file(*opts.heatmap_svg, attention_heatmap_svg(heat));
    }
    out << fmt::format("scored {} findings\n", rows.size());
}

namespace {

struct EvalRow {
    const Finding* finding;
    double score;
    double compare;
};

ScoredSet scored(const std::vector<EvalRow>& rows, bool use_compare) {
    ScoredSet s;
    for (const EvalRow& r : rows) {
        s.scores.push_back(use_compare ? r.compare : r.score);
        s.labels.push_back(r.finding->label->hallucinated ? 1 : 0);
    }
    return s;
}

std::string metric_lines(const std::string& stratum, const ScoredSet& s, const BootstrapOptions& bo) {
    std::string text;
    for (const MetricReport& r : threshold_free_report(s, bo)) {
        text += fmt::format("{},{},{},{},{},{},{}\n", stratum, s.size(), s.positives(), r.metric,
                            format_metric(r.point),
                            format_metric(r.ci ? std::optional<double>(r.ci->lo) : std::nullopt),
                            format_metric(r.ci ? std::optional<double>(r.ci->hi) : std::nullopt));
    }
    return text;
}

std::map<std::string, double> score_map(const std::vector<io::ScoreRow>& rows) {
    std::map<std::string, double> m;
    for (const io::ScoreRow& r : rows) {
        m.emplace(r.finding_id, r.score);
    }
    return m;
}

}  // namespace

void cmd_eval(const EvalOptions& opts, std::ostream& out) {
    const std::vector<io::ScoreRow> score_rows = io::read_scores(opts.scores);
    const std::vector<Finding> findings = read_findings(opts.labels);
    std::map<std::string, const Finding*> by_id;
    for (const Finding& f : findings) {
        by_id.emplace(f.finding_id, &f);
    }
    std::map<std::string, double> other;
    if (opts.compare) {
        other = score_map(io::read_scores(*opts.compare));
    }

    std::vector<EvalRow> rows;
    for (const io::ScoreRow& r : score_rows) {
        const auto it = by_id.find(r.finding_id);
        require(it != by_id.end(), ErrorCode::kInvalidArgument, "no finding record for scored id " + r.finding_id);
        require(it->second->label.has_value(), ErrorCode::kInvalidArgument, "finding " + r.finding_id + " is unlabelled");
        double c = 0.0;
        if (opts.compare) {
            const auto jt = other.find(r.finding_id);
            require(jt != other.end(), ErrorCode::kInvalidArgument,
                    "comparison scores lack finding " + r.finding_id);
            c = jt->second;
        }
        rows.push_back({it->second, r.score, c});
    }
    require(!rows.empty(), ErrorCode::kInvalidArgument, "no scored findings to evaluate");
    if (opts.compare) {
        require(other.size() == rows.size(), ErrorCode::kInvalidArgument,
                "comparison scores cover different findings");
    }

    const BootstrapOptions bo{opts.bootstrap, opts.level, opts.seed, 100, opts.threads};
    const bool has_severity = std::any_of(rows.begin(), rows.end(),
                                          [](const EvalRow& r) { return r.finding->severity_tier.has_value(); });
    std::vector<EvalRow> significant;
    for (const EvalRow& r : rows) {
        if (r.finding->severity_tier && clinically_significant(*r.finding->severity_tier)) {
            significant.push_back(r);
        }
    }

    const std::string header = "stratum,n,positives,metric,value,ci_lo,ci_hi\n";
    std::string table = header + metric_lines("all", scored(rows, false), bo);
    if (has_severity && !significant.empty()) {
        table += metric_lines("clinically_significant", scored(significant, false), bo);
    }
    out << table;
    if (!opts.out_dir) {
        return;
    }

    const fs::path& dir = *opts.out_dir;
    make_dirs(dir);
    io::write_text_file(dir / "metrics.csv", table);

    std::string categories = header;
    std::string comparison = "stratum,n,augrc,augrc_compare,diff,ci_lo,ci_hi\n";
    const MetricFn augrc_fn = [](const ScoredSet& x) { return augrc(x); };
    const auto compare_line = [&](const std::string& stratum, const std::vector<EvalRow>& subset) {
        const ScoredSet a = scored(subset, false);
        const ScoredSet b = scored(subset, true);
        const PairedDiff d = paired_diff_ci(augrc_fn, a, b, bo);
        comparison += fmt::format("{},{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", stratum, a.size(), augrc(a),
                                  augrc(b), d.point, d.lo, d.hi);
    };
    if (opts.compare) {
        compare_line("all", rows);
    }
    for (Category c : kAllCategories) {
        std::vector<EvalRow> subset;
        for (const EvalRow& r : rows) {
            if (r.finding->category == c) {
                subset.push_back(r);
            }
        }
        if (subset.empty()) {
            continue;
        }
        const std::string name(category_name(c));
        categories += metric_lines(name, scored(subset, false), bo);
        if (opts.compare) {
            compare_line(name, subset);
        }
    }
    io::write_text_file(dir / "categories.csv", categories);
    if (opts.compare) {
        io::write_text_file(dir / "comparison.csv", comparison);
    }

    const std::vector<std::string> keywords = opts.keywords ? load_keyword_list(*opts.keywords) : builtin_keywords();
    const std::vector<EvalRow>& keyword_pool = has_severity ? significant : rows;
    std::string keyword_table = "keyword,n,positives,f1_quartile\n";
    for (const std::string& kw : keywords) {
        std::vector<EvalRow> subset;
        for (const EvalRow& r : keyword_pool) {
            if (contains_keyword(r.finding->text, kw)) {
                subset.push_back(r);
            }
        }
        const ScoredSet s = scored(subset, false);
        keyword_table += fmt::format("{},{},{},{}\n", kw, s.size(), s.positives(),
                                     s.size() >= 4 ? format_number(f1_quartile(s)) : std::string("NA"));
    }
    io::write_text_file(dir / "keywords.csv", keyword_table);

    std::vector<NamedCurve> curves{{opts.scores.stem().string(), risk_coverage_curve(scored(rows, false))}};
    if (opts.compare) {
        curves.push_back({opts.compare->stem().string(), risk_coverage_curve(scored(rows, true))});
    }
    std::string curve_csv = "detector,coverage,risk\n";
    for (const NamedCurve& c : curves) {
        for (const CurvePoint& p : c.points) {
            curve_csv += fmt::format("{},{:.9g},{:.9g}\n", c.name, p.coverage, p.risk);
        }
    }
    io::write_text_file(dir / "curve.csv", curve_csv);
    io::write_text_file(dir / "curve.svg", risk_coverage_svg(curves));
}

void cmd_ensemble(const EnsembleOptions& opts, std::ostream& out) {
    const std::vector<io::ScoreRow> a = io::read_scores(opts.a);
    const std::map<std::string, double> b = score_map(io::read_scores(opts.b));
    require(a.size() == b.size(), ErrorCode::kInvalidArgument, "score files cover different findings");
    std::vector<double> ra;
    std::vector<double> rb;
    for (const io::ScoreRow& r : a) {
        const auto it = b.find(r.finding_id);
        require(it != b.end(), ErrorCode::kInvalidArgument, "second score file lacks finding " + r.finding_id);
        ra.push_back(r.score);
        rb.push_back(it->second);
    }
    const std::vector<double> combined = ensemble(ra, rb, opts.weight_a, opts.weight_b);
    std::vector<io::ScoreRow> rows;
    for (std::size_t i = 0; i < a.size(); ++i) {
        rows.push_back({a[i].finding_id, combined[i]});
    }
    make_parent(opts.out);
    io::write_scores(opts.out, rows);
    out << fmt::format("combined {} findings\n", rows.size());
}

bool cmd_gradcheck(const GradcheckOptions& opts, std::ostream& out) {
    const GradCheckResult r = check_scorer_gradients(opts.model, opts.tokens, opts.seed);
    const bool pass = r.max_rel_error < opts.tolerance;
    out << fmt::format("max_rel_error={:.3e} coords={} tolerance={:g} {}\n", r.max_rel_error, r.coords_checked,
                       opts.tolerance, pass ? "PASS" : "FAIL");
    return pass;
}

void cmd_segment(const SegmentOptions& opts, std::ostream& out) {
    require(!opts.study_id.empty() && !opts.subject_id.empty(), ErrorCode::kInvalidArgument,
            "study and subject ids are required");
    const CategoryRules rules = opts.rules ? CategoryRules::load(*opts.rules) : CategoryRules::builtin();
    const std::vector<std::string> claims = segment_report(io::read_text_file(opts.report));
    std::vector<Finding> findings;
    for (std::size_t i = 0; i < claims.size(); ++i) {
        Finding f;
        f.finding_id = fmt::format("{}-f{:03}", opts.study_id, i);
        f.study_id = opts.study_id;
        f.subject_id = opts.subject_id;
        f.text = claims[i];
        std::istringstream words(claims[i]);
        std::size_t count = 0;
        for (std::string w; words >> w;) {
            ++count;
        }
        f.token_count = std::max<std::size_t>(count, 1);
        f.category = rules.assign(f.text);
        findings.push_back(std::move(f));
    }
    make_parent(opts.out);
    write_findings(opts.out, findings);
    out << fmt::format("wrote {} findings\n", findings.size());
}

namespace {

std::map<std::string, std::string> read_references(const fs::path& path) {
    std::map<std::string, std::string> refs;
    std::istringstream in(io::read_text_file(path));
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const std::string where = fmt::format("{}:{}", path.string(), line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::kCorrupt, where + ": " + e.what());
        }
        require(j.is_object() && j.size() == 2 && j.contains("study_id") && j.contains("report") &&
                    j["study_id"].is_string() && j["report"].is_string(),
                ErrorCode::kCorrupt, where + ": expected {\"study_id\": ..., \"report\": ...}");
        require(refs.emplace(j["study_id"].get<std::string>(), j["report"].get<std::string>()).second,
                ErrorCode::kCorrupt, where + ": repeated study id");
    }
    return refs;
}

}  // namespace

void cmd_label(const LabelOptions& opts, std::ostream& out, std::ostream& err) {
    std::vector<Finding> findings = read_findings(opts.findings);
    const std::map<std::string, std::string> refs = read_references(opts.references);

    std::unique_ptr<EntailmentClient> base;
    RetryPolicy retry;
    if (opts.client == "replay") {
        require(opts.fixture.has_value(), ErrorCode::kConfig, "replay labelling needs a fixture");
        base = std::make_unique<ReplayClient>(ReplayClient::load(*opts.fixture));
        retry.sleep = [](std::chrono::milliseconds) {};
    } else if (opts.client == "live") {
        base = std::make_unique<LiveClient>(LiveClientConfig::from_env());
    } else {
        fail(ErrorCode::kConfig, "unknown client '" + opts.client + "' (expected replay or live)");
    }
    std::unique_ptr<RecordingClient> recorder;
    EntailmentClient* client = base.get();
    if (opts.record) {
        recorder = std::make_unique<RecordingClient>(*base, *opts.record);
        client = recorder.get();
    }

    std::vector<Finding> labelled;
    std::size_t failures = 0;
    for (Finding& f : findings) {
        try {
            const auto ref = refs.find(f.study_id);
            require(ref != refs.end(), ErrorCode::kInvalidArgument, "no reference report for study " + f.study_id);
            f.label = label_finding(f, ref->second, *client, retry);
            if (opts.severity) {
                f.severity_tier = classify_severity(f, *client, retry).tier;
            }
            labelled.push_back(f);
        } catch (const Error& e) {
            ++failures;
            err << fmt::format("label_failure finding_id={} code={} message=\"{}\"\n", f.finding_id,
                               error_code_name(e.code()), e.what());
        }
    }
    make_parent(opts.out);
    write_findings(opts.out, labelled);
    out << fmt::format("labelled {} of {} findings\n", labelled.size(), findings.size());
    require(failures == 0, ErrorCode::kLabelingFailure,
            fmt::format("{} of {} findings could not be labelled", failures, findings.size()));
}

}  // namespace hsprobe::cli
