#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hsprobe/hidden_seq.hpp"

namespace hsprobe {

// Detector output on labelled findings: score in [0,1], higher meaning more
// likely hallucinated; label 1 for hallucinated.
struct ScoredSet {
    std::vector<double> scores;
    std::vector<int> labels;

    std::size_t size() const noexcept { return scores.size(); }
    std::size_t positives() const noexcept;
    std::size_t negatives() const noexcept { return size() - positives(); }

    // Throws kInvalidArgument on unequal lengths, labels outside {0,1} or
    // non-finite scores.
    void validate() const;

    ScoredSet subset(std::span<const std::size_t> indices) const;

    friend bool operator==(const ScoredSet&, const ScoredSet&) = default;
};

// Mann-Whitney statistic with ties counted as one half. Throws
// kMetricUndefined unless both classes are present.
double auroc(const ScoredSet& s);

// Average precision: positives are visited in descending score order and the
// precision at each tied group is credited once per positive in the group.
// Throws kMetricUndefined without positives.
double auprc(const ScoredSet& s);

struct CurvePoint {
    double coverage = 0.0;
    double risk = 0.0;
};

// Generalized risk against coverage, accepting the most confident findings
// (lowest score) first. One point per prefix size k = 0..n; inside a group
// of tied scores the risk is interpolated linearly across the group.
std::vector<CurvePoint> risk_coverage_curve(const ScoredSet& s);

// Trapezoidal area under the risk-coverage curve. Lower is better.
double augrc(const ScoredSet& s);

using MetricFn = std::function<double(const ScoredSet&)>;

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;
    double level = 0.95;
    std::size_t resamples = 0;
};

struct BootstrapOptions {
    std::size_t resamples = 1000;
    double level = 0.95;
    std::uint64_t seed = 0;
    // Resamples the metric rejects (by throwing kMetricUndefined) are redrawn
    // at most this many times each.
    int max_redraws = 100;
    std::size_t threads = 1;
};

// Percentile bootstrap over (score, label) pairs. Each resample draws from
// its own seed derived from opts.seed and its index, so the result does not
// depend on thread count or execution order.
ConfidenceInterval bootstrap_ci(const MetricFn& metric, const ScoredSet& s,
                                const BootstrapOptions& opts = {});

struct PairedDiff {
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// metric(A) - metric(B) with a percentile CI from joint resampling of
// finding indices. Throws kInvalidArgument unless the sets have equal size
// and identical labels.
PairedDiff paired_diff_ci(const MetricFn& metric, const ScoredSet& a, const ScoredSet& b,
                          const BootstrapOptions& opts = {});

// Quantile with linear interpolation between order statistics at
// position q * (n - 1).
double quantile_linear(std::vector<double> values, double q);

// F1 of the hallucinated class on the findings whose score is at most the
// first quartile (predicted 0) or at least the third quartile (predicted 1).
// When the quartiles coincide every finding is kept and predicted 1. F1 is 0
// when there are no true positives. Throws kInvalidArgument below 4 findings.
double f1_quartile(const ScoredSet& s);

// wA * a + wB * b computed as a + wB * (b - a), so that equal inputs come
// back unchanged. Weights must be nonnegative and sum to 1 within 1e-9.
std::vector<double> ensemble(std::span<const double> a, std::span<const double> b,
                             double weight_a = 0.8, double weight_b = 0.2);

// Mean per-token entropy per finding, min-max normalized over the set. A set
// whose means are all equal (including a single finding) scores 0.
std::vector<double> entropy_baseline(const std::vector<std::vector<double>>& entropies);
// Throws kInvalidArgument when a sequence has no entropy channel.
std::vector<double> entropy_baseline(std::span<const HiddenSeq> sequences);

}  // namespace hsprobe
