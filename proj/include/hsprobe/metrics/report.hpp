#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hsprobe/metrics/metrics.hpp"

namespace hsprobe {

struct MetricReport {
    std::string metric;
    std::optional<double> point;  // empty when the metric is undefined on the set
    std::optional<ConfidenceInterval> ci;
};

// AUROC, AUPRC and AUGRC with percentile bootstrap CIs, all drawn from
// opts.seed. A metric the set cannot support (for instance AUROC with one
// class) is reported without value.
std::vector<MetricReport> threshold_free_report(const ScoredSet& s, const BootstrapOptions& opts);

// Nine significant digits, or "NA" for an absent value.
std::string format_metric(std::optional<double> value);

}  // namespace hsprobe
