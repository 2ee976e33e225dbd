#include "hsprobe/metrics/report.hpp"

#include <fmt/format.h>

#include "hsprobe/error.hpp"

namespace hsprobe {

std::vector<MetricReport> threshold_free_report(const ScoredSet& s, const BootstrapOptions& opts) {
    const std::vector<std::pair<std::string, MetricFn>> metrics = {
        {"auroc", [](const ScoredSet& x) { return auroc(x); }},
        {"auprc", [](const ScoredSet& x) { return auprc(x); }},
        {"augrc", [](const ScoredSet& x) { return augrc(x); }},
    };
    std::vector<MetricReport> out;
    for (const auto& [name, fn] : metrics) {
        MetricReport r;
        r.metric = name;
        try {
            r.point = fn(s);
            r.ci = bootstrap_ci(fn, s, opts);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::kMetricUndefined) {
                throw;
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::string format_metric(std::optional<double> value) {
    return value ? fmt::format("{:.9g}", *value) : std::string("NA");
}

}  // namespace hsprobe
