#include "hsprobe/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "hsprobe/error.hpp"
#include "hsprobe/rng.hpp"

namespace hsprobe {

std::size_t ScoredSet::positives() const noexcept {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

void ScoredSet::validate() const {
    require(scores.size() == labels.size(), ErrorCode::kInvalidArgument,
            "scores and labels differ in length (" + std::to_string(scores.size()) + " vs " +
                std::to_string(labels.size()) + ")");
    for (std::size_t i = 0; i < size(); ++i) {
        require(labels[i] == 0 || labels[i] == 1, ErrorCode::kInvalidArgument,
                "label at " + std::to_string(i) + " is not 0 or 1");
        require(std::isfinite(scores[i]), ErrorCode::kInvalidArgument,
                "score at " + std::to_string(i) + " is not finite");
    }
}

ScoredSet ScoredSet::subset(std::span<const std::size_t> indices) const {
    ScoredSet out;
    out.scores.reserve(indices.size());
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) {
        out.scores.push_back(scores.at(i));
        out.labels.push_back(labels.at(i));
    }
    return out;
}

namespace {

struct Group {
    std::size_t size = 0;
    std::size_t positives = 0;
};

// Groups of equal score in ascending score order.
std::vector<Group> ascending_groups(const ScoredSet& s) {
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return s.scores[a] < s.scores[b]; });
    std::vector<Group> groups;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i == 0 || s.scores[order[i]] != s.scores[order[i - 1]]) {
            groups.push_back({});
        }
        groups.back().size += 1;
        groups.back().positives += static_cast<std::size_t>(s.labels[order[i]]);
    }
    return groups;
}

}  // namespace

double auroc(const ScoredSet& s) {
    s.validate();
    const std::size_t pos = s.positives();
    const std::size_t neg = s.negatives();
    require(pos > 0 && neg > 0, ErrorCode::kMetricUndefined, "AUROC needs both classes");
    // Twice the Mann-Whitney U, kept integral so the result is exact up to
    // the final division.
    std::uint64_t twice_u = 0;
    std::uint64_t negatives_below = 0;
    for (const Group& g : ascending_groups(s)) {
        const std::uint64_t gn = g.size - g.positives;
        twice_u += 2 * g.positives * negatives_below + g.positives * gn;
        negatives_below += gn;
    }
    return static_cast<double>(twice_u) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

double auprc(const ScoredSet& s) {
    s.validate();
    const std::size_t pos = s.positives();
    require(pos > 0, ErrorCode::kMetricUndefined, "AUPRC needs at least one positive");
    auto groups = ascending_groups(s);
    std::reverse(groups.begin(), groups.end());
    double sum = 0.0;
    std::size_t seen = 0;
    std::size_t true_pos = 0;
    for (const Group& g : groups) {
        seen += g.size;
        true_pos += g.positives;
        sum += static_cast<double>(g.positives) * static_cast<double>(true_pos) / static_cast<double>(seen);
    }
    return sum / static_cast<double>(pos);
}

std::vector<CurvePoint> risk_coverage_curve(const ScoredSet& s) {
    s.validate();
    const std::size_t n = s.size();
    std::vector<CurvePoint> curve;
    curve.reserve(n + 1);
    curve.push_back({0.0, 0.0});
    if (n == 0) {
        return curve;
    }
    const double dn = static_cast<double>(n);
    std::size_t accepted = 0;
    std::size_t errors = 0;
    for (const Group& g : ascending_groups(s)) {
        for (std::size_t j = 1; j <= g.size; ++j) {
            const double partial = static_cast<double>(errors) +
                                   static_cast<double>(g.positives) * static_cast<double>(j) /
                                       static_cast<double>(g.size);
            curve.push_back({static_cast<double>(accepted + j) / dn, partial / dn});
        }
        accepted += g.size;
        errors += g.positives;
    }
    return curve;
}

double augrc(const ScoredSet& s) {
    s.validate();
    const std::size_t n = s.size();
    require(n > 0, ErrorCode::kMetricUndefined, "AUGRC of an empty set");
    // Trapezoids over group endpoints, which equals the trapezoid rule over
    // the interpolated per-k points. Accumulated as 2 n^2 * area in integers.
    std::uint64_t twice_area = 0;
    std::uint64_t errors = 0;
    for (const Group& g : ascending_groups(s)) {
        twice_area += (2 * errors + g.positives) * g.size;
        errors += g.positives;
    }
    const double dn = static_cast<double>(n);
    return static_cast<double>(twice_area) / (2.0 * dn * dn);
}

double quantile_linear(std::vector<double> values, double q) {
    require(!values.empty(), ErrorCode::kInvalidArgument, "quantile of an empty sample");
    require(q >= 0.0 && q <= 1.0, ErrorCode::kInvalidArgument, "quantile level outside [0,1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

void check_bootstrap_options(const BootstrapOptions& opts) {
    require(opts.resamples >= 1, ErrorCode::kInvalidArgument, "bootstrap needs at least one resample");
    require(opts.level > 0.0 && opts.level < 1.0, ErrorCode::kInvalidArgument,
            "confidence level must lie in (0,1)");
    require(opts.max_redraws >= 0, ErrorCode::kInvalidArgument, "max_redraws must be nonnegative");
}

// Runs body(b) for b in [0, count) over opts.threads workers. Exceptions from
// any worker are rethrown after all workers finish.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
    if (threads == 1) {
        for (std::size_t b = 0; b < count; ++b) {
            body(b);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t b = t; b < count; b += threads) {
                    body(b);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

// Evaluates fn on resample b, redrawing while fn reports the resample as
// undefined.
template <class Fn>
double resample_statistic(std::size_t n, std::size_t b, const BootstrapOptions& opts, Fn&& fn) {
    Rng rng(derive_seed(opts.seed, "bootstrap", b));
    std::vector<std::size_t> idx(n);
    for (int attempt = 0; attempt <= opts.max_redraws; ++attempt) {
        for (std::size_t& i : idx) {
            i = static_cast<std::size_t>(rng.below(n));
        }
        try {
            return fn(idx);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::kMetricUndefined) {
                throw;
            }
        }
    }
    fail(ErrorCode::kMetricUndefined, "metric undefined on resample " + std::to_string(b) + " after " +
                                          std::to_string(opts.max_redraws) + " redraws");
}

std::pair<double, double> percentile_bounds(const std::vector<double>& stats, double level) {
    const double tail = (1.0 - level) / 2.0;
    return {quantile_linear(stats, tail), quantile_linear(stats, 1.0 - tail)};
}

}  // namespace

ConfidenceInterval bootstrap_ci(const MetricFn& metric, const ScoredSet& s, const BootstrapOptions& opts) {
    s.validate();
    check_bootstrap_options(opts);
    require(s.size() > 0, ErrorCode::kMetricUndefined, "bootstrap of an empty set");
    std::vector<double> stats(opts.resamples);
    parallel_for(opts.resamples, opts.threads, [&](std::size_t b) {
        stats[b] = resample_statistic(s.size(), b, opts,
                                      [&](const std::vector<std::size_t>& idx) { return metric(s.subset(idx)); });
    });
    const auto [lo, hi] = percentile_bounds(stats, opts.level);
    return {lo, hi, opts.level, opts.resamples};
}

PairedDiff paired_diff_ci(const MetricFn& metric, const ScoredSet& a, const ScoredSet& b,
                          const BootstrapOptions& opts) {
    a.validate();
    b.validate();
    check_bootstrap_options(opts);
    require(a.size() == b.size() && a.labels == b.labels, ErrorCode::kInvalidArgument,
            "paired comparison needs score sets on identical findings");
    require(a.size() > 0, ErrorCode::kMetricUndefined, "bootstrap of an empty set");
    PairedDiff out;
    out.point = metric(a) - metric(b);
    std::vector<double> stats(opts.resamples);
    parallel_for(opts.resamples, opts.threads, [&](std::size_t r) {
        stats[r] = resample_statistic(a.size(), r, opts, [&](const std::vector<std::size_t>& idx) {
            return metric(a.subset(idx)) - metric(b.subset(idx));
        });
    });
    std::tie(out.lo, out.hi) = percentile_bounds(stats, opts.level);
    return out;
}

double f1_quartile(const ScoredSet& s) {
    s.validate();
    require(s.size() >= 4, ErrorCode::kInvalidArgument, "quartile F1 needs at least 4 findings");
    const double q1 = quantile_linear(s.scores, 0.25);
    const double q3 = quantile_linear(s.scores, 0.75);
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double x = s.scores[i];
        const bool top = x >= q3;
        if (!top && x > q1) {
            continue;
        }
        const bool positive = s.labels[i] == 1;
        tp += static_cast<std::size_t>(top && positive);
        fp += static_cast<std::size_t>(top && !positive);
        fn += static_cast<std::size_t>(!top && positive);
    }
    if (tp == 0) {
        return 0.0;
    }
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

std::vector<double> ensemble(std::span<const double> a, std::span<const double> b, double weight_a,
                             double weight_b) {
    require(a.size() == b.size(), ErrorCode::kInvalidArgument,
            "ensemble inputs differ in length (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
    require(weight_a >= 0.0 && weight_b >= 0.0 && std::abs(weight_a + weight_b - 1.0) <= 1e-9,
            ErrorCode::kInvalidArgument, "ensemble weights must be nonnegative and sum to 1");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] + weight_b * (b[i] - a[i]);
    }
    return out;
}

std::vector<double> entropy_baseline(const std::vector<std::vector<double>>& entropies) {
    std::vector<double> means;
    means.reserve(entropies.size());
    for (const auto& e : entropies) {
        require(!e.empty(), ErrorCode::kInvalidArgument, "finding without entropy values");
        means.push_back(std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size()));
    }
    if (means.empty()) {
        return means;
    }
    const auto [mn, mx] = std::minmax_element(means.begin(), means.end());
    const double lo = *mn;
    const double range = *mx - lo;
    for (double& m : means) {
        m = range > 0.0 ? (m - lo) / range : 0.0;
    }
    return means;
}

std::vector<double> entropy_baseline(std::span<const HiddenSeq> sequences) {
    std::vector<std::vector<double>> entropies;
    entropies.reserve(sequences.size());
    for (const HiddenSeq& hs : sequences) {
        require(hs.entropy.has_value(), ErrorCode::kInvalidArgument,
                "finding '" + hs.finding_id + "' has no entropy channel");
        entropies.emplace_back(hs.entropy->begin(), hs.entropy->end());
    }
    return entropy_baseline(entropies);
}

}  // namespace hsprobe
