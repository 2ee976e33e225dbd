#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hsprobe/error.hpp"
#include "hsprobe/metrics/metrics.hpp"
#include "hsprobe/metrics/report.hpp"
#include "hsprobe/metrics/svg.hpp"
#include "hsprobe/rng.hpp"
#include "metric_oracles.hpp"

using namespace hsprobe;
using namespace hsprobe::testing;

TEST(Auroc, Examples) {
    EXPECT_EQ(auroc({{0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}}), 1.0);
    EXPECT_EQ(auroc({{0.7, 0.6, 0.2}, {0, 1, 0}}), 0.5);
    EXPECT_EQ(auroc({{0.3, 0.3, 0.3, 0.3}, {0, 1, 0, 1}}), 0.5);
}

TEST(Auroc, SingleClassIsUndefined) {
    try {
        auroc({{0.1, 0.2}, {1, 1}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kMetricUndefined);
    }
}

TEST(Auroc, InvariantUnderMonotoneTransforms) {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        ScoredSet s = random_scored_set(rng, 2 + rng.below(40));
        if (s.positives() == 0 || s.negatives() == 0) {
            continue;
        }
        const double base = auroc(s);
        ScoredSet cubed = s;
        ScoredSet logistic = s;
        for (std::size_t i = 0; i < s.size(); ++i) {
            cubed.scores[i] = std::pow(s.scores[i], 3);
            logistic.scores[i] = 1.0 / (1.0 + std::exp(-4.0 * (s.scores[i] - 0.5)));
        }
        EXPECT_EQ(auroc(cubed), base);
        EXPECT_EQ(auroc(logistic), base);
    }
}

TEST(Auprc, Examples) {
    EXPECT_EQ(auprc({{0.9, 0.1, 0.8, 0.2}, {1, 0, 1, 0}}), 1.0);
    EXPECT_NEAR(auprc({{0.9, 0.8, 0.7}, {0, 1, 1}}), (0.5 + 2.0 / 3.0) / 2.0, 1e-15);
    EXPECT_THROW(auprc({{0.1}, {0}}), Error);
}

TEST(Auprc, RandomScoresApproachPrevalence) {
    Rng rng(9);
    ScoredSet s;
    for (int i = 0; i < 20000; ++i) {
        s.scores.push_back(rng.uniform());
        s.labels.push_back(rng.bernoulli(0.3) ? 1 : 0);
    }
    EXPECT_NEAR(auprc(s), 0.3, 0.02);
}

TEST(Augrc, HandFixture) {
    const ScoredSet s{{0.9, 0.1}, {1, 0}};
    EXPECT_EQ(augrc(s), 0.125);
    const auto curve = risk_coverage_curve(s);
    ASSERT_EQ(curve.size(), 3u);
    EXPECT_EQ(curve[0].coverage, 0.0);
    EXPECT_EQ(curve[0].risk, 0.0);
    EXPECT_EQ(curve[1].coverage, 0.5);
    EXPECT_EQ(curve[1].risk, 0.0);
    EXPECT_EQ(curve[2].coverage, 1.0);
    EXPECT_EQ(curve[2].risk, 0.5);
}

TEST(Augrc, NoErrorsMeansZero) {
    EXPECT_EQ(augrc({{0.4, 0.9, 0.1}, {0, 0, 0}}), 0.0);
}

TEST(Augrc, PerfectRankingOnlyAccruesAtTheTail) {
    Rng rng(10);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(20);
        const std::size_t p = rng.below(n + 1);
        ScoredSet s;
        for (std::size_t i = 0; i < n; ++i) {
            const bool pos = i >= n - p;
            s.labels.push_back(pos ? 1 : 0);
            s.scores.push_back(pos ? 0.6 + 0.3 * rng.uniform() : 0.4 * rng.uniform());
        }
        double tail = 0.0;
        const double dn = static_cast<double>(n);
        for (std::size_t k = n - p + 1; k <= n; ++k) {
            const double g_prev = static_cast<double>(k - 1 - (n - p)) / dn;
            const double g_k = static_cast<double>(k - (n - p)) / dn;
            tail += (g_prev + g_k) / 2.0 / dn;
        }
        EXPECT_NEAR(augrc(s), tail, 1e-12);
    }
}

TEST(Augrc, ReversedRankingIsNoBetter) {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        ScoredSet s;
        for (int i = 0; i < 200; ++i) {
            const int y = rng.bernoulli(0.4) ? 1 : 0;
            s.labels.push_back(y);
            s.scores.push_back(1.0 / (1.0 + std::exp(-(1.5 * y - 0.75 + rng.normal()))));
        }
        if (auroc(s) <= 0.5) {
            continue;
        }
        ScoredSet reversed = s;
        for (double& x : reversed.scores) {
            x = 1.0 - x;
        }
        EXPECT_GE(augrc(reversed), augrc(s));
    }
}

TEST(Augrc, TiesEqualTheAverageOverTieOrders) {
    // Interpolating inside a tied group equals averaging the untied area over
    // every ordering of the group.
    const ScoredSet s{{0.2, 0.5, 0.5, 0.5, 0.8}, {0, 1, 0, 1, 1}};
    std::vector<int> tied = {1, 0, 1};
    std::sort(tied.begin(), tied.end());
    double total = 0.0;
    int count = 0;
    do {
        ScoredSet untied{{0.2, 0.5, 0.51, 0.52, 0.8}, {0, tied[0], tied[1], tied[2], 1}};
        total += augrc(untied);
        ++count;
    } while (std::next_permutation(tied.begin(), tied.end()));
    EXPECT_NEAR(augrc(s), total / count, 1e-15);
}

TEST(Curve, MonotoneAndDuplicationPreservesShape) {
    Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const ScoredSet s = random_scored_set(rng, 1 + rng.below(20));
        const auto curve = risk_coverage_curve(s);
        ASSERT_EQ(curve.size(), s.size() + 1);
        for (std::size_t k = 1; k < curve.size(); ++k) {
            EXPECT_GE(curve[k].risk, curve[k - 1].risk);
            EXPECT_GT(curve[k].coverage, curve[k - 1].coverage);
        }
        // Doubling every pair keeps the curve: even points of the doubled set
        // coincide with the original points.
        ScoredSet doubled = s;
        doubled.scores.insert(doubled.scores.end(), s.scores.begin(), s.scores.end());
        doubled.labels.insert(doubled.labels.end(), s.labels.begin(), s.labels.end());
        const auto dcurve = risk_coverage_curve(doubled);
        for (std::size_t k = 0; k < curve.size(); ++k) {
            EXPECT_NEAR(dcurve[2 * k].coverage, curve[k].coverage, 1e-12);
            EXPECT_NEAR(dcurve[2 * k].risk, curve[k].risk, 1e-12);
        }
    }
}

TEST(Curve, PerfectDetectorStaysAtZeroUntilFirstPositive) {
    const auto curve = risk_coverage_curve({{0.1, 0.2, 0.3, 0.9}, {0, 0, 0, 1}});
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_EQ(curve[k].risk, 0.0);
    }
    EXPECT_EQ(curve[4].risk, 0.25);
}

TEST(Oracles, MetricsMatchBruteForceOnRandomTiedSets) {
    Rng rng(13);
    for (int trial = 0; trial < 1000; ++trial) {
        const ScoredSet s = random_scored_set(rng, 1 + rng.below(20));
        if (s.positives() > 0 && s.negatives() > 0) {
            EXPECT_NEAR(auroc(s), brute_auroc(s), 1e-12);
        }
        if (s.positives() > 0) {
            EXPECT_NEAR(auprc(s), brute_auprc(s), 1e-12);
        }
        EXPECT_NEAR(augrc(s), brute_augrc(s), 1e-12);
    }
}

TEST(Quantile, MatchesLinearInterpolation) {
    EXPECT_EQ(quantile_linear({1, 2, 3, 4}, 0.25), 1.75);
    EXPECT_EQ(quantile_linear({4, 1, 3, 2}, 0.75), 3.25);
    EXPECT_EQ(quantile_linear({5}, 0.3), 5.0);
}

TEST(F1Quartile, Examples) {
    // Perfectly separated subset.
    EXPECT_EQ(f1_quartile({{0.1, 0.2, 0.3, 0.7, 0.8, 0.9}, {0, 0, 0, 1, 1, 1}}), 1.0);

    // Hand fixture: Q1 = 0.275, Q3 = 0.725, so 0.1 and 0.2 (predicted 0) and
    // 0.8 and 0.9 (predicted 1) are kept. Labels give TP 1 (0.9), FP 1 (0.8),
    // FN 1 (0.2), TN 1 (0.1): precision 1/2, recall 1/2, F1 1/2.
    const ScoredSet hand{{0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9}, {0, 1, 1, 0, 1, 0, 0, 1}};
    EXPECT_EQ(f1_quartile(hand), 0.5);

    // All equal: everything kept and predicted positive.
    EXPECT_NEAR(f1_quartile({{0.5, 0.5, 0.5, 0.5}, {1, 0, 0, 0}}), 2.0 / 5.0, 1e-15);
    EXPECT_EQ(f1_quartile({{0.5, 0.5, 0.5, 0.5}, {0, 0, 0, 0}}), 0.0);
    EXPECT_THROW(f1_quartile({{0.1, 0.2, 0.3}, {0, 1, 0}}), Error);
}

TEST(Ensemble, Examples) {
    const std::vector<double> a = {0.5, 0.1, 0.123456789};
    EXPECT_EQ(ensemble(a, a), a);
    EXPECT_EQ(ensemble(std::vector<double>{0.5}, std::vector<double>{1.0})[0], 0.6);
    EXPECT_EQ(ensemble(a, std::vector<double>{0.9, 0.9, 0.9}, 1.0, 0.0), a);
    EXPECT_THROW(ensemble(a, std::vector<double>{0.1}), Error);
    EXPECT_THROW(ensemble(a, a, 0.7, 0.2), Error);
    EXPECT_THROW(ensemble(a, a, 1.2, -0.2), Error);
}

TEST(Ensemble, StrongPlusIndependentWeakBeatsWeakInMostTrials) {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(derive_seed(seed, "ensemble"));
        ScoredSet strong;
        ScoredSet weak;
        for (int i = 0; i < 500; ++i) {
            const int y = rng.bernoulli(0.5) ? 1 : 0;
            strong.labels.push_back(y);
            weak.labels.push_back(y);
            strong.scores.push_back(1.0 / (1.0 + std::exp(-(2.0 * y - 1.0 + rng.normal()))));
            weak.scores.push_back(1.0 / (1.0 + std::exp(-(0.5 * y - 0.25 + rng.normal()))));
        }
        ScoredSet combined{ensemble(strong.scores, weak.scores), strong.labels};
        if (auroc(combined) > auroc(weak)) {
            ++wins;
        }
        EXPECT_GE(auroc(combined), std::min(auroc(strong), auroc(weak)));
    }
    EXPECT_GE(wins, 19);
}

TEST(EntropyBaseline, HandFixture) {
    const std::vector<std::vector<double>> e = {{1, 2, 3}, {0, 0}, {4}, {1, 1, 1, 1}, {2.5, 3.5}};
    // Means 2, 0, 4, 1, 3 normalized by range 4.
    EXPECT_EQ(entropy_baseline(e), (std::vector<double>{0.5, 0.0, 1.0, 0.25, 0.75}));
    EXPECT_EQ(entropy_baseline({{0.0, 0.0}, {0.0}}), (std::vector<double>{0.0, 0.0}));
    EXPECT_EQ(entropy_baseline({{0.7, 0.2}}), (std::vector<double>{0.0}));
}

TEST(EntropyBaseline, MissingChannelIsAnError) {
    HiddenSeq hs;
    hs.finding_id = "x";
    hs.dim = 1;
    hs.values = {0.0f};
    std::vector<HiddenSeq> v = {hs};
    EXPECT_THROW(entropy_baseline(std::span<const HiddenSeq>(v)), Error);
}

TEST(Bootstrap, ConstantMetricGivesADegenerateInterval) {
    Rng rng(14);
    const ScoredSet s = random_scored_set(rng, 30);
    const auto ci = bootstrap_ci([](const ScoredSet&) { return 0.42; }, s, {200, 0.95, 3});
    EXPECT_EQ(ci.lo, 0.42);
    EXPECT_EQ(ci.hi, 0.42);
}

TEST(Bootstrap, DeterministicAndThreadIndependent) {
    Rng rng(15);
    const ScoredSet s = random_scored_set(rng, 60);
    BootstrapOptions opts{300, 0.95, 99};
    const auto a = bootstrap_ci(auroc, s, opts);
    const auto b = bootstrap_ci(auroc, s, opts);
    opts.threads = 3;
    const auto c = bootstrap_ci(auroc, s, opts);
    EXPECT_EQ(a.lo, b.lo);
    EXPECT_EQ(a.hi, b.hi);
    EXPECT_EQ(a.lo, c.lo);
    EXPECT_EQ(a.hi, c.hi);
    EXPECT_LE(a.lo, a.hi);
    opts.seed = 100;
    const auto d = bootstrap_ci(auroc, s, opts);
    EXPECT_TRUE(d.lo != a.lo || d.hi != a.hi);
}

TEST(Bootstrap, RedrawsResamplesMissingAClass) {
    // One positive in 20: many resamples lack it and must be redrawn.
    ScoredSet s;
    for (int i = 0; i < 20; ++i) {
        s.scores.push_back(i / 20.0);
        s.labels.push_back(i == 19 ? 1 : 0);
    }
    const auto ci = bootstrap_ci(auroc, s, {200, 0.95, 5});
    EXPECT_EQ(ci.lo, 1.0);
    EXPECT_EQ(ci.hi, 1.0);

    ScoredSet hopeless{{0.1, 0.2}, {0, 0}};
    try {
        bootstrap_ci(auroc, hopeless, {10, 0.95, 5});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kMetricUndefined);
    }
}

TEST(PairedDiff, IdenticalSetsGiveExactZeros) {
    Rng rng(16);
    const ScoredSet s = random_scored_set(rng, 50);
    const auto d = paired_diff_ci(augrc, s, s, {500, 0.95, 1});
    EXPECT_EQ(d.point, 0.0);
    EXPECT_EQ(d.lo, 0.0);
    EXPECT_EQ(d.hi, 0.0);
}

TEST(PairedDiff, PerfectVersusRandomExcludesZero) {
    Rng rng(17);
    ScoredSet perfect;
    ScoredSet random;
    for (int i = 0; i < 200; ++i) {
        const int y = rng.bernoulli(0.5) ? 1 : 0;
        perfect.labels.push_back(y);
        random.labels.push_back(y);
        perfect.scores.push_back(y == 1 ? 0.9 : 0.1);
        random.scores.push_back(rng.uniform());
    }
    const auto d = paired_diff_ci(augrc, perfect, random, {1000, 0.95, 2});
    EXPECT_LT(d.point, 0.0);
    EXPECT_LT(d.hi, 0.0);
    const auto r = paired_diff_ci(auroc, perfect, random, {1000, 0.95, 2});
    EXPECT_GT(r.lo, 0.0);
}

TEST(PairedDiff, MisalignedSetsAreRejected) {
    EXPECT_THROW(paired_diff_ci(auroc, {{0.1, 0.9}, {0, 1}}, {{0.1, 0.9}, {1, 0}}), Error);
    EXPECT_THROW(paired_diff_ci(auroc, {{0.1, 0.9}, {0, 1}}, {{0.1}, {0}}), Error);
}

TEST(Validation, BadInputsAreRejected) {
    EXPECT_THROW(auroc({{0.1, 0.2}, {0}}), Error);
    EXPECT_THROW(auroc({{0.1, 0.2}, {0, 2}}), Error);
    EXPECT_THROW(augrc({{NAN}, {0}}), Error);
    EXPECT_THROW(augrc({}), Error);
}

TEST(Report, ThresholdFreeMetricsWithIntervals) {
    const ScoredSet s{{0.9, 0.8, 0.3, 0.2, 0.6, 0.4}, {1, 1, 0, 0, 0, 1}};
    const std::vector<MetricReport> r = threshold_free_report(s, {200, 0.95, 4});
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0].metric, "auroc");
    EXPECT_EQ(*r[0].point, auroc(s));
    EXPECT_EQ(*r[2].point, augrc(s));
    for (const MetricReport& m : r) {
        ASSERT_TRUE(m.ci.has_value());
        EXPECT_LE(m.ci->lo, m.ci->hi);
    }
    // One class: AUROC and AUPRC are undefined, AUGRC is still 0.
    const std::vector<MetricReport> one = threshold_free_report({{0.1, 0.2}, {0, 0}}, {50, 0.95, 4});
    EXPECT_FALSE(one[0].point.has_value());
    EXPECT_FALSE(one[1].point.has_value());
    EXPECT_EQ(format_metric(one[0].point), "NA");
    EXPECT_EQ(format_metric(one[2].point), "0");
}

TEST(Svg, CurvesAndHeatmapsAreWellFormedDocuments) {
    const ScoredSet s{{0.9, 0.1}, {1, 0}};
    const std::string curve = risk_coverage_svg({{"a<b", risk_coverage_curve(s)}, {"c", risk_coverage_curve(s)}});
    EXPECT_EQ(curve.rfind("<svg", 0), 0u);
    EXPECT_NE(curve.find("</svg>"), std::string::npos);
    EXPECT_NE(curve.find("a&lt;b"), std::string::npos);
    const std::string heat = attention_heatmap_svg({{"f1", {0.2, 0.8}}, {"f2", {1.0}}});
    std::size_t cells = 0;
    for (std::size_t p = heat.find("<rect x="); p != std::string::npos; p = heat.find("<rect x=", p + 1)) {
        ++cells;
    }
    EXPECT_EQ(cells, 3u);
    EXPECT_NE(heat.find("rgb(255,0,0)"), std::string::npos);  // row maxima are fully saturated
}
