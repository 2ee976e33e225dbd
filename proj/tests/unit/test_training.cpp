#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "hsprobe/error.hpp"
#include "hsprobe/metrics/metrics.hpp"
#include "hsprobe/rng.hpp"
#include "hsprobe/synthgen/synthgen.hpp"
#include "hsprobe/training/sampler.hpp"
#include "hsprobe/training/split.hpp"
#include "hsprobe/training/trainer.hpp"

using namespace hsprobe;

namespace {

// One finding per (subject, k) with random tokens and labels.
Dataset toy_dataset(std::size_t subjects, std::size_t per_subject, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Sample> samples;
    for (std::size_t s = 0; s < subjects; ++s) {
        for (std::size_t k = 0; k < per_subject; ++k) {
            Sample x;
            x.finding.subject_id = "subj" + std::to_string(s);
            x.finding.study_id = x.finding.subject_id + "_st";
            x.finding.finding_id = x.finding.subject_id + "_f" + std::to_string(k);
            x.finding.text = "finding";
            const std::size_t length = 1 + rng.below(4);
            x.finding.token_count = length;
            x.finding.label = HallucinationLabel::from(rng.bernoulli(0.5) ? Entailment::kNotEntailed
                                                                          : Entailment::kCompletely);
            x.hidden.finding_id = x.finding.finding_id;
            x.hidden.dim = dim;
            for (std::size_t i = 0; i < length * dim; ++i) {
                x.hidden.values.push_back(static_cast<float>(rng.normal()));
            }
            samples.push_back(std::move(x));
        }
    }
    return Dataset(std::move(samples));
}

ScorerConfig small_model(std::size_t dim) {
    ScorerConfig c;
    c.input_dim = dim;
    c.latent_dim = 16;
    c.num_heads = 2;
    c.head_dim = 8;
    return c;
}

TrainConfig small_train() {
    TrainConfig c;
    c.epochs = 2;
    c.batch_size = 16;
    c.folds = 2;
    c.seed = 5;
    return c;
}

}  // namespace

TEST(Dataset, RejectsInconsistentSamples) {
    Dataset ds = toy_dataset(2, 2, 3, 1);
    std::vector<Sample> samples = ds.samples();
    samples[1].hidden.dim = 1;
    samples[1].hidden.values.resize(samples[1].finding.token_count);
    try {
        Dataset bad(samples);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
    }
    samples = ds.samples();
    samples[0].finding.label.reset();
    EXPECT_THROW(Dataset{samples}, Error);
    samples = ds.samples();
    samples[0].hidden.finding_id = "other";
    EXPECT_THROW(Dataset{samples}, Error);
    samples = ds.samples();
    samples[0].finding.token_count += 1;
    EXPECT_THROW(Dataset{samples}, Error);
}

TEST(Dataset, JoinPairsByIdAndRoundTrips) {
    const Dataset ds = toy_dataset(3, 2, 4, 2);
    io::HiddenStateFile file = ds.hidden_state_file(16);
    std::reverse(file.sequences.begin(), file.sequences.end());
    const Dataset joined = Dataset::join(ds.findings(), file);
    EXPECT_EQ(joined.labels(), ds.labels());
    EXPECT_EQ(joined.finding_ids(), ds.finding_ids());
    file.sequences.pop_back();
    EXPECT_THROW(Dataset::join(ds.findings(), file), Error);
}

TEST(Split, TenSubjectsIntoFivePairs) {
    const Dataset ds = toy_dataset(10, 3, 2, 3);
    const auto groups = split_subjects(ds, 5, 11);
    ASSERT_EQ(groups.size(), 5u);
    for (const auto& g : groups) {
        EXPECT_EQ(g.size(), 2u);
    }
}

TEST(Split, TwoHundredThirtyOneSubjects) {
    const Dataset ds = toy_dataset(231, 1, 2, 4);
    const auto groups = split_subjects(ds, 5, 1);
    std::vector<std::size_t> sizes;
    for (const auto& g : groups) {
        sizes.push_back(g.size());
    }
    EXPECT_EQ(sizes, (std::vector<std::size_t>{47, 46, 46, 46, 46}));
}

TEST(Split, RandomSplitsArePartitionsWithoutLeaks) {
    Rng rng(6);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t subjects = 1 + rng.below(30);
        const Dataset ds = toy_dataset(subjects, 1 + rng.below(3), 2, rng.next_u64());
        const std::size_t k = 1 + rng.below(subjects);
        const auto groups = split_subjects(ds, k, rng.next_u64());
        std::set<std::string> seen;
        std::size_t smallest = SIZE_MAX;
        std::size_t largest = 0;
        for (const auto& g : groups) {
            smallest = std::min(smallest, g.size());
            largest = std::max(largest, g.size());
            for (const auto& s : g) {
                EXPECT_TRUE(seen.insert(s).second) << "subject in two folds";
            }
        }
        EXPECT_EQ(seen.size(), subjects);
        EXPECT_LE(largest - smallest, 1u);

        std::vector<int> covered(ds.size(), 0);
        for (std::size_t f = 0; f < k; ++f) {
            const IndexSplit split = fold_indices(ds, groups, f);
            EXPECT_EQ(split.train.size() + split.test.size(), ds.size());
            for (std::size_t i : split.test) {
                ++covered[i];
            }
        }
        for (int c : covered) {
            EXPECT_EQ(c, 1);
        }
    }
}

TEST(Split, DeterministicAndSeedSensitive) {
    const Dataset ds = toy_dataset(40, 1, 2, 7);
    EXPECT_EQ(split_subjects(ds, 5, 3), split_subjects(ds, 5, 3));
    EXPECT_NE(split_subjects(ds, 5, 3), split_subjects(ds, 5, 4));
    EXPECT_THROW(split_subjects(ds, 41, 3), Error);
    EXPECT_THROW(split_subjects(ds, 0, 3), Error);
}

TEST(Split, HoldoutIsSubjectDisjoint) {
    const Dataset ds = toy_dataset(50, 4, 2, 8);
    const IndexSplit split = split_holdout(ds, 0.2, 9);
    EXPECT_EQ(split.test.size(), 10u * 4);
    EXPECT_EQ(split.train.size(), 40u * 4);
    EXPECT_NO_THROW(check_no_subject_leak(ds.subset(split.train), ds.subset(split.test)));
    EXPECT_THROW(check_no_subject_leak(ds, split.train, split.train), Error);
}

TEST(Sampler, BalancedLabelsGiveUniformWeights) {
    const std::vector<int> labels = {0, 1, 1, 0, 1, 0};
    WeightedSampler s(labels, 1);
    for (double w : s.weights()) {
        EXPECT_EQ(w, s.weights()[0]);
    }
}

TEST(Sampler, TenPercentPositivesDrawnHalfTheTime) {
    std::vector<int> labels(1000, 0);
    for (std::size_t i = 0; i < 100; ++i) {
        labels[i * 10] = 1;
    }
    WeightedSampler s(labels, 2);
    std::size_t pos = 0;
    const std::size_t draws = 100000;
    for (std::size_t i = 0; i < draws; ++i) {
        pos += static_cast<std::size_t>(labels[s.next()]);
    }
    EXPECT_NEAR(static_cast<double>(pos) / draws, 0.5, 0.01);
}

TEST(Sampler, DeterministicPrefix) {
    const std::vector<int> labels = {0, 0, 0, 1, 0, 1, 0, 0};
    WeightedSampler a(labels, 3);
    WeightedSampler b(labels, 3);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(a.next(), b.next());
    }
    EXPECT_THROW(WeightedSampler(std::vector<int>{1, 1}, 0), Error);
}

TEST(TrainFold, ZeroEpochsReturnsInitialWeights) {
    const Dataset ds = toy_dataset(4, 4, 8, 9);
    const ScorerWeights init = init_weights(small_model(8), 1);
    TrainConfig cfg = small_train();
    cfg.epochs = 0;
    const FoldResult r = train_fold(cfg, init, ds, ds, 3);
    EXPECT_EQ(r.weights, init);
    EXPECT_TRUE(r.history.empty());
}

TEST(TrainFold, BitwiseDeterministic) {
    const Dataset ds = toy_dataset(6, 4, 8, 10);
    const ScorerWeights init = init_weights(small_model(8), 2);
    const FoldResult a = train_fold(small_train(), init, ds, ds, 4);
    const FoldResult b = train_fold(small_train(), init, ds, ds, 4);
    EXPECT_EQ(a.weights, b.weights);
    ASSERT_EQ(a.history.size(), 2u);
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
        EXPECT_EQ(a.history[i].val_auroc, b.history[i].val_auroc);
    }
    EXPECT_NE(a.weights, init);
    const FoldResult c = train_fold(small_train(), init, ds, ds, 5);
    EXPECT_NE(a.weights, c.weights);
}

TEST(TrainFold, FirstBatchLossIsNearLn2) {
    const Dataset ds = toy_dataset(10, 5, 8, 11);
    TrainConfig cfg = small_train();
    cfg.epochs = 1;
    cfg.batch_size = 64;  // one step over 50 findings
    for (ScorerVariant v : {ScorerVariant::kSelfAttention, ScorerVariant::kTokenIndependent}) {
        ScorerConfig m = small_model(8);
        m.variant = v;
        const FoldResult r = train_fold(cfg, init_weights(m, 3), ds, ds, 6);
        ASSERT_EQ(r.history.size(), 1u);
        EXPECT_NEAR(r.history[0].train_loss, std::log(2.0), 0.15);
    }
}

TEST(TrainFold, NonFiniteActivationsAbort) {
    Dataset ds = toy_dataset(4, 2, 8, 12);
    std::vector<Sample> samples = ds.samples();
    for (float& x : samples[0].hidden.values) {
        x = 3.0e38f;
    }
    ds = Dataset(samples);
    ScorerWeights w = init_weights(small_model(8), 4);
    for (double& x : w.input_proj_w.values()) {
        x = 1.0e300;
    }
    try {
        train_fold(small_train(), w, ds, ds, 1);
        FAIL() << "expected a non-finite abort";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
    }
}

TEST(TrainFold, WidthMismatchIsRejected) {
    const Dataset ds = toy_dataset(4, 2, 8, 13);
    try {
        train_fold(small_train(), init_weights(small_model(6), 1), ds, ds, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
    }
}

TEST(TrainFold, LearnsPlantedTokenShift) {
    SynthSpec spec;
    spec.n_subjects = 60;
    spec.findings_per_subject = 8;
    spec.dim = 16;
    spec.t_min = 3;
    spec.t_max = 6;
    spec.signal_strength = 4.0;
    spec.seed = 21;
    const Dataset ds = gen_dataset(spec);
    const IndexSplit split = split_holdout(ds, 0.25, 1);
    TrainConfig cfg = small_train();
    cfg.epochs = 5;
    cfg.batch_size = 32;
    cfg.optim.base_lr = 1e-3;
    const FoldResult r = train_fold(cfg, init_weights(small_model(16), 2), ds.subset(split.train),
                                    ds.subset(split.test), 3);
    ASSERT_EQ(r.history.size(), 5u);
    EXPECT_GE(r.history.back().val_auroc, 0.95);
}

TEST(TrainCv, IdenticalFoldsAverageToThemselves) {
    const Dataset ds = toy_dataset(6, 4, 8, 14);
    const ScorerWeights init = init_weights(small_model(8), 2);
    std::vector<ScorerWeights> folds;
    for (int i = 0; i < 5; ++i) {
        folds.push_back(train_fold(small_train(), init, ds, ds, 8).weights);
    }
    EXPECT_EQ(average_weights(folds), folds[0]);
}

TEST(TrainCv, SingleFoldValidatesOnTrainingData) {
    const Dataset ds = toy_dataset(6, 4, 8, 15);
    TrainConfig cfg = small_train();
    cfg.folds = 1;
    const CvResult r = train_cv(cfg, small_model(8), ds);
    ASSERT_EQ(r.folds.size(), 1u);
    EXPECT_EQ(r.weights, r.folds[0].weights);
    const double train_auroc = auroc({score_dataset(r.weights, ds), ds.labels()});
    EXPECT_EQ(r.folds[0].history.back().val_auroc, train_auroc);
}

TEST(TrainCv, FoldsShareInitAndParallelMatchesSequential) {
    const Dataset ds = toy_dataset(9, 3, 8, 16);
    TrainConfig cfg = small_train();
    cfg.folds = 3;
    std::vector<std::pair<std::size_t, std::size_t>> calls;
    const CvResult seq = train_cv(cfg, small_model(8), ds,
                                  [&](std::size_t fold, const EpochRecord& e) { calls.emplace_back(fold, e.epoch); });
    EXPECT_EQ(calls.size(), 6u);
    cfg.threads = 3;
    const CvResult par = train_cv(cfg, small_model(8), ds);
    EXPECT_EQ(seq.weights, par.weights);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(seq.folds[i].weights, par.folds[i].weights);
    }
    EXPECT_EQ(seq.groups.size(), 3u);
}

TEST(TrainConfigCheck, RejectsZeroBatchOrFolds) {
    TrainConfig cfg;
    cfg.batch_size = 0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = TrainConfig{};
    cfg.folds = 0;
    EXPECT_THROW(cfg.validate(), Error);
    EXPECT_EQ(steps_per_epoch(TrainConfig{}, 2400), 19u);
    EXPECT_EQ(steps_per_epoch(TrainConfig{}, 128), 1u);
}
