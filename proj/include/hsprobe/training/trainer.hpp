#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hsprobe/model/scorer.hpp"
#include "hsprobe/numcore/optim.hpp"
#include "hsprobe/training/dataset.hpp"

namespace hsprobe {

struct TrainConfig {
    std::size_t epochs = 5;
    std::size_t batch_size = 128;
    std::size_t folds = 5;
    OptimConfig optim;  // total_steps is filled in per fold
    std::uint64_t seed = 0;
    // Folds trained concurrently by train_cv; results do not depend on it.
    std::size_t threads = 1;

    // Throws kConfig on a zero batch size or fold count.
    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;  // mean batch loss over the epoch
    double val_auroc = 0.0;   // NaN when the validation set has one class
};

struct FoldResult {
    ScorerWeights weights;
    std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(std::size_t fold, const EpochRecord&)>;

// Steps per epoch: ceil(|train| / batch_size) sampler batches.
std::size_t steps_per_epoch(const TrainConfig& cfg, std::size_t train_size);

// Trains from `initial` for cfg.epochs epochs. Each step draws a batch from
// the class-balanced sampler, averages the per-finding BCE, back-propagates
// and applies AdamW at the cosine-scheduled rate. Validation AUROC is
// recorded after every epoch in eval mode. `seed` feeds the sampler and
// dropout substreams. Throws kNonFinite if a batch loss is not finite and
// kDimensionMismatch if a dataset's width differs from the model's.
FoldResult train_fold(const TrainConfig& cfg, const ScorerWeights& initial, const Dataset& train,
                      const Dataset& val, std::uint64_t seed, std::size_t fold = 0,
                      const EpochCallback& on_epoch = {});

struct CvResult {
    ScorerWeights weights;  // parameter-wise mean of the fold weights
    std::vector<FoldResult> folds;
    std::vector<std::vector<std::string>> groups;  // validation subjects per fold
};

// k-fold cross-validation with subject-level folds. Every fold starts from
// the same initial weights (init substream of cfg.seed). With one fold the
// model trains and validates on all of ds.
CvResult train_cv(const TrainConfig& cfg, const ScorerConfig& model, const Dataset& ds,
                  const EpochCallback& on_epoch = {});

// Eval-mode scores in dataset order.
std::vector<double> score_dataset(const ScorerWeights& w, const Dataset& ds);

}  // namespace hsprobe
