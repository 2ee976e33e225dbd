#include "hsprobe/training/trainer.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "hsprobe/error.hpp"
#include "hsprobe/metrics/metrics.hpp"
#include "hsprobe/rng.hpp"
#include "hsprobe/training/sampler.hpp"
#include "hsprobe/training/split.hpp"

namespace hsprobe {

void TrainConfig::validate() const {
    require(batch_size >= 1, ErrorCode::kConfig, "batch_size must be at least 1");
    require(folds >= 1, ErrorCode::kConfig, "folds must be at least 1");
    require(threads >= 1, ErrorCode::kConfig, "threads must be at least 1");
    OptimConfig probe = optim;
    probe.total_steps = 1;
    probe.validate();
}

std::size_t steps_per_epoch(const TrainConfig& cfg, std::size_t train_size) {
    return (train_size + cfg.batch_size - 1) / cfg.batch_size;
}

std::vector<double> score_dataset(const ScorerWeights& w, const Dataset& ds) {
    std::vector<double> out;
    out.reserve(ds.size());
    for (const Sample& s : ds.samples()) {
        out.push_back(score(w, s.hidden).value);
    }
    return out;
}

namespace {

double validation_auroc(const ScorerWeights& w, const Dataset& val) {
    ScoredSet s{score_dataset(w, val), val.labels()};
    if (s.positives() == 0 || s.negatives() == 0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return auroc(s);
}

void check_width(const ScorerWeights& w, const Dataset& ds, const char* which) {
    require(ds.empty() || ds.dim() == w.config.input_dim, ErrorCode::kDimensionMismatch,
            std::string(which) + " data has width " + std::to_string(ds.dim()) + " but the model expects " +
                std::to_string(w.config.input_dim));
}

}  // namespace

FoldResult train_fold(const TrainConfig& cfg, const ScorerWeights& initial, const Dataset& train,
                      const Dataset& val, std::uint64_t seed, std::size_t fold,
                      const EpochCallback& on_epoch) {
    cfg.validate();
    check_width(initial, train, "training");
    check_width(initial, val, "validation");

    FoldResult result{initial, {}};
    if (cfg.epochs == 0) {
        return result;
    }
    require(!train.empty(), ErrorCode::kInvalidArgument, "empty training set");

    const std::size_t per_epoch = steps_per_epoch(cfg, train.size());
    OptimConfig optim = cfg.optim;
    optim.total_steps = cfg.epochs * per_epoch;
    optim.validate();

    const std::vector<int> labels = train.labels();
    WeightedSampler sampler(labels, derive_seed(seed, "sampler"));
    Rng dropout(derive_seed(seed, "dropout"));

    std::vector<Tensor> tokens;
    tokens.reserve(train.size());
    for (const Sample& s : train.samples()) {
        tokens.push_back(s.hidden.to_tensor());
    }

    ScorerWeights& w = result.weights;
    const auto param_ptrs = w.params();
    std::vector<Tensor> grads;
    for (const Tensor* p : param_ptrs) {
        grads.push_back(Tensor(p->shape()));
    }
    AdamWState state = AdamWState::for_params(std::vector<Tensor>(grads));

    std::size_t step = 0;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        double loss_sum = 0.0;
        for (std::size_t b = 0; b < per_epoch; ++b, ++step) {
            for (Tensor& g : grads) {
                g = Tensor(g.shape());
            }
            double batch_loss = 0.0;
            const double inv = 1.0 / static_cast<double>(cfg.batch_size);
            for (std::size_t k = 0; k < cfg.batch_size; ++k) {
                const std::size_t idx = sampler.next();
                Tape tape;
                const ScorerVars vars = ScorerVars::trainable(tape, w);
                const ForwardResult fwd = forward(tape, vars, w.config, tokens[idx], Mode::kTrain, &dropout);
                const Var loss = ad::scale(ad::bce(fwd.probability, labels[idx]), inv);
                batch_loss += loss.value()[0];
                tape.backward(loss);
                for (std::size_t p = 0; p < grads.size(); ++p) {
                    const Tensor g = tape.grad(vars.params[p]);
                    for (std::size_t j = 0; j < g.size(); ++j) {
                        grads[p][j] += g[j];
                    }
                }
            }
            require(std::isfinite(batch_loss), ErrorCode::kNonFinite,
                    "non-finite training loss in fold " + std::to_string(fold) + ", epoch " +
                        std::to_string(epoch) + ", step " + std::to_string(step));
            loss_sum += batch_loss;

            std::vector<Tensor> params;
            params.reserve(param_ptrs.size());
            for (Tensor* p : param_ptrs) {
                params.push_back(std::move(*p));
            }
            adamw_step(params, grads, state, optim, cosine_lr(step, optim));
            for (std::size_t p = 0; p < param_ptrs.size(); ++p) {
                *param_ptrs[p] = std::move(params[p]);
            }
        }
        EpochRecord rec{epoch, loss_sum / static_cast<double>(per_epoch), validation_auroc(w, val)};
        result.history.push_back(rec);
        if (on_epoch) {
            on_epoch(fold, rec);
        }
    }
    return result;
}

CvResult train_cv(const TrainConfig& cfg, const ScorerConfig& model, const Dataset& ds,
                  const EpochCallback& on_epoch) {
    cfg.validate();
    model.validate();
    const ScorerWeights initial = init_weights(model, derive_seed(cfg.seed, "init"));

    CvResult out;
    out.folds.resize(cfg.folds);
    std::vector<Dataset> train_sets(cfg.folds);
    std::vector<Dataset> val_sets(cfg.folds);
    if (cfg.folds == 1) {
        out.groups = {ds.subjects()};
        train_sets[0] = ds;
        val_sets[0] = ds;
    } else {
        out.groups = split_subjects(ds, cfg.folds, cfg.seed);
        for (std::size_t i = 0; i < cfg.folds; ++i) {
            const IndexSplit split = fold_indices(ds, out.groups, i);
            train_sets[i] = ds.subset(split.train);
            val_sets[i] = ds.subset(split.test);
            check_no_subject_leak(train_sets[i], val_sets[i]);
        }
    }

    std::mutex callback_mutex;
    const EpochCallback serialized = [&](std::size_t fold, const EpochRecord& rec) {
        if (on_epoch) {
            const std::lock_guard lock(callback_mutex);
            on_epoch(fold, rec);
        }
    };
    auto run_fold = [&](std::size_t i) {
        out.folds[i] = train_fold(cfg, initial, train_sets[i], val_sets[i], derive_seed(cfg.seed, "fold", i),
                                  i, serialized);
    };

    const std::size_t threads = std::min(cfg.threads, cfg.folds);
    if (threads <= 1) {
        for (std::size_t i = 0; i < cfg.folds; ++i) {
            run_fold(i);
        }
    } else {
        std::vector<std::exception_ptr> errors(cfg.folds);
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t i = t; i < cfg.folds; i += threads) {
                    try {
                        run_fold(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
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

    std::vector<ScorerWeights> fold_weights;
    fold_weights.reserve(out.folds.size());
    for (const FoldResult& f : out.folds) {
        fold_weights.push_back(f.weights);
    }
    out.weights = average_weights(fold_weights);
    return out;
}

}  // namespace hsprobe
