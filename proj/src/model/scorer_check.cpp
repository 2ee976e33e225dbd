#include "hsprobe/model/scorer_check.hpp"

#include <algorithm>

#include "hsprobe/rng.hpp"

namespace hsprobe {

ScorerConfig tiny_scorer_config() {
    ScorerConfig cfg;
    cfg.input_dim = 8;
    cfg.latent_dim = 16;
    cfg.num_heads = 2;
    cfg.head_dim = 8;
    return cfg;
}

GradCheckResult check_scorer_gradients(const ScorerConfig& cfg, std::size_t tokens, std::uint64_t seed,
                                       const GradCheckOptions& options) {
    cfg.validate();
    const ScorerWeights w = init_weights(cfg, derive_seed(seed, "init"));
    Rng rng(derive_seed(seed, "tokens"));
    Tensor x = Tensor::matrix(tokens, cfg.input_dim);
    for (double& v : x.values()) {
        v = rng.normal();
    }
    std::vector<Tensor> params;
    for (const Tensor* t : w.params()) {
        params.push_back(*t);
    }
    const LossFn loss = [&](Tape& tape, std::span<const Var> p) {
        ScorerVars vars;
        std::copy(p.begin(), p.end(), vars.params.begin());
        const ForwardResult f = forward(tape, vars, cfg, x, Mode::kEval, nullptr);
        return ad::bce(f.probability, 1.0);
    };
    return grad_check(loss, std::move(params), options);
}

}  // namespace hsprobe
