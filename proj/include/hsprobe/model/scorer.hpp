#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hsprobe/hidden_seq.hpp"
#include "hsprobe/numcore/autograd.hpp"
#include "hsprobe/numcore/tensor.hpp"
#include "hsprobe/rng.hpp"

namespace hsprobe {

enum class ScorerVariant {
    kSelfAttention,
    // Ablation: each token scored on its own, token probabilities mean-pooled.
    kTokenIndependent,
};

std::string_view variant_name(ScorerVariant v) noexcept;
ScorerVariant parse_variant(std::string_view name);

struct ScorerConfig {
    std::size_t input_dim = 4096;
    std::size_t latent_dim = 1024;
    std::size_t num_heads = 8;
    std::size_t head_dim = 128;
    double dropout_p = 0.1;
    std::size_t layer_index = 16;  // metadata only
    ScorerVariant variant = ScorerVariant::kSelfAttention;
    // Switch for the permutation-invariance check; always on in normal use.
    bool positional_encoding = true;

    void validate() const;

    friend bool operator==(const ScorerConfig&, const ScorerConfig&) = default;
};

// All learnable parameters. Linear weights are stored [fan_in, fan_out] so a
// projection is tokens * W + b.
struct ScorerWeights {
    ScorerConfig config;
    Tensor input_proj_w, input_proj_b;
    Tensor q_proj_w, q_proj_b;
    Tensor k_proj_w, k_proj_b;
    Tensor v_proj_w, v_proj_b;
    Tensor post_proj_w, post_proj_b;
    Tensor head_w, head_b;

    static constexpr std::size_t kParamCount = 12;

    // Fixed parameter order used by persistence, averaging and the optimizer.
    static const std::array<std::string_view, kParamCount>& param_names();
    std::array<Tensor*, kParamCount> params();
    std::array<const Tensor*, kParamCount> params() const;

    friend bool operator==(const ScorerWeights&, const ScorerWeights&) = default;
};

// Zero-filled weights with the shapes implied by cfg.
ScorerWeights zero_weights(const ScorerConfig& cfg);

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias;
// deterministic given seed.
ScorerWeights init_weights(const ScorerConfig& cfg, std::uint64_t seed);

// Parameter-wise arithmetic mean. All sets must share one config.
ScorerWeights average_weights(std::span<const ScorerWeights> sets);

enum class Mode { kTrain, kEval };

struct RiskScore {
    double value = 0.5;
    // Self-attention: head- and query-averaged attention per key token.
    std::vector<double> attention;
    // Token-independent: per-token probabilities.
    std::vector<double> token_scores;
};

// Parameter leaves bound to a tape.
struct ScorerVars {
    std::array<Var, ScorerWeights::kParamCount> params;

    static ScorerVars trainable(Tape& tape, const ScorerWeights& w);
    static ScorerVars frozen(Tape& tape, const ScorerWeights& w);
};

struct ForwardResult {
    Var probability;  // [1,1]
    std::vector<double> attention;
    std::vector<double> token_scores;
};

// Differentiable forward pass for either variant. `rng` is required in train
// mode (attention dropout) and ignored in eval mode.
ForwardResult forward(Tape& tape, const ScorerVars& vars, const ScorerConfig& cfg,
                      const Tensor& tokens, Mode mode, Rng* rng);

// Self-attention scorer: input_proj, + sinusoidal PE, q/k/v, multi-head scaled
// dot-product attention, mean-pool over tokens, post_proj, head, sigmoid.
RiskScore score_finding(const ScorerWeights& w, const HiddenSeq& hs, Mode mode = Mode::kEval,
                        Rng* rng = nullptr);
RiskScore score_finding(const ScorerWeights& w, const Tensor& tokens, Mode mode = Mode::kEval,
                        Rng* rng = nullptr);

// Token-independent ablation: input_proj, post_proj, head, sigmoid per token,
// then the mean of token probabilities. No positional embedding, no attention.
RiskScore score_finding_tokenwise(const ScorerWeights& w, const HiddenSeq& hs);
RiskScore score_finding_tokenwise(const ScorerWeights& w, const Tensor& tokens);

// Dispatches on w.config.variant (eval mode).
RiskScore score(const ScorerWeights& w, const HiddenSeq& hs);

}  // namespace hsprobe
