#include "hsprobe/model/scorer.hpp"

#include <cmath>

#include "hsprobe/error.hpp"

namespace hsprobe {

namespace {

enum ParamIndex : std::size_t {
    kInputW, kInputB, kQW, kQB, kKW, kKB, kVW, kVB, kPostW, kPostB, kHeadW, kHeadB,
};

void check_tokens(const ScorerConfig& cfg, const Tensor& tokens) {
    require(tokens.rank() == 2 && tokens.rows() >= 1, ErrorCode::kInvalidArgument,
            "scorer input must be a non-empty T x d matrix");
    require(tokens.cols() == cfg.input_dim, ErrorCode::kDimensionMismatch,
            "hidden-state width " + std::to_string(tokens.cols()) + " does not match input_dim " +
                std::to_string(cfg.input_dim));
}

Var linear(Var x, Var w, Var b) { return ad::add_bias(ad::matmul(x, w), b); }

ForwardResult forward_self_attention(Tape& tape, const ScorerVars& v, const ScorerConfig& cfg,
                                     const Tensor& tokens, Mode mode, Rng* rng) {
    const std::size_t length = tokens.rows();
    const auto& p = v.params;

    Var h = linear(tape.view(tokens), p[kInputW], p[kInputB]);
    if (cfg.positional_encoding) {
        h = ad::add(h, tape.constant(sinusoidal_pe(length, cfg.latent_dim)));
    }
    const Var q = linear(h, p[kQW], p[kQB]);
    const Var k = linear(h, p[kKW], p[kKB]);
    const Var val = linear(h, p[kVW], p[kVB]);

    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim));
    const bool dropout = mode == Mode::kTrain && cfg.dropout_p > 0.0;
    const double keep = 1.0 - cfg.dropout_p;

    std::vector<double> attention(length, 0.0);
    std::vector<Var> heads;
    heads.reserve(cfg.num_heads);
    for (std::size_t head = 0; head < cfg.num_heads; ++head) {
        const std::size_t off = head * cfg.head_dim;
        const Var qh = ad::slice_cols(q, off, cfg.head_dim);
        const Var kh = ad::slice_cols(k, off, cfg.head_dim);
        const Var vh = ad::slice_cols(val, off, cfg.head_dim);
        const Var scores = ad::scale(ad::matmul(qh, ad::transpose(kh)), inv_sqrt);
        Var probs = ad::softmax_rows(scores);

        const Tensor& pv = probs.value();
        for (std::size_t r = 0; r < length; ++r) {
            for (std::size_t c = 0; c < length; ++c) {
                attention[c] += pv(r, c);
            }
        }

        if (dropout) {
            Tensor mask = Tensor::matrix(length, length);
            for (double& m : mask.values()) {
                m = rng->bernoulli(keep) ? 1.0 / keep : 0.0;
            }
            probs = ad::mul_const(probs, mask);
        }
        heads.push_back(ad::matmul(probs, vh));
    }
    const double norm = 1.0 / static_cast<double>(cfg.num_heads * length);
    for (double& a : attention) {
        a *= norm;
    }

    const Var pooled = ad::mean_rows(ad::concat_cols(heads));
    const Var post = linear(pooled, p[kPostW], p[kPostB]);
    const Var logit = linear(post, p[kHeadW], p[kHeadB]);
    return ForwardResult{ad::sigmoid(logit), std::move(attention), {}};
}

ForwardResult forward_tokenwise(Tape& tape, const ScorerVars& v, const Tensor& tokens) {
    const auto& p = v.params;
    const Var h = linear(tape.view(tokens), p[kInputW], p[kInputB]);
    const Var post = linear(h, p[kPostW], p[kPostB]);
    const Var token_probs = ad::sigmoid(linear(post, p[kHeadW], p[kHeadB]));
    const Tensor& tp = token_probs.value();
    std::vector<double> token_scores(tp.values().begin(), tp.values().end());
    return ForwardResult{ad::mean_rows(token_probs), {}, std::move(token_scores)};
}

void fill_uniform(Tensor& t, double bound, Rng& rng) {
    for (double& x : t.values()) {
        x = rng.uniform(-bound, bound);
    }
}

}  // namespace

std::string_view variant_name(ScorerVariant v) noexcept {
    return v == ScorerVariant::kSelfAttention ? "self_attention" : "token_independent";
}

ScorerVariant parse_variant(std::string_view name) {
    if (name == "self_attention") {
        return ScorerVariant::kSelfAttention;
    }
    if (name == "token_independent") {
        return ScorerVariant::kTokenIndependent;
    }
    fail(ErrorCode::kConfig, "unknown scorer variant '" + std::string(name) + "'");
}

void ScorerConfig::validate() const {
    require(input_dim >= 1, ErrorCode::kConfig, "input_dim must be >= 1");
    require(latent_dim >= 2 && latent_dim % 2 == 0, ErrorCode::kConfig,
            "latent_dim must be even and >= 2 (sinusoidal embeddings)");
    require(num_heads >= 1 && head_dim >= 1, ErrorCode::kConfig, "num_heads and head_dim must be >= 1");
    require(num_heads * head_dim == latent_dim, ErrorCode::kConfig,
            "num_heads * head_dim must equal latent_dim");
    require(dropout_p >= 0.0 && dropout_p < 1.0, ErrorCode::kConfig, "dropout_p must lie in [0, 1)");
}

const std::array<std::string_view, ScorerWeights::kParamCount>& ScorerWeights::param_names() {
    static const std::array<std::string_view, kParamCount> names = {
        "input_proj.weight", "input_proj.bias", "q_proj.weight",    "q_proj.bias",
        "k_proj.weight",     "k_proj.bias",     "v_proj.weight",    "v_proj.bias",
        "post_proj.weight",  "post_proj.bias",  "head.weight",      "head.bias",
    };
    return names;
}

std::array<Tensor*, ScorerWeights::kParamCount> ScorerWeights::params() {
    return {&input_proj_w, &input_proj_b, &q_proj_w,    &q_proj_b,    &k_proj_w, &k_proj_b,
            &v_proj_w,     &v_proj_b,     &post_proj_w, &post_proj_b, &head_w,   &head_b};
}

std::array<const Tensor*, ScorerWeights::kParamCount> ScorerWeights::params() const {
    return {&input_proj_w, &input_proj_b, &q_proj_w,    &q_proj_b,    &k_proj_w, &k_proj_b,
            &v_proj_w,     &v_proj_b,     &post_proj_w, &post_proj_b, &head_w,   &head_b};
}

ScorerWeights zero_weights(const ScorerConfig& cfg) {
    cfg.validate();
    const std::size_t d = cfg.input_dim;
    const std::size_t l = cfg.latent_dim;
    ScorerWeights w;
    w.config = cfg;
    w.input_proj_w = Tensor({d, l});
    w.input_proj_b = Tensor({l});
    for (auto [mat, bias] : {std::pair{&w.q_proj_w, &w.q_proj_b}, std::pair{&w.k_proj_w, &w.k_proj_b},
                             std::pair{&w.v_proj_w, &w.v_proj_b},
                             std::pair{&w.post_proj_w, &w.post_proj_b}}) {
        *mat = Tensor({l, l});
        *bias = Tensor({l});
    }
    w.head_w = Tensor({l, 1});
    w.head_b = Tensor({1});
    return w;
}

ScorerWeights init_weights(const ScorerConfig& cfg, std::uint64_t seed) {
    ScorerWeights w = zero_weights(cfg);
    Rng rng(seed);
    // Params alternate weight/bias; weights are [fan_in, fan_out] and each
    // bias shares its weight's fan_in.
    const auto p = w.params();
    for (std::size_t i = 0; i < p.size(); i += 2) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(p[i]->rows()));
        fill_uniform(*p[i], bound, rng);
        fill_uniform(*p[i + 1], bound, rng);
    }
    return w;
}

ScorerWeights average_weights(std::span<const ScorerWeights> sets) {
    require(!sets.empty(), ErrorCode::kInvalidArgument, "average_weights of an empty list");
    for (const ScorerWeights& s : sets) {
        require(s.config == sets.front().config, ErrorCode::kConfig,
                "average_weights: weight sets have different configs");
    }
    // Mean as first + mean(x - first), so identical sets average to
    // themselves exactly.
    const ScorerWeights& first = sets.front();
    ScorerWeights sum = zero_weights(first.config);
    const auto base = first.params();
    const auto acc = sum.params();
    for (const ScorerWeights& s : sets) {
        const auto src = s.params();
        for (std::size_t i = 0; i < acc.size(); ++i) {
            require(src[i]->same_shape(*acc[i]), ErrorCode::kDimensionMismatch,
                    "average_weights: parameter shape does not match config");
            for (std::size_t j = 0; j < acc[i]->size(); ++j) {
                (*acc[i])[j] += (*src[i])[j] - (*base[i])[j];
            }
        }
    }
    const double k = static_cast<double>(sets.size());
    ScorerWeights out = first;
    const auto dst = out.params();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        for (std::size_t j = 0; j < dst[i]->size(); ++j) {
            (*dst[i])[j] += (*acc[i])[j] / k;
        }
    }
    return out;
}

ScorerVars ScorerVars::trainable(Tape& tape, const ScorerWeights& w) {
    ScorerVars v;
    const auto p = w.params();
    for (std::size_t i = 0; i < p.size(); ++i) {
        v.params[i] = tape.param(*p[i]);
    }
    return v;
}

ScorerVars ScorerVars::frozen(Tape& tape, const ScorerWeights& w) {
    ScorerVars v;
    const auto p = w.params();
    for (std::size_t i = 0; i < p.size(); ++i) {
        v.params[i] = tape.view(*p[i]);
    }
    return v;
}

ForwardResult forward(Tape& tape, const ScorerVars& vars, const ScorerConfig& cfg,
                      const Tensor& tokens, Mode mode, Rng* rng) {
    check_tokens(cfg, tokens);
    if (cfg.variant == ScorerVariant::kTokenIndependent) {
        return forward_tokenwise(tape, vars, tokens);
    }
    require(mode == Mode::kEval || cfg.dropout_p == 0.0 || rng != nullptr,
            ErrorCode::kInvalidArgument, "train-mode scoring needs an rng for dropout");
    return forward_self_attention(tape, vars, cfg, tokens, mode, rng);
}

RiskScore score_finding(const ScorerWeights& w, const Tensor& tokens, Mode mode, Rng* rng) {
    ScorerConfig cfg = w.config;
    cfg.variant = ScorerVariant::kSelfAttention;
    check_tokens(cfg, tokens);
    require(mode == Mode::kEval || cfg.dropout_p == 0.0 || rng != nullptr,
            ErrorCode::kInvalidArgument, "train-mode scoring needs an rng for dropout");
    Tape tape;
    const ScorerVars vars = ScorerVars::frozen(tape, w);
    ForwardResult r = forward_self_attention(tape, vars, cfg, tokens, mode, rng);
    return RiskScore{r.probability.value()[0], std::move(r.attention), {}};
}

RiskScore score_finding(const ScorerWeights& w, const HiddenSeq& hs, Mode mode, Rng* rng) {
    return score_finding(w, hs.to_tensor(), mode, rng);
}

RiskScore score_finding_tokenwise(const ScorerWeights& w, const Tensor& tokens) {
    check_tokens(w.config, tokens);
    Tape tape;
    const ScorerVars vars = ScorerVars::frozen(tape, w);
    ForwardResult r = forward_tokenwise(tape, vars, tokens);
    return RiskScore{r.probability.value()[0], {}, std::move(r.token_scores)};
}

RiskScore score_finding_tokenwise(const ScorerWeights& w, const HiddenSeq& hs) {
    return score_finding_tokenwise(w, hs.to_tensor());
}

RiskScore score(const ScorerWeights& w, const HiddenSeq& hs) {
    if (w.config.variant == ScorerVariant::kTokenIndependent) {
        return score_finding_tokenwise(w, hs);
    }
    return score_finding(w, hs);
}

}  // namespace hsprobe
