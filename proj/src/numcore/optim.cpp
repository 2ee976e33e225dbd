#include "hsprobe/numcore/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hsprobe/error.hpp"

namespace hsprobe {

void OptimConfig::validate() const {
    require(base_lr > 0.0, ErrorCode::kConfig, "base_lr must be > 0");
    require(beta1 > 0.0 && beta1 < 1.0, ErrorCode::kConfig, "beta1 must lie in (0, 1)");
    require(beta2 > 0.0 && beta2 < 1.0, ErrorCode::kConfig, "beta2 must lie in (0, 1)");
    require(weight_decay >= 0.0, ErrorCode::kConfig, "weight_decay must be >= 0");
    require(eps > 0.0, ErrorCode::kConfig, "eps must be > 0");
    require(total_steps >= 1, ErrorCode::kConfig, "total_steps must be >= 1");
}

double cosine_lr(std::size_t step, const OptimConfig& cfg) {
    require(step <= cfg.total_steps, ErrorCode::kInvalidArgument,
            "cosine_lr step " + std::to_string(step) + " exceeds total_steps " +
                std::to_string(cfg.total_steps));
    const double progress = static_cast<double>(step) / static_cast<double>(cfg.total_steps);
    const double lr = cfg.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
    return lr < 0.0 ? 0.0 : lr;
}

AdamWState AdamWState::for_params(std::span<const Tensor> params) {
    AdamWState s;
    for (const Tensor& p : params) {
        s.first_moment.emplace_back(p.shape(), 0.0);
        s.second_moment.emplace_back(p.shape(), 0.0);
    }
    return s;
}

void adamw_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamWState& state,
                const OptimConfig& cfg, double lr) {
    require(params.size() == grads.size() && params.size() == state.first_moment.size() &&
                params.size() == state.second_moment.size(),
            ErrorCode::kDimensionMismatch, "adamw_step: parameter/gradient/state count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        require(params[i].same_shape(grads[i]) && params[i].same_shape(state.first_moment[i]) &&
                    params[i].same_shape(state.second_moment[i]),
                ErrorCode::kDimensionMismatch,
                "adamw_step: shape mismatch at parameter " + std::to_string(i));
        require(grads[i].all_finite(), ErrorCode::kNonFinite,
                "adamw_step: non-finite gradient at parameter " + std::to_string(i));
    }

    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bias1 = 1.0 - std::pow(cfg.beta1, t);
    const double bias2 = 1.0 - std::pow(cfg.beta2, t);
    const double decay = lr * cfg.weight_decay;

    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i].values();
        auto g = grads[i].values();
        auto m = state.first_moment[i].values();
        auto v = state.second_moment[i].values();
        for (std::size_t j = 0; j < p.size(); ++j) {
            p[j] -= decay * p[j];
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            const double m_hat = m[j] / bias1;
            const double v_hat = v[j] / bias2;
            p[j] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
        }
    }
}

}  // namespace hsprobe
