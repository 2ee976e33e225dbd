#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hsprobe/numcore/tensor.hpp"

namespace hsprobe {

struct OptimConfig {
    double base_lr = 1.0e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double weight_decay = 0.01;
    double eps = 1.0e-8;
    std::size_t total_steps = 1;

    // Throws kConfig when a field is out of range.
    void validate() const;
};

// base_lr * 0.5 * (1 + cos(pi * step / total_steps)); no warmup.
double cosine_lr(std::size_t step, const OptimConfig& cfg);

struct AdamWState {
    std::vector<Tensor> first_moment;
    std::vector<Tensor> second_moment;
    std::uint64_t step = 0;

    // Zero moments mirroring `params`.
    static AdamWState for_params(std::span<const Tensor> params);
};

// One AdamW update in place. Weight decay is decoupled: param -= lr*wd*param
// happens before, and independently of, the bias-corrected moment step.
void adamw_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamWState& state,
                const OptimConfig& cfg, double lr);

}  // namespace hsprobe
