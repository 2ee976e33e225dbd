#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hsprobe/numcore/autograd.hpp"

namespace hsprobe {

// Builds a scalar loss on `tape` from the given parameter leaves. Inputs are
// captured by the closure; it must be deterministic (eval mode, no dropout).
using LossFn = std::function<Var(Tape& tape, std::span<const Var> params)>;

struct GradCheckOptions {
    double eps = 1e-5;
    // Coordinates sampled per parameter tensor; 0 checks every coordinate.
    std::size_t coords_per_param = 0;
    std::uint64_t seed = 0;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t coords_checked = 0;
    std::size_t worst_param = 0;
    std::size_t worst_coord = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

// Compares reverse-mode gradients against central finite differences.
// Error per coordinate is |a - n| / max(1, |a|, |n|). Throws
// kInvalidArgument when two evaluations at the same point disagree.
GradCheckResult grad_check(const LossFn& loss_fn, std::vector<Tensor> params,
                           const GradCheckOptions& options = {});

}  // namespace hsprobe
