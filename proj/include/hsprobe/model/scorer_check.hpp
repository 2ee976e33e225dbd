#pragma once

#include <cstddef>
#include <cstdint>

#include "hsprobe/model/scorer.hpp"
#include "hsprobe/numcore/gradcheck.hpp"

namespace hsprobe {

// Width 8, latent 16, 2 heads of 8.
ScorerConfig tiny_scorer_config();

// Finite-difference check of the BCE loss (label 1) through the full scorer
// on one random finding of `tokens` tokens, in eval mode.
GradCheckResult check_scorer_gradients(const ScorerConfig& cfg, std::size_t tokens, std::uint64_t seed,
                                       const GradCheckOptions& options = {});

}  // namespace hsprobe
