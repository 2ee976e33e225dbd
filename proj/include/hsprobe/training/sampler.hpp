#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hsprobe/rng.hpp"

namespace hsprobe {

// Draws indices with replacement, each with weight 1 / (size of its class),
// so both classes are drawn equally often in expectation.
class WeightedSampler {
public:
    // Throws kInvalidArgument unless both labels 0 and 1 occur.
    WeightedSampler(std::span<const int> labels, std::uint64_t seed);

    std::size_t next();
    const std::vector<double>& weights() const noexcept { return weights_; }

private:
    std::vector<double> weights_;
    std::vector<double> cumulative_;
    Rng rng_;
};

}  // namespace hsprobe
