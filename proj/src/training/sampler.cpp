#include "hsprobe/training/sampler.hpp"

#include <algorithm>

#include "hsprobe/error.hpp"

namespace hsprobe {

WeightedSampler::WeightedSampler(std::span<const int> labels, std::uint64_t seed) : rng_(seed) {
    std::size_t counts[2] = {0, 0};
    for (int y : labels) {
        require(y == 0 || y == 1, ErrorCode::kInvalidArgument, "sampler labels must be 0 or 1");
        ++counts[y];
    }
    require(counts[0] > 0 && counts[1] > 0, ErrorCode::kInvalidArgument,
            "weighted sampling needs both classes present");
    weights_.reserve(labels.size());
    cumulative_.reserve(labels.size());
    double total = 0.0;
    for (int y : labels) {
        const double w = 1.0 / static_cast<double>(counts[y]);
        weights_.push_back(w);
        total += w;
        cumulative_.push_back(total);
    }
}

std::size_t WeightedSampler::next() {
    const double u = rng_.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
}

}  // namespace hsprobe
