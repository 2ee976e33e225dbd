#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hsprobe/training/dataset.hpp"

namespace hsprobe {

// Shuffles the sorted subject list with `seed` and deals it round-robin into
// k groups, so group sizes differ by at most one and earlier groups take the
// remainder. Throws kInvalidArgument when k is 0 or exceeds the subject count.
std::vector<std::vector<std::string>> split_subjects(const Dataset& ds, std::size_t k, std::uint64_t seed);

struct IndexSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Fold `fold` of `groups` becomes the test side; every other group trains.
IndexSplit fold_indices(const Dataset& ds, const std::vector<std::vector<std::string>>& groups,
                        std::size_t fold);

// Subject-level holdout: round(fraction * subjects) shuffled subjects (at
// least one, never all) go to the test side.
IndexSplit split_holdout(const Dataset& ds, double fraction, std::uint64_t seed);

// Throws kInvalidArgument when a subject has findings on both sides.
void check_no_subject_leak(const Dataset& ds, std::span<const std::size_t> a, std::span<const std::size_t> b);
void check_no_subject_leak(const Dataset& a, const Dataset& b);

}  // namespace hsprobe
