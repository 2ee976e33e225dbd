#include "hsprobe/training/split.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hsprobe/error.hpp"
#include "hsprobe/rng.hpp"

namespace hsprobe {

namespace {

std::vector<std::string> shuffled_subjects(const Dataset& ds, std::uint64_t seed) {
    std::vector<std::string> subjects = ds.subjects();
    Rng rng(seed);
    for (std::size_t i = subjects.size(); i > 1; --i) {
        std::swap(subjects[i - 1], subjects[static_cast<std::size_t>(rng.below(i))]);
    }
    return subjects;
}

std::vector<std::size_t> indices_of(const Dataset& ds, const std::set<std::string>& subjects) {
    std::vector<std::size_t> out;
    for (const auto& [subject, idx] : ds.subject_index()) {
        if (subjects.count(subject) != 0) {
            out.insert(out.end(), idx.begin(), idx.end());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& sorted) {
    std::vector<std::size_t> out;
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (j < sorted.size() && sorted[j] == i) {
            ++j;
        } else {
            out.push_back(i);
        }
    }
    return out;
}

}  // namespace

std::vector<std::vector<std::string>> split_subjects(const Dataset& ds, std::size_t k, std::uint64_t seed) {
    require(k >= 1, ErrorCode::kInvalidArgument, "need at least one fold");
    const std::size_t subjects = ds.subject_index().size();
    require(subjects >= k, ErrorCode::kInvalidArgument,
            std::to_string(subjects) + " subjects cannot fill " + std::to_string(k) + " folds");
    std::vector<std::vector<std::string>> groups(k);
    const auto order = shuffled_subjects(ds, derive_seed(seed, "folds"));
    for (std::size_t i = 0; i < order.size(); ++i) {
        groups[i % k].push_back(order[i]);
    }
    return groups;
}

IndexSplit fold_indices(const Dataset& ds, const std::vector<std::vector<std::string>>& groups,
                        std::size_t fold) {
    require(fold < groups.size(), ErrorCode::kInvalidArgument, "fold index out of range");
    IndexSplit out;
    out.test = indices_of(ds, {groups[fold].begin(), groups[fold].end()});
    out.train = complement(ds.size(), out.test);
    check_no_subject_leak(ds, out.train, out.test);
    return out;
}

IndexSplit split_holdout(const Dataset& ds, double fraction, std::uint64_t seed) {
    require(fraction > 0.0 && fraction < 1.0, ErrorCode::kInvalidArgument,
            "holdout fraction must lie in (0,1)");
    const auto order = shuffled_subjects(ds, derive_seed(seed, "holdout"));
    require(order.size() >= 2, ErrorCode::kInvalidArgument, "holdout needs at least two subjects");
    auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(order.size())));
    take = std::clamp<std::size_t>(take, 1, order.size() - 1);
    IndexSplit out;
    out.test = indices_of(ds, {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take)});
    out.train = complement(ds.size(), out.test);
    check_no_subject_leak(ds, out.train, out.test);
    return out;
}

void check_no_subject_leak(const Dataset& ds, std::span<const std::size_t> a, std::span<const std::size_t> b) {
    std::set<std::string> seen;
    for (std::size_t i : a) {
        seen.insert(ds[i].finding.subject_id);
    }
    for (std::size_t i : b) {
        require(seen.count(ds[i].finding.subject_id) == 0, ErrorCode::kInvalidArgument,
                "subject '" + ds[i].finding.subject_id + "' appears on both sides of a split");
    }
}

void check_no_subject_leak(const Dataset& a, const Dataset& b) {
    for (const auto& [subject, _] : b.subject_index()) {
        require(a.subject_index().count(subject) == 0, ErrorCode::kInvalidArgument,
                "subject '" + subject + "' appears on both sides of a split");
    }
}

}  // namespace hsprobe
