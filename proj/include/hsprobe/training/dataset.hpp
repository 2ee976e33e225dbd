#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hsprobe/findings/finding.hpp"
#include "hsprobe/hidden_seq.hpp"
#include "hsprobe/io/rxhs.hpp"

namespace hsprobe {

struct Sample {
    Finding finding;
    HiddenSeq hidden;

    int label() const noexcept { return finding.label && finding.label->hallucinated ? 1 : 0; }
};

// Labelled findings paired with their hidden states.
class Dataset {
public:
    Dataset() = default;
    // Throws kInvalidArgument on an unlabelled finding, a hidden sequence with
    // another id, or a token count disagreeing with the sequence; throws
    // kDimensionMismatch on mixed widths.
    explicit Dataset(std::vector<Sample> samples);

    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    std::size_t dim() const noexcept { return dim_; }
    const Sample& operator[](std::size_t i) const { return samples_.at(i); }
    const std::vector<Sample>& samples() const noexcept { return samples_; }

    std::vector<int> labels() const;
    std::vector<std::string> finding_ids() const;
    // subject_id -> indices in dataset order; subjects in sorted order.
    const std::map<std::string, std::vector<std::size_t>>& subject_index() const noexcept {
        return subjects_;
    }
    std::vector<std::string> subjects() const;

    Dataset subset(std::span<const std::size_t> indices) const;

    // Pairs findings with hidden states by finding id, in findings order.
    static Dataset join(const std::vector<Finding>& findings, const io::HiddenStateFile& hidden);

    io::HiddenStateFile hidden_state_file(std::size_t layer_index) const;
    std::vector<Finding> findings() const;

private:
    std::vector<Sample> samples_;
    std::size_t dim_ = 0;
    std::map<std::string, std::vector<std::size_t>> subjects_;
};

}  // namespace hsprobe
