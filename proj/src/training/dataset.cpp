#include "hsprobe/training/dataset.hpp"

#include <unordered_map>

#include "hsprobe/error.hpp"
#include "hsprobe/findings/records.hpp"

namespace hsprobe {

Dataset::Dataset(std::vector<Sample> samples) : samples_(std::move(samples)) {
    std::vector<Finding> findings;
    findings.reserve(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const Sample& s = samples_[i];
        s.finding.validate();
        s.hidden.validate();
        require(s.finding.label.has_value(), ErrorCode::kInvalidArgument,
                "finding '" + s.finding.finding_id + "' has no hallucination label");
        require(s.hidden.finding_id == s.finding.finding_id, ErrorCode::kInvalidArgument,
                "hidden sequence '" + s.hidden.finding_id + "' paired with finding '" +
                    s.finding.finding_id + "'");
        require(s.finding.token_count == s.hidden.length(), ErrorCode::kInvalidArgument,
                "finding '" + s.finding.finding_id + "' declares " + std::to_string(s.finding.token_count) +
                    " tokens but has " + std::to_string(s.hidden.length()));
        if (i == 0) {
            dim_ = s.hidden.dim;
        }
        require(s.hidden.dim == dim_, ErrorCode::kDimensionMismatch,
                "finding '" + s.finding.finding_id + "' has width " + std::to_string(s.hidden.dim) +
                    ", expected " + std::to_string(dim_));
        subjects_[s.finding.subject_id].push_back(i);
        findings.push_back(s.finding);
    }
    check_findings_consistent(findings);
}

std::vector<int> Dataset::labels() const {
    std::vector<int> out;
    out.reserve(samples_.size());
    for (const Sample& s : samples_) {
        out.push_back(s.label());
    }
    return out;
}

std::vector<std::string> Dataset::finding_ids() const {
    std::vector<std::string> out;
    out.reserve(samples_.size());
    for (const Sample& s : samples_) {
        out.push_back(s.finding.finding_id);
    }
    return out;
}

std::vector<std::string> Dataset::subjects() const {
    std::vector<std::string> out;
    out.reserve(subjects_.size());
    for (const auto& [subject, _] : subjects_) {
        out.push_back(subject);
    }
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    std::vector<Sample> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        out.push_back(samples_.at(i));
    }
    return Dataset(std::move(out));
}

Dataset Dataset::join(const std::vector<Finding>& findings, const io::HiddenStateFile& hidden) {
    std::unordered_map<std::string, const HiddenSeq*> by_id;
    for (const HiddenSeq& hs : hidden.sequences) {
        require(by_id.emplace(hs.finding_id, &hs).second, ErrorCode::kInvalidArgument,
                "duplicate hidden sequence id '" + hs.finding_id + "'");
    }
    require(findings.size() == hidden.sequences.size(), ErrorCode::kInvalidArgument,
            std::to_string(findings.size()) + " findings but " + std::to_string(hidden.sequences.size()) +
                " hidden sequences");
    std::vector<Sample> samples;
    samples.reserve(findings.size());
    for (const Finding& f : findings) {
        const auto it = by_id.find(f.finding_id);
        require(it != by_id.end(), ErrorCode::kInvalidArgument,
                "no hidden sequence for finding '" + f.finding_id + "'");
        samples.push_back({f, *it->second});
    }
    return Dataset(std::move(samples));
}

io::HiddenStateFile Dataset::hidden_state_file(std::size_t layer_index) const {
    io::HiddenStateFile out;
    out.dim = static_cast<std::uint32_t>(dim_);
    out.layer_index = static_cast<std::uint32_t>(layer_index);
    out.sequences.reserve(samples_.size());
    for (const Sample& s : samples_) {
        out.sequences.push_back(s.hidden);
    }
    return out;
}

std::vector<Finding> Dataset::findings() const {
    std::vector<Finding> out;
    out.reserve(samples_.size());
    for (const Sample& s : samples_) {
        out.push_back(s.finding);
    }
    return out;
}

}  // namespace hsprobe
