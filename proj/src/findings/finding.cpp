#include "hsprobe/findings/finding.hpp"

#include "hsprobe/error.hpp"

namespace hsprobe {

std::string_view category_name(Category c) noexcept {
    switch (c) {
        case Category::kLungs: return "lungs";
        case Category::kPleural: return "pleural";
        case Category::kCardiomediastinal: return "cardiomediastinal";
        case Category::kMusculoskeletal: return "musculoskeletal";
        case Category::kDevices: return "devices";
        case Category::kOther: return "other";
    }
    return "other";
}

Category parse_category(std::string_view name) {
    for (Category c : kAllCategories) {
        if (category_name(c) == name) {
            return c;
        }
    }
    fail(ErrorCode::kInvalidArgument, "unknown category '" + std::string(name) + "'");
}

std::string_view entailment_name(Entailment e) noexcept {
    switch (e) {
        case Entailment::kCompletely: return "completely";
        case Entailment::kPartially: return "partially";
        case Entailment::kNotEntailed: return "not_entailed";
    }
    return "not_entailed";
}

Entailment parse_entailment(std::string_view name) {
    for (Entailment e : kAllEntailments) {
        if (entailment_name(e) == name) {
            return e;
        }
    }
    fail(ErrorCode::kInvalidArgument, "unknown entailment '" + std::string(name) + "'");
}

void Finding::validate() const {
    require(!finding_id.empty(), ErrorCode::kInvalidArgument, "finding has an empty id");
    require(!text.empty(), ErrorCode::kInvalidArgument, "finding '" + finding_id + "' has empty text");
    require(token_count >= 1, ErrorCode::kInvalidArgument,
            "finding '" + finding_id + "' has token_count 0");
    if (severity_tier) {
        require(*severity_tier >= 1 && *severity_tier <= 4, ErrorCode::kInvalidArgument,
                "finding '" + finding_id + "' has severity tier outside 1..4");
    }
    if (label) {
        require(label->hallucinated == (label->entailment != Entailment::kCompletely),
                ErrorCode::kInvalidArgument,
                "finding '" + finding_id + "' label disagrees with its entailment");
    }
}

}  // namespace hsprobe
