#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace hsprobe {

enum class Category { kLungs, kPleural, kCardiomediastinal, kMusculoskeletal, kDevices, kOther };

inline constexpr std::array<Category, 6> kAllCategories = {
    Category::kLungs,           Category::kPleural, Category::kCardiomediastinal,
    Category::kMusculoskeletal, Category::kDevices, Category::kOther};

std::string_view category_name(Category c) noexcept;
Category parse_category(std::string_view name);

enum class Entailment { kCompletely, kPartially, kNotEntailed };

inline constexpr std::array<Entailment, 3> kAllEntailments = {
    Entailment::kCompletely, Entailment::kPartially, Entailment::kNotEntailed};

std::string_view entailment_name(Entailment e) noexcept;
Entailment parse_entailment(std::string_view name);

// A finding is hallucinated unless it is completely entailed by the reference
// report.
struct HallucinationLabel {
    Entailment entailment = Entailment::kCompletely;
    bool hallucinated = false;

    static HallucinationLabel from(Entailment e) noexcept {
        return {e, e != Entailment::kCompletely};
    }

    friend bool operator==(const HallucinationLabel&, const HallucinationLabel&) = default;
};

// Severity tiers: 1 emergency, 2 actionable non-emergency, 3 clinically
// insignificant, 4 other. Tiers 1-2 are clinically significant.
inline bool clinically_significant(int tier) noexcept { return tier == 1 || tier == 2; }

// One atomic claim from a generated report.
struct Finding {
    std::string finding_id;
    std::string study_id;
    std::string subject_id;
    std::string text;
    std::size_t token_count = 1;
    Category category = Category::kOther;
    std::optional<int> severity_tier;
    std::optional<HallucinationLabel> label;

    // Throws kInvalidArgument on an empty id/text, T == 0, a tier outside
    // 1..4 or a label whose flag disagrees with its entailment.
    void validate() const;

    friend bool operator==(const Finding&, const Finding&) = default;
};

}  // namespace hsprobe
