#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hsprobe/findings/finding.hpp"

namespace hsprobe {

// Case-insensitive whole-word (or whole-phrase) containment. Word characters
// are letters, digits, '-' and '_'.
bool contains_keyword(std::string_view text, std::string_view keyword);

struct CategoryRule {
    Category category = Category::kOther;
    std::vector<std::string> keywords;
};

// Ordered keyword rules; the first rule with a matching keyword decides.
class CategoryRules {
public:
    explicit CategoryRules(std::vector<CategoryRule> rules);

    // Parses "category: kw, kw" lines; '#' starts a comment. Throws kConfig
    // on an unknown category or a malformed line.
    static CategoryRules parse(std::string_view text);
    static CategoryRules load(const std::filesystem::path& path);
    // resources/categories.txt
    static const CategoryRules& builtin();

    Category assign(std::string_view text) const;
    const std::vector<CategoryRule>& rules() const noexcept { return rules_; }

private:
    std::vector<CategoryRule> rules_;
};

Category assign_category(const Finding& f, const CategoryRules& rules = CategoryRules::builtin());

// One keyword per line; '#' comments and blank lines ignored.
std::vector<std::string> parse_keyword_list(std::string_view text);
std::vector<std::string> load_keyword_list(const std::filesystem::path& path);
// resources/keywords.txt
const std::vector<std::string>& builtin_keywords();

std::filesystem::path resource_path(const std::string& name);

}  // namespace hsprobe
