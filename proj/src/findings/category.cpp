#include "hsprobe/findings/category.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "hsprobe/error.hpp"
#include "hsprobe/io/binary.hpp"

namespace hsprobe {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '_';
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> content_lines(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (!line.empty()) {
            out.push_back(line);
        }
    }
    return out;
}

}  // namespace

std::filesystem::path resource_path(const std::string& name) {
    if (const char* dir = std::getenv("HSPROBE_RESOURCE_DIR")) {
        return std::filesystem::path(dir) / name;
    }
    return std::filesystem::path(HSPROBE_RESOURCE_DIR) / name;
}

bool contains_keyword(std::string_view text, std::string_view keyword) {
    if (keyword.empty()) {
        return false;
    }
    const std::string hay = lower(text);
    const std::string needle = lower(keyword);
    for (std::size_t pos = hay.find(needle); pos != std::string::npos;
         pos = hay.find(needle, pos + 1)) {
        const bool left_ok = pos == 0 || !is_word_char(hay[pos - 1]);
        const std::size_t end = pos + needle.size();
        const bool right_ok = end == hay.size() || !is_word_char(hay[end]);
        if (left_ok && right_ok) {
            return true;
        }
    }
    return false;
}

CategoryRules::CategoryRules(std::vector<CategoryRule> rules) : rules_(std::move(rules)) {}

CategoryRules CategoryRules::parse(std::string_view text) {
    std::vector<CategoryRule> rules;
    for (const std::string& line : content_lines(text)) {
        const auto colon = line.find(':');
        require(colon != std::string::npos, ErrorCode::kConfig,
                "category rule without ':' -> '" + line + "'");
        CategoryRule rule;
        try {
            rule.category = parse_category(trim(std::string_view(line).substr(0, colon)));
        } catch (const Error& e) {
            fail(ErrorCode::kConfig, e.what());
        }
        std::istringstream items(line.substr(colon + 1));
        std::string kw;
        while (std::getline(items, kw, ',')) {
            kw = trim(kw);
            if (!kw.empty()) {
                rule.keywords.push_back(kw);
            }
        }
        require(!rule.keywords.empty(), ErrorCode::kConfig, "category rule with no keywords");
        rules.push_back(std::move(rule));
    }
    return CategoryRules(std::move(rules));
}

CategoryRules CategoryRules::load(const std::filesystem::path& path) {
    return parse(io::read_text_file(path));
}

const CategoryRules& CategoryRules::builtin() {
    static const CategoryRules rules = load(resource_path("categories.txt"));
    return rules;
}

Category CategoryRules::assign(std::string_view text) const {
    for (const CategoryRule& rule : rules_) {
        for (const std::string& kw : rule.keywords) {
            if (contains_keyword(text, kw)) {
                return rule.category;
            }
        }
    }
    return Category::kOther;
}

Category assign_category(const Finding& f, const CategoryRules& rules) { return rules.assign(f.text); }

std::vector<std::string> parse_keyword_list(std::string_view text) { return content_lines(text); }

std::vector<std::string> load_keyword_list(const std::filesystem::path& path) {
    return parse_keyword_list(io::read_text_file(path));
}

const std::vector<std::string>& builtin_keywords() {
    static const std::vector<std::string> keywords = load_keyword_list(resource_path("keywords.txt"));
    return keywords;
}

}  // namespace hsprobe
