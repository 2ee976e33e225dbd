#include "hsprobe/findings/segment.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>

namespace hsprobe {

namespace {

// Longest heads first so "no evidence of" wins over "no".
constexpr std::array<std::string_view, 14> kNegationHeads = {
    "there is no evidence of", "there is no", "there are no", "no evidence of",
    "no signs of",             "no sign of",  "negative for", "free of",
    "without evidence of",     "without",     "absence of",   "no definite",
    "no new",                  "no"};

constexpr std::array<std::string_view, 18> kPredicates = {
    " is seen",       " are seen",       " is identified", " are identified",
    " is present",    " are present",    " is noted",      " are noted",
    " is evident",    " are evident",    " is visualized", " are visualized",
    " is appreciated", " are appreciated", " is demonstrated", " are demonstrated",
    " is detected",   " are detected"};

// Separators in the order they are tried at each position.
constexpr std::array<std::string_view, 5> kSeparators = {", or ", ", and ", ", ", " or ", " and "};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

std::string_view strip_terminal(std::string_view s) {
    s = trim(s);
    while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?' || s.back() == ';')) {
        s.remove_suffix(1);
        s = trim(s);
    }
    return s;
}

bool starts_with_word(std::string_view text_lower, std::string_view head) {
    if (text_lower.size() <= head.size() || text_lower.substr(0, head.size()) != head) {
        return false;
    }
    return is_space(text_lower[head.size()]);
}

std::optional<std::size_t> head_length(std::string_view sentence) {
    const std::string low = lower(sentence);
    for (std::string_view head : kNegationHeads) {
        if (starts_with_word(low, head)) {
            return head.size();
        }
    }
    return std::nullopt;
}

std::vector<std::string> split_list(std::string_view body) {
    std::vector<std::string> items;
    const std::string low = lower(body);
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < body.size()) {
        bool matched = false;
        for (std::string_view sep : kSeparators) {
            if (low.compare(i, sep.size(), sep) == 0) {
                items.emplace_back(trim(body.substr(start, i - start)));
                i += sep.size();
                start = i;
                matched = true;
                break;
            }
        }
        if (!matched) {
            ++i;
        }
    }
    items.emplace_back(trim(body.substr(start)));
    std::erase_if(items, [](const std::string& s) { return s.empty(); });
    return items;
}

struct NegatedList {
    std::string head;
    std::vector<std::string> entities;
    std::string predicate;
};

std::optional<NegatedList> parse_negated(std::string_view sentence) {
    sentence = strip_terminal(sentence);
    const auto len = head_length(sentence);
    if (!len) {
        return std::nullopt;
    }
    NegatedList out;
    out.head = std::string(sentence.substr(0, *len));
    std::string_view body = trim(sentence.substr(*len));

    const std::string body_low = lower(body);
    for (std::string_view pred : kPredicates) {
        if (body_low.size() > pred.size() &&
            body_low.compare(body_low.size() - pred.size(), pred.size(), pred) == 0) {
            out.predicate = std::string(body.substr(body.size() - pred.size()));
            body = trim(body.substr(0, body.size() - pred.size()));
            break;
        }
    }

    out.entities = split_list(body);
    for (std::string& e : out.entities) {
        // "no X or no Y": the head already carries the negation.
        if (lower(e).rfind("no ", 0) == 0 && e.size() > 3) {
            e = std::string(trim(std::string_view(e).substr(3)));
        }
    }
    return out;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || is_space(text[i + 1]))) {
            const std::string_view s = trim(text.substr(start, i + 1 - start));
            if (!strip_terminal(s).empty()) {
                out.emplace_back(s);
            }
            start = i + 1;
        }
    }
    const std::string_view tail = trim(text.substr(std::min(start, text.size())));
    if (!strip_terminal(tail).empty()) {
        out.emplace_back(tail);
    }
    return out;
}

std::vector<std::string> negated_entities(std::string_view sentence) {
    const auto parsed = parse_negated(sentence);
    return parsed ? parsed->entities : std::vector<std::string>{};
}

std::vector<std::string> segment_report(std::string_view report_text) {
    std::vector<std::string> claims;
    for (const std::string& sentence : split_sentences(report_text)) {
        const auto parsed = parse_negated(sentence);
        if (!parsed || parsed->entities.size() < 2) {
            claims.emplace_back(strip_terminal(sentence));
            continue;
        }
        for (const std::string& entity : parsed->entities) {
            claims.push_back(parsed->head + " " + entity + parsed->predicate);
        }
    }
    return claims;
}

}  // namespace hsprobe
