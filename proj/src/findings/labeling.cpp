#include "hsprobe/findings/labeling.hpp"

#include <algorithm>
#include <cctype>
#include <thread>

#include <nlohmann/json.hpp>

#include "hsprobe/error.hpp"

namespace hsprobe {

using nlohmann::json;

namespace {

std::string normalize(std::string_view s) {
    std::string out;
    for (char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            out += static_cast<char>(std::tolower(u));
        } else if (!out.empty() && out.back() != ' ') {
            out += ' ';
        }
    }
    while (!out.empty() && out.back() == ' ') {
        out.pop_back();
    }
    return out;
}

std::optional<json> first_json_object(const std::string& text) {
    for (std::size_t start = text.find('{'); start != std::string::npos;
         start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            const char c = text[i];
            if (in_string) {
                if (c == '\\') {
                    ++i;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}' && --depth == 0) {
                try {
                    return json::parse(text.substr(start, i - start + 1));
                } catch (const json::exception&) {
                    break;
                }
            }
        }
    }
    return std::nullopt;
}

std::optional<Entailment> entailment_from_phrase(std::string_view phrase) {
    const std::string p = normalize(phrase);
    if (p == "completely" || p == "completely entailed") {
        return Entailment::kCompletely;
    }
    if (p == "partially" || p == "partially entailed") {
        return Entailment::kPartially;
    }
    if (p == "not entailed") {
        return Entailment::kNotEntailed;
    }
    return std::nullopt;
}

template <class F>
auto with_retries(const RetryPolicy& retry, const std::string& what, F&& attempt_fn)
    -> decltype(attempt_fn()) {
    const int attempts = std::max(1, retry.max_attempts);
    std::string last_error;
    for (int k = 0; k < attempts; ++k) {
        if (k > 0) {
            const auto delay = retry.base_backoff * (1 << (k - 1));
            if (retry.sleep) {
                retry.sleep(delay);
            } else {
                std::this_thread::sleep_for(delay);
            }
        }
        try {
            return attempt_fn();
        } catch (const Error& e) {
            last_error = e.what();
        }
    }
    fail(ErrorCode::kLabelingFailure,
         what + " failed after " + std::to_string(attempts) + " attempts: " + last_error);
}

}  // namespace

std::optional<Entailment> parse_entailment_response(const std::string& response) {
    if (const auto obj = first_json_object(response)) {
        const auto it = obj->find("entailment");
        if (it == obj->end() || !it->is_string()) {
            return std::nullopt;
        }
        return entailment_from_phrase(it->get<std::string>());
    }
    return entailment_from_phrase(response);
}

int severity_tier_for(std::string_view category) {
    const std::string c = normalize(category);
    if (c == "emergency clinical consequence") {
        return 1;
    }
    if (c == "non emergency but actionable clinical consequence") {
        return 2;
    }
    if (c == "clinically insignificant consequence") {
        return 3;
    }
    if (c == "other") {
        return 4;
    }
    return 0;
}

std::optional<SeverityResult> parse_severity_response(const std::string& response) {
    const auto obj = first_json_object(response);
    if (!obj) {
        return std::nullopt;
    }
    const auto cat = obj->find("severity_category");
    if (cat == obj->end() || !cat->is_string()) {
        return std::nullopt;
    }
    const int tier = severity_tier_for(cat->get<std::string>());
    if (tier == 0) {
        return std::nullopt;
    }
    SeverityResult out;
    out.tier = tier;
    if (const auto reason = obj->find("reason"); reason != obj->end() && reason->is_string()) {
        out.reason = reason->get<std::string>();
    }
    return out;
}

HallucinationLabel label_finding(const Finding& f, const std::string& ground_truth_report,
                                 EntailmentClient& client, const RetryPolicy& retry) {
    int attempt = 0;
    return with_retries(retry, "entailment labeling of '" + f.finding_id + "'", [&] {
        ClientRequest req{RequestKind::kEntailment, f.text, ground_truth_report, attempt++};
        const std::string response = client.complete(req);
        const auto verdict = parse_entailment_response(response);
        require(verdict.has_value(), ErrorCode::kLabelingFailure,
                "unreadable entailment response: " + response.substr(0, 200));
        return HallucinationLabel::from(*verdict);
    });
}

SeverityResult classify_severity(const Finding& f, EntailmentClient& client, const RetryPolicy& retry) {
    std::string last_response;
    for (int attempt = 0; attempt < 2; ++attempt) {
        ClientRequest req{RequestKind::kSeverity, f.text, "", attempt};
        last_response = with_retries(retry, "severity classification of '" + f.finding_id + "'",
                                     [&] { return client.complete(req); });
        if (auto parsed = parse_severity_response(last_response)) {
            return *parsed;
        }
    }
    fail(ErrorCode::kLabelingFailure, "severity classification of '" + f.finding_id +
                                          "' returned no usable severity_category: " +
                                          last_response.substr(0, 200));
}

}  // namespace hsprobe
