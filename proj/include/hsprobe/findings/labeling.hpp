#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>

#include "hsprobe/findings/client.hpp"
#include "hsprobe/findings/finding.hpp"

namespace hsprobe {

struct SeverityResult {
    int tier = 4;
    std::string reason;

    bool clinically_significant() const noexcept { return hsprobe::clinically_significant(tier); }
};

// Client calls are attempted `max_attempts` times; before retry k (1-based)
// the caller sleeps base_backoff * 2^(k-1).
struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_backoff{500};
    std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
};

// Reads an entailment verdict from a response: a JSON object with key
// "entailment", or a bare label. Accepts "completely", "partially",
// "not_entailed" and the phrases "completely entailed", "partially entailed",
// "not entailed". Returns nullopt when nothing matches.
std::optional<Entailment> parse_entailment_response(const std::string& response);

// Reads {"severity_category": ..., "reason": ...} from the first JSON object
// in the response. Returns nullopt on a missing or unknown category.
std::optional<SeverityResult> parse_severity_response(const std::string& response);

int severity_tier_for(std::string_view category);

// Throws kLabelingFailure once every attempt has failed, either in transport
// or with an unreadable verdict.
HallucinationLabel label_finding(const Finding& f, const std::string& ground_truth_report,
                                 EntailmentClient& client, const RetryPolicy& retry = {});

// Transport failures are retried per `retry`; an unreadable reply is re-asked
// once with attempt = 1. Throws kLabelingFailure when no tier is obtained.
SeverityResult classify_severity(const Finding& f, EntailmentClient& client,
                                 const RetryPolicy& retry = {});

}  // namespace hsprobe
