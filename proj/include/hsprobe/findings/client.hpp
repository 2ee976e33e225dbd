#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>

namespace hsprobe {

enum class RequestKind { kEntailment, kSeverity };

std::string_view request_kind_name(RequestKind k) noexcept;

// One judgement request. `reference` is the ground-truth report for
// entailment requests and empty for severity requests. `attempt` counts
// re-asks of the same question, starting at 0.
struct ClientRequest {
    RequestKind kind = RequestKind::kEntailment;
    std::string finding;
    std::string reference;
    int attempt = 0;
};

// Backend that answers judgement requests with raw response text. A transport
// or service failure is reported by throwing hsprobe::Error.
class EntailmentClient {
public:
    virtual ~EntailmentClient() = default;
    virtual std::string complete(const ClientRequest& request) = 0;
};

// Answers from a line-delimited fixture of recorded exchanges. Lookups are
// read-only and safe to call concurrently. A request with no exact attempt
// match falls back to attempt 0; a request with no record at all throws kIo.
class ReplayClient final : public EntailmentClient {
public:
    static ReplayClient load(const std::filesystem::path& path);
    static ReplayClient parse(const std::string& text);

    std::string complete(const ClientRequest& request) override;
    std::size_t size() const noexcept { return responses_.size(); }

private:
    using Key = std::tuple<int, std::string, std::string, int>;
    std::map<Key, std::string> responses_;
};

// Forwards to another client and appends every successful exchange to a
// fixture file that ReplayClient can read. Appends are serialized.
class RecordingClient final : public EntailmentClient {
public:
    RecordingClient(EntailmentClient& inner, std::filesystem::path path);

    std::string complete(const ClientRequest& request) override;

private:
    EntailmentClient& inner_;
    std::filesystem::path path_;
    std::mutex mutex_;
};

std::string encode_exchange(const ClientRequest& request, const std::string& response);

// Connection settings for an OpenAI-compatible chat completions service.
struct LiveClientConfig {
    std::string base_url = "https://api.openai.com";
    std::string api_key;
    std::string model = "gpt-4o";
    std::chrono::seconds timeout{60};

    // Reads HSPROBE_LLM_BASE_URL, HSPROBE_LLM_API_KEY and HSPROBE_LLM_MODEL.
    // Throws kConfig when no API key is set.
    static LiveClientConfig from_env();
};

// Sends each request as a two-message chat: the instruction prompt from
// resources (severity_prompt.txt or entailment_prompt.txt) as the system
// message and the finding, plus the reference report for entailment, as the
// user message. Non-2xx replies and network errors throw kIo.
class LiveClient final : public EntailmentClient {
public:
    explicit LiveClient(LiveClientConfig config);

    std::string complete(const ClientRequest& request) override;

    static std::string user_message(const ClientRequest& request);

private:
    LiveClientConfig config_;
    std::string severity_prompt_;
    std::string entailment_prompt_;
};

}  // namespace hsprobe
