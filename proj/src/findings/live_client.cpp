#include <httplib.h>

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "hsprobe/error.hpp"
#include "hsprobe/findings/category.hpp"
#include "hsprobe/findings/client.hpp"
#include "hsprobe/io/binary.hpp"

namespace hsprobe {

using nlohmann::json;

LiveClientConfig LiveClientConfig::from_env() {
    LiveClientConfig cfg;
    if (const char* url = std::getenv("HSPROBE_LLM_BASE_URL"); url && *url) {
        cfg.base_url = url;
    }
    if (const char* model = std::getenv("HSPROBE_LLM_MODEL"); model && *model) {
        cfg.model = model;
    }
    const char* key = std::getenv("HSPROBE_LLM_API_KEY");
    require(key != nullptr && *key != '\0', ErrorCode::kConfig,
            "live labeling needs HSPROBE_LLM_API_KEY in the environment");
    cfg.api_key = key;
    return cfg;
}

LiveClient::LiveClient(LiveClientConfig config)
    : config_(std::move(config)),
      severity_prompt_(io::read_text_file(resource_path("severity_prompt.txt"))),
      entailment_prompt_(io::read_text_file(resource_path("entailment_prompt.txt"))) {}

std::string LiveClient::user_message(const ClientRequest& request) {
    if (request.kind == RequestKind::kSeverity) {
        return "F: " + request.finding;
    }
    return "Reference report:\n" + request.reference + "\n\nFinding: " + request.finding;
}

std::string LiveClient::complete(const ClientRequest& request) {
    // Split "scheme://host[:port]/prefix" into the origin and the path prefix.
    const auto scheme_end = config_.base_url.find("://");
    require(scheme_end != std::string::npos, ErrorCode::kConfig,
            "base url '" + config_.base_url + "' lacks a scheme");
    const auto path_start = config_.base_url.find('/', scheme_end + 3);
    const std::string origin = config_.base_url.substr(0, path_start);
    std::string prefix = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') {
        prefix.pop_back();
    }

    httplib::Client http(origin);
    http.set_connection_timeout(config_.timeout);
    http.set_read_timeout(config_.timeout);
    http.set_bearer_token_auth(config_.api_key);

    json body = json::object();
    body["model"] = config_.model;
    body["temperature"] = 0;
    body["messages"] = json::array(
        {json{{"role", "system"},
              {"content", request.kind == RequestKind::kSeverity ? severity_prompt_ : entailment_prompt_}},
         json{{"role", "user"}, {"content", user_message(request)}}});

    const auto res = http.Post(prefix + "/v1/chat/completions", body.dump(), "application/json");
    require(static_cast<bool>(res), ErrorCode::kIo,
            "request to " + origin + " failed: " + httplib::to_string(res.error()));
    require(res->status >= 200 && res->status < 300, ErrorCode::kIo,
            "service returned HTTP " + std::to_string(res->status));
    try {
        const json reply = json::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        fail(ErrorCode::kIo, std::string("malformed service reply: ") + e.what());
    }
}

}  // namespace hsprobe
