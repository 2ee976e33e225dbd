#include "hsprobe/findings/client.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "hsprobe/error.hpp"
#include "hsprobe/io/binary.hpp"

namespace hsprobe {

using nlohmann::json;

std::string_view request_kind_name(RequestKind k) noexcept {
    return k == RequestKind::kSeverity ? "severity" : "entailment";
}

namespace {

RequestKind parse_kind(const std::string& s) {
    if (s == "severity") {
        return RequestKind::kSeverity;
    }
    require(s == "entailment", ErrorCode::kCorrupt, "unknown request kind '" + s + "'");
    return RequestKind::kEntailment;
}

}  // namespace

std::string encode_exchange(const ClientRequest& request, const std::string& response) {
    json j = json::object();
    j["kind"] = std::string(request_kind_name(request.kind));
    j["finding"] = request.finding;
    j["reference"] = request.reference;
    j["attempt"] = request.attempt;
    j["response"] = response;
    return j.dump();
}

ReplayClient ReplayClient::parse(const std::string& text) {
    ReplayClient client;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const json j = json::parse(line);
            const RequestKind kind = parse_kind(j.at("kind").get<std::string>());
            Key key{static_cast<int>(kind), j.at("finding").get<std::string>(),
                    j.value("reference", std::string()), j.value("attempt", 0)};
            client.responses_[key] = j.at("response").get<std::string>();
        } catch (const json::exception& e) {
            fail(ErrorCode::kCorrupt,
                 "replay fixture line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return client;
}

ReplayClient ReplayClient::load(const std::filesystem::path& path) {
    return parse(io::read_text_file(path));
}

std::string ReplayClient::complete(const ClientRequest& request) {
    const int kind = static_cast<int>(request.kind);
    if (auto it = responses_.find({kind, request.finding, request.reference, request.attempt});
        it != responses_.end()) {
        return it->second;
    }
    if (auto it = responses_.find({kind, request.finding, request.reference, 0});
        it != responses_.end()) {
        return it->second;
    }
    fail(ErrorCode::kIo, "no recorded " + std::string(request_kind_name(request.kind)) +
                             " response for finding '" + request.finding + "'");
}

RecordingClient::RecordingClient(EntailmentClient& inner, std::filesystem::path path)
    : inner_(inner), path_(std::move(path)) {}

std::string RecordingClient::complete(const ClientRequest& request) {
    std::string response = inner_.complete(request);
    const std::lock_guard lock(mutex_);
    io::append_text_file(path_, encode_exchange(request, response) + "\n");
    return response;
}

}  // namespace hsprobe
