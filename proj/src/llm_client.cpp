#include "aidr/llm_client.hpp"

#include <cstdlib>

#include "httplib.h"
#include "json.hpp"

using nlohmann::json;

namespace aidr {

LlmResponse MockBackend::complete(const LlmRequest& request) {
    const int now = ++in_flight_;
    int seen = max_in_flight_.load();
    while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
    }
    ++calls_;

    struct Guard {
        std::atomic<int>& c;
        ~Guard() { --c; }
    } guard{in_flight_};

    if (transient_failures_.load() > 0) {
        int remaining = transient_failures_.load();
        while (remaining > 0 &&
               !transient_failures_.compare_exchange_weak(remaining, remaining - 1)) {
        }
        if (remaining > 0) {
            ++failures_delivered_;
            throw TransportError("mock: injected transient failure");
        }
    }

    const std::string& prompt =
        request.messages.empty() ? std::string() : request.messages.back().content;
    LlmResponse resp;
    resp.finish_reason = "stop";
    resp.prompt_tokens = static_cast<std::int64_t>(prompt.size() / 4);
    if (prompt.find("Plan: ") != std::string::npos)
        resp.text = "R-" + request.tag;
    else if (prompt.rfind("Lecture: ", 0) == 0)
        resp.text = "PLAN";
    else
        resp.text = "LEC";
    resp.completion_tokens = static_cast<std::int64_t>(resp.text.size() / 4 + 1);
    return resp;
}

HttpBackend::HttpBackend(std::string endpoint_url) {
    // Split scheme://host[:port] from the path.
    auto scheme_end = endpoint_url.find("://");
    std::size_t path_start = endpoint_url.find('/', scheme_end == std::string::npos
                                                        ? 0
                                                        : scheme_end + 3);
    if (path_start == std::string::npos) {
        base_url_ = endpoint_url;
        path_ = "/v1/chat/completions";
    } else {
        base_url_ = endpoint_url.substr(0, path_start);
        path_ = endpoint_url.substr(path_start);
        if (path_ == "/") path_ = "/v1/chat/completions";
    }
}

LlmResponse HttpBackend::complete(const LlmRequest& request) {
    json body;
    body["model"] = request.model;
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    json messages = json::array();
    for (const auto& m : request.messages)
        messages.push_back({{"role", m.role}, {"content", m.content}});
    body["messages"] = std::move(messages);

    httplib::Client client(base_url_);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (const char* key = std::getenv("LLM_API_KEY"); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    auto result = client.Post(path_, headers, body.dump(), "application/json");
    if (!result)
        throw TransportError("endpoint unreachable: " + base_url_ + path_ + " (" +
                             httplib::to_string(result.error()) + ")");
    if (result->status == 401 || result->status == 403)
        throw AuthError("authentication rejected by " + base_url_ +
                        " (HTTP " + std::to_string(result->status) + ")");
    if (result->status != 200)
        throw TransportError("HTTP " + std::to_string(result->status) + " from " +
                             base_url_ + path_);

    json j;
    try {
        j = json::parse(result->body);
    } catch (const json::parse_error& e) {
        throw TransportError(std::string("malformed endpoint response: ") + e.what());
    }
    LlmResponse resp;
    try {
        resp.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        resp.finish_reason = j.at("choices").at(0).value("finish_reason", "");
        if (j.contains("usage")) {
            resp.prompt_tokens = j["usage"].value("prompt_tokens", 0);
            resp.completion_tokens = j["usage"].value("completion_tokens", 0);
        }
    } catch (const json::exception& e) {
        throw TransportError(std::string("unexpected endpoint response shape: ") + e.what());
    }
    return resp;
}

}  // namespace aidr
