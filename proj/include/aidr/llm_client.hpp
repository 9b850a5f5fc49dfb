#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace aidr {

struct LlmMessage {
    std::string role;
    std::string content;
};

struct LlmRequest {
    std::string model;
    std::vector<LlmMessage> messages;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::string tag;  // client-side correlation id, never sent on the wire
};

struct LlmResponse {
    std::string text;
    std::string finish_reason;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

// Transient transport problem; the caller may retry.
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Credential problem; retrying cannot help.
struct AuthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual LlmResponse complete(const LlmRequest& request) = 0;
};

// Deterministic offline backend. Replies "LEC" to lecture prompts, "PLAN"
// to plan prompts and "R-<tag>" to rationale prompts, and counts in-flight
// requests so concurrency bounds are observable in tests.
class MockBackend : public LlmBackend {
public:
    LlmResponse complete(const LlmRequest& request) override;

    // The next n calls fail once with TransportError before succeeding on retry.
    void inject_transient_failures(int n) { transient_failures_ = n; }

    int max_in_flight() const { return max_in_flight_; }
    int call_count() const { return calls_; }
    int failures_injected() const { return failures_delivered_; }

private:
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_in_flight_{0};
    std::atomic<int> calls_{0};
    std::atomic<int> transient_failures_{0};
    std::atomic<int> failures_delivered_{0};
};

// OpenAI-compatible chat-completions client. Bearer token comes from the
// LLM_API_KEY environment variable; an empty token sends no auth header.
class HttpBackend : public LlmBackend {
public:
    explicit HttpBackend(std::string endpoint_url);
    LlmResponse complete(const LlmRequest& request) override;

private:
    std::string base_url_;
    std::string path_;
};

}  // namespace aidr
