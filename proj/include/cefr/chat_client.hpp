#pragma once

// Client for chat-completion endpoints.
//
// Wire protocol: POST {base_url}/chat/completions with body
//   {"model": ..., "messages": [{"role": ..., "content": ...}, ...], "temperature": ..., "max_tokens": ...}
// and read choices[0].message.content from the reply. The API key is taken from the environment
// variable named in EndpointConfig::api_key_env at request time and sent as a bearer token; it is
// never stored in any config object or written anywhere.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
// <resolv.h>, pulled in by httplib, defines _res as a macro, which collides with identifiers in Eigen.
#ifdef _res
#undef _res
#endif
#include <nlohmann/json.hpp>

#include "cefr/error.hpp"
#include "cefr/prompts.hpp"
#include "cefr/random.hpp"

namespace cefr {

/// Exponential backoff: attempt n (0-based retry) waits min(cap, base * factor^n), and with
/// jitter a uniformly random amount in [half, full] of that.
struct RetryPolicy
{
    std::chrono::milliseconds base{1000};
    double factor = 2.0;
    std::chrono::milliseconds cap{30000};
    bool jitter = true;

    std::chrono::milliseconds delay(int retry, Rng& rng) const
    {
        const double raw = static_cast<double>(base.count()) * std::pow(factor, retry);
        double ms = std::min(raw, static_cast<double>(cap.count()));
        if (jitter) {
            ms = ms / 2 + rng.uniform() * ms / 2;
        }
        return std::chrono::milliseconds(static_cast<long long>(ms));
    }
};

struct EndpointConfig
{
    std::string base_url;
    std::string model_id;
    /// Name of the environment variable holding the API key; empty for unauthenticated endpoints.
    std::string api_key_env;
    double temperature = 0.0;
    int max_tokens = 16;
    std::chrono::milliseconds timeout{60000};
    int max_retries = 3;
    std::size_t concurrency_limit = 4;
    RetryPolicy retry;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (base_url.empty()) {
            throw InvalidArgument("endpoint base_url is empty");
        }
        if (model_id.empty()) {
            throw InvalidArgument("endpoint model_id is empty");
        }
        if (temperature < 0) {
            throw InvalidArgument("temperature must be >= 0");
        }
        if (max_tokens < 1) {
            throw InvalidArgument("max_tokens must be >= 1");
        }
        if (max_retries < 0) {
            throw InvalidArgument("max_retries must be >= 0");
        }
        if (concurrency_limit < 1) {
            throw InvalidArgument("concurrency_limit must be >= 1");
        }
    }
};

/// Serialisable view of an endpoint; carries the key's variable name, never its value.
inline nlohmann::ordered_json to_json(const EndpointConfig& c)
{
    nlohmann::ordered_json j;
    j["base_url"] = c.base_url;
    j["model_id"] = c.model_id;
    j["api_key_env"] = c.api_key_env;
    j["temperature"] = c.temperature;
    j["max_tokens"] = c.max_tokens;
    j["timeout_ms"] = c.timeout.count();
    j["max_retries"] = c.max_retries;
    j["concurrency_limit"] = c.concurrency_limit;
    return j;
}

struct ChatRequest
{
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 16;
};

inline nlohmann::json to_json(const ChatRequest& r)
{
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : r.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    return {{"model", r.model}, {"messages", messages}, {"temperature", r.temperature}, {"max_tokens", r.max_tokens}};
}

/// Raw HTTP outcome. status 0 means the request never got a response (connect/read failure).
struct HttpReply
{
    int status = 0;
    std::string body;
    std::string transport_error;
};

class ChatTransport
{
public:
    virtual ~ChatTransport() = default;
    virtual HttpReply send(const ChatRequest& request) = 0;
};

class HttpChatTransport final : public ChatTransport
{
public:
    explicit HttpChatTransport(EndpointConfig config) : config_(std::move(config))
    {
        const auto scheme_end = config_.base_url.find("://");
        const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
        const auto path_start = config_.base_url.find('/', host_start);
        origin_ = config_.base_url.substr(0, path_start);
        prefix_ = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
        while (!prefix_.empty() && prefix_.back() == '/') {
            prefix_.pop_back();
        }
    }

    HttpReply send(const ChatRequest& request) override
    {
        httplib::Headers headers;
        if (!config_.api_key_env.empty()) {
            const char* key = std::getenv(config_.api_key_env.c_str());
            if (key == nullptr || *key == '\0') {
                throw AuthError("environment variable " + config_.api_key_env + " is not set");
            }
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
        httplib::Client client(origin_);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());
        auto result = client.Post(prefix_ + "/chat/completions", headers, to_json(request).dump(), "application/json");
        if (!result) {
            return {0, {}, httplib::to_string(result.error())};
        }
        return {result->status, result->body, {}};
    }

private:
    EndpointConfig config_;
    std::string origin_;
    std::string prefix_;
};

/// Result of one logical completion after retries.
struct Completion
{
    std::optional<std::string> content;
    int attempts = 0;
    std::optional<std::string> error;
};

inline bool is_transient_status(int status) noexcept
{
    return status == 0 || status == 408 || status == 409 || status == 425 || status == 429 || status >= 500;
}

/// Wraps a transport with the retry contract. Thread-safe as long as the transport is.
class ChatClient
{
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    ChatClient(EndpointConfig config, std::shared_ptr<ChatTransport> transport)
        : config_(std::move(config)), transport_(std::move(transport)),
          sleep_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })
    {
        config_.validate();
    }

    static ChatClient http(const EndpointConfig& config)
    {
        return ChatClient(config, std::make_shared<HttpChatTransport>(config));
    }

    void set_sleeper(Sleeper sleeper) { sleep_ = std::move(sleeper); }

    const EndpointConfig& config() const noexcept { return config_; }

    /// Retries transient failures (no response, 408/409/425/429, 5xx) up to max_retries times.
    /// 401/403 throw AuthError. Other failures come back as an error note. `stream` selects the
    /// jitter stream so concurrent callers stay deterministic.
    Completion complete(std::vector<ChatMessage> messages, std::uint64_t stream = 0) const
    {
        ChatRequest request{config_.model_id, std::move(messages), config_.temperature, config_.max_tokens};
        Rng jitter(stream_seed(config_.seed, stream));
        Completion out;
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) {
                sleep_(config_.retry.delay(attempt - 1, jitter));
            }
            out.attempts = attempt + 1;
            const HttpReply reply = transport_->send(request);
            if (reply.status == 401 || reply.status == 403) {
                throw AuthError("endpoint " + config_.model_id + " rejected credentials (HTTP " +
                                std::to_string(reply.status) + ")");
            }
            if (reply.status >= 200 && reply.status < 300) {
                if (auto content = extract_content(reply.body)) {
                    out.content = std::move(content);
                    out.error.reset();
                } else {
                    out.error = "malformed completion response";
                }
                return out;
            }
            out.error = reply.status == 0 ? "no response: " + reply.transport_error
                                          : "HTTP " + std::to_string(reply.status);
            if (!is_transient_status(reply.status)) {
                return out;
            }
        }
        out.error = "gave up after " + std::to_string(out.attempts) + " attempts (" + out.error.value_or("") + ")";
        return out;
    }

    static std::optional<std::string> extract_content(const std::string& body)
    {
        const auto j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("choices") || !j["choices"].is_array() ||
            j["choices"].empty()) {
            return std::nullopt;
        }
        const auto& choice = j["choices"][0];
        if (!choice.contains("message") || !choice["message"].contains("content") ||
            !choice["message"]["content"].is_string()) {
            return std::nullopt;
        }
        return choice["message"]["content"].get<std::string>();
    }

private:
    EndpointConfig config_;
    std::shared_ptr<ChatTransport> transport_;
    Sleeper sleep_;
};

} // namespace cefr
