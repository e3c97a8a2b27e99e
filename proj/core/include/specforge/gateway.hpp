#pragma once

// Chat-completion backends. Live talks to any server speaking the common
// chat-completions JSON protocol; Replay serves recorded fixture files from
//
//   <fixtures>/<program>/<variant>/<sample>.txt   response text
//   <fixtures>/<program>/<variant>/<sample>.json  request metadata sidecar

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specforge/model.hpp"
#include "specforge/prompt.hpp"

namespace specforge::gateway {

class GatewayError : public Error {
public:
    using Error::Error;
};

class MissingCredential : public GatewayError {
public:
    explicit MissingCredential(const std::string& env_var)
        : GatewayError("API credential not set (environment variable " + env_var + ")")
    {
    }
};

class MissingFixture : public GatewayError {
public:
    explicit MissingFixture(std::string key)
        : GatewayError("no replay fixture for " + key), key_(std::move(key))
    {
    }
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

class BackendError : public GatewayError {
public:
    BackendError(int status, const std::string& message)
        : GatewayError("backend error " + std::to_string(status) + ": " + message), status_(status)
    {
    }
    /// HTTP status, or -1 for transport failures.
    int status() const { return status_; }

private:
    int status_;
};

class EmptyResponse : public GatewayError {
public:
    EmptyResponse() : GatewayError("backend returned an empty completion") {}
};

class IoError : public GatewayError {
public:
    enum class Reason { AlreadyExists, WriteFailed, NotLive };
    IoError(Reason reason, const std::string& message) : GatewayError(message), reason_(reason) {}
    Reason reason() const { return reason_; }

private:
    Reason reason_;
};

struct CompletionRequest {
    prompt::BuiltPrompt prompt;
    GenerationConfig config;
    int sample_index = 0;

    /// Throws ConfigError when sample_index is outside [0, samples).
    void validate() const;
    /// "<program>/<variant>/<sample>", the fixture key.
    std::string fixture_key() const;
};

/// Stable SHA-256 over the canonical JSON of (prompt text, temperature, sample).
std::string request_digest(const CompletionRequest& request);

struct BackendId {
    enum class Kind { Live, Replay };
    Kind kind = Kind::Replay;
    /// model id for Live, fixture key for Replay.
    std::string id;

    bool operator==(const BackendId&) const = default;
};

struct CompletionResponse {
    std::string text;
    BackendId backend;
    long latency_ms = 0;
    std::string request_digest;

    bool operator==(const CompletionResponse&) const = default;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(std::filesystem::path fixtures);
    CompletionResponse complete(const CompletionRequest& request) override;

private:
    std::filesystem::path fixtures_;
};

struct HttpResult {
    /// -1 when the request never produced a response.
    int status = -1;
    std::string body;
    std::string error;
};

/// POST transport; the default implementation uses cpp-httplib.
using HttpPost = std::function<HttpResult(const std::string& url,
                                          const std::map<std::string, std::string>& headers,
                                          const std::string& body)>;

HttpPost default_http_post(std::chrono::seconds timeout = std::chrono::seconds(300));

struct LiveOptions {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key_env = "SPECFORGE_API_KEY";
    /// Retries after the first attempt, on transport errors and 5xx only.
    int max_retries = 3;
    /// Delay before retry k (0-based) is backoff_base * 2^k.
    std::chrono::milliseconds backoff_base{1000};
};

class LiveBackend : public Backend {
public:
    LiveBackend(LiveOptions options, HttpPost post = default_http_post());
    CompletionResponse complete(const CompletionRequest& request) override;

    /// Chat-completions body for one request (one choice, no streaming).
    static nlohmann::json request_body(const CompletionRequest& request);

private:
    LiveOptions options_;
    HttpPost post_;
};

/// Writes the fixture pair for a live response. Existing files are only
/// replaced when force is set.
std::filesystem::path record_fixture(const CompletionRequest& request,
                                     const CompletionResponse& response,
                                     const std::filesystem::path& directory, bool force = false);

/// Live backend decorator that records every successful response.
class RecordingBackend : public Backend {
public:
    RecordingBackend(std::unique_ptr<Backend> inner, std::filesystem::path directory,
                     bool force = false);
    CompletionResponse complete(const CompletionRequest& request) override;

private:
    std::unique_ptr<Backend> inner_;
    std::filesystem::path directory_;
    bool force_;
};

/// Thread-safe front end: caps concurrent in-flight requests.
class Gateway {
public:
    explicit Gateway(std::unique_ptr<Backend> backend, int max_inflight = 4);

    CompletionResponse complete(const CompletionRequest& request);
    int max_inflight() const { return max_inflight_; }

private:
    std::unique_ptr<Backend> backend_;
    int max_inflight_;
    std::counting_semaphore<1024> slots_;
};

void to_json(nlohmann::json& j, const BackendId& value);
void from_json(const nlohmann::json& j, BackendId& value);
void to_json(nlohmann::json& j, const CompletionResponse& value);
void from_json(const nlohmann::json& j, CompletionResponse& value);

}  // namespace specforge::gateway
