#include "specforge/gateway.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "specforge/digest.hpp"

namespace specforge::gateway {

namespace {

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) {
        throw IoError(IoError::Reason::WriteFailed, "cannot write " + path.string());
    }
}

std::filesystem::path fixture_stem(const std::filesystem::path& root,
                                   const CompletionRequest& request)
{
    return root / request.prompt.program_name / std::string(to_string(request.prompt.variant)) /
           std::to_string(request.sample_index);
}

}  // namespace

void CompletionRequest::validate() const
{
    config.validate();
    if (sample_index < 0 || sample_index >= config.samples_per_program) {
        throw ConfigError("sample_index " + std::to_string(sample_index) + " outside [0, " +
                          std::to_string(config.samples_per_program) + ")");
    }
}

std::string CompletionRequest::fixture_key() const
{
    return prompt.program_name + "/" + std::string(to_string(prompt.variant)) + "/" +
           std::to_string(sample_index);
}

std::string request_digest(const CompletionRequest& request)
{
    nlohmann::json canonical = {{"prompt", request.prompt.text},
                                {"temperature", request.config.temperature},
                                {"sample_index", request.sample_index}};
    return sha256_hex(canonical.dump());
}

ReplayBackend::ReplayBackend(std::filesystem::path fixtures) : fixtures_(std::move(fixtures)) {}

CompletionResponse ReplayBackend::complete(const CompletionRequest& request)
{
    request.validate();
    auto path = fixture_stem(fixtures_, request);
    path += ".txt";
    if (!std::filesystem::is_regular_file(path)) {
        throw MissingFixture(request.fixture_key());
    }
    CompletionResponse response;
    response.text = read_file(path);
    if (response.text.empty()) {
        throw EmptyResponse();
    }
    response.backend = {BackendId::Kind::Replay, request.fixture_key()};
    response.latency_ms = 0;
    response.request_digest = request_digest(request);
    return response;
}

HttpPost default_http_post(std::chrono::seconds timeout)
{
    return [timeout](const std::string& url, const std::map<std::string, std::string>& headers,
                     const std::string& body) {
        HttpResult result;
        auto scheme_end = url.find("://");
        auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
        std::string origin = url.substr(0, path_start);
        std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

        httplib::Client client(origin);
        client.set_connection_timeout(std::chrono::seconds(30));
        client.set_read_timeout(timeout);
        httplib::Headers http_headers;
        for (const auto& [k, v] : headers) http_headers.emplace(k, v);
        auto response = client.Post(path, http_headers, body, "application/json");
        if (!response) {
            result.error = httplib::to_string(response.error());
            return result;
        }
        result.status = response->status;
        result.body = response->body;
        return result;
    };
}

LiveBackend::LiveBackend(LiveOptions options, HttpPost post)
    : options_(std::move(options)), post_(std::move(post))
{
}

nlohmann::json LiveBackend::request_body(const CompletionRequest& request)
{
    return nlohmann::json{
        {"model", request.config.model_id},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt.text}}})},
        {"temperature", request.config.temperature},
        {"max_tokens", request.config.max_output_tokens},
        {"n", 1},
        {"stream", false},
    };
}

CompletionResponse LiveBackend::complete(const CompletionRequest& request)
{
    request.validate();
    const char* key = std::getenv(options_.api_key_env.c_str());
    if (!key || !*key) {
        throw MissingCredential(options_.api_key_env);
    }

    std::string url = options_.base_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    url += "/chat/completions";
    const std::map<std::string, std::string> headers = {
        {"Authorization", std::string("Bearer ") + key}};
    const std::string body = request_body(request).dump();

    const auto started = std::chrono::steady_clock::now();
    HttpResult result;
    for (int attempt = 0;; ++attempt) {
        result = post_(url, headers, body);
        const bool transient = result.status < 0 || result.status >= 500;
        if (!transient || attempt >= options_.max_retries) break;
        std::this_thread::sleep_for(options_.backoff_base * (1 << attempt));
    }
    if (result.status < 0) {
        throw BackendError(-1, result.error.empty() ? "transport failure" : result.error);
    }
    if (result.status < 200 || result.status >= 300) {
        throw BackendError(result.status, result.body.substr(0, 500));
    }

    std::string text;
    try {
        auto parsed = nlohmann::json::parse(result.body);
        const auto& content = parsed.at("choices").at(0).at("message").at("content");
        if (content.is_string()) text = content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(result.status, std::string("malformed completion body: ") + e.what());
    }
    if (text.empty()) {
        throw EmptyResponse();
    }

    CompletionResponse response;
    response.text = std::move(text);
    response.backend = {BackendId::Kind::Live, request.config.model_id};
    response.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - started)
                              .count();
    response.request_digest = request_digest(request);
    return response;
}

std::filesystem::path record_fixture(const CompletionRequest& request,
                                     const CompletionResponse& response,
                                     const std::filesystem::path& directory, bool force)
{
    if (response.backend.kind != BackendId::Kind::Live) {
        throw IoError(IoError::Reason::NotLive, "only live responses can be recorded");
    }
    auto stem = fixture_stem(directory, request);
    auto text_path = stem;
    text_path += ".txt";
    auto meta_path = stem;
    meta_path += ".json";
    if (!force && (std::filesystem::exists(text_path) || std::filesystem::exists(meta_path))) {
        throw IoError(IoError::Reason::AlreadyExists, text_path.string() + " already exists");
    }
    std::error_code ec;
    std::filesystem::create_directories(stem.parent_path(), ec);
    if (ec) {
        throw IoError(IoError::Reason::WriteFailed, "cannot create " + stem.parent_path().string());
    }

    nlohmann::json meta = {
        {"program", request.prompt.program_name},
        {"variant", request.prompt.variant},
        {"sample_index", request.sample_index},
        {"model_id", request.config.model_id},
        {"temperature", request.config.temperature},
        {"max_output_tokens", request.config.max_output_tokens},
        {"request_digest", response.request_digest},
        {"context_digest", request.prompt.context_digest},
        {"latency_ms", response.latency_ms},
        {"provenance", "recorded from live backend " + response.backend.id},
    };
    write_file(text_path, response.text);
    write_file(meta_path, canonical_dump(meta));
    return text_path;
}

RecordingBackend::RecordingBackend(std::unique_ptr<Backend> inner, std::filesystem::path directory,
                                   bool force)
    : inner_(std::move(inner)), directory_(std::move(directory)), force_(force)
{
}

CompletionResponse RecordingBackend::complete(const CompletionRequest& request)
{
    auto response = inner_->complete(request);
    record_fixture(request, response, directory_, force_);
    return response;
}

Gateway::Gateway(std::unique_ptr<Backend> backend, int max_inflight)
    : backend_(std::move(backend)), max_inflight_(max_inflight), slots_(max_inflight)
{
    if (!backend_) {
        throw ConfigError("gateway requires a backend");
    }
    if (max_inflight < 1 || max_inflight > 1024) {
        throw ConfigError("max_inflight must lie in [1, 1024]");
    }
}

CompletionResponse Gateway::complete(const CompletionRequest& request)
{
    slots_.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{slots_};
    return backend_->complete(request);
}

void to_json(nlohmann::json& j, const BackendId& value)
{
    j = nlohmann::json{{"kind", value.kind == BackendId::Kind::Live ? "live" : "replay"},
                       {"id", value.id}};
}

void from_json(const nlohmann::json& j, BackendId& value)
{
    value.kind = j.at("kind").get<std::string>() == "live" ? BackendId::Kind::Live
                                                           : BackendId::Kind::Replay;
    j.at("id").get_to(value.id);
}

void to_json(nlohmann::json& j, const CompletionResponse& value)
{
    j = nlohmann::json{{"text", value.text},
                       {"backend", value.backend},
                       {"latency_ms", value.latency_ms},
                       {"request_digest", value.request_digest}};
}

void from_json(const nlohmann::json& j, CompletionResponse& value)
{
    j.at("text").get_to(value.text);
    j.at("backend").get_to(value.backend);
    j.at("latency_ms").get_to(value.latency_ms);
    j.at("request_digest").get_to(value.request_digest);
}

}  // namespace specforge::gateway
