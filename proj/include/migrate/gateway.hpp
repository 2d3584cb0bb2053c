#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace migrate::gateway {

struct CompletionRequest {
    std::string model_id;
    std::string system_message;
    std::string user_message;
    double temperature = 0.0;
};

struct ReplayMiss : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EndpointError : std::runtime_error {
    EndpointError(int status, const std::string& message)
        : std::runtime_error(message), status(status) {}
    int status;
};

struct ExtractError : std::runtime_error {
    enum class Kind { NoCodeFound, UnbalancedMarkers };
    ExtractError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind(kind) {}
    Kind kind;
};

struct ExtractedCode {
    enum class Fallback { None, FenceStrip };
    std::string code;
    bool had_markers = false;
    Fallback fallback_used = Fallback::None;
};

/// Recovers the code between the FIRST occurrence of start_marker and the
/// LAST occurrence of end_marker. Marker lines are removed and surrounding
/// blank lines trimmed. Without markers, a single surrounding ``` fence is
/// stripped instead (fallback_used=FenceStrip). Throws ExtractError when
/// neither form is present or the markers are unbalanced.
ExtractedCode extract_code(std::string_view raw, std::string_view start_marker,
                           std::string_view end_marker);

/// Key-order-independent JSON encoding of a request; the digest is the
/// SHA-256 of its compact dump.
nlohmann::json canonical_request_json(const CompletionRequest& request);
std::string request_digest(const CompletionRequest& request);

struct StoredRecord {
    nlohmann::json request;
    std::string response;
    std::string created_at;
};

/// Directory of `<digest>.json` records, each holding the canonical request,
/// the raw response text and a created_at timestamp. Reads are lock-free;
/// writes go through a temp file + rename and an in-process mutex.
class ReplayStore {
public:
    explicit ReplayStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    std::optional<StoredRecord> lookup(const std::string& digest) const;
    void put(const std::string& digest, const StoredRecord& record);

private:
    std::filesystem::path root_;
    std::mutex write_mutex_;
};

struct HttpResult {
    int status = 0;
    std::string body;
};

/// Minimal HTTP surface the gateway needs; production code uses
/// make_http_transport, tests inject scripted or failing implementations.
class Transport {
public:
    virtual ~Transport() = default;
    /// POST a JSON body to the chat-completions path. Throws TransportError
    /// on network-level failure; HTTP-level errors come back as HttpResult.
    virtual HttpResult post_chat_completions(const std::string& body) = 0;
};

/// Transport that reaches an OpenAI-compatible endpoint over HTTP(S).
/// base_url like "https://api.openai.com/v1"; the api key is sent as a
/// bearer token when non-empty.
std::unique_ptr<Transport> make_http_transport(const std::string& base_url,
                                               const std::string& api_key);

/// Reads OPENAI_BASE_URL (default https://api.openai.com/v1) and
/// OPENAI_API_KEY from the environment.
std::unique_ptr<Transport> make_env_transport();

enum class Mode { Live, Record, Replay };

std::string_view mode_id(Mode mode);
std::optional<Mode> mode_from_id(std::string_view id);

struct GatewayOptions {
    int max_retries = 3;
    int retry_base_delay_ms = 250;
};

/// Chat-completions client with the deterministic settings contract:
/// temperature comes from the request, only the first returned choice is
/// used, retries happen on transport errors only. In Replay mode the
/// injected transport is never touched.
class Gateway {
public:
    Gateway(std::unique_ptr<Transport> transport, std::shared_ptr<ReplayStore> store,
            GatewayOptions options = {});

    std::string complete(const CompletionRequest& request, Mode mode);

    /// created_at of the stored record for a digest, when present.
    std::optional<std::string> record_created_at(const std::string& digest) const;

private:
    std::string complete_live(const CompletionRequest& request);

    std::unique_ptr<Transport> transport_;
    std::shared_ptr<ReplayStore> store_;
    GatewayOptions options_;
};

} // namespace migrate::gateway
