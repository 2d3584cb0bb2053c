#include "migrate/gateway.hpp"

#include "migrate/digest.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

namespace migrate::gateway {

namespace {

bool is_blank_line(std::string_view line) {
    return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    size_t start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

std::string join_trimmed(const std::vector<std::string_view>& lines, size_t first,
                         size_t last_exclusive) {
    // Trim surrounding blank lines, keep interior ones.
    while (first < last_exclusive && is_blank_line(lines[first])) {
        ++first;
    }
    while (last_exclusive > first && is_blank_line(lines[last_exclusive - 1])) {
        --last_exclusive;
    }
    std::string out;
    for (size_t i = first; i < last_exclusive; ++i) {
        if (i > first) {
            out += '\n';
        }
        out += std::string(lines[i]);
    }
    return out;
}

std::string strip_edges(std::string_view text) {
    size_t begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) {
        return {};
    }
    size_t end = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(begin, end - begin + 1));
}

ExtractedCode extract_from_fence(std::string_view raw) {
    auto lines = split_lines(raw);
    std::optional<size_t> open;
    std::optional<size_t> close;
    for (size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        size_t pos = line.find_first_not_of(" \t");
        if (pos == std::string_view::npos) {
            continue;
        }
        if (line.substr(pos, 3) == "```") {
            if (!open.has_value()) {
                open = i;
            } else {
                close = i; // keep the last fence line
            }
        }
    }
    if (!open.has_value() || !close.has_value()) {
        throw ExtractError(ExtractError::Kind::NoCodeFound,
                           "no markers and no surrounding code fence found");
    }
    std::string code = join_trimmed(lines, *open + 1, *close);
    if (code.empty()) {
        throw ExtractError(ExtractError::Kind::NoCodeFound, "code fence is empty");
    }
    ExtractedCode extracted;
    extracted.code = std::move(code);
    extracted.had_markers = false;
    extracted.fallback_used = ExtractedCode::Fallback::FenceStrip;
    return extracted;
}

} // namespace

ExtractedCode extract_code(std::string_view raw, std::string_view start_marker,
                           std::string_view end_marker) {
    if (start_marker.empty() || end_marker.empty() || start_marker == end_marker) {
        throw ExtractError(ExtractError::Kind::UnbalancedMarkers,
                           "markers must be non-empty and distinct");
    }
    const size_t start_pos = raw.find(start_marker);
    const size_t end_pos = raw.rfind(end_marker);
    const bool has_start = start_pos != std::string_view::npos;
    const bool has_end = end_pos != std::string_view::npos;

    if (!has_start && !has_end) {
        return extract_from_fence(raw);
    }
    if (has_start != has_end) {
        throw ExtractError(ExtractError::Kind::UnbalancedMarkers,
                           has_start ? "start marker without end marker"
                                     : "end marker without start marker");
    }
    if (end_pos < start_pos + start_marker.size()) {
        throw ExtractError(ExtractError::Kind::UnbalancedMarkers,
                           "end marker occurs before start marker");
    }

    // Content runs from the line after the start-marker line to the line
    // before the end-marker line; both marker lines are dropped whole.
    const size_t start_line_end = raw.find('\n', start_pos + start_marker.size());
    size_t end_line_begin = raw.rfind('\n', end_pos);
    end_line_begin = (end_line_begin == std::string_view::npos) ? 0 : end_line_begin + 1;

    ExtractedCode extracted;
    extracted.had_markers = true;

    if (start_line_end == std::string_view::npos || start_line_end >= end_pos) {
        // Markers share a line: take the span between them directly.
        const size_t inner_begin = start_pos + start_marker.size();
        extracted.code = strip_edges(raw.substr(inner_begin, end_pos - inner_begin));
    } else {
        const size_t content_begin = start_line_end + 1;
        if (end_line_begin > content_begin) {
            auto lines = split_lines(raw.substr(content_begin, end_line_begin - content_begin - 1));
            extracted.code = join_trimmed(lines, 0, lines.size());
        }
    }
    if (extracted.code.empty()) {
        throw ExtractError(ExtractError::Kind::NoCodeFound,
                           "markers present but no code between them");
    }
    return extracted;
}

nlohmann::json canonical_request_json(const CompletionRequest& request) {
    return nlohmann::json{
        {"model", request.model_id},
        {"temperature", request.temperature},
        {"messages",
         nlohmann::json::array({
             nlohmann::json{{"role", "system"}, {"content", request.system_message}},
             nlohmann::json{{"role", "user"}, {"content", request.user_message}},
         })},
    };
}

std::string request_digest(const CompletionRequest& request) {
    return digest::sha256_hex(canonical_request_json(request).dump());
}

ReplayStore::ReplayStore(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
}

std::optional<StoredRecord> ReplayStore::lookup(const std::string& digest) const {
    const auto path = root_ / (digest + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) {
        return std::nullopt;
    }
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, true);
    StoredRecord record;
    record.request = doc.value("request", nlohmann::json{});
    record.response = doc.at("response").get<std::string>();
    record.created_at = doc.value("created_at", std::string{});
    return record;
}

void ReplayStore::put(const std::string& digest, const StoredRecord& record) {
    std::lock_guard<std::mutex> lock(write_mutex_);
    nlohmann::json doc{
        {"request", record.request},
        {"response", record.response},
        {"created_at", record.created_at},
    };
    const auto path = root_ / (digest + ".json");
    const auto tmp = root_ / (digest + ".json.tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out.good()) {
            throw std::runtime_error("replay store: cannot write " + tmp.string());
        }
        out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

std::string_view mode_id(Mode mode) {
    switch (mode) {
    case Mode::Live:
        return "live";
    case Mode::Record:
        return "record";
    case Mode::Replay:
        return "replay";
    }
    return "unknown";
}

std::optional<Mode> mode_from_id(std::string_view id) {
    if (id == "live") {
        return Mode::Live;
    }
    if (id == "record") {
        return Mode::Record;
    }
    if (id == "replay") {
        return Mode::Replay;
    }
    return std::nullopt;
}

Gateway::Gateway(std::unique_ptr<Transport> transport, std::shared_ptr<ReplayStore> store,
                 GatewayOptions options)
    : transport_(std::move(transport)), store_(std::move(store)), options_(options) {}

std::string Gateway::complete(const CompletionRequest& request, Mode mode) {
    const std::string digest = request_digest(request);
    if (mode == Mode::Replay) {
        if (!store_) {
            throw ReplayMiss("replay mode requires a replay store");
        }
        auto record = store_->lookup(digest);
        if (!record.has_value()) {
            throw ReplayMiss("no stored record for digest " + digest);
        }
        return record->response;
    }

    std::string response = complete_live(request);
    if (mode == Mode::Record) {
        if (!store_) {
            throw std::runtime_error("record mode requires a replay store");
        }
        StoredRecord record;
        record.request = canonical_request_json(request);
        record.response = response;
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::tm tm_utc{};
        gmtime_r(&now, &tm_utc);
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
        record.created_at = buf;
        store_->put(digest, record);
    }
    return response;
}

std::optional<std::string> Gateway::record_created_at(const std::string& digest) const {
    if (!store_) {
        return std::nullopt;
    }
    auto record = store_->lookup(digest);
    if (!record.has_value()) {
        return std::nullopt;
    }
    return record->created_at;
}

std::string Gateway::complete_live(const CompletionRequest& request) {
    if (!transport_) {
        throw TransportError("no transport configured for live/record mode");
    }
    const std::string body = canonical_request_json(request).dump();

    HttpResult result;
    int attempt = 0;
    for (;;) {
        try {
            result = transport_->post_chat_completions(body);
            break;
        } catch (const TransportError&) {
            if (attempt >= options_.max_retries) {
                throw;
            }
            const int delay = options_.retry_base_delay_ms << attempt;
            if (delay > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(delay));
            }
            ++attempt;
        }
    }

    if (result.status < 200 || result.status >= 300) {
        throw EndpointError(result.status, "endpoint returned HTTP " +
                                               std::to_string(result.status) + ": " + result.body);
    }
    nlohmann::json doc = nlohmann::json::parse(result.body, nullptr, false);
    if (doc.is_discarded()) {
        throw EndpointError(result.status, "endpoint returned unparseable JSON body");
    }
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
        throw EndpointError(result.status, "endpoint response has no choices");
    }
    // First-response policy: only choices[0] is ever consulted.
    const auto& first = doc["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content")) {
        throw EndpointError(result.status, "endpoint choice has no message content");
    }
    return first["message"]["content"].get<std::string>();
}

} // namespace migrate::gateway
