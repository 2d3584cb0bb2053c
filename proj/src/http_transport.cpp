#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "migrate/gateway.hpp"

#include <cstdlib>

namespace migrate::gateway {

namespace {

class HttplibTransport final : public Transport {
public:
    HttplibTransport(std::string base_url, std::string api_key) : api_key_(std::move(api_key)) {
        // Split "scheme://host[:port]" from the optional path prefix.
        auto scheme_end = base_url.find("://");
        size_t path_start = std::string::npos;
        if (scheme_end != std::string::npos) {
            path_start = base_url.find('/', scheme_end + 3);
        } else {
            path_start = base_url.find('/');
        }
        if (path_start != std::string::npos) {
            host_ = base_url.substr(0, path_start);
            prefix_ = base_url.substr(path_start);
            while (!prefix_.empty() && prefix_.back() == '/') {
                prefix_.pop_back();
            }
        } else {
            host_ = base_url;
        }
    }

    HttpResult post_chat_completions(const std::string& body) override {
        httplib::Client client(host_);
        client.set_connection_timeout(30, 0);
        client.set_read_timeout(600, 0);
        httplib::Headers headers;
        if (!api_key_.empty()) {
            headers.emplace("Authorization", "Bearer " + api_key_);
        }
        auto result =
            client.Post(prefix_ + "/chat/completions", headers, body, "application/json");
        if (!result) {
            throw TransportError("HTTP request failed: " + httplib::to_string(result.error()));
        }
        return HttpResult{result->status, result->body};
    }

private:
    std::string host_;
    std::string prefix_;
    std::string api_key_;
};

} // namespace

std::unique_ptr<Transport> make_http_transport(const std::string& base_url,
                                               const std::string& api_key) {
    return std::make_unique<HttplibTransport>(base_url, api_key);
}

std::unique_ptr<Transport> make_env_transport() {
    const char* base = std::getenv("OPENAI_BASE_URL");
    const char* key = std::getenv("OPENAI_API_KEY");
    return make_http_transport(base != nullptr ? base : "https://api.openai.com/v1",
                               key != nullptr ? key : "");
}

} // namespace migrate::gateway
