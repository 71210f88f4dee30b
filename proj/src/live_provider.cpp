#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "promptforge/errors.hpp"
#include "promptforge/providers.hpp"

#include <json.hpp>

#include <cstdlib>
#include <regex>

namespace promptforge {

using nlohmann::json;

void LiveProviderConfig::apply_environment() {
    if (base_url.empty())
        if (const char* v = std::getenv("PROMPTFORGE_BASE_URL")) base_url = v;
    if (api_key.empty())
        if (const char* v = std::getenv("PROMPTFORGE_API_KEY")) api_key = v;
}

LiveProvider::LiveProvider(LiveProviderConfig config) : config_(std::move(config)) {
    config_.apply_environment();
    if (config_.base_url.empty())
        throw ConfigError("live provider needs a base URL (provider.base_url or PROMPTFORGE_BASE_URL)");
    if (config_.model.empty()) throw ConfigError("live provider needs a model name");

    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config_.base_url, m, url_re)) throw ConfigError("malformed base URL: " + config_.base_url);
    origin_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "";
    while (!path_.empty() && path_.back() == '/') path_.pop_back();
    constexpr std::string_view suffix = "/chat/completions";
    if (path_.size() < suffix.size() || path_.compare(path_.size() - suffix.size(), suffix.size(), suffix) != 0)
        path_ += suffix;
}

std::string LiveProvider::build_request_body(const ChatRequest& request, const std::string& model) {
    json messages = json::array();
    for (const auto& m : request.messages) messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    json body = {
        {"model", model},
        {"messages", messages},
        {"temperature", request.temperature},
        {"max_tokens", request.max_output_tokens},
    };
    return body.dump();
}

ChatResponse LiveProvider::parse_response_body(const std::string& body, const std::string& provider_id) {
    try {
        auto j = json::parse(body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) throw ResponseSchemaError("choices[0].message.content is not a string", "");
        ChatResponse r;
        r.content = content.get<std::string>();
        if (j.contains("usage")) {
            const auto& usage = j.at("usage");
            r.input_tokens = usage.value("prompt_tokens", std::int64_t{0});
            r.output_tokens = usage.value("completion_tokens", std::int64_t{0});
        }
        r.provider_id = provider_id;
        return r;
    } catch (const json::exception& e) {
        throw ResponseSchemaError(std::string("unexpected response body: ") + e.what(), "");
    }
}

ChatResponse LiveProvider::complete(const ChatRequest& request) {
    httplib::Client client(origin_);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_write_timeout(config_.timeout_seconds, 0);

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto result = client.Post(path_, headers, build_request_body(request, config_.model), "application/json");
    if (!result) throw TransportError("request failed: " + httplib::to_string(result.error()), "");

    const int status = result->status;
    if (status == 401 || status == 403)
        throw AuthenticationError("provider rejected credentials (HTTP " + std::to_string(status) + ")", "");
    if (status == 429 || status >= 500)
        throw TransportError("provider returned HTTP " + std::to_string(status), "", status);
    if (status < 200 || status >= 300)
        throw ResponseSchemaError("provider returned HTTP " + std::to_string(status) + ": " + result->body, "");
    return parse_response_body(result->body, id());
}

}  // namespace promptforge
