#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "promptforge/gateway.hpp"

namespace promptforge {

/// Responses for the mock provider.
///
/// Resolution order for a request:
///   1. `exact[(stage, sha256(last user message))]`
///   2. a responder function registered for the stage
///   3. `stage_defaults[stage]`
///   4. the built-in deterministic responder (see MockProvider)
///
/// `answers` maps a question to the answer the simulated model gives. It drives
/// the built-in responder for score_eval, select_eval and inference calls.
struct MockScript {
    std::map<std::pair<StageTag, std::string>, std::string> exact;
    std::map<StageTag, std::string> stage_defaults;
    std::map<std::string, std::string> answers;

    /// {"exact":[{"stage","digest"|"message","content"}], "defaults":{stage:content},
    ///  "answers":[{"question","answer"}] or {question:answer}}
    static MockScript parse(std::string_view json_text);
    static MockScript load(const std::filesystem::path& path);
};

/// Deterministic scripted provider. Every response is a pure function of the
/// request, so runs and resumed runs see identical outputs. Token counts are
/// whitespace word counts.
///
/// The built-in responder answers question stages by locating known questions in
/// the part of the message after the last <ANS_END> (past any rendered
/// demonstrations). A message split into "Question N:" sections gets one tagged
/// answer per section, "unknown" where the question is not in `answers`.
class MockProvider : public Provider {
public:
    using Responder = std::function<std::string(const ChatRequest&)>;

    explicit MockProvider(MockScript script = {});

    void set_exact(StageTag stage, std::string_view user_message, std::string content);
    void set_default(StageTag stage, std::string content);
    void set_responder(StageTag stage, Responder responder);
    void set_answer(std::string question, std::string answer);

    ChatResponse complete(const ChatRequest& request) override;
    std::string id() const override { return "mock"; }

    std::vector<ChatRequest> requests() const;
    std::vector<ChatRequest> requests(StageTag stage) const;

    /// What the built-in responder returns for a request.
    std::string builtin_response(const ChatRequest& request) const;

private:
    mutable std::mutex mutex_;
    MockScript script_;
    std::map<StageTag, Responder> responders_;
    std::vector<ChatRequest> captured_;
};

/// One line per call: {request_digest, stage_tag, content, input_tokens, output_tokens}.
struct CassetteEntry {
    std::string request_digest;
    StageTag stage = StageTag::inference;
    std::string content;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
};

std::vector<CassetteEntry> load_cassette(const std::filesystem::path& path);

/// Forwards to an inner provider and appends every response to a cassette file.
class RecordingProvider : public Provider {
public:
    RecordingProvider(Provider& inner, std::filesystem::path cassette);

    ChatResponse complete(const ChatRequest& request) override;
    std::string id() const override { return "record:" + inner_.id(); }

private:
    Provider& inner_;
    std::filesystem::path path_;
    std::mutex mutex_;
};

/// Serves responses from a cassette by full-request digest. A miss is a hard
/// ReplayMissError; replay never falls through to a live call.
class ReplayProvider : public Provider {
public:
    explicit ReplayProvider(const std::filesystem::path& cassette);
    explicit ReplayProvider(std::vector<CassetteEntry> entries);

    ChatResponse complete(const ChatRequest& request) override;
    std::string id() const override { return "replay"; }
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, CassetteEntry> entries_;
};

struct LiveProviderConfig {
    std::string base_url;  // e.g. https://api.openai.com/v1
    std::string api_key;
    std::string model;
    int timeout_seconds = 120;

    /// Fills base_url and api_key from PROMPTFORGE_BASE_URL / PROMPTFORGE_API_KEY
    /// when they are empty.
    void apply_environment();
};

/// OpenAI-style chat-completions client.
class LiveProvider : public Provider {
public:
    explicit LiveProvider(LiveProviderConfig config);

    ChatResponse complete(const ChatRequest& request) override;
    std::string id() const override { return "live:" + config_.model; }

    /// Request body sent for a chat request.
    static std::string build_request_body(const ChatRequest& request, const std::string& model);
    /// Parses a chat-completions response body; throws ResponseSchemaError.
    static ChatResponse parse_response_body(const std::string& body, const std::string& provider_id);

private:
    LiveProviderConfig config_;
    std::string origin_;  // scheme://host[:port]
    std::string path_;    // .../chat/completions
};

}  // namespace promptforge
