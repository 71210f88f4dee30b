#include "promptforge/gateway.hpp"

#include "promptforge/errors.hpp"
#include "promptforge/text.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

namespace promptforge {

using nlohmann::json;

std::string_view to_string(StageTag tag) {
    switch (tag) {
        case StageTag::mutate: return "mutate";
        case StageTag::score_eval: return "score_eval";
        case StageTag::critique_instruction: return "critique_instruction";
        case StageTag::synthesize_instruction: return "synthesize_instruction";
        case StageTag::select_eval: return "select_eval";
        case StageTag::critique_examples: return "critique_examples";
        case StageTag::synthesize_examples: return "synthesize_examples";
        case StageTag::reasoning: return "reasoning";
        case StageTag::validate: return "validate";
        case StageTag::intent: return "intent";
        case StageTag::persona: return "persona";
        case StageTag::inference: return "inference";
        case StageTag::judge: return "judge";
    }
    return "unknown";
}

StageTag stage_tag_from_string(std::string_view s) {
    for (auto tag : kAllStageTags)
        if (to_string(tag) == s) return tag;
    throw InvalidArgumentError("unknown stage tag '" + std::string(s) + "'");
}

std::string_view to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(std::string_view s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    throw InvalidArgumentError("unknown chat role '" + std::string(s) + "'");
}

void ChatRequest::validate() const {
    if (messages.empty()) throw InvalidArgumentError("chat request has no messages");
    if (messages.back().role != Role::user)
        throw InvalidArgumentError("last chat message must come from the user");
    if (temperature < 0.0) throw InvalidArgumentError("temperature must be >= 0");
    if (max_output_tokens < 1) throw InvalidArgumentError("max_output_tokens must be >= 1");
}

const std::string& ChatRequest::last_user_message() const {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it)
        if (it->role == Role::user) return it->content;
    throw InvalidArgumentError("chat request has no user message");
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 computation failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xF];
    }
    return out;
}

std::string request_digest(const ChatRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages)
        messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    json canonical = {
        {"messages", messages},
        {"temperature", request.temperature},
        {"max_output_tokens", request.max_output_tokens},
        {"stage_tag", to_string(request.stage)},
    };
    return sha256_hex(canonical.dump());
}

// ---- ledger ------------------------------------------------------------------

CallLedger::CallLedger(const CallLedger& other) : records_(other.records()) {}

void CallLedger::append(LedgerRecord record) {
    std::lock_guard lock(mutex_);
    records_.push_back(std::move(record));
}

std::vector<LedgerRecord> CallLedger::records() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::size_t CallLedger::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

std::string CallLedger::to_jsonl() const {
    std::string out;
    for (const auto& r : records()) {
        json j = {
            {"stage_tag", to_string(r.stage)},
            {"input_tokens", r.input_tokens},
            {"output_tokens", r.output_tokens},
            {"wall_ms", r.wall_ms},
            {"request_digest", r.request_digest},
            {"retries", r.retries},
        };
        out += j.dump();
        out += '\n';
    }
    return out;
}

CallLedger CallLedger::from_jsonl(std::string_view content) {
    std::vector<LedgerRecord> records;
    std::size_t line_no = 0;
    for (const auto& line : text::split_lines(content)) {
        ++line_no;
        if (text::trim_view(line).empty()) continue;
        try {
            auto j = json::parse(line);
            LedgerRecord r;
            r.stage = stage_tag_from_string(j.at("stage_tag").get<std::string>());
            r.input_tokens = j.at("input_tokens").get<std::int64_t>();
            r.output_tokens = j.at("output_tokens").get<std::int64_t>();
            r.wall_ms = j.value("wall_ms", std::int64_t{0});
            r.request_digest = j.at("request_digest").get<std::string>();
            r.retries = j.value("retries", 0);
            records.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw CheckpointCorruptError("ledger line " + std::to_string(line_no) + ": " + e.what());
        } catch (const InvalidArgumentError& e) {
            throw CheckpointCorruptError("ledger line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return CallLedger(std::move(records));
}

void CallLedger::save(const std::filesystem::path& path) const {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << to_jsonl();
    }
    std::filesystem::rename(tmp, path);
}

CallLedger CallLedger::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointNotFoundError("no ledger at " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_jsonl(ss.str());
}

LedgerReport ledger_report(const std::vector<LedgerRecord>& records) {
    LedgerReport report;
    for (auto tag : kAllStageTags) report.per_stage[tag] = {};
    for (const auto& r : records) {
        auto& s = report.per_stage[r.stage];
        s.calls += 1;
        s.input_tokens += r.input_tokens;
        s.output_tokens += r.output_tokens;
        report.total.calls += 1;
        report.total.input_tokens += r.input_tokens;
        report.total.output_tokens += r.output_tokens;
    }
    return report;
}

LedgerReport ledger_report(const CallLedger& ledger) { return ledger_report(ledger.records()); }

CallBudget estimate_total_calls(const HyperParams& h) {
    constexpr std::int64_t critique = 1, synthesize = 1;
    CallBudget b;
    b.refine_instructions = std::int64_t{h.mutate_refine_rounds} *
                            (std::int64_t{h.mutate_rounds} * h.style_variation + h.mini_batch_size + critique +
                             synthesize);
    b.example_selection = h.mini_batch_size;
    b.seq_opt = std::int64_t{h.seq_cost_rounds} * ((critique + synthesize) + (critique + synthesize));
    b.reason_validate = 2;
    b.intent_expert = 2;
    b.total = b.refine_instructions + b.example_selection + b.seq_opt + b.reason_validate + b.intent_expert;
    return b;
}

// ---- gateway -----------------------------------------------------------------

Gateway::Gateway(Provider& provider, CallLedger& ledger, RetryPolicy retry, ChatDefaults defaults)
    : provider_(provider),
      ledger_(ledger),
      retry_(retry),
      defaults_(defaults),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
    if (retry_.max_attempts < 1) throw InvalidArgumentError("retry policy needs at least one attempt");
}

ChatResponse Gateway::complete(const ChatRequest& request) {
    request.validate();
    const auto stage = std::string(to_string(request.stage));

    {
        std::lock_guard lock(budget_mutex_);
        if (call_limit_ && ledger_.size() + in_flight_ >= *call_limit_)
            throw BudgetExceededError(*call_limit_, stage);
        ++in_flight_;
    }
    struct Release {
        Gateway& g;
        ~Release() {
            std::lock_guard lock(g.budget_mutex_);
            --g.in_flight_;
        }
    } release{*this};

    const auto started = std::chrono::steady_clock::now();
    auto delay = retry_.base_delay;
    for (int attempt = 1;; ++attempt) {
        try {
            auto response = provider_.complete(request);
            if (response.input_tokens < 0 || response.output_tokens < 0)
                throw ResponseSchemaError("negative token count from provider", stage);
            auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started);
            ledger_.append({request.stage, response.input_tokens, response.output_tokens, elapsed.count(),
                            request_digest(request), attempt - 1});
            return response;
        } catch (const TransportError& e) {
            if (attempt >= retry_.max_attempts)
                throw TransportError(e.detail() + " (after " + std::to_string(attempt) + " attempts)", stage,
                                     e.http_status());
            sleeper_(delay);
            auto next = std::chrono::milliseconds(
                static_cast<std::int64_t>(static_cast<double>(delay.count()) * retry_.multiplier));
            delay = std::min(next, retry_.max_delay);
        } catch (const AuthenticationError& e) {
            if (!e.stage().empty()) throw;
            throw AuthenticationError(e.detail(), stage);
        } catch (const ReplayMissError& e) {
            if (!e.stage().empty()) throw;
            throw ReplayMissError(e.detail(), stage);
        } catch (const ResponseSchemaError& e) {
            if (!e.stage().empty()) throw;
            throw ResponseSchemaError(e.detail(), stage);
        }
    }
}

ChatResponse Gateway::ask(StageTag stage, std::string user_content) {
    ChatRequest request;
    request.messages.push_back({Role::user, std::move(user_content)});
    request.temperature = defaults_.temperature;
    request.max_output_tokens = defaults_.max_output_tokens;
    request.stage = stage;
    return complete(request);
}

}  // namespace promptforge
