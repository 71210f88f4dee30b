#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promptforge/core.hpp"

namespace promptforge {

/// Which pipeline component issued a call; partitions the ledger.
enum class StageTag {
    mutate,
    score_eval,
    critique_instruction,
    synthesize_instruction,
    select_eval,
    critique_examples,
    synthesize_examples,
    reasoning,
    validate,
    intent,
    persona,
    inference,
    judge,
};

inline constexpr std::array kAllStageTags = {
    StageTag::mutate,          StageTag::score_eval,        StageTag::critique_instruction,
    StageTag::synthesize_instruction, StageTag::select_eval, StageTag::critique_examples,
    StageTag::synthesize_examples,    StageTag::reasoning,   StageTag::validate,
    StageTag::intent,          StageTag::persona,           StageTag::inference,
    StageTag::judge,
};

std::string_view to_string(StageTag tag);
StageTag stage_tag_from_string(std::string_view s);

enum class Role { system, user, assistant };

std::string_view to_string(Role role);
Role role_from_string(std::string_view s);

struct ChatMessage {
    Role role = Role::user;
    std::string content;
    bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    StageTag stage = StageTag::inference;

    /// Non-empty, last message from the user, sane sampling settings.
    void validate() const;
    const std::string& last_user_message() const;
};

struct ChatResponse {
    std::string content;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::string provider_id;
};

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Digest over the canonical JSON form of the whole request (messages,
/// sampling settings and stage tag). Keys cassette entries.
std::string request_digest(const ChatRequest& request);

/// Implementations must accept concurrent complete() calls.
class Provider {
public:
    virtual ~Provider() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    virtual std::string id() const = 0;
};

struct LedgerRecord {
    StageTag stage = StageTag::inference;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::int64_t wall_ms = 0;
    std::string request_digest;
    int retries = 0;

    bool operator==(const LedgerRecord&) const = default;
};

/// Append-only and internally synchronized.
class CallLedger {
public:
    CallLedger() = default;
    explicit CallLedger(std::vector<LedgerRecord> records) : records_(std::move(records)) {}
    CallLedger(const CallLedger& other);
    CallLedger& operator=(const CallLedger&) = delete;

    void append(LedgerRecord record);
    std::vector<LedgerRecord> records() const;
    std::size_t size() const;

    std::string to_jsonl() const;
    static CallLedger from_jsonl(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static CallLedger load(const std::filesystem::path& path);

private:
    mutable std::mutex mutex_;
    std::vector<LedgerRecord> records_;
};

struct StageTotals {
    std::int64_t calls = 0;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    bool operator==(const StageTotals&) const = default;
};

struct LedgerReport {
    std::map<StageTag, StageTotals> per_stage;  // every stage tag, zeros included
    StageTotals total;
};

LedgerReport ledger_report(const CallLedger& ledger);
LedgerReport ledger_report(const std::vector<LedgerRecord>& records);

/// Predicted preprocessing calls, one field per pipeline component.
struct CallBudget {
    std::int64_t refine_instructions = 0;
    std::int64_t example_selection = 0;
    std::int64_t seq_opt = 0;
    std::int64_t reason_validate = 0;
    std::int64_t intent_expert = 0;
    std::int64_t total = 0;
};

/// refine = N*(M*v + b + 1 + 1), selection = b, seq = rounds*((1+1)+(1+1)),
/// plus 2 for reasoning/validation and 2 for intent/persona. `rounds` is
/// h.seq_cost_rounds; the defaults give 69.
CallBudget estimate_total_calls(const HyperParams& h);

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_delay{500};
    double multiplier = 2.0;
    std::chrono::milliseconds max_delay{8000};
};

struct ChatDefaults {
    double temperature = 0.0;
    int max_output_tokens = 1024;
};

/// Front door for every model call: validates, retries transport failures with
/// exponential backoff, enforces the optional call budget and records exactly
/// one ledger entry per successful logical call.
class Gateway {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    Gateway(Provider& provider, CallLedger& ledger, RetryPolicy retry = {}, ChatDefaults defaults = {});

    ChatResponse complete(const ChatRequest& request);

    /// Single user message with the default sampling settings.
    ChatResponse ask(StageTag stage, std::string user_content);

    void set_call_limit(std::optional<std::size_t> limit) { call_limit_ = limit; }
    void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

    CallLedger& ledger() { return ledger_; }
    const ChatDefaults& defaults() const { return defaults_; }

private:
    Provider& provider_;
    CallLedger& ledger_;
    RetryPolicy retry_;
    ChatDefaults defaults_;
    std::optional<std::size_t> call_limit_;
    Sleeper sleeper_;
    std::mutex budget_mutex_;
    std::size_t in_flight_ = 0;
};

}  // namespace promptforge
