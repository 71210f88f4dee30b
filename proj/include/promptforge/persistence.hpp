#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "promptforge/core.hpp"
#include "promptforge/evaluation.hpp"
#include "promptforge/gateway.hpp"

namespace promptforge {

/// Pipeline stages in execution order. The cursor names the last completed one.
enum class PipelineStage {
    none,
    refine_instructions,
    select_diverse_examples,
    sequential_optimize,
    generate_reasoning,
    validate_examples,
    generate_intent,
    generate_persona,
};

inline constexpr std::array kPipelineStages = {
    PipelineStage::refine_instructions, PipelineStage::select_diverse_examples, PipelineStage::sequential_optimize,
    PipelineStage::generate_reasoning,  PipelineStage::validate_examples,       PipelineStage::generate_intent,
    PipelineStage::generate_persona,
};

std::string_view to_string(PipelineStage stage);
PipelineStage pipeline_stage_from_string(std::string_view s);

struct ProviderSettings {
    std::string model = "gpt-4o";
    std::string base_url;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    int max_attempts = 3;
    int backoff_ms = 500;
    int timeout_seconds = 120;
    std::optional<std::filesystem::path> mock_script;
    std::optional<std::filesystem::path> cassette;

    bool operator==(const ProviderSettings&) const = default;
};

struct RunOptions {
    bool seq_synthesize_from_diverse = false;
    bool persona_from_instruction = false;
    bool operator==(const RunOptions&) const = default;
};

struct RunConfig {
    ProblemSpec spec;
    HyperParams hyper;
    ProviderSettings provider;
    RunOptions options;
    MatchMode evaluator = MatchMode::exact;
    double f1_threshold = kDefaultF1Threshold;
    std::optional<std::size_t> max_total_calls;
    std::optional<std::filesystem::path> thinking_styles_file;

    void validate() const;
    bool operator==(const RunConfig&) const = default;
};

/// YAML configuration. Relative paths resolve against the file's directory.
/// Unknown keys raise UnknownKeyError; malformed YAML and bad values raise
/// ConfigError with the line number.
RunConfig parse_config(std::string_view yaml, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

ThinkingStylePool load_thinking_styles(const RunConfig& config);

struct DatasetLoad {
    std::vector<Example> examples;
    std::vector<std::string> warnings;
};

/// JSON lines {"question": ..., "answer": ...}; blank lines skipped, numeric
/// answers accepted. Malformed lines raise DatasetError with the line number.
DatasetLoad parse_dataset(std::string_view jsonl);
DatasetLoad load_dataset(const std::filesystem::path& path);

nlohmann::json to_json(const Example& e);
Example example_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FewShotSet& s);
FewShotSet few_shot_set_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PromptState& s);
PromptState prompt_state_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProblemSpec& s);
ProblemSpec problem_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HyperParams& h);
HyperParams hyper_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j);

std::string serialize_prompt_state(const PromptState& s);
PromptState load_prompt_state(const std::filesystem::path& path);

struct RunState {
    PipelineStage stage_cursor = PipelineStage::none;
    ProblemSpec spec;
    HyperParams hyperparams;
    PromptState prompt;
    std::string rng_state;
    std::string ledger_path = "ledger.jsonl";
    std::size_t ledger_records = 0;  // ledger length when the checkpoint was taken
    std::vector<std::string> warnings;

    bool complete() const { return stage_cursor == PipelineStage::generate_persona; }
    bool operator==(const RunState&) const = default;
};

nlohmann::json to_json(const RunState& s);
RunState run_state_from_json(const nlohmann::json& j);
std::string serialize_run_state(const RunState& s);
RunState parse_run_state(std::string_view text);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

inline constexpr std::string_view kStateFile = "state.json";
inline constexpr std::string_view kLedgerFile = "ledger.jsonl";
inline constexpr std::string_view kConfigSnapshotFile = "config.snapshot";
inline constexpr std::string_view kFinalPromptFile = "final_prompt.txt";
inline constexpr std::string_view kPromptStateFile = "prompt_state.json";
inline constexpr std::string_view kCassetteFile = "cassette.jsonl";

/// Atomic state.json write. Refuses to move the cursor backwards relative to
/// the checkpoint already on disk.
void checkpoint(const RunState& state, const std::filesystem::path& run_dir);

/// CheckpointNotFoundError without state.json, CheckpointCorruptError when it
/// cannot be decoded.
RunState resume(const std::filesystem::path& run_dir);

}  // namespace promptforge
