#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "promptforge/core.hpp"
#include "promptforge/evaluation.hpp"
#include "promptforge/gateway.hpp"
#include "promptforge/persistence.hpp"
#include "promptforge/rng.hpp"

namespace promptforge {

struct PipelineOptions {
    RunOptions run;
    /// Continue from run_dir/state.json instead of starting fresh.
    bool resume = false;
    /// Return right after this stage has been checkpointed (crash injection).
    std::optional<PipelineStage> stop_after;
    /// Written to run_dir/config.snapshot on a fresh start when non-empty.
    std::string config_snapshot;
};

struct PipelineResult {
    PromptState prompt;
    RunState state;
    bool complete = false;
};

/// Runs every stage after the checkpointed cursor, checkpointing state.json and
/// ledger.jsonl after each one. The gateway's ledger must start empty; on
/// resume it is refilled with the checkpointed records. On failure the ledger
/// file gets every record so far while state.json keeps the last checkpoint.
/// A complete run writes final_prompt.txt and prompt_state.json.
PipelineResult run_pipeline(const ProblemSpec& spec, const std::vector<Example>& dataset,
                            const ThinkingStylePool& pool, const HyperParams& h, Gateway& gateway, Rng& rng,
                            const Evaluator& evaluator, const std::filesystem::path& run_dir,
                            const PipelineOptions& options = {});

/// final_prompt.txt content: the assembled prompt with a "{question}" placeholder.
std::string render_final_prompt_file(const PromptState& state);

}  // namespace promptforge
