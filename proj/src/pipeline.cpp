#include "promptforge/pipeline.hpp"

#include "promptforge/errors.hpp"
#include "promptforge/finishing.hpp"
#include "promptforge/mutation.hpp"
#include "promptforge/selection.hpp"
#include "promptforge/sequential.hpp"

namespace promptforge {

namespace fs = std::filesystem;

std::string render_final_prompt_file(const PromptState& state) {
    return assemble_final_prompt(state, "{question}") + "\n";
}

namespace {

void write_outputs(const PromptState& prompt, const fs::path& run_dir) {
    write_file_atomic(run_dir / kFinalPromptFile, render_final_prompt_file(prompt));
    write_file_atomic(run_dir / kPromptStateFile, serialize_prompt_state(prompt));
}

RunState fresh_state(const ProblemSpec& spec, const HyperParams& h, const Rng& rng) {
    RunState s;
    s.spec = spec;
    s.hyperparams = h;
    s.prompt.instruction = spec.base_instruction;
    s.prompt.answer_format = spec.answer_format;
    s.prompt.few_shots = FewShotSet(static_cast<std::size_t>(h.few_shot_count));
    s.rng_state = rng.state();
    return s;
}

void run_stage(PipelineStage stage, RunState& s, const std::vector<Example>& dataset, const ThinkingStylePool& pool,
               Gateway& gateway, Rng& rng, const Evaluator& evaluator, const RunOptions& options) {
    const auto& h = s.hyperparams;
    const bool zero_shot = h.few_shot_count == 0;
    auto& p = s.prompt;
    switch (stage) {
        case PipelineStage::none: break;
        case PipelineStage::refine_instructions:
            p.instruction = refine_instructions(s.spec, dataset, pool, h, gateway, rng, evaluator);
            break;
        case PipelineStage::select_diverse_examples:
            if (zero_shot) break;
            p.few_shots = select_diverse_examples(dataset, p.instruction, s.spec.answer_format, h.few_shot_count, h,
                                                  gateway, rng, evaluator);
            break;
        case PipelineStage::sequential_optimize: {
            if (zero_shot) break;
            auto r = sequential_optimize(p.instruction, p.few_shots, h.max_seq_iter, gateway,
                                         {options.seq_synthesize_from_diverse});
            p.instruction = std::move(r.instruction);
            p.few_shots = std::move(r.examples);
            break;
        }
        case PipelineStage::generate_reasoning:
            if (zero_shot) break;
            p.few_shots = generate_reasoning(p.few_shots, p.instruction, gateway);
            break;
        case PipelineStage::validate_examples: {
            if (zero_shot) break;
            auto report = validate_examples(p.few_shots, p.instruction, gateway);
            p.few_shots = std::move(report.examples);
            if (!report.warning.empty()) s.warnings.push_back(report.warning);
            break;
        }
        case PipelineStage::generate_intent:
            p.intent_keywords =
                generate_intent(s.spec, gateway, options.persona_from_instruction ? p.instruction : std::string());
            break;
        case PipelineStage::generate_persona:
            p.expert_persona =
                generate_persona(s.spec, gateway, options.persona_from_instruction ? p.instruction : std::string());
            break;
    }
}

}  // namespace

PipelineResult run_pipeline(const ProblemSpec& spec, const std::vector<Example>& dataset,
                            const ThinkingStylePool& pool, const HyperParams& h, Gateway& gateway, Rng& rng,
                            const Evaluator& evaluator, const fs::path& run_dir, const PipelineOptions& options) {
    spec.validate();
    h.validate();
    if (dataset.empty()) throw InvalidArgumentError("training dataset is empty");
    if (gateway.ledger().size() != 0) throw PreconditionError("run_pipeline needs a gateway with an empty ledger");

    const auto ledger_path = run_dir / kLedgerFile;
    RunState state;
    if (options.resume) {
        state = resume(run_dir);
        if (!(state.spec == spec) || !(state.hyperparams == h))
            throw ConfigError("configuration differs from the checkpointed run in " + run_dir.string());
        rng = Rng::from_state(state.rng_state);
        auto records = fs::exists(ledger_path) ? CallLedger::load(ledger_path).records() : std::vector<LedgerRecord>{};
        if (records.size() < state.ledger_records)
            throw CheckpointCorruptError("ledger has " + std::to_string(records.size()) +
                                         " records, checkpoint expects " + std::to_string(state.ledger_records));
        records.resize(state.ledger_records);
        for (auto& r : records) gateway.ledger().append(std::move(r));
    } else {
        if (fs::exists(run_dir / kStateFile))
            throw PreconditionError(run_dir.string() + " already holds a run; pass --resume to continue it");
        fs::create_directories(run_dir);
        if (!options.config_snapshot.empty()) write_file_atomic(run_dir / kConfigSnapshotFile, options.config_snapshot);
        state = fresh_state(spec, h, rng);
        gateway.ledger().save(ledger_path);
        checkpoint(state, run_dir);
    }

    for (auto stage : kPipelineStages) {
        if (static_cast<int>(stage) <= static_cast<int>(state.stage_cursor)) continue;
        RunState next = state;
        try {
            run_stage(stage, next, dataset, pool, gateway, rng, evaluator, options.run);
        } catch (Error& e) {
            gateway.ledger().save(ledger_path);
            e.add_context(std::string(to_string(stage)));
            throw;
        }
        next.stage_cursor = stage;
        next.rng_state = rng.state();
        gateway.ledger().save(ledger_path);
        next.ledger_records = gateway.ledger().size();
        checkpoint(next, run_dir);
        state = std::move(next);
        if (options.stop_after == stage && !state.complete()) return {state.prompt, state, false};
    }

    state.prompt.validate();
    write_outputs(state.prompt, run_dir);
    return {state.prompt, state, true};
}

}  // namespace promptforge
