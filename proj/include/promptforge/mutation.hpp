#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promptforge/core.hpp"
#include "promptforge/evaluation.hpp"
#include "promptforge/gateway.hpp"
#include "promptforge/rng.hpp"

namespace promptforge {

struct MinibatchResult {
    std::size_t example_ref = 0;  // index into the scored mini-batch
    std::string model_answer;     // extracted answer, empty when extraction failed
    bool correct = false;
    bool operator==(const MinibatchResult&) const = default;
};

struct ScoredPrompt {
    std::string instruction;
    double score = 0.0;
    std::vector<MinibatchResult> minibatch_results;
    bool operator==(const ScoredPrompt&) const = default;
};

enum class CritiqueTarget { instruction, examples };

struct Critique {
    std::string text;
    CritiqueTarget target = CritiqueTarget::instruction;
};

std::vector<std::string> select_thinking_styles(const ThinkingStylePool& pool, int v, Rng& rng);

/// Numbered list first, then blank-line separated paragraphs, then the whole
/// text as a single variant. Empty result throws MutationParseError.
std::vector<std::string> parse_mutation_variants(std::string_view text);

/// One mutate call. At most |styles| variants are kept.
std::vector<std::string> mutate(const ProblemSpec& spec, std::string_view incumbent,
                                const std::vector<std::string>& styles, Gateway& gateway);

/// Renders the numbered questions of a scoring request.
std::string render_scoring_questions(const std::vector<Example>& minibatch);

/// Maps a batched scoring reply back to one answer per question. Replies split
/// into "Answer N:" / "Question N:" sections use the last tag pair of each
/// section; otherwise tag pairs are taken in order.
std::vector<std::optional<std::string>> split_batched_answers(std::string_view reply, std::size_t count);

/// One score_eval call answering the whole mini-batch; score is the fraction
/// judged correct. A question without an extractable answer is incorrect.
ScoredPrompt score_prompt(std::string_view instruction, std::string_view answer_format,
                          const std::vector<Example>& minibatch, Gateway& gateway, const Evaluator& evaluator);

/// Keeps candidates with score strictly above 0.5, order preserved.
std::vector<ScoredPrompt> filter_candidates(const std::vector<ScoredPrompt>& candidates);

/// Highest score, earliest on ties. Empty input gives nullopt.
std::optional<std::size_t> best_candidate(const std::vector<ScoredPrompt>& candidates);

Critique critique_instruction(const ScoredPrompt& best, const std::vector<Example>& minibatch, Gateway& gateway);

/// Strips <START>/<END> when present. Whitespace-only output throws SynthesisError.
std::string parse_synthesized_instruction(std::string_view reply);

std::string synthesize_instruction(std::string_view best, const Critique& critique, Gateway& gateway,
                                   const std::vector<Example>& examples = {});

/// N rounds of style selection, M mutate calls, batched scoring of every
/// variant on one fresh mini-batch per round, filter, critique and synthesis.
/// A round whose filter comes up empty keeps the incumbent.
std::string refine_instructions(const ProblemSpec& spec, const std::vector<Example>& dataset,
                                const ThinkingStylePool& pool, const HyperParams& h, Gateway& gateway, Rng& rng,
                                const Evaluator& evaluator);

}  // namespace promptforge
