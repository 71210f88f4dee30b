#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "promptforge/core.hpp"
#include "promptforge/gateway.hpp"

namespace promptforge {

/// One batched reasoning call. Replies are matched back to examples by
/// question text; an example missing from the reply ends up without reasoning.
/// Questions and answers are never changed.
FewShotSet generate_reasoning(const FewShotSet& examples, std::string_view instruction, Gateway& gateway);

struct ValidationVerdicts {
    std::vector<bool> valid;  // one flag per example, by position
};

/// "ALL VALID", "ALL INVALID", or numbered "N: valid|invalid" lines (examples
/// not mentioned stay valid). Throws ValidationError otherwise.
ValidationVerdicts parse_validation_verdicts(std::string_view reply, std::size_t count);

struct ValidationReport {
    FewShotSet examples;
    std::vector<std::size_t> removed;  // positions in the input set
    std::string warning;               // set when the kept set is below target
};

/// One validate call; invalid examples are dropped, order preserved, nothing refilled.
ValidationReport validate_examples(const FewShotSet& examples, std::string_view instruction, Gateway& gateway);

/// Comma or newline separated keywords, bullets and numbering stripped, at most 8.
std::vector<std::string> parse_intent_keywords(std::string_view reply);

/// Conditioning text for intent and persona: the description alone, or the
/// description followed by the optimized instruction.
std::string finishing_context(const ProblemSpec& spec, std::string_view instruction = {});

std::vector<std::string> generate_intent(const ProblemSpec& spec, Gateway& gateway, std::string_view instruction = {});

std::string generate_persona(const ProblemSpec& spec, Gateway& gateway, std::string_view instruction = {});

}  // namespace promptforge
