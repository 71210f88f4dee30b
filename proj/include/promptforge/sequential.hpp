#pragma once

#include <string>
#include <string_view>

#include "promptforge/core.hpp"
#include "promptforge/gateway.hpp"
#include "promptforge/mutation.hpp"

namespace promptforge {

Critique critique_examples(std::string_view instruction, const FewShotSet& examples, Gateway& gateway);

/// Parses the reply with the demonstration-block grammar into
/// base.target_count() synthetic examples. A short reply is padded with the
/// highest-index base examples; a reply with no blocks throws SynthesisError.
FewShotSet synthesize_examples(std::string_view instruction, const FewShotSet& base, const Critique& critique,
                               Gateway& gateway);

Critique critique_prompt_with_examples(std::string_view instruction, const FewShotSet& examples, Gateway& gateway);

struct SequentialResult {
    std::string instruction;
    FewShotSet examples;
};

struct SequentialOptions {
    /// Synthesize every round from the initial diverse set instead of the
    /// evolving synthetic set.
    bool synthesize_from_diverse = false;
};

/// n rounds of critique_examples, synthesize_examples,
/// critique_prompt_with_examples and synthesize_instruction: 4n calls.
SequentialResult sequential_optimize(std::string_view instruction, const FewShotSet& examples, int n,
                                     Gateway& gateway, SequentialOptions options = {});

}  // namespace promptforge
