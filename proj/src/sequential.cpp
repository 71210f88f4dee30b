#include "promptforge/sequential.hpp"

#include "promptforge/errors.hpp"
#include "promptforge/templates.hpp"
#include "promptforge/text.hpp"

namespace promptforge {

namespace {

std::string render_blocks(const FewShotSet& examples) {
    std::vector<std::string> parts;
    for (const auto& e : examples) parts.push_back(render_example_block(e));
    return text::join(parts, "\n\n");
}

Critique ask_critique(StageTag stage, Component component, CritiqueTarget target, std::string_view instruction,
                      const FewShotSet& examples, Gateway& gateway) {
    if (examples.empty()) throw PreconditionError("critique needs a non-empty example set");
    if (text::trim_view(instruction).empty()) throw PreconditionError("critique needs a non-empty instruction");
    auto prompt = render_component_template(
        component, {{"instruction", std::string(instruction)},
                    {"examples", render_blocks(examples)},
                    {"failures", "Not scored in this step; judge the instruction against the examples."}});
    auto reply = text::trim(gateway.ask(stage, std::move(prompt)).content);
    if (reply.empty()) throw SynthesisError("critique came back empty");
    return {std::move(reply), target};
}

}  // namespace

Critique critique_examples(std::string_view instruction, const FewShotSet& examples, Gateway& gateway) {
    return ask_critique(StageTag::critique_examples, Component::critique_examples, CritiqueTarget::examples,
                        instruction, examples, gateway);
}

Critique critique_prompt_with_examples(std::string_view instruction, const FewShotSet& examples, Gateway& gateway) {
    return ask_critique(StageTag::critique_instruction, Component::critique_instruction,
                        CritiqueTarget::instruction, instruction, examples, gateway);
}

FewShotSet synthesize_examples(std::string_view instruction, const FewShotSet& base, const Critique& critique,
                               Gateway& gateway) {
    if (critique.target != CritiqueTarget::examples)
        throw PreconditionError("synthesize_examples needs a critique of the examples");
    if (base.empty()) throw PreconditionError("synthesize_examples needs a non-empty base set");
    const auto target = base.target_count();
    auto prompt = render_component_template(Component::synthesize_examples,
                                            {{"instruction", std::string(instruction)},
                                             {"examples", render_blocks(base)},
                                             {"critique", critique.text},
                                             {"count", std::to_string(target)}});
    auto parsed = parse_example_blocks(gateway.ask(StageTag::synthesize_examples, std::move(prompt)).content,
                                       Origin::synthetic);
    if (parsed.empty()) throw SynthesisError("example synthesis reply contained no [Question]/[Answer] blocks");

    FewShotSet out(target);
    for (auto& e : parsed) {
        e.origin = Origin::synthetic;
        out.add(std::move(e));
    }
    // Pad from the end of the base set, then restore base order for the padding.
    std::vector<Example> padding;
    for (auto i = base.size(); i-- > 0 && out.size() + padding.size() < target;) {
        if (out.contains_question(base[i].question)) continue;
        padding.push_back(base[i]);
    }
    for (auto it = padding.rbegin(); it != padding.rend(); ++it) out.add(*it);
    return out;
}

SequentialResult sequential_optimize(std::string_view instruction, const FewShotSet& examples, int n,
                                     Gateway& gateway, SequentialOptions options) {
    if (n < 1) throw InvalidArgumentError("max_seq_iter must be at least 1");
    SequentialResult r{std::string(instruction), examples};
    for (int round = 1; round <= n; ++round) {
        try {
            auto example_feedback = critique_examples(r.instruction, r.examples, gateway);
            const auto& base = options.synthesize_from_diverse ? examples : r.examples;
            r.examples = synthesize_examples(r.instruction, base, example_feedback, gateway);
            auto prompt_feedback = critique_prompt_with_examples(r.instruction, r.examples, gateway);
            r.instruction = synthesize_instruction(r.instruction, prompt_feedback, gateway, r.examples.examples());
        } catch (Error& e) {
            e.add_context("sequential round " + std::to_string(round));
            throw;
        }
    }
    return r;
}

}  // namespace promptforge
