#include "promptforge/templates.hpp"

#include "promptforge/errors.hpp"

namespace promptforge {

std::string_view to_string(Component component) {
    switch (component) {
        case Component::mutate: return "mutate";
        case Component::score: return "score";
        case Component::critique_instruction: return "critique_instruction";
        case Component::synthesize_instruction: return "synthesize_instruction";
        case Component::critique_examples: return "critique_examples";
        case Component::synthesize_examples: return "synthesize_examples";
        case Component::reasoning: return "reasoning";
        case Component::validate: return "validate";
        case Component::intent: return "intent";
        case Component::persona: return "persona";
        case Component::judge: return "judge";
    }
    return "unknown";
}

namespace {

constexpr std::string_view kMutate = R"(You are helping improve the instruction given to a language model for the task below.

Task description:
{{problem description}}

Current instruction:
{{current instruction}}

Thinking styles:
{{thinking style pool}}

Number of variations: {{style variation number}}

Write one new variation of the current instruction for each thinking style, applying that style to how the task should be approached. Return the variations as a numbered list ("1.", "2.", ...) with one variation per item and no other text.)";

constexpr std::string_view kScore = R"({{instruction}}

{{answer format}}

Answer each of the following questions separately, in order. For every question give your reasoning, then wrap only its final answer between <ANS_START> and <ANS_END>.

{{questions}})";

constexpr std::string_view kCritiqueInstruction = R"(The following instruction was given to a language model:

{{instruction}}

It was applied to these examples:

{{examples}}

Cases where the model answered incorrectly:

{{failures}}

Review where the instruction succeeded and where it failed. Identify the specific weaknesses behind the wrong answers and explain concretely how the instruction should change. Do not rewrite the instruction yourself.)";

constexpr std::string_view kSynthesizeInstruction = R"(Current instruction:

{{instruction}}

Feedback on the instruction:

{{critique}}

Examples the instruction must handle:

{{examples}}

Write an improved instruction that addresses the feedback without changing the task. Wrap the improved instruction between <START> and <END>.)";

constexpr std::string_view kCritiqueExamples = R"(Instruction:

{{instruction}}

Current few-shot examples:

{{examples}}

Analyse these examples as demonstrations for the instruction. Point out where they are redundant, too easy, ambiguous or unrepresentative of the task, and describe how a better set of examples should differ.)";

constexpr std::string_view kSynthesizeExamples = R"(Instruction:

{{instruction}}

Current few-shot examples:

{{examples}}

Feedback on the examples:

{{critique}}

Using the feedback, write exactly {{count}} new examples that are more diverse, harder and more representative of the task. Use exactly the same question/answer format as the examples above, with the final answer wrapped in the answer tags.)";

constexpr std::string_view kReasoning = R"(Instruction:

{{instruction}}

Examples:

{{examples}}

For every example, write a detailed step-by-step reasoning chain that leads to its final answer. Reproduce each example in the same format, placing the reasoning after the answer marker and ending with the unchanged final answer in the answer tags.)";

constexpr std::string_view kValidate = R"(Instruction:

{{instruction}}

Numbered examples:

{{examples}}

Check every example for coherence and relevance: the question must be well-posed, the reasoning must be correct and must actually support the final answer. Reply with one line per example of the form "<number>: valid" or "<number>: invalid", or reply "ALL VALID" if every example passes.)";

constexpr std::string_view kIntent = R"(Task description:
{{problem description}}

List between 3 and 8 short keywords or phrases that capture the intent of this task and the skills needed to solve it. Reply with a single comma-separated line and nothing else.)";

constexpr std::string_view kPersona = R"(Task description:
{{problem description}}

Describe, in one paragraph written in the second person ("You are ..."), the expert best suited to solve this task: their background, their experience and how they approach problems of this kind.)";

constexpr std::string_view kJudge = R"(Question:
{{question}}

Reference answer:
{{reference answer}}

Candidate answer:
{{candidate answer}}

Does the candidate answer mean the same as the reference answer? Reply with exactly one word: CORRECT or INCORRECT.)";

}  // namespace

std::string_view component_template(Component component) {
    switch (component) {
        case Component::mutate: return kMutate;
        case Component::score: return kScore;
        case Component::critique_instruction: return kCritiqueInstruction;
        case Component::synthesize_instruction: return kSynthesizeInstruction;
        case Component::critique_examples: return kCritiqueExamples;
        case Component::synthesize_examples: return kSynthesizeExamples;
        case Component::reasoning: return kReasoning;
        case Component::validate: return kValidate;
        case Component::intent: return kIntent;
        case Component::persona: return kPersona;
        case Component::judge: return kJudge;
    }
    return {};
}

std::string render_template(std::string_view tmpl, const SlotMap& slots) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) break;
        auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) break;
        out.append(tmpl, pos, open - pos);
        auto name = tmpl.substr(open + 2, close - open - 2);
        auto it = slots.find(name);
        if (it == slots.end()) throw MissingSlotError(std::string(name));
        out += it->second;
        pos = close + 2;
    }
    out.append(tmpl.substr(pos));
    return out;
}

std::string render_component_template(Component component, const SlotMap& slots) {
    return render_template(component_template(component), slots);
}

}  // namespace promptforge
