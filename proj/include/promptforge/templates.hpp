#pragma once

#include <map>
#include <string>
#include <string_view>

namespace promptforge {

enum class Component {
    mutate,
    score,
    critique_instruction,
    synthesize_instruction,
    critique_examples,
    synthesize_examples,
    reasoning,
    validate,
    intent,
    persona,
    judge,
};

std::string_view to_string(Component component);

using SlotMap = std::map<std::string, std::string, std::less<>>;

/// Delimiters the synthesize-instruction template asks the model to wrap its
/// refined instruction in.
inline constexpr std::string_view kInstructionStart = "<START>";
inline constexpr std::string_view kInstructionEnd = "<END>";

/// Substitutes every `{{slot name}}` marker in a single left-to-right pass.
/// Slot values are inserted verbatim and never rescanned.
/// Throws MissingSlotError for the first marker without a value.
std::string render_template(std::string_view tmpl, const SlotMap& slots);

/// The built-in template text for a component.
std::string_view component_template(Component component);

std::string render_component_template(Component component, const SlotMap& slots);

}  // namespace promptforge
