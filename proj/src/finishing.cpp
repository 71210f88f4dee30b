#include "promptforge/finishing.hpp"

#include "promptforge/errors.hpp"
#include "promptforge/templates.hpp"
#include "promptforge/text.hpp"

#include <regex>

namespace promptforge {

FewShotSet generate_reasoning(const FewShotSet& examples, std::string_view instruction, Gateway& gateway) {
    if (examples.empty()) throw PreconditionError("reasoning generation needs a non-empty example set");
    std::vector<std::string> blocks;
    for (const auto& e : examples) {
        Example bare = e;
        bare.reasoning.reset();
        blocks.push_back(render_example_block(bare));
    }
    auto prompt = render_component_template(Component::reasoning, {{"instruction", std::string(instruction)},
                                                                   {"examples", text::join(blocks, "\n\n")}});
    auto parsed =
        parse_example_blocks(gateway.ask(StageTag::reasoning, std::move(prompt)).content, Origin::synthetic);

    FewShotSet out(examples.target_count());
    for (auto e : examples) {
        e.reasoning.reset();
        for (const auto& p : parsed) {
            if (text::trim_view(p.question) != text::trim_view(e.question)) continue;
            if (p.reasoning && !text::trim_view(*p.reasoning).empty()) e.reasoning = text::trim(*p.reasoning);
            break;
        }
        out.add(std::move(e));
    }
    return out;
}

ValidationVerdicts parse_validation_verdicts(std::string_view reply, std::size_t count) {
    const auto lowered = text::to_lower(text::trim_view(reply));
    if (lowered.find("all invalid") != std::string::npos) return {std::vector<bool>(count, false)};

    static const std::regex line_re(R"(^\s*[-*]?\s*(?:example\s*)?#?(\d+)\s*[:.)-]\s*\**\s*(valid|invalid)\b)",
                                    std::regex::icase);
    ValidationVerdicts v{std::vector<bool>(count, true)};
    bool any = false;
    for (const auto& line : text::split_lines(reply)) {
        std::smatch m;
        if (!std::regex_search(line, m, line_re)) continue;
        any = true;
        auto n = std::stoul(m[1].str());
        if (n >= 1 && n <= count) v.valid[n - 1] = text::iequals(m[2].str(), "valid");
    }
    if (any) return v;
    if (lowered.find("all valid") != std::string::npos) return v;
    throw ValidationError("could not parse validation verdict: " + std::string(text::trim_view(reply)).substr(0, 200));
}

ValidationReport validate_examples(const FewShotSet& examples, std::string_view instruction, Gateway& gateway) {
    std::vector<std::string> numbered;
    for (std::size_t i = 0; i < examples.size(); ++i)
        numbered.push_back("Example " + std::to_string(i + 1) + ":\n" + render_example_block(examples[i]));
    auto prompt = render_component_template(Component::validate, {{"instruction", std::string(instruction)},
                                                                  {"examples", text::join(numbered, "\n\n")}});
    auto verdicts =
        parse_validation_verdicts(gateway.ask(StageTag::validate, std::move(prompt)).content, examples.size());

    ValidationReport report{FewShotSet(examples.target_count()), {}, {}};
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (verdicts.valid[i]) {
            report.examples.add(examples[i]);
        } else {
            report.removed.push_back(i);
        }
    }
    if (report.examples.size() < examples.target_count())
        report.warning = "validation kept " + std::to_string(report.examples.size()) + " of " +
                         std::to_string(examples.target_count()) + " target examples";
    return report;
}

std::vector<std::string> parse_intent_keywords(std::string_view reply) {
    static const std::regex prefix_re(R"(^(?:[-*]+|\xE2\x80\xA2|\d+[.)])\s*)");
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        auto k = std::regex_replace(text::trim(current), prefix_re, "");
        k = text::trim(k);
        while (k.size() >= 2 && (k.front() == '"' || k.front() == '\'') && k.back() == k.front())
            k = text::trim(std::string_view(k).substr(1, k.size() - 2));
        if (!k.empty() && k.back() == '.') k.pop_back();
        if (!k.empty() && out.size() < 8) out.push_back(std::move(k));
        current.clear();
    };
    for (char c : reply) {
        if (c == ',' || c == '\n') {
            flush();
        } else {
            current += c;
        }
    }
    flush();
    return out;
}

std::string finishing_context(const ProblemSpec& spec, std::string_view instruction) {
    if (instruction.empty()) return spec.description;
    return spec.description + "\n\nOptimized instruction:\n" + std::string(instruction);
}

std::vector<std::string> generate_intent(const ProblemSpec& spec, Gateway& gateway, std::string_view instruction) {
    auto prompt = render_component_template(Component::intent,
                                            {{"problem description", finishing_context(spec, instruction)}});
    auto keywords = parse_intent_keywords(gateway.ask(StageTag::intent, std::move(prompt)).content);
    if (keywords.empty()) throw IntentError("intent reply contained no keywords");
    return keywords;
}

std::string generate_persona(const ProblemSpec& spec, Gateway& gateway, std::string_view instruction) {
    auto prompt = render_component_template(Component::persona,
                                            {{"problem description", finishing_context(spec, instruction)}});
    auto persona = text::trim(gateway.ask(StageTag::persona, std::move(prompt)).content);
    if (persona.empty()) throw PersonaError("persona reply was empty");
    return persona;
}

}  // namespace promptforge
