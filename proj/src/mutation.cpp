#include "promptforge/mutation.hpp"

#include "promptforge/errors.hpp"
#include "promptforge/templates.hpp"
#include "promptforge/text.hpp"

#include <map>
#include <regex>

namespace promptforge {

std::vector<std::string> select_thinking_styles(const ThinkingStylePool& pool, int v, Rng& rng) {
    if (v < 1) throw InvalidArgumentError("style_variation must be at least 1");
    if (static_cast<std::size_t>(v) > pool.size())
        throw InvalidArgumentError("cannot select " + std::to_string(v) + " styles from a pool of " +
                                   std::to_string(pool.size()));
    std::vector<std::string> out;
    for (auto i : rng.sample_indices(pool.size(), static_cast<std::size_t>(v))) out.push_back(pool.styles()[i]);
    return out;
}

std::vector<std::string> parse_mutation_variants(std::string_view reply) {
    static const std::regex item_re(R"(^\s*\d+\s*[.)]\s*(.*)$)");
    const auto lines = text::split_lines(reply);

    std::vector<std::string> numbered;
    bool in_item = false;
    for (const auto& line : lines) {
        std::smatch m;
        if (std::regex_match(line, m, item_re)) {
            numbered.push_back(m[1].str());
            in_item = true;
        } else if (in_item && !text::trim_view(line).empty()) {
            numbered.back() += "\n" + line;
        }
    }
    std::vector<std::string> out;
    for (auto& item : numbered)
        if (auto t = text::trim(item); !t.empty()) out.push_back(std::move(t));
    if (!out.empty()) return out;

    std::string paragraph;
    for (const auto& line : lines) {
        if (text::trim_view(line).empty()) {
            if (auto t = text::trim(paragraph); !t.empty()) out.push_back(std::move(t));
            paragraph.clear();
        } else {
            paragraph += line + "\n";
        }
    }
    if (auto t = text::trim(paragraph); !t.empty()) out.push_back(std::move(t));
    if (out.empty()) throw MutationParseError("mutation reply contained no instruction variants");
    return out;
}

std::vector<std::string> mutate(const ProblemSpec& spec, std::string_view incumbent,
                                const std::vector<std::string>& styles, Gateway& gateway) {
    if (styles.empty()) throw PreconditionError("mutate needs at least one thinking style");
    auto prompt = render_component_template(Component::mutate,
                                            {{"problem description", spec.description},
                                             {"current instruction", std::string(incumbent)},
                                             {"thinking style pool", text::join(styles, "\n")},
                                             {"style variation number", std::to_string(styles.size())}});
    auto variants = parse_mutation_variants(gateway.ask(StageTag::mutate, std::move(prompt)).content);
    if (variants.size() > styles.size()) variants.resize(styles.size());
    return variants;
}

std::string render_scoring_questions(const std::vector<Example>& minibatch) {
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < minibatch.size(); ++i)
        parts.push_back("Question " + std::to_string(i + 1) + ": " + minibatch[i].question);
    return text::join(parts, "\n\n");
}

std::vector<std::optional<std::string>> split_batched_answers(std::string_view reply, std::size_t count) {
    std::vector<std::optional<std::string>> out(count);
    static const std::regex marker(R"(^\s*\**\s*(?:Answer|Question)\s*(\d+)\s*\**\s*[:.)])", std::regex::icase);

    std::map<std::size_t, std::string> sections;
    std::optional<std::size_t> current;
    for (const auto& line : text::split_lines(reply)) {
        std::smatch m;
        if (std::regex_search(line, m, marker)) {
            current = std::stoul(m[1].str());
            sections[*current] += line.substr(static_cast<std::size_t>(m.length(0))) + "\n";
        } else if (current) {
            sections[*current] += line + "\n";
        }
    }
    bool any = false;
    for (const auto& [n, body] : sections) {
        if (n < 1 || n > count) continue;
        if (auto a = extract_last_answer(body)) {
            out[n - 1] = std::move(a);
            any = true;
        }
    }
    if (any) return out;

    auto answers = extract_all_answers(reply);
    for (std::size_t i = 0; i < count && i < answers.size(); ++i) out[i] = answers[i];
    return out;
}

ScoredPrompt score_prompt(std::string_view instruction, std::string_view answer_format,
                          const std::vector<Example>& minibatch, Gateway& gateway, const Evaluator& evaluator) {
    if (minibatch.empty()) throw PreconditionError("score_prompt needs a non-empty mini-batch");
    auto prompt = render_component_template(Component::score, {{"instruction", std::string(instruction)},
                                                               {"answer format", std::string(answer_format)},
                                                               {"questions", render_scoring_questions(minibatch)}});
    auto reply = gateway.ask(StageTag::score_eval, std::move(prompt)).content;
    auto answers = split_batched_answers(reply, minibatch.size());

    ScoredPrompt scored{std::string(instruction), 0.0, {}};
    std::size_t correct = 0;
    for (std::size_t i = 0; i < minibatch.size(); ++i) {
        bool ok = evaluator.judge(minibatch[i].question, answers[i], minibatch[i].answer).correct;
        correct += ok ? 1 : 0;
        scored.minibatch_results.push_back({i, answers[i].value_or(""), ok});
    }
    scored.score = static_cast<double>(correct) / static_cast<double>(minibatch.size());
    return scored;
}

std::vector<ScoredPrompt> filter_candidates(const std::vector<ScoredPrompt>& candidates) {
    std::vector<ScoredPrompt> out;
    for (const auto& c : candidates)
        if (c.score > 0.5) out.push_back(c);
    return out;
}

std::optional<std::size_t> best_candidate(const std::vector<ScoredPrompt>& candidates) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (!best || candidates[i].score > candidates[*best].score) best = i;
    return best;
}

namespace {

std::string render_blocks(const std::vector<Example>& examples) {
    std::vector<std::string> parts;
    for (const auto& e : examples) parts.push_back(render_example_block(e));
    return text::join(parts, "\n\n");
}

}  // namespace

Critique critique_instruction(const ScoredPrompt& best, const std::vector<Example>& minibatch, Gateway& gateway) {
    if (best.minibatch_results.empty()) throw PreconditionError("critique needs scored mini-batch results");
    std::vector<std::string> failures;
    for (const auto& r : best.minibatch_results) {
        if (r.correct) continue;
        if (r.example_ref >= minibatch.size()) throw PreconditionError("mini-batch result refers past the batch");
        const auto& ex = minibatch[r.example_ref];
        failures.push_back("[Question] " + ex.question + "\n[Expected answer] " + ex.answer + "\n[Model answer] " +
                           (r.model_answer.empty() ? std::string("(no answer extracted)") : r.model_answer));
    }
    auto prompt = render_component_template(
        Component::critique_instruction,
        {{"instruction", best.instruction},
         {"examples", render_blocks(minibatch)},
         {"failures", failures.empty() ? std::string("No failures observed.") : text::join(failures, "\n\n")}});
    auto reply = text::trim(gateway.ask(StageTag::critique_instruction, std::move(prompt)).content);
    if (reply.empty()) throw SynthesisError("instruction critique came back empty");
    return {std::move(reply), CritiqueTarget::instruction};
}

std::string parse_synthesized_instruction(std::string_view reply) {
    std::string_view body = reply;
    if (auto start = body.find(kInstructionStart); start != std::string_view::npos) {
        body.remove_prefix(start + kInstructionStart.size());
        if (auto end = body.find(kInstructionEnd); end != std::string_view::npos) body = body.substr(0, end);
    } else if (auto end = body.find(kInstructionEnd); end != std::string_view::npos) {
        body = body.substr(0, end);
    }
    auto out = text::trim(body);
    if (out.empty()) throw SynthesisError("synthesized instruction is empty");
    return out;
}

std::string synthesize_instruction(std::string_view best, const Critique& critique, Gateway& gateway,
                                   const std::vector<Example>& examples) {
    if (critique.target != CritiqueTarget::instruction)
        throw PreconditionError("synthesize_instruction needs a critique of the instruction");
    auto prompt = render_component_template(
        Component::synthesize_instruction,
        {{"instruction", std::string(best)},
         {"critique", critique.text},
         {"examples", examples.empty() ? std::string("(none)") : render_blocks(examples)}});
    return parse_synthesized_instruction(gateway.ask(StageTag::synthesize_instruction, std::move(prompt)).content);
}

std::string refine_instructions(const ProblemSpec& spec, const std::vector<Example>& dataset,
                                const ThinkingStylePool& pool, const HyperParams& h, Gateway& gateway, Rng& rng,
                                const Evaluator& evaluator) {
    const auto b = static_cast<std::size_t>(h.mini_batch_size);
    if (dataset.size() < b)
        throw PreconditionError("dataset has " + std::to_string(dataset.size()) + " examples, mini-batch needs " +
                                std::to_string(b));

    std::string incumbent = spec.base_instruction;
    for (int round = 1; round <= h.mutate_refine_rounds; ++round) {
        try {
            auto styles = select_thinking_styles(pool, h.style_variation, rng);
            std::vector<Example> minibatch;
            for (auto i : rng.sample_indices(dataset.size(), b)) minibatch.push_back(dataset[i]);

            std::vector<ScoredPrompt> scored;
            for (int m = 0; m < h.mutate_rounds; ++m)
                for (const auto& variant : mutate(spec, incumbent, styles, gateway))
                    scored.push_back(score_prompt(variant, spec.answer_format, minibatch, gateway, evaluator));

            auto kept = filter_candidates(scored);
            auto best = best_candidate(kept);
            if (!best) continue;
            auto critique = critique_instruction(kept[*best], minibatch, gateway);
            incumbent = synthesize_instruction(kept[*best].instruction, critique, gateway, minibatch);
        } catch (Error& e) {
            e.add_context("refine round " + std::to_string(round));
            throw;
        }
    }
    return incumbent;
}

}  // namespace promptforge
