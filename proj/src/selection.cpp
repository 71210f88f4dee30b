#include "promptforge/selection.hpp"

#include "promptforge/errors.hpp"

#include <algorithm>

namespace promptforge {

std::vector<std::size_t> diverse_selection_indices(std::size_t n, std::size_t k, std::size_t pool_cap, Rng& rng,
                                                   const std::function<bool(std::size_t)>& misclassified) {
    if (n < k) throw InvalidArgumentError("dataset has " + std::to_string(n) + " examples, fewer than k=" +
                                          std::to_string(k));
    const auto pool = rng.sample_indices(n, std::min(pool_cap, n));

    std::vector<std::size_t> chosen;
    std::vector<std::size_t> rest;
    std::size_t walked = 0;
    for (; walked < pool.size() && chosen.size() < k; ++walked) {
        if (misclassified(pool[walked])) {
            chosen.push_back(pool[walked]);
        } else {
            rest.push_back(pool[walked]);
        }
    }
    if (chosen.size() < k) {
        for (auto i : rng.sample_indices(rest.size(), std::min(k - chosen.size(), rest.size())))
            chosen.push_back(rest[i]);
    }
    return chosen;
}

std::optional<std::string> answer_question(std::string_view instruction, std::string_view answer_format,
                                           std::string_view question, Gateway& gateway, StageTag stage) {
    PromptState probe;
    probe.instruction = std::string(instruction);
    probe.answer_format = std::string(answer_format);
    return extract_answer(gateway.ask(stage, assemble_final_prompt(probe, question)).content);
}

FewShotSet select_diverse_examples(const std::vector<Example>& dataset, std::string_view instruction,
                                   std::string_view answer_format, int k, const HyperParams& h, Gateway& gateway,
                                   Rng& rng, const Evaluator& evaluator) {
    if (k < 1) throw InvalidArgumentError("few_shot_count must be at least 1 for example selection");
    const auto ku = static_cast<std::size_t>(k);
    auto indices = diverse_selection_indices(
        dataset.size(), ku, static_cast<std::size_t>(h.diverse_pool_size), rng, [&](std::size_t i) {
            auto predicted = answer_question(instruction, answer_format, dataset[i].question, gateway,
                                             StageTag::select_eval);
            return !evaluator.judge(dataset[i].question, predicted, dataset[i].answer).correct;
        });

    FewShotSet out(ku);
    for (auto i : indices) {
        Example e = dataset[i];
        e.reasoning.reset();
        e.origin = Origin::real;
        out.add(std::move(e));
    }
    return out;
}

}  // namespace promptforge
