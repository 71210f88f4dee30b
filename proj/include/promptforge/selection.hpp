#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "promptforge/core.hpp"
#include "promptforge/evaluation.hpp"
#include "promptforge/gateway.hpp"
#include "promptforge/rng.hpp"

namespace promptforge {

/// The selection walk without any model access. Draws a pool of
/// min(pool_cap, n) dataset indices, walks it in draw order asking
/// `misclassified(index)` until k misclassified indices are collected, then
/// backfills from the rest of the pool with rng draws. Returns dataset indices
/// in selection order.
std::vector<std::size_t> diverse_selection_indices(std::size_t n, std::size_t k, std::size_t pool_cap, Rng& rng,
                                                   const std::function<bool(std::size_t)>& misclassified);

/// The model's answer to a single training question under an instruction; one
/// select_eval call.
std::optional<std::string> answer_question(std::string_view instruction, std::string_view answer_format,
                                           std::string_view question, Gateway& gateway, StageTag stage);

/// Misclassified examples first (in pool order), random pool backfill up to k.
/// Returned examples are real and carry no reasoning.
FewShotSet select_diverse_examples(const std::vector<Example>& dataset, std::string_view instruction,
                                   std::string_view answer_format, int k, const HyperParams& h, Gateway& gateway,
                                   Rng& rng, const Evaluator& evaluator);

}  // namespace promptforge
