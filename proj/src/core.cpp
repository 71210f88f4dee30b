#include "promptforge/core.hpp"

#include "promptforge/errors.hpp"
#include "promptforge/text.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace promptforge {

void ProblemSpec::validate() const {
    if (text::trim_view(description).empty())
        throw InvalidArgumentError("problem description must not be empty");
    if (text::trim_view(base_instruction).empty())
        throw InvalidArgumentError("base instruction must not be empty");
}

std::string_view to_string(Origin origin) {
    return origin == Origin::real ? "real" : "synthetic";
}

Origin origin_from_string(std::string_view s) {
    if (s == "real") return Origin::real;
    if (s == "synthetic") return Origin::synthetic;
    throw InvalidArgumentError("unknown example origin '" + std::string(s) + "'");
}

void Example::validate() const {
    if (text::trim_view(question).empty()) throw InvalidArgumentError("example question must not be empty");
    if (text::trim_view(answer).empty()) throw InvalidArgumentError("example answer must not be empty");
}

bool FewShotSet::add(Example example) {
    if (full() || contains_question(example.question)) return false;
    examples_.push_back(std::move(example));
    return true;
}

bool FewShotSet::contains_question(std::string_view question) const {
    return std::any_of(examples_.begin(), examples_.end(),
                       [&](const Example& e) { return e.question == question; });
}

void PromptState::validate() const {
    if (text::trim_view(instruction).empty()) throw InvalidArgumentError("instruction must not be empty");
    for (const auto& k : intent_keywords)
        if (text::trim_view(k).empty()) throw InvalidArgumentError("intent keywords must not be empty");
    for (const auto& e : few_shots) e.validate();
}

ThinkingStylePool::ThinkingStylePool(std::vector<std::string> styles) : styles_(std::move(styles)) {
    if (styles_.empty()) throw InvalidArgumentError("thinking style pool is empty");
    std::set<std::string> seen;
    for (const auto& s : styles_) {
        if (text::trim_view(s).empty()) throw InvalidArgumentError("thinking style must not be empty");
        if (!seen.insert(s).second) throw InvalidArgumentError("duplicate thinking style: " + s);
    }
}

ThinkingStylePool ThinkingStylePool::defaults() {
    return ThinkingStylePool({
        "How can I simplify the problem so that it is easier to solve?",
        "What alternative perspectives or viewpoints exist for this problem?",
        "How could I break this problem down into smaller, more manageable parts?",
        "What are the key assumptions underlying this problem?",
        "What information is given, and what exactly is being asked?",
        "Can I work backwards from the desired result?",
        "Is there a similar problem I have solved before, and how did I solve it?",
        "What would a careful expert check before committing to an answer?",
        "How can I verify each intermediate result before moving on?",
        "What are the most common mistakes on problems like this, and how do I avoid them?",
        "Let's think step by step.",
        "What constraints or special conditions must the answer satisfy?",
        "Can I represent the problem with a diagram, table or equation?",
        "What happens in the extreme or boundary cases?",
        "How would I explain the solution to a beginner?",
        "Which details are relevant and which are distractions?",
        "What is the core principle or rule that governs this problem?",
        "Could the problem be interpreted in more than one way? Which reading is intended?",
        "How confident am I in the answer, and what evidence supports it?",
        "What is the most direct path from the inputs to the required output?",
    });
}

ThinkingStylePool ThinkingStylePool::parse(std::string_view content) {
    std::vector<std::string> styles;
    for (const auto& line : text::split_lines(content)) {
        auto t = text::trim_view(line);
        if (t.empty() || t.front() == '#') continue;
        styles.emplace_back(t);
    }
    return ThinkingStylePool(std::move(styles));
}

ThinkingStylePool ThinkingStylePool::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open thinking-style file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void HyperParams::validate() const {
    auto require_positive = [](int value, const char* name) {
        if (value < 1) throw InvalidArgumentError(std::string(name) + " must be >= 1");
    };
    require_positive(mutate_refine_rounds, "mutate_refine_rounds");
    require_positive(mutate_rounds, "mutate_rounds");
    require_positive(style_variation, "style_variation");
    require_positive(min_example_correct_count, "min_example_correct_count");
    require_positive(max_example_count, "max_example_count");
    require_positive(mini_batch_size, "mini_batch_size");
    require_positive(max_seq_iter, "max_seq_iter");
    require_positive(diverse_pool_size, "diverse_pool_size");
    require_positive(seq_cost_rounds, "seq_cost_rounds");
    if (few_shot_count < 0) throw InvalidArgumentError("few_shot_count must be >= 0");
    if (min_example_correct_count > max_example_count)
        throw InvalidArgumentError("min_example_correct_count must not exceed max_example_count");
    if (few_shot_count > diverse_pool_size)
        throw InvalidArgumentError("few_shot_count must not exceed diverse_pool_size");
}

std::string render_example_block(const Example& example) {
    std::string out = "[Question] " + example.question + "\n[Answer] ";
    if (example.reasoning && !example.reasoning->empty()) out += *example.reasoning + " ";
    out += kAnsStart;
    out += example.answer;
    out += kAnsEnd;
    return out;
}

namespace {

constexpr std::string_view kQuestionMarker = "[Question]";
constexpr std::string_view kAnswerMarker = "[Answer]";

struct TagPair {
    std::size_t start;  // position of <ANS_START>
    std::string content;
};

std::vector<TagPair> find_tag_pairs(std::string_view text) {
    std::vector<TagPair> pairs;
    std::size_t pos = 0;
    while (true) {
        auto s = text.find(kAnsStart, pos);
        if (s == std::string_view::npos) break;
        auto e = text.find(kAnsEnd, s + kAnsStart.size());
        if (e == std::string_view::npos) break;
        // A reopened tag before the close means the earlier one was abandoned.
        s = text.rfind(kAnsStart, e - kAnsStart.size());
        auto body = text.substr(s + kAnsStart.size(), e - s - kAnsStart.size());
        pairs.push_back({s, text::trim(body)});
        pos = e + kAnsEnd.size();
    }
    return pairs;
}

}  // namespace

std::vector<std::string> extract_all_answers(std::string_view text) {
    std::vector<std::string> out;
    for (auto& p : find_tag_pairs(text)) out.push_back(std::move(p.content));
    return out;
}

std::optional<std::string> extract_last_answer(std::string_view text) {
    auto pairs = find_tag_pairs(text);
    if (pairs.empty()) return std::nullopt;
    return pairs.back().content;
}

std::vector<Example> parse_example_blocks(std::string_view text, Origin origin) {
    std::vector<Example> out;
    auto q = text.find(kQuestionMarker);
    while (q != std::string_view::npos) {
        auto next = text.find(kQuestionMarker, q + kQuestionMarker.size());
        auto block = text.substr(q + kQuestionMarker.size(),
                                 next == std::string_view::npos ? std::string_view::npos
                                                                : next - q - kQuestionMarker.size());
        q = next;

        auto a = block.find(kAnswerMarker);
        if (a == std::string_view::npos) continue;
        Example ex;
        ex.origin = origin;
        ex.question = text::trim(block.substr(0, a));
        auto answer_part = block.substr(a + kAnswerMarker.size());
        auto pairs = find_tag_pairs(answer_part);
        if (pairs.empty()) {
            ex.answer = text::trim(answer_part);
        } else {
            ex.answer = pairs.back().content;
            auto reasoning = text::trim(answer_part.substr(0, pairs.back().start));
            if (!reasoning.empty()) ex.reasoning = std::move(reasoning);
        }
        if (ex.question.empty() || ex.answer.empty()) continue;
        out.push_back(std::move(ex));
    }
    return out;
}

std::string assemble_final_prompt(const PromptState& state, std::string_view query) {
    std::vector<std::string> sections;
    auto push = [&](std::string s) {
        if (!text::trim_view(s).empty()) sections.push_back(std::move(s));
    };
    push(state.expert_persona);
    push(state.instruction);
    for (const auto& e : state.few_shots) push(render_example_block(e));
    if (!state.intent_keywords.empty()) push("Task keywords: " + text::join(state.intent_keywords, ", "));
    push(state.answer_format);
    push(std::string(query));
    return text::join(sections, "\n\n");
}

}  // namespace promptforge
