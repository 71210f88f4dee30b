#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace promptforge {

inline constexpr std::string_view kAnsStart = "<ANS_START>";
inline constexpr std::string_view kAnsEnd = "<ANS_END>";

/// The seed of every run: what the task is and how answers must be formatted.
struct ProblemSpec {
    std::string task_name;
    std::string description;
    std::string base_instruction;
    std::string answer_format;

    void validate() const;
    bool operator==(const ProblemSpec&) const = default;
};

enum class Origin { real, synthetic };

std::string_view to_string(Origin origin);
Origin origin_from_string(std::string_view s);

struct Example {
    std::string question;
    std::string answer;
    std::optional<std::string> reasoning;
    Origin origin = Origin::real;

    void validate() const;
    bool operator==(const Example&) const = default;
};

/// Ordered few-shot demonstrations. Rejects duplicate questions and never
/// grows past its target count.
class FewShotSet {
public:
    FewShotSet() = default;
    explicit FewShotSet(std::size_t target_count) : target_count_(target_count) {}

    /// Appends unless full or the question is already present. Returns whether it was added.
    bool add(Example example);

    bool contains_question(std::string_view question) const;
    bool full() const { return examples_.size() >= target_count_; }

    const std::vector<Example>& examples() const { return examples_; }
    std::size_t size() const { return examples_.size(); }
    bool empty() const { return examples_.empty(); }
    std::size_t target_count() const { return target_count_; }

    const Example& operator[](std::size_t i) const { return examples_[i]; }
    auto begin() const { return examples_.begin(); }
    auto end() const { return examples_.end(); }

    bool operator==(const FewShotSet&) const = default;

private:
    std::vector<Example> examples_;
    std::size_t target_count_ = 0;
};

/// The artifact the pipeline optimizes.
struct PromptState {
    std::string instruction;
    FewShotSet few_shots;
    std::vector<std::string> intent_keywords;
    std::string expert_persona;
    std::string answer_format;

    void validate() const;
    bool operator==(const PromptState&) const = default;
};

class ThinkingStylePool {
public:
    explicit ThinkingStylePool(std::vector<std::string> styles);

    /// Twenty general problem-solving heuristics.
    static ThinkingStylePool defaults();
    /// One style per line; blank lines and lines starting with '#' are ignored.
    static ThinkingStylePool parse(std::string_view text);
    static ThinkingStylePool load(const std::filesystem::path& path);

    const std::vector<std::string>& styles() const { return styles_; }
    std::size_t size() const { return styles_.size(); }

private:
    std::vector<std::string> styles_;
};

struct HyperParams {
    int mutate_refine_rounds = 3;       // N
    int mutate_rounds = 3;              // M
    int style_variation = 3;            // v
    int min_example_correct_count = 3;
    int max_example_count = 6;
    int mini_batch_size = 5;            // b
    int max_seq_iter = 5;
    int few_shot_count = 5;             // k; 0 selects zero-shot mode
    int diverse_pool_size = 25;
    /// Sequential rounds counted by the call-cost estimate; separate from
    /// max_seq_iter, which sets the rounds actually run.
    int seq_cost_rounds = 3;
    std::uint64_t seed = 42;

    void validate() const;
    bool operator==(const HyperParams&) const = default;
};

/// "[Question] q\n[Answer] reasoning <ANS_START>a<ANS_END>"; the reasoning part is
/// omitted when absent.
std::string render_example_block(const Example& example);

/// Inverse of render_example_block over a whole response. Blocks with an empty
/// question or answer are dropped. Parsed examples carry the given origin.
std::vector<Example> parse_example_blocks(std::string_view text, Origin origin);

/// Persona, instruction, demonstrations, intent keywords, answer-format
/// guidelines, then the query. Empty sections are skipped.
std::string assemble_final_prompt(const PromptState& state, std::string_view query);

/// Content of every complete <ANS_START>..<ANS_END> pair in order, trimmed.
std::vector<std::string> extract_all_answers(std::string_view text);

/// Content of the last complete tag pair, trimmed.
std::optional<std::string> extract_last_answer(std::string_view text);

}  // namespace promptforge
