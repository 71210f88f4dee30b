#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promptforge/core.hpp"
#include "promptforge/gateway.hpp"

namespace promptforge {

/// Content of the last complete <ANS_START>..<ANS_END> pair, trimmed.
std::optional<std::string> extract_answer(std::string_view text);

enum class MatchMode { exact, numeric, f1, llm_judge };

std::string_view to_string(MatchMode mode);
MatchMode match_mode_from_string(std::string_view s);

inline constexpr double kDefaultF1Threshold = 0.8;

struct Verdict {
    bool correct = false;
    double score = 0.0;  // 1/0 for boolean modes, the F1 value in f1 mode
};

/// Lowercased whitespace tokens with punctuation characters removed; empty
/// tokens are dropped.
std::vector<std::string> f1_tokens(std::string_view s);

/// Token-multiset F1 in [0, 1].
double token_f1(std::string_view prediction, std::string_view gold);

/// exact: case-insensitive trimmed equality. numeric: both parse as decimals and
/// agree within 1e-9 relative, falling back to exact when either does not parse.
/// f1: correct iff token F1 >= threshold. A missing extraction is incorrect.
/// llm_judge needs a model call; use Evaluator.
Verdict compare_answers(const std::optional<std::string>& extracted, std::string_view gold, MatchMode mode,
                        double f1_threshold = kDefaultF1Threshold);

/// Comparison policy shared by scoring, example selection and evaluation so all
/// three agree on what a wrong answer is.
class Evaluator {
public:
    explicit Evaluator(MatchMode mode = MatchMode::exact, double f1_threshold = kDefaultF1Threshold,
                       Gateway* judge = nullptr);

    /// In llm_judge mode this issues one stage_tag=judge call.
    Verdict judge(std::string_view question, const std::optional<std::string>& extracted,
                  std::string_view gold) const;

    MatchMode mode() const { return mode_; }

private:
    MatchMode mode_;
    double f1_threshold_;
    Gateway* judge_;
};

struct EvalExampleResult {
    std::size_t question_ref = 0;  // index into the evaluated dataset
    std::optional<std::string> extracted;
    bool correct = false;
    std::optional<std::string> error;
};

struct EvalResult {
    std::vector<EvalExampleResult> per_example;
    double accuracy = 0.0;
};

/// One stage_tag=inference call per example with the assembled final prompt.
/// Gateway failures mark the example incorrect and the run continues. With
/// jobs > 1 calls fan out across threads; results stay in dataset order.
EvalResult evaluate_dataset(const PromptState& state, const std::vector<Example>& dataset, Gateway& gateway,
                            const Evaluator& evaluator, int jobs = 1);

/// Accuracy of each method on each task; acc[method][task].
struct MethodTaskMatrix {
    std::vector<std::string> methods;
    std::vector<std::string> tasks;
    std::vector<std::vector<double>> acc;

    void validate() const;
};

/// Header "task,<method>,<method>..."; one row per task.
MethodTaskMatrix parse_matrix_csv(std::string_view csv);
MethodTaskMatrix load_matrix_csv(const std::filesystem::path& path);

struct ProfilePoint {
    double tau = 0.0;
    double rho = 0.0;
};

struct ProfileSeries {
    std::string method;
    std::vector<ProfilePoint> points;
};

/// Tolerance added to tau when comparing gaps, absorbing rounding in tau grids.
inline constexpr double kProfileTolerance = 1e-12;

/// rho_m(tau) = #{tasks i : best_i - acc_m,i <= tau} / n_tasks, best_i the max
/// over methods. Series are in matrix method order.
std::vector<ProfileSeries> profile_curve(const MethodTaskMatrix& matrix, const std::vector<double>& taus);

/// 0, 0.01, ... up to the largest best-minus-method gap (rounded up).
std::vector<double> default_taus(const MethodTaskMatrix& matrix);

std::string profile_to_csv(const std::vector<ProfileSeries>& series);
std::string profile_to_svg(const std::vector<ProfileSeries>& series);

}  // namespace promptforge
