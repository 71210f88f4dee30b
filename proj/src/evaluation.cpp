#include "promptforge/evaluation.hpp"

#include "promptforge/errors.hpp"
#include "promptforge/templates.hpp"
#include "promptforge/text.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace promptforge {

std::optional<std::string> extract_answer(std::string_view text) { return extract_last_answer(text); }

std::string_view to_string(MatchMode mode) {
    switch (mode) {
        case MatchMode::exact: return "exact";
        case MatchMode::numeric: return "numeric";
        case MatchMode::f1: return "f1";
        case MatchMode::llm_judge: return "llm_judge";
    }
    return "exact";
}

MatchMode match_mode_from_string(std::string_view s) {
    for (auto m : {MatchMode::exact, MatchMode::numeric, MatchMode::f1, MatchMode::llm_judge})
        if (to_string(m) == s) return m;
    throw InvalidArgumentError("unknown match mode '" + std::string(s) + "'");
}

std::vector<std::string> f1_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    std::istringstream is{std::string(s)};
    std::string word;
    while (is >> word) {
        std::string clean;
        for (char c : word) {
            const auto u = static_cast<unsigned char>(c);
            if (!std::ispunct(u)) clean += static_cast<char>(std::tolower(u));
        }
        if (!clean.empty()) tokens.push_back(std::move(clean));
    }
    return tokens;
}

double token_f1(std::string_view prediction, std::string_view gold) {
    auto p = f1_tokens(prediction);
    auto g = f1_tokens(gold);
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;
    std::map<std::string, int> counts;
    for (const auto& t : g) ++counts[t];
    int overlap = 0;
    for (const auto& t : p) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    double precision = static_cast<double>(overlap) / static_cast<double>(p.size());
    double recall = static_cast<double>(overlap) / static_cast<double>(g.size());
    return 2.0 * precision * recall / (precision + recall);
}

namespace {

std::optional<double> parse_decimal(std::string_view s) {
    auto t = text::trim(s);
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

Verdict boolean(bool ok) { return {ok, ok ? 1.0 : 0.0}; }

}  // namespace

Verdict compare_answers(const std::optional<std::string>& extracted, std::string_view gold, MatchMode mode,
                        double f1_threshold) {
    if (text::trim_view(gold).empty()) throw PreconditionError("gold answer must not be empty");
    if (!extracted) return boolean(false);
    const auto pred = text::trim_view(*extracted);
    const auto ref = text::trim_view(gold);
    switch (mode) {
        case MatchMode::exact: return boolean(text::iequals(pred, ref));
        case MatchMode::numeric: {
            auto a = parse_decimal(pred);
            auto b = parse_decimal(ref);
            if (!a || !b) return boolean(text::iequals(pred, ref));
            double scale = std::max(std::fabs(*a), std::fabs(*b));
            return boolean(*a == *b || std::fabs(*a - *b) <= 1e-9 * scale);
        }
        case MatchMode::f1: {
            double f = token_f1(pred, ref);
            return {f >= f1_threshold, f};
        }
        case MatchMode::llm_judge:
            throw InvalidArgumentError("llm_judge comparison needs an Evaluator with a gateway");
    }
    return boolean(false);
}

Evaluator::Evaluator(MatchMode mode, double f1_threshold, Gateway* judge)
    : mode_(mode), f1_threshold_(f1_threshold), judge_(judge) {
    if (mode_ == MatchMode::llm_judge && judge_ == nullptr)
        throw InvalidArgumentError("llm_judge evaluator needs a gateway");
}

Verdict Evaluator::judge(std::string_view question, const std::optional<std::string>& extracted,
                         std::string_view gold) const {
    if (mode_ != MatchMode::llm_judge) return compare_answers(extracted, gold, mode_, f1_threshold_);
    if (text::trim_view(gold).empty()) throw PreconditionError("gold answer must not be empty");
    if (!extracted) return boolean(false);
    auto prompt = render_component_template(Component::judge, {{"question", std::string(question)},
                                                               {"reference answer", std::string(gold)},
                                                               {"candidate answer", *extracted}});
    auto reply = text::to_lower(judge_->ask(StageTag::judge, std::move(prompt)).content);
    bool correct = reply.find("incorrect") == std::string::npos && reply.find("correct") != std::string::npos;
    return boolean(correct);
}

EvalResult evaluate_dataset(const PromptState& state, const std::vector<Example>& dataset, Gateway& gateway,
                            const Evaluator& evaluator, int jobs) {
    if (dataset.empty()) throw InvalidArgumentError("cannot evaluate an empty dataset");
    state.validate();

    EvalResult result;
    result.per_example.resize(dataset.size());
    auto run_one = [&](std::size_t i) {
        auto& r = result.per_example[i];
        r.question_ref = i;
        try {
            auto response = gateway.ask(StageTag::inference, assemble_final_prompt(state, dataset[i].question));
            r.extracted = extract_answer(response.content);
            r.correct = evaluator.judge(dataset[i].question, r.extracted, dataset[i].answer).correct;
        } catch (const BudgetExceededError&) {
            throw;
        } catch (const Error& e) {
            r.correct = false;
            r.error = e.what();
        }
    };

    const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, 64));
    if (workers == 1) {
        for (std::size_t i = 0; i < dataset.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        {
            // Threads join on scope exit.
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < std::min(workers, dataset.size()); ++w) {
                pool.emplace_back([&] {
                    for (auto i = next++; i < dataset.size(); i = next++) {
                        try {
                            run_one(i);
                        } catch (...) {
                            std::lock_guard lock(failure_mutex);
                            if (!failure) failure = std::current_exception();
                            next = dataset.size();
                        }
                    }
                });
            }
        }
        if (failure) std::rethrow_exception(failure);
    }

    std::size_t correct = 0;
    for (const auto& r : result.per_example) correct += r.correct ? 1 : 0;
    result.accuracy = static_cast<double>(correct) / static_cast<double>(dataset.size());
    return result;
}

// ---- performance profile ------------------------------------------------------

void MethodTaskMatrix::validate() const {
    if (methods.empty() || tasks.empty()) throw InvalidArgumentError("method/task matrix is empty");
    if (acc.size() != methods.size()) throw InvalidArgumentError("matrix has a row count different from methods");
    for (const auto& row : acc)
        if (row.size() != tasks.size()) throw InvalidArgumentError("matrix has holes: every method needs every task");
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(text::trim(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(text::trim(field));
    return fields;
}

}  // namespace

MethodTaskMatrix parse_matrix_csv(std::string_view csv) {
    MethodTaskMatrix m;
    bool header = true;
    std::size_t line_no = 0;
    for (const auto& line : text::split_lines(csv)) {
        ++line_no;
        if (text::trim_view(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (header) {
            if (fields.size() < 2) throw InvalidArgumentError("matrix header needs a task column and a method");
            m.methods.assign(fields.begin() + 1, fields.end());
            m.acc.assign(m.methods.size(), {});
            header = false;
            continue;
        }
        if (fields.size() != m.methods.size() + 1)
            throw InvalidArgumentError("matrix line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(m.methods.size() + 1) + " fields");
        m.tasks.push_back(fields[0]);
        for (std::size_t j = 0; j < m.methods.size(); ++j) {
            auto v = parse_decimal(fields[j + 1]);
            if (!v) throw InvalidArgumentError("matrix line " + std::to_string(line_no) + ": bad accuracy '" +
                                               fields[j + 1] + "'");
            m.acc[j].push_back(*v);
        }
    }
    m.validate();
    return m;
}

MethodTaskMatrix load_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgumentError("cannot open matrix " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_matrix_csv(ss.str());
}

std::vector<ProfileSeries> profile_curve(const MethodTaskMatrix& matrix, const std::vector<double>& taus) {
    matrix.validate();
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (taus[i] < 0.0) throw InvalidArgumentError("tau values must be >= 0");
        if (i > 0 && taus[i] < taus[i - 1]) throw InvalidArgumentError("tau values must be sorted ascending");
    }
    const auto n_tasks = matrix.tasks.size();
    std::vector<double> best(n_tasks, -std::numeric_limits<double>::infinity());
    for (const auto& row : matrix.acc)
        for (std::size_t t = 0; t < n_tasks; ++t) best[t] = std::max(best[t], row[t]);

    std::vector<ProfileSeries> out;
    for (std::size_t m = 0; m < matrix.methods.size(); ++m) {
        ProfileSeries series{matrix.methods[m], {}};
        for (double tau : taus) {
            std::size_t within = 0;
            for (std::size_t t = 0; t < n_tasks; ++t)
                if (best[t] - matrix.acc[m][t] <= tau + kProfileTolerance) ++within;
            series.points.push_back({tau, static_cast<double>(within) / static_cast<double>(n_tasks)});
        }
        out.push_back(std::move(series));
    }
    return out;
}

std::vector<double> default_taus(const MethodTaskMatrix& matrix) {
    matrix.validate();
    double max_gap = 0.0;
    for (std::size_t t = 0; t < matrix.tasks.size(); ++t) {
        double best = -std::numeric_limits<double>::infinity();
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& row : matrix.acc) {
            best = std::max(best, row[t]);
            worst = std::min(worst, row[t]);
        }
        max_gap = std::max(max_gap, best - worst);
    }
    const int steps = static_cast<int>(std::ceil(max_gap * 100.0 - 1e-9));
    std::vector<double> taus;
    for (int i = 0; i <= steps; ++i) taus.push_back(i / 100.0);
    return taus;
}

std::string profile_to_csv(const std::vector<ProfileSeries>& series) {
    std::ostringstream os;
    os << "tau";
    for (const auto& s : series) os << ',' << s.method;
    os << '\n';
    if (series.empty()) return os.str();
    os << std::fixed;
    for (std::size_t i = 0; i < series.front().points.size(); ++i) {
        os << std::setprecision(4) << series.front().points[i].tau;
        for (const auto& s : series) os << ',' << std::setprecision(6) << s.points[i].rho;
        os << '\n';
    }
    return os.str();
}

std::string profile_to_svg(const std::vector<ProfileSeries>& series) {
    constexpr double width = 720, height = 440, left = 60, right = 170, top = 20, bottom = 50;
    constexpr const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    double tau_max = 0.0;
    for (const auto& s : series)
        for (const auto& p : s.points) tau_max = std::max(tau_max, p.tau);
    if (tau_max <= 0.0) tau_max = 1.0;
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    auto x = [&](double tau) { return left + plot_w * tau / tau_max; };
    auto y = [&](double rho) { return top + plot_h * (1.0 - rho); };

    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << y(0) << "\" x2=\"" << left + plot_w << "\" y2=\"" << y(0)
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << y(0) << "\" x2=\"" << left << "\" y2=\"" << y(1)
       << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        double rho = i / 5.0, tau = tau_max * i / 5.0;
        os << "<text x=\"" << left - 8 << "\" y=\"" << y(rho) + 4 << "\" text-anchor=\"end\">" << rho << "</text>\n";
        os << "<text x=\"" << x(tau) << "\" y=\"" << y(0) + 18 << "\" text-anchor=\"middle\">" << tau << "</text>\n";
    }
    os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">tau</text>\n";
    os << "<text x=\"15\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 15 " << top + plot_h / 2
       << ")\" text-anchor=\"middle\">rho(tau)</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = colors[i % std::size(colors)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& p : series[i].points) os << x(p.tau) << ',' << y(p.rho) << ' ';
        os << "\"/>\n";
        double ly = top + 16.0 * static_cast<double>(i) + 10;
        os << "<line x1=\"" << width - right + 15 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 35
           << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << width - right + 40 << "\" y=\"" << ly + 4 << "\">" << series[i].method << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace promptforge
