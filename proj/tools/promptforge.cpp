// promptforge command-line front end.

#include "promptforge/errors.hpp"
#include "promptforge/evaluation.hpp"
#include "promptforge/gateway.hpp"
#include "promptforge/persistence.hpp"
#include "promptforge/pipeline.hpp"
#include "promptforge/providers.hpp"
#include "promptforge/text.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

namespace fs = std::filesystem;
using namespace promptforge;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kProvider = 3, kBudget = 4 };

struct ProviderChoice {
    std::string kind = "mock";
    std::string mock_script;
    std::string cassette;
    std::string record;  // cassette path to record into; empty = off
};

struct ProviderStack {
    std::unique_ptr<Provider> base;
    std::unique_ptr<Provider> recorder;
    Provider& top() { return recorder ? *recorder : *base; }
};

ProviderStack make_provider(const ProviderChoice& choice, const ProviderSettings& settings) {
    ProviderStack stack;
    if (choice.kind == "mock") {
        MockScript script;
        if (!choice.mock_script.empty()) {
            script = MockScript::load(choice.mock_script);
        } else if (settings.mock_script) {
            script = MockScript::load(*settings.mock_script);
        }
        stack.base = std::make_unique<MockProvider>(std::move(script));
    } else if (choice.kind == "replay") {
        fs::path cassette = !choice.cassette.empty() ? fs::path(choice.cassette)
                            : settings.cassette      ? *settings.cassette
                                                     : fs::path();
        if (cassette.empty()) throw ConfigError("replay provider needs --cassette or provider.cassette");
        stack.base = std::make_unique<ReplayProvider>(cassette);
    } else if (choice.kind == "live") {
        LiveProviderConfig live;
        live.base_url = settings.base_url;
        live.model = settings.model;
        live.timeout_seconds = settings.timeout_seconds;
        stack.base = std::make_unique<LiveProvider>(std::move(live));
    } else {
        throw ConfigError("unknown provider '" + choice.kind + "'");
    }
    if (!choice.record.empty()) stack.recorder = std::make_unique<RecordingProvider>(*stack.base, choice.record);
    return stack;
}

RetryPolicy retry_from(const ProviderSettings& s) {
    RetryPolicy r;
    r.max_attempts = s.max_attempts;
    r.base_delay = std::chrono::milliseconds(s.backoff_ms);
    return r;
}

ChatDefaults defaults_from(const ProviderSettings& s) { return {s.temperature, s.max_output_tokens}; }

void print_budget(std::ostream& os, const CallBudget& b) {
    os << "refine_instructions: " << b.refine_instructions << "\n"
       << "example_selection: " << b.example_selection << "\n"
       << "seq_opt: " << b.seq_opt << "\n"
       << "reason_validate: " << b.reason_validate << "\n"
       << "intent_expert: " << b.intent_expert << "\n"
       << "total: " << b.total << "\n";
}

void print_report(std::ostream& os, const LedgerReport& report) {
    os << std::left << std::setw(24) << "stage" << std::right << std::setw(8) << "calls" << std::setw(14)
       << "input_tokens" << std::setw(14) << "output_tokens" << "\n";
    for (const auto& [stage, t] : report.per_stage)
        os << std::left << std::setw(24) << to_string(stage) << std::right << std::setw(8) << t.calls << std::setw(14)
           << t.input_tokens << std::setw(14) << t.output_tokens << "\n";
    os << std::left << std::setw(24) << "total" << std::right << std::setw(8) << report.total.calls << std::setw(14)
       << report.total.input_tokens << std::setw(14) << report.total.output_tokens << "\n";
}

std::vector<double> parse_taus(const std::string& s) {
    std::vector<double> taus;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto t = text::trim(item);
        if (t.empty()) continue;
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.size()) throw ConfigError("bad tau value '" + t + "'");
        taus.push_back(v);
    }
    return taus;
}

void write_text(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file_atomic(path, content);
}

// ---- subcommands ------------------------------------------------------------------

struct OptimizeArgs {
    std::string config, dataset, run_dir, stop_after;
    bool resume = false;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> max_total_calls;
    ProviderChoice provider;
    bool record = false;
};

int cmd_optimize(const OptimizeArgs& a) {
    const fs::path run_dir = a.run_dir;
    RunConfig config;
    if (!a.config.empty()) {
        config = load_config(a.config);
    } else if (a.resume && fs::exists(run_dir / kConfigSnapshotFile)) {
        config = run_config_from_json(json::parse(read_file(run_dir / kConfigSnapshotFile)));
    } else {
        throw ConfigError("--config is required");
    }
    if (a.seed) config.hyper.seed = *a.seed;
    if (a.max_total_calls) config.max_total_calls = *a.max_total_calls;

    auto data = load_dataset(a.dataset);
    for (const auto& w : data.warnings) std::cerr << "warning: " << w << "\n";
    if (data.examples.empty()) throw ConfigError("dataset " + a.dataset + " has no examples");
    auto pool = load_thinking_styles(config);

    ProviderChoice choice = a.provider;
    if (a.record) {
        fs::create_directories(run_dir);
        choice.record = (run_dir / kCassetteFile).string();
    }
    auto providers = make_provider(choice, config.provider);
    CallLedger ledger;
    Gateway gateway(providers.top(), ledger, retry_from(config.provider), defaults_from(config.provider));
    if (config.max_total_calls) gateway.set_call_limit(*config.max_total_calls);
    Evaluator evaluator(config.evaluator, config.f1_threshold, &gateway);

    PipelineOptions options;
    options.run = config.options;
    options.resume = a.resume;
    if (!a.stop_after.empty()) options.stop_after = pipeline_stage_from_string(a.stop_after);
    options.config_snapshot = to_json(config).dump(2) + "\n";

    Rng rng(config.hyper.seed);
    auto result =
        run_pipeline(config.spec, data.examples, pool, config.hyper, gateway, rng, evaluator, run_dir, options);

    std::cout << "stage: " << to_string(result.state.stage_cursor) << "\n";
    for (const auto& w : result.state.warnings) std::cerr << "warning: " << w << "\n";
    auto report = ledger_report(ledger);
    std::cout << "calls: " << report.total.calls << " (input tokens " << report.total.input_tokens
              << ", output tokens " << report.total.output_tokens << ")\n";
    if (result.complete) {
        std::cout << "final prompt: " << (run_dir / kFinalPromptFile).string() << "\n";
    } else {
        std::cout << "stopped after " << to_string(result.state.stage_cursor) << "; continue with --resume\n";
    }
    return kOk;
}

struct EvaluateArgs {
    std::string prompt_state, dataset, config, mode, out;
    ProviderChoice provider;
    int jobs = 1;
    std::optional<double> f1_threshold;
};

int cmd_evaluate(const EvaluateArgs& a) {
    RunConfig config;
    bool have_config = !a.config.empty();
    if (have_config) config = load_config(a.config);
    auto state = load_prompt_state(a.prompt_state);
    auto data = load_dataset(a.dataset);
    for (const auto& w : data.warnings) std::cerr << "warning: " << w << "\n";
    if (data.examples.empty()) throw ConfigError("dataset " + a.dataset + " has no examples");

    MatchMode mode = have_config ? config.evaluator : MatchMode::exact;
    if (!a.mode.empty()) {
        try {
            mode = match_mode_from_string(a.mode);
        } catch (const InvalidArgumentError& e) {
            throw ConfigError(e.what());
        }
    }
    double threshold = a.f1_threshold.value_or(have_config ? config.f1_threshold : kDefaultF1Threshold);

    auto providers = make_provider(a.provider, config.provider);
    CallLedger ledger;
    Gateway gateway(providers.top(), ledger, retry_from(config.provider), defaults_from(config.provider));
    if (have_config && config.max_total_calls) gateway.set_call_limit(*config.max_total_calls);
    Evaluator evaluator(mode, threshold, &gateway);
    auto result = evaluate_dataset(state, data.examples, gateway, evaluator, a.jobs);

    std::size_t correct = 0, errors = 0;
    json per = json::array();
    for (const auto& r : result.per_example) {
        correct += r.correct ? 1 : 0;
        errors += r.error ? 1 : 0;
        per.push_back({{"question_ref", r.question_ref},
                       {"extracted", r.extracted ? json(*r.extracted) : json(nullptr)},
                       {"correct", r.correct},
                       {"error", r.error ? json(*r.error) : json(nullptr)}});
    }
    std::cout << "mode: " << to_string(mode) << "\n"
              << "accuracy: " << std::fixed << std::setprecision(4) << result.accuracy << " (" << correct << "/"
              << result.per_example.size() << ")\n"
              << "inference calls: " << ledger_report(ledger).per_stage[StageTag::inference].calls << "\n";
    if (errors > 0) std::cout << "examples with call errors: " << errors << "\n";
    if (!a.out.empty())
        write_text(a.out,
                   json{{"accuracy", result.accuracy}, {"mode", to_string(mode)}, {"per_example", per}}.dump(2) + "\n");
    return kOk;
}

int cmd_cost_estimate(const std::string& config_path, bool as_json) {
    HyperParams h;
    if (!config_path.empty()) h = load_config(config_path).hyper;
    auto b = estimate_total_calls(h);
    if (as_json) {
        std::cout << json{{"refine_instructions", b.refine_instructions},
                          {"example_selection", b.example_selection},
                          {"seq_opt", b.seq_opt},
                          {"reason_validate", b.reason_validate},
                          {"intent_expert", b.intent_expert},
                          {"total", b.total}}
                         .dump(2)
                  << "\n";
    } else {
        print_budget(std::cout, b);
    }
    return kOk;
}

int cmd_profile_curve(const std::string& matrix_path, const std::string& out, const std::string& svg,
                      const std::string& taus_arg) {
    MethodTaskMatrix matrix;
    try {
        matrix = load_matrix_csv(matrix_path);
    } catch (const InvalidArgumentError& e) {
        throw ConfigError(e.what());
    }
    auto taus = taus_arg.empty() ? default_taus(matrix) : parse_taus(taus_arg);
    std::vector<ProfileSeries> curve;
    try {
        curve = profile_curve(matrix, taus);
    } catch (const InvalidArgumentError& e) {
        throw ConfigError(e.what());
    }
    write_text(out, profile_to_csv(curve));
    if (!svg.empty()) write_text(svg, profile_to_svg(curve));

    std::cout << "methods: " << matrix.methods.size() << ", tasks: " << matrix.tasks.size() << "\n";
    std::cout << "rho at tau=" << taus.front() << ":\n";
    for (const auto& s : curve)
        std::cout << "  " << s.method << ": " << std::fixed << std::setprecision(3) << s.points.front().rho << "\n";
    return kOk;
}

int cmd_report(const std::string& run_dir_arg, bool as_json) {
    const fs::path run_dir = run_dir_arg;
    auto state = resume(run_dir);
    auto ledger = CallLedger::load(run_dir / kLedgerFile);
    auto report = ledger_report(ledger);
    auto budget = estimate_total_calls(state.hyperparams);

    if (as_json) {
        json stages = json::object();
        for (const auto& [stage, t] : report.per_stage)
            stages[std::string(to_string(stage))] = {
                {"calls", t.calls}, {"input_tokens", t.input_tokens}, {"output_tokens", t.output_tokens}};
        std::cout << json{{"stage_cursor", to_string(state.stage_cursor)},
                          {"complete", state.complete()},
                          {"stages", stages},
                          {"total",
                           {{"calls", report.total.calls},
                            {"input_tokens", report.total.input_tokens},
                            {"output_tokens", report.total.output_tokens}}},
                          {"estimate", budget.total},
                          {"warnings", state.warnings}}
                         .dump(2)
                  << "\n";
        return kOk;
    }
    std::cout << "task: " << state.spec.task_name << "\n"
              << "stage cursor: " << to_string(state.stage_cursor) << (state.complete() ? " (complete)" : "") << "\n"
              << "ledger records: " << ledger.size() << "\n\n";
    print_report(std::cout, report);
    std::cout << "\nestimated calls: " << budget.total << "\n";
    for (const auto& w : state.warnings) std::cout << "warning: " << w << "\n";
    return kOk;
}

void add_provider_options(CLI::App* cmd, ProviderChoice& p) {
    cmd->add_option("--provider", p.kind, "live, mock or replay")
        ->check(CLI::IsMember({"live", "mock", "replay"}))
        ->capture_default_str();
    cmd->add_option("--mock-script", p.mock_script, "mock script JSON (overrides provider.mock_script)");
    cmd->add_option("--cassette", p.cassette, "cassette to replay (overrides provider.cassette)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"promptforge: instruction and few-shot prompt optimization"};
    app.require_subcommand(1);

    OptimizeArgs opt;
    auto* optimize = app.add_subcommand("optimize", "run the optimization pipeline");
    optimize->add_option("--config", opt.config, "YAML run configuration");
    optimize->add_option("--dataset", opt.dataset, "training data, JSON lines")->required();
    optimize->add_option("--run-dir", opt.run_dir, "directory for checkpoints and outputs")->required();
    optimize->add_flag("--resume", opt.resume, "continue from the checkpoint in --run-dir");
    optimize->add_option("--seed", opt.seed, "override hyperparams.seed");
    optimize->add_option("--max-total-calls", opt.max_total_calls, "abort before exceeding this many calls");
    optimize->add_flag("--record", opt.record, "record every response into <run-dir>/cassette.jsonl");
    optimize->add_option("--stop-after", opt.stop_after, "stop after checkpointing this stage");
    add_provider_options(optimize, opt.provider);

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "score a prompt state on a dataset");
    evaluate->add_option("--prompt-state", ev.prompt_state, "prompt_state.json")->required();
    evaluate->add_option("--dataset", ev.dataset, "test data, JSON lines")->required();
    evaluate->add_option("--mode", ev.mode, "exact, numeric, f1 or llm_judge")
        ->check(CLI::IsMember({"exact", "numeric", "f1", "llm_judge"}));
    evaluate->add_option("--config", ev.config, "YAML configuration for provider settings");
    evaluate->add_option("--jobs", ev.jobs, "concurrent inference calls")->check(CLI::Range(1, 64));
    evaluate->add_option("--f1-threshold", ev.f1_threshold, "F1 needed to count as correct");
    evaluate->add_option("--out", ev.out, "write per-example results as JSON");
    evaluate->add_option("--record", ev.provider.record, "record responses into this cassette");
    add_provider_options(evaluate, ev.provider);

    std::string cost_config;
    bool cost_json = false;
    auto* cost = app.add_subcommand("cost-estimate", "predicted preprocessing calls");
    cost->add_option("--config", cost_config, "YAML configuration (defaults when omitted)");
    cost->add_flag("--json", cost_json, "print JSON");

    std::string matrix, curve_out, curve_svg, taus;
    auto* profile = app.add_subcommand("profile-curve", "performance profile over a method/task accuracy grid");
    profile->add_option("--matrix", matrix, "CSV: task,<method>,...")->required();
    profile->add_option("--out", curve_out, "curve CSV")->required();
    profile->add_option("--svg", curve_svg, "also write an SVG plot");
    profile->add_option("--taus", taus, "comma-separated tau values (default 0..max gap step 0.01)");

    std::string report_dir;
    bool report_json = false;
    auto* report = app.add_subcommand("report", "ledger and stage summary of a run");
    report->add_option("--run-dir", report_dir, "run directory")->required();
    report->add_flag("--json", report_json, "print JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*optimize) return cmd_optimize(opt);
        if (*evaluate) return cmd_evaluate(ev);
        if (*cost) return cmd_cost_estimate(cost_config, cost_json);
        if (*profile) return cmd_profile_curve(matrix, curve_out, curve_svg, taus);
        if (*report) return cmd_report(report_dir, report_json);
    } catch (const BudgetExceededError& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return kBudget;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const DatasetError& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return kConfig;
    } catch (const GatewayError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kProvider;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
    return kOther;
}
