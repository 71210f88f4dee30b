#include "promptforge/persistence.hpp"

#include "promptforge/errors.hpp"
#include "promptforge/rng.hpp"
#include "promptforge/text.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

namespace promptforge {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(PipelineStage stage) {
    switch (stage) {
        case PipelineStage::none: return "none";
        case PipelineStage::refine_instructions: return "refine_instructions";
        case PipelineStage::select_diverse_examples: return "select_diverse_examples";
        case PipelineStage::sequential_optimize: return "sequential_optimize";
        case PipelineStage::generate_reasoning: return "generate_reasoning";
        case PipelineStage::validate_examples: return "validate_examples";
        case PipelineStage::generate_intent: return "generate_intent";
        case PipelineStage::generate_persona: return "generate_persona";
    }
    return "none";
}

PipelineStage pipeline_stage_from_string(std::string_view s) {
    if (s == "none") return PipelineStage::none;
    for (auto st : kPipelineStages)
        if (to_string(st) == s) return st;
    throw InvalidArgumentError("unknown pipeline stage '" + std::string(s) + "'");
}

// ---- files ----------------------------------------------------------------------

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

// ---- config -----------------------------------------------------------------------

void RunConfig::validate() const {
    spec.validate();
    hyper.validate();
    if (!(f1_threshold > 0.0 && f1_threshold <= 1.0)) throw InvalidArgumentError("f1_threshold must be in (0, 1]");
    if (provider.temperature < 0.0) throw InvalidArgumentError("provider.temperature must be >= 0");
    if (provider.max_output_tokens < 1) throw InvalidArgumentError("provider.max_output_tokens must be >= 1");
    if (provider.max_attempts < 1) throw InvalidArgumentError("provider.max_attempts must be >= 1");
    if (provider.backoff_ms < 0) throw InvalidArgumentError("provider.backoff_ms must be >= 0");
    if (provider.timeout_seconds < 1) throw InvalidArgumentError("provider.timeout_seconds must be >= 1");
    if (max_total_calls && *max_total_calls == 0) throw InvalidArgumentError("max_total_calls must be >= 1");
}

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

std::string at_line(const YAML::Node& n) { return "line " + std::to_string(line_of(n)); }

template <typename T>
T scalar(const YAML::Node& n, const std::string& key, const char* expected) {
    if (!n.IsScalar()) throw ConfigError(at_line(n) + ": " + key + " must be " + expected);
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(at_line(n) + ": " + key + " must be " + expected + ", got '" + n.Scalar() + "'");
    }
}

void require_map(const YAML::Node& n, const std::string& what) {
    if (!n.IsMap()) throw ConfigError(at_line(n) + ": " + what + " must be a mapping");
}

fs::path resolve(const fs::path& base, const std::string& value) {
    fs::path p(value);
    if (p.is_relative() && !base.empty()) p = base / p;
    return p.lexically_normal();
}

void parse_hyper(const YAML::Node& node, HyperParams& h) {
    require_map(node, "hyperparams");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        const auto& v = kv.second;
        auto integer = [&](int& field) { field = scalar<int>(v, key, "an integer"); };
        if (key == "mutate_refine_rounds") integer(h.mutate_refine_rounds);
        else if (key == "mutate_rounds") integer(h.mutate_rounds);
        else if (key == "style_variation") integer(h.style_variation);
        else if (key == "min_example_correct_count") integer(h.min_example_correct_count);
        else if (key == "max_example_count") integer(h.max_example_count);
        else if (key == "mini_batch_size") integer(h.mini_batch_size);
        else if (key == "max_seq_iter") integer(h.max_seq_iter);
        else if (key == "few_shot_count") integer(h.few_shot_count);
        else if (key == "diverse_pool_size") integer(h.diverse_pool_size);
        else if (key == "seq_cost_rounds") integer(h.seq_cost_rounds);
        else if (key == "seed") h.seed = scalar<std::uint64_t>(v, key, "an unsigned integer");
        else throw UnknownKeyError(key, "hyperparams (" + at_line(kv.first) + ")");
    }
}

void parse_provider(const YAML::Node& node, ProviderSettings& p, const fs::path& base) {
    require_map(node, "provider");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        const auto& v = kv.second;
        if (key == "model") p.model = scalar<std::string>(v, key, "a string");
        else if (key == "base_url") p.base_url = scalar<std::string>(v, key, "a string");
        else if (key == "temperature") p.temperature = scalar<double>(v, key, "a number");
        else if (key == "max_output_tokens") p.max_output_tokens = scalar<int>(v, key, "an integer");
        else if (key == "max_attempts") p.max_attempts = scalar<int>(v, key, "an integer");
        else if (key == "backoff_ms") p.backoff_ms = scalar<int>(v, key, "an integer");
        else if (key == "timeout_seconds") p.timeout_seconds = scalar<int>(v, key, "an integer");
        else if (key == "mock_script") p.mock_script = resolve(base, scalar<std::string>(v, key, "a path"));
        else if (key == "cassette") p.cassette = resolve(base, scalar<std::string>(v, key, "a path"));
        else throw UnknownKeyError(key, "provider (" + at_line(kv.first) + ")");
    }
}

void parse_options(const YAML::Node& node, RunOptions& o) {
    require_map(node, "options");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        const auto flag = [&] { return scalar<bool>(kv.second, key, "a boolean"); };
        if (key == "seq_synthesize_from_diverse") o.seq_synthesize_from_diverse = flag();
        else if (key == "persona_from_instruction") o.persona_from_instruction = flag();
        else throw UnknownKeyError(key, "options (" + at_line(kv.first) + ")");
    }
}

}  // namespace

RunConfig parse_config(std::string_view yaml, const fs::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml));
    } catch (const YAML::ParserException& e) {
        throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root || root.IsNull()) throw ConfigError("config is empty");
    require_map(root, "config");

    RunConfig c;
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        const auto& v = kv.second;
        if (key == "task_name") c.spec.task_name = scalar<std::string>(v, key, "a string");
        else if (key == "description") c.spec.description = scalar<std::string>(v, key, "a string");
        else if (key == "base_instruction") c.spec.base_instruction = scalar<std::string>(v, key, "a string");
        else if (key == "answer_format") c.spec.answer_format = scalar<std::string>(v, key, "a string");
        else if (key == "thinking_styles_file")
            c.thinking_styles_file = resolve(base_dir, scalar<std::string>(v, key, "a path"));
        else if (key == "evaluator") {
            try {
                c.evaluator = match_mode_from_string(scalar<std::string>(v, key, "a string"));
            } catch (const InvalidArgumentError& e) {
                throw ConfigError(at_line(v) + ": " + e.what());
            }
        }
        else if (key == "f1_threshold") c.f1_threshold = scalar<double>(v, key, "a number");
        else if (key == "max_total_calls") c.max_total_calls = scalar<std::size_t>(v, key, "a positive integer");
        else if (key == "hyperparams") parse_hyper(v, c.hyper);
        else if (key == "provider") parse_provider(v, c.provider, base_dir);
        else if (key == "options") parse_options(v, c.options);
        else throw UnknownKeyError(key, "config (" + at_line(kv.first) + ")");
    }
    c.spec.description = text::trim(c.spec.description);
    c.spec.base_instruction = text::trim(c.spec.base_instruction);
    c.spec.answer_format = text::trim(c.spec.answer_format);
    try {
        c.validate();
    } catch (const InvalidArgumentError& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str(), path.parent_path());
    } catch (ConfigError& e) {
        e.add_context(path.string());
        throw;
    }
}

ThinkingStylePool load_thinking_styles(const RunConfig& config) {
    auto pool = config.thinking_styles_file ? ThinkingStylePool::load(*config.thinking_styles_file)
                                            : ThinkingStylePool::defaults();
    if (pool.size() < static_cast<std::size_t>(config.hyper.style_variation))
        throw ConfigError("thinking-style pool has " + std::to_string(pool.size()) + " entries, style_variation is " +
                          std::to_string(config.hyper.style_variation));
    return pool;
}

// ---- dataset ------------------------------------------------------------------------

namespace {

std::string text_field(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(std::string("missing \"") + key + "\"");
    const auto& v = j.at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    throw Error(std::string("\"") + key + "\" must be a string or number");
}

}  // namespace

DatasetLoad parse_dataset(std::string_view jsonl) {
    DatasetLoad out;
    std::size_t line_no = 0;
    for (const auto& line : text::split_lines(jsonl)) {
        ++line_no;
        if (text::trim_view(line).empty()) continue;
        try {
            auto j = json::parse(line);
            if (!j.is_object()) throw Error("expected a JSON object");
            Example e{text::trim(text_field(j, "question")), text::trim(text_field(j, "answer")), std::nullopt,
                      Origin::real};
            e.validate();
            out.examples.push_back(std::move(e));
        } catch (const json::exception& e) {
            throw DatasetError(std::string("malformed JSON: ") + e.what(), line_no);
        } catch (const Error& e) {
            throw DatasetError(e.what(), line_no);
        }
    }
    if (out.examples.empty()) out.warnings.push_back("dataset is empty");
    return out;
}

DatasetLoad load_dataset(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open dataset " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_dataset(ss.str());
    } catch (DatasetError& e) {
        e.add_context(path.string());
        throw;
    }
}

// ---- json -----------------------------------------------------------------------------

json to_json(const Example& e) {
    return {{"question", e.question},
            {"answer", e.answer},
            {"reasoning", e.reasoning ? json(*e.reasoning) : json(nullptr)},
            {"origin", to_string(e.origin)}};
}

Example example_from_json(const json& j) {
    Example e;
    e.question = j.at("question").get<std::string>();
    e.answer = j.at("answer").get<std::string>();
    if (j.contains("reasoning") && !j.at("reasoning").is_null()) e.reasoning = j.at("reasoning").get<std::string>();
    e.origin = origin_from_string(j.value("origin", std::string("real")));
    return e;
}

json to_json(const FewShotSet& s) {
    json examples = json::array();
    for (const auto& e : s) examples.push_back(to_json(e));
    return {{"target_count", s.target_count()}, {"examples", examples}};
}

FewShotSet few_shot_set_from_json(const json& j) {
    FewShotSet s(j.at("target_count").get<std::size_t>());
    for (const auto& e : j.at("examples"))
        if (!s.add(example_from_json(e)))
            throw InvalidArgumentError("few-shot set holds a duplicate or excess example");
    return s;
}

json to_json(const PromptState& s) {
    return {{"instruction", s.instruction},
            {"few_shots", to_json(s.few_shots)},
            {"intent_keywords", s.intent_keywords},
            {"expert_persona", s.expert_persona},
            {"answer_format", s.answer_format}};
}

PromptState prompt_state_from_json(const json& j) {
    PromptState s;
    s.instruction = j.at("instruction").get<std::string>();
    s.few_shots = few_shot_set_from_json(j.at("few_shots"));
    s.intent_keywords = j.at("intent_keywords").get<std::vector<std::string>>();
    s.expert_persona = j.at("expert_persona").get<std::string>();
    s.answer_format = j.at("answer_format").get<std::string>();
    return s;
}

json to_json(const ProblemSpec& s) {
    return {{"task_name", s.task_name},
            {"description", s.description},
            {"base_instruction", s.base_instruction},
            {"answer_format", s.answer_format}};
}

ProblemSpec problem_spec_from_json(const json& j) {
    return {j.at("task_name").get<std::string>(), j.at("description").get<std::string>(),
            j.at("base_instruction").get<std::string>(), j.at("answer_format").get<std::string>()};
}

json to_json(const HyperParams& h) {
    return {{"mutate_refine_rounds", h.mutate_refine_rounds},
            {"mutate_rounds", h.mutate_rounds},
            {"style_variation", h.style_variation},
            {"min_example_correct_count", h.min_example_correct_count},
            {"max_example_count", h.max_example_count},
            {"mini_batch_size", h.mini_batch_size},
            {"max_seq_iter", h.max_seq_iter},
            {"few_shot_count", h.few_shot_count},
            {"diverse_pool_size", h.diverse_pool_size},
            {"seq_cost_rounds", h.seq_cost_rounds},
            {"seed", h.seed}};
}

HyperParams hyper_params_from_json(const json& j) {
    HyperParams h;
    h.mutate_refine_rounds = j.at("mutate_refine_rounds").get<int>();
    h.mutate_rounds = j.at("mutate_rounds").get<int>();
    h.style_variation = j.at("style_variation").get<int>();
    h.min_example_correct_count = j.at("min_example_correct_count").get<int>();
    h.max_example_count = j.at("max_example_count").get<int>();
    h.mini_batch_size = j.at("mini_batch_size").get<int>();
    h.max_seq_iter = j.at("max_seq_iter").get<int>();
    h.few_shot_count = j.at("few_shot_count").get<int>();
    h.diverse_pool_size = j.at("diverse_pool_size").get<int>();
    h.seq_cost_rounds = j.at("seq_cost_rounds").get<int>();
    h.seed = j.at("seed").get<std::uint64_t>();
    return h;
}

namespace {

json optional_path(const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); }

std::optional<fs::path> path_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return fs::path(j.at(key).get<std::string>());
}

}  // namespace

json to_json(const RunConfig& c) {
    const auto& p = c.provider;
    return {{"spec", to_json(c.spec)},
            {"hyperparams", to_json(c.hyper)},
            {"provider",
             {{"model", p.model},
              {"base_url", p.base_url},
              {"temperature", p.temperature},
              {"max_output_tokens", p.max_output_tokens},
              {"max_attempts", p.max_attempts},
              {"backoff_ms", p.backoff_ms},
              {"timeout_seconds", p.timeout_seconds},
              {"mock_script", optional_path(p.mock_script)},
              {"cassette", optional_path(p.cassette)}}},
            {"options",
             {{"seq_synthesize_from_diverse", c.options.seq_synthesize_from_diverse},
              {"persona_from_instruction", c.options.persona_from_instruction}}},
            {"evaluator", to_string(c.evaluator)},
            {"f1_threshold", c.f1_threshold},
            {"max_total_calls", c.max_total_calls ? json(*c.max_total_calls) : json(nullptr)},
            {"thinking_styles_file", optional_path(c.thinking_styles_file)}};
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    c.spec = problem_spec_from_json(j.at("spec"));
    c.hyper = hyper_params_from_json(j.at("hyperparams"));
    const auto& p = j.at("provider");
    c.provider.model = p.at("model").get<std::string>();
    c.provider.base_url = p.at("base_url").get<std::string>();
    c.provider.temperature = p.at("temperature").get<double>();
    c.provider.max_output_tokens = p.at("max_output_tokens").get<int>();
    c.provider.max_attempts = p.at("max_attempts").get<int>();
    c.provider.backoff_ms = p.at("backoff_ms").get<int>();
    c.provider.timeout_seconds = p.at("timeout_seconds").get<int>();
    c.provider.mock_script = path_from(p, "mock_script");
    c.provider.cassette = path_from(p, "cassette");
    c.options.seq_synthesize_from_diverse = j.at("options").at("seq_synthesize_from_diverse").get<bool>();
    c.options.persona_from_instruction = j.at("options").at("persona_from_instruction").get<bool>();
    c.evaluator = match_mode_from_string(j.at("evaluator").get<std::string>());
    c.f1_threshold = j.at("f1_threshold").get<double>();
    if (!j.at("max_total_calls").is_null()) c.max_total_calls = j.at("max_total_calls").get<std::size_t>();
    c.thinking_styles_file = path_from(j, "thinking_styles_file");
    return c;
}

std::string serialize_prompt_state(const PromptState& s) { return to_json(s).dump(2) + "\n"; }

PromptState load_prompt_state(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open prompt state " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        auto s = prompt_state_from_json(json::parse(ss.str()));
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw ConfigError("malformed prompt state " + path.string() + ": " + e.what());
    } catch (const InvalidArgumentError& e) {
        throw ConfigError("invalid prompt state " + path.string() + ": " + e.what());
    }
}

// ---- run state --------------------------------------------------------------------

json to_json(const RunState& s) {
    return {{"format", 1},
            {"stage_cursor", to_string(s.stage_cursor)},
            {"spec", to_json(s.spec)},
            {"hyperparams", to_json(s.hyperparams)},
            {"prompt", to_json(s.prompt)},
            {"rng_state", s.rng_state},
            {"ledger_path", s.ledger_path},
            {"ledger_records", s.ledger_records},
            {"warnings", s.warnings}};
}

RunState run_state_from_json(const json& j) {
    if (j.at("format").get<int>() != 1) throw InvalidArgumentError("unsupported state format");
    RunState s;
    s.stage_cursor = pipeline_stage_from_string(j.at("stage_cursor").get<std::string>());
    s.spec = problem_spec_from_json(j.at("spec"));
    s.hyperparams = hyper_params_from_json(j.at("hyperparams"));
    s.prompt = prompt_state_from_json(j.at("prompt"));
    s.rng_state = j.at("rng_state").get<std::string>();
    s.ledger_path = j.at("ledger_path").get<std::string>();
    s.ledger_records = j.at("ledger_records").get<std::size_t>();
    s.warnings = j.at("warnings").get<std::vector<std::string>>();
    return s;
}

std::string serialize_run_state(const RunState& s) { return to_json(s).dump(2) + "\n"; }

RunState parse_run_state(std::string_view text) {
    try {
        auto s = run_state_from_json(json::parse(text));
        (void)Rng::from_state(s.rng_state);
        return s;
    } catch (const CheckpointCorruptError&) {
        throw;
    } catch (const json::exception& e) {
        throw CheckpointCorruptError(std::string("corrupt checkpoint: ") + e.what());
    } catch (const Error& e) {
        throw CheckpointCorruptError(std::string("corrupt checkpoint: ") + e.what());
    }
}

void checkpoint(const RunState& state, const fs::path& run_dir) {
    fs::create_directories(run_dir);
    const auto path = run_dir / kStateFile;
    if (fs::exists(path)) {
        auto previous = parse_run_state(read_file(path));
        if (static_cast<int>(state.stage_cursor) < static_cast<int>(previous.stage_cursor))
            throw PreconditionError("checkpoint would move the stage cursor back from " +
                                    std::string(to_string(previous.stage_cursor)) + " to " +
                                    std::string(to_string(state.stage_cursor)));
    }
    write_file_atomic(path, serialize_run_state(state));
}

RunState resume(const fs::path& run_dir) {
    const auto path = run_dir / kStateFile;
    if (!fs::exists(path)) throw CheckpointNotFoundError("no checkpoint in " + run_dir.string());
    return parse_run_state(read_file(path));
}

}  // namespace promptforge
