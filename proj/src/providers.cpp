#include "promptforge/providers.hpp"

#include "promptforge/errors.hpp"
#include "promptforge/templates.hpp"
#include "promptforge/text.hpp"

#include <json.hpp>

#include <fstream>
#include <regex>
#include <sstream>

namespace promptforge {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string short_digest(const std::string& message) { return sha256_hex(message).substr(0, 8); }

ChatResponse make_response(const ChatRequest& request, std::string content, std::string provider) {
    ChatResponse r;
    for (const auto& m : request.messages) r.input_tokens += static_cast<std::int64_t>(text::word_count(m.content));
    r.output_tokens = static_cast<std::int64_t>(text::word_count(content));
    r.content = std::move(content);
    r.provider_id = std::move(provider);
    return r;
}

}  // namespace

// ---- mock ----------------------------------------------------------------------

MockScript MockScript::parse(std::string_view json_text) {
    MockScript script;
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("mock script is not valid JSON: ") + e.what());
    }
    try {
        if (j.contains("exact")) {
            for (const auto& e : j.at("exact")) {
                auto stage = stage_tag_from_string(e.at("stage").get<std::string>());
                std::string digest = e.contains("digest") ? e.at("digest").get<std::string>()
                                                          : sha256_hex(e.at("message").get<std::string>());
                script.exact[{stage, digest}] = e.at("content").get<std::string>();
            }
        }
        if (j.contains("defaults")) {
            for (const auto& [stage, content] : j.at("defaults").items())
                script.stage_defaults[stage_tag_from_string(stage)] = content.get<std::string>();
        }
        if (j.contains("answers")) {
            const auto& a = j.at("answers");
            if (a.is_array()) {
                for (const auto& e : a)
                    script.answers[e.at("question").get<std::string>()] = e.at("answer").get<std::string>();
            } else {
                for (const auto& [q, ans] : a.items()) script.answers[q] = ans.get<std::string>();
            }
        }
        for (const auto& [key, _] : j.items())
            if (key != "exact" && key != "defaults" && key != "answers") throw UnknownKeyError(key, "in mock script");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed mock script: ") + e.what());
    } catch (const InvalidArgumentError& e) {
        throw ConfigError(std::string("malformed mock script: ") + e.what());
    }
    return script;
}

MockScript MockScript::load(const std::filesystem::path& path) { return parse(read_file(path)); }

MockProvider::MockProvider(MockScript script) : script_(std::move(script)) {}

void MockProvider::set_exact(StageTag stage, std::string_view user_message, std::string content) {
    std::lock_guard lock(mutex_);
    script_.exact[{stage, sha256_hex(user_message)}] = std::move(content);
}

void MockProvider::set_default(StageTag stage, std::string content) {
    std::lock_guard lock(mutex_);
    script_.stage_defaults[stage] = std::move(content);
}

void MockProvider::set_responder(StageTag stage, Responder responder) {
    std::lock_guard lock(mutex_);
    responders_[stage] = std::move(responder);
}

void MockProvider::set_answer(std::string question, std::string answer) {
    std::lock_guard lock(mutex_);
    script_.answers[std::move(question)] = std::move(answer);
}

std::vector<ChatRequest> MockProvider::requests() const {
    std::lock_guard lock(mutex_);
    return captured_;
}

std::vector<ChatRequest> MockProvider::requests(StageTag stage) const {
    std::vector<ChatRequest> out;
    for (auto& r : requests())
        if (r.stage == stage) out.push_back(std::move(r));
    return out;
}

ChatResponse MockProvider::complete(const ChatRequest& request) {
    const auto& message = request.last_user_message();
    Responder responder;
    std::optional<std::string> content;
    {
        std::lock_guard lock(mutex_);
        captured_.push_back(request);
        if (auto it = script_.exact.find({request.stage, sha256_hex(message)}); it != script_.exact.end()) {
            content = it->second;
        } else if (auto r = responders_.find(request.stage); r != responders_.end()) {
            responder = r->second;
        } else if (auto d = script_.stage_defaults.find(request.stage); d != script_.stage_defaults.end()) {
            content = d->second;
        }
    }
    if (!content) content = responder ? responder(request) : builtin_response(request);
    return make_response(request, std::move(*content), id());
}

namespace {

std::string answer_segment(std::string_view segment, const std::map<std::string, std::string>& answers) {
    const std::string* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& [q, a] : answers) {
        if (q.size() > best_len && segment.find(q) != std::string_view::npos) {
            best = &a;
            best_len = q.size();
        }
    }
    std::string out = "Working through the question step by step. ";
    out += kAnsStart;
    out += best ? *best : std::string("unknown");
    out += kAnsEnd;
    return out;
}

std::string answer_questions(const std::string& message, const std::map<std::string, std::string>& answers) {
    std::string_view tail = message;
    if (auto pos = tail.rfind(kAnsEnd); pos != std::string_view::npos) tail.remove_prefix(pos + kAnsEnd.size());

    static const std::regex numbered(R"(^Question \d+:)");
    std::vector<std::string> segments;
    for (const auto& line : text::split_lines(tail)) {
        if (std::regex_search(line, numbered)) {
            segments.push_back(line);
        } else if (!segments.empty()) {
            segments.back() += "\n" + line;
        }
    }
    if (segments.empty()) return answer_segment(tail, answers);

    std::vector<std::string> out;
    for (std::size_t i = 0; i < segments.size(); ++i)
        out.push_back("Answer " + std::to_string(i + 1) + ": " + answer_segment(segments[i], answers));
    return text::join(out, "\n");
}

std::string strip_variant_suffix(std::string question) {
    static const std::regex suffix(R"( \(variant [0-9a-f]{8}\)$)");
    return std::regex_replace(question, suffix, "");
}

std::string capture_after(const std::string& message, const std::string& label) {
    auto pos = message.find(label);
    if (pos == std::string::npos) return {};
    pos += label.size();
    auto end = message.find("\n\n", pos);
    return text::trim(message.substr(pos, end == std::string::npos ? std::string::npos : end - pos));
}

}  // namespace

std::string MockProvider::builtin_response(const ChatRequest& request) const {
    const auto& message = request.last_user_message();
    const auto tag = short_digest(message);
    switch (request.stage) {
        case StageTag::mutate: {
            int count = 3;
            std::smatch m;
            static const std::regex count_re(R"(Number of variations: (\d+))");
            if (std::regex_search(message, m, count_re)) count = std::max(1, std::stoi(m[1].str()));
            std::vector<std::string> lines;
            for (int i = 1; i <= count; ++i)
                lines.push_back(std::to_string(i) + ". Approach the task from angle " + std::to_string(i) + " (" + tag +
                                "): read the problem carefully, reason step by step and verify the final answer.");
            return text::join(lines, "\n");
        }
        case StageTag::score_eval:
        case StageTag::select_eval:
        case StageTag::inference: {
            std::lock_guard lock(mutex_);
            return answer_questions(message, script_.answers);
        }
        case StageTag::critique_instruction:
            return "Critique " + tag +
                   ": the instruction should ask the model to state intermediate results explicitly and to verify "
                   "the final answer.";
        case StageTag::synthesize_instruction:
            return std::string(kInstructionStart) +
                   "Solve the task step by step, state every intermediate result and verify the final answer "
                   "before giving it (revision " +
                   tag + ")." + std::string(kInstructionEnd);
        case StageTag::critique_examples:
            return "Critique " + tag + ": the examples are too similar to each other; include harder multi-step cases.";
        case StageTag::synthesize_examples: {
            std::vector<std::string> blocks;
            for (auto ex : parse_example_blocks(message, Origin::synthetic)) {
                ex.question = strip_variant_suffix(ex.question) + " (variant " + tag + ")";
                ex.reasoning.reset();
                blocks.push_back(render_example_block(ex));
            }
            return text::join(blocks, "\n\n");
        }
        case StageTag::reasoning: {
            std::vector<std::string> blocks;
            for (auto ex : parse_example_blocks(message, Origin::synthetic)) {
                ex.reasoning = "Identify the given quantities, apply the required operations one at a time and "
                               "check the result against the question.";
                blocks.push_back(render_example_block(ex));
            }
            return text::join(blocks, "\n\n");
        }
        case StageTag::validate: return "ALL VALID";
        case StageTag::intent: return "Problem Solving, Step-by-step Reasoning, Answer Verification";
        case StageTag::persona:
            return "You are a meticulous expert in this task's domain who breaks every problem into clear steps and "
                   "verifies each result before answering.";
        case StageTag::judge: {
            auto reference = capture_after(message, "Reference answer:\n");
            auto candidate = capture_after(message, "Candidate answer:\n");
            return text::iequals(reference, candidate) ? "CORRECT" : "INCORRECT";
        }
    }
    return {};
}

// ---- record / replay --------------------------------------------------------------

std::vector<CassetteEntry> load_cassette(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open cassette " + path.string());
    std::vector<CassetteEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim_view(line).empty()) continue;
        try {
            auto j = json::parse(line);
            CassetteEntry e;
            e.request_digest = j.at("request_digest").get<std::string>();
            e.stage = stage_tag_from_string(j.at("stage_tag").get<std::string>());
            e.content = j.at("content").get<std::string>();
            e.input_tokens = j.at("input_tokens").get<std::int64_t>();
            e.output_tokens = j.at("output_tokens").get<std::int64_t>();
            entries.push_back(std::move(e));
        } catch (const std::exception& e) {
            throw ConfigError("cassette line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return entries;
}

RecordingProvider::RecordingProvider(Provider& inner, std::filesystem::path cassette)
    : inner_(inner), path_(std::move(cassette)) {}

ChatResponse RecordingProvider::complete(const ChatRequest& request) {
    auto response = inner_.complete(request);
    json j = {
        {"request_digest", request_digest(request)},
        {"stage_tag", to_string(request.stage)},
        {"content", response.content},
        {"input_tokens", response.input_tokens},
        {"output_tokens", response.output_tokens},
    };
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot append to cassette " + path_.string());
    out << j.dump() << '\n';
    return response;
}

ReplayProvider::ReplayProvider(const std::filesystem::path& cassette) : ReplayProvider(load_cassette(cassette)) {}

ReplayProvider::ReplayProvider(std::vector<CassetteEntry> entries) {
    for (auto& e : entries) {
        auto key = e.request_digest;
        entries_.try_emplace(std::move(key), std::move(e));
    }
}

ChatResponse ReplayProvider::complete(const ChatRequest& request) {
    auto digest = request_digest(request);
    auto it = entries_.find(digest);
    if (it == entries_.end()) throw ReplayMissError("no cassette entry for request " + digest.substr(0, 16), "");
    ChatResponse r;
    r.content = it->second.content;
    r.input_tokens = it->second.input_tokens;
    r.output_tokens = it->second.output_tokens;
    r.provider_id = id();
    return r;
}

}  // namespace promptforge
