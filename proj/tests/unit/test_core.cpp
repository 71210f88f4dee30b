#include <doctest.h>

#include "promptforge/core.hpp"
#include "promptforge/errors.hpp"
#include "promptforge/rng.hpp"
#include "promptforge/text.hpp"

#include <random>
#include <set>

using namespace promptforge;

namespace {

PromptState sample_state() {
    PromptState s;
    s.expert_persona = "You are a mathematics educator.";
    s.instruction = "Solve the problem step by step.";
    s.answer_format = "Wrap the final answer between <ANS_START> and <ANS_END>.";
    s.few_shots = FewShotSet(2);
    s.few_shots.add({"What is 30 + 8?", "38", std::string("30 plus 8 is 38."), Origin::real});
    s.few_shots.add({"What is 2 * 3?", "6", std::nullopt, Origin::synthetic});
    s.intent_keywords = {"Mathematical Reasoning", "Multi-step Problem Solving"};
    return s;
}

}  // namespace

TEST_SUITE("core") {
    TEST_CASE("problem spec requires description and base instruction") {
        ProblemSpec ok{"t", "describe", "instruct", ""};
        CHECK_NOTHROW(ok.validate());
        CHECK_THROWS_AS((ProblemSpec{"t", "  \n", "instruct", ""}.validate()), InvalidArgumentError);
        CHECK_THROWS_AS((ProblemSpec{"t", "describe", "\t", ""}.validate()), InvalidArgumentError);
    }

    TEST_CASE("example requires question and answer") {
        CHECK_NOTHROW((Example{"q", "a", std::nullopt, Origin::real}.validate()));
        CHECK_THROWS_AS((Example{"", "a", std::nullopt, Origin::real}.validate()), InvalidArgumentError);
        CHECK_THROWS_AS((Example{"q", " ", std::nullopt, Origin::real}.validate()), InvalidArgumentError);
        CHECK(origin_from_string(to_string(Origin::synthetic)) == Origin::synthetic);
        CHECK_THROWS_AS(origin_from_string("fake"), InvalidArgumentError);
    }

    TEST_CASE("few-shot set rejects duplicates and never exceeds its target") {
        FewShotSet s(2);
        CHECK(s.add({"q1", "a", std::nullopt, Origin::real}));
        CHECK_FALSE(s.add({"q1", "other", std::nullopt, Origin::real}));
        CHECK(s.add({"q2", "b", std::nullopt, Origin::real}));
        CHECK(s.full());
        CHECK_FALSE(s.add({"q3", "c", std::nullopt, Origin::real}));
        CHECK(s.size() == 2);
        CHECK(s.contains_question("q2"));
        CHECK_FALSE(s.contains_question("q3"));
    }

    TEST_CASE("prompt state invariants") {
        auto s = sample_state();
        CHECK_NOTHROW(s.validate());
        s.intent_keywords.push_back(" ");
        CHECK_THROWS_AS(s.validate(), InvalidArgumentError);
        s = sample_state();
        s.instruction = "";
        CHECK_THROWS_AS(s.validate(), InvalidArgumentError);
    }

    TEST_CASE("thinking style pool") {
        auto pool = ThinkingStylePool::defaults();
        CHECK(pool.size() == 20);
        CHECK(pool.styles()[0] == "How can I simplify the problem so that it is easier to solve?");
        CHECK(std::set<std::string>(pool.styles().begin(), pool.styles().end()).size() == 20);

        auto parsed = ThinkingStylePool::parse("# comment\nFirst style\n\n  Second style  \n#another\n");
        REQUIRE(parsed.size() == 2);
        CHECK(parsed.styles()[1] == "Second style");
        CHECK_THROWS_AS(ThinkingStylePool::parse("same\nsame\n"), InvalidArgumentError);
        CHECK_THROWS_AS(ThinkingStylePool({}), InvalidArgumentError);
    }

    TEST_CASE("hyperparameter defaults and validation") {
        HyperParams h;
        CHECK(h.mutate_refine_rounds == 3);
        CHECK(h.mutate_rounds == 3);
        CHECK(h.style_variation == 3);
        CHECK(h.min_example_correct_count == 3);
        CHECK(h.max_example_count == 6);
        CHECK(h.mini_batch_size == 5);
        CHECK(h.max_seq_iter == 5);
        CHECK(h.diverse_pool_size == 25);
        CHECK_NOTHROW(h.validate());

        auto bad = h;
        bad.mutate_rounds = 0;
        CHECK_THROWS_AS(bad.validate(), InvalidArgumentError);
        bad = h;
        bad.min_example_correct_count = 7;
        CHECK_THROWS_AS(bad.validate(), InvalidArgumentError);
        bad = h;
        bad.few_shot_count = 26;
        CHECK_THROWS_AS(bad.validate(), InvalidArgumentError);
        bad = h;
        bad.few_shot_count = 0;
        CHECK_NOTHROW(bad.validate());
    }

    TEST_CASE("assemble: empty example set and no keywords") {
        PromptState s;
        s.expert_persona = "PERSONA";
        s.instruction = "INSTRUCTION";
        s.answer_format = "FORMAT";
        auto out = assemble_final_prompt(s, "QUERY");
        CHECK(out == "PERSONA\n\nINSTRUCTION\n\nFORMAT\n\nQUERY");
        CHECK(out.find("[Question]") == std::string::npos);
    }

    TEST_CASE("assemble: golden section order") {
        auto out = assemble_final_prompt(sample_state(), "What is 1 + 1?");
        CHECK(out ==
              "You are a mathematics educator.\n\n"
              "Solve the problem step by step.\n\n"
              "[Question] What is 30 + 8?\n[Answer] 30 plus 8 is 38. <ANS_START>38<ANS_END>\n\n"
              "[Question] What is 2 * 3?\n[Answer] <ANS_START>6<ANS_END>\n\n"
              "Task keywords: Mathematical Reasoning, Multi-step Problem Solving\n\n"
              "Wrap the final answer between <ANS_START> and <ANS_END>.\n\n"
              "What is 1 + 1?");
    }

    TEST_CASE("assemble is deterministic") {
        auto s = sample_state();
        CHECK(assemble_final_prompt(s, "q") == assemble_final_prompt(s, "q"));
    }

    TEST_CASE("rendered block ends with the tagged answer") {
        auto block = render_example_block({"How many?", "38", std::string("Count them."), Origin::real});
        CHECK(block.size() >= std::string("<ANS_START>38<ANS_END>").size());
        CHECK(block.substr(block.size() - 22) == "<ANS_START>38<ANS_END>");
    }

    TEST_CASE("every example answer is wrapped in exactly one tag pair") {
        auto s = sample_state();
        auto out = assemble_final_prompt(s, "q");
        auto format_at = out.find(s.answer_format);
        REQUIRE(format_at != std::string::npos);
        auto answers = extract_all_answers(out.substr(0, format_at));
        REQUIRE(answers.size() == 2);
        CHECK(answers[0] == "38");
        CHECK(answers[1] == "6");
    }

    TEST_CASE("answer extraction") {
        CHECK(extract_last_answer("reasoning... <ANS_START>38<ANS_END>") == std::optional<std::string>("38"));
        CHECK(extract_last_answer("<ANS_START>a<ANS_END> then <ANS_START>b<ANS_END>") ==
              std::optional<std::string>("b"));
        CHECK_FALSE(extract_last_answer("no tags here").has_value());
        CHECK_FALSE(extract_last_answer("<ANS_START>unterminated").has_value());
        CHECK_FALSE(extract_last_answer("<ANS_END>reversed<ANS_START>").has_value());
        CHECK(extract_last_answer("<ANS_START> draft <ANS_START> 7 <ANS_END>") == std::optional<std::string>("7"));
        CHECK(extract_last_answer("<ANS_START>  spaced  <ANS_END>") == std::optional<std::string>("spaced"));
    }

    TEST_CASE("example blocks parse back") {
        std::vector<Example> in = {{"What is 1+1?", "2", std::string("One plus one."), Origin::real},
                                   {"Capital of France?", "Paris", std::nullopt, Origin::real}};
        std::string text;
        for (const auto& e : in) text += render_example_block(e) + "\n\n";
        auto out = parse_example_blocks("Here you go:\n" + text, Origin::real);
        CHECK(out == in);

        auto synthetic = parse_example_blocks(text, Origin::synthetic);
        REQUIRE(synthetic.size() == 2);
        CHECK(synthetic[0].origin == Origin::synthetic);
    }

    TEST_CASE("example block parser tolerates missing tags and drops empty blocks") {
        auto out = parse_example_blocks("[Question] q1\n[Answer] plain answer\n[Question] \n[Answer] x\n"
                                        "[Question] q3 without answer marker",
                                        Origin::real);
        REQUIRE(out.size() == 1);
        CHECK(out[0].question == "q1");
        CHECK(out[0].answer == "plain answer");
        CHECK_FALSE(out[0].reasoning.has_value());
    }

    TEST_CASE("property: extract_answer inverts rendering for 1000 generated answers") {
        std::mt19937_64 gen(20240611);
        const std::string alphabet = "abcXYZ019 <>_/ANSTRDE.,:-\n\t\"'{}[]";
        int checked = 0;
        while (checked < 1000) {
            std::uniform_int_distribution<int> len(1, 40);
            std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
            std::string a;
            for (int i = len(gen); i > 0; --i) a += alphabet[pick(gen)];
            if (checked % 7 == 0) a += "\xc3\xa9\xe2\x82\xac";  // multi-byte characters
            a = text::trim(a);
            if (a.empty() || a.find(kAnsStart) != std::string::npos || a.find(kAnsEnd) != std::string::npos)
                continue;
            Example e{"question " + std::to_string(checked), a, std::nullopt, Origin::real};
            if (checked % 2 == 1) e.reasoning = "some reasoning";
            CHECK(extract_last_answer(render_example_block(e)) == std::optional<std::string>(a));

            PromptState s;
            s.instruction = "I";
            s.few_shots = FewShotSet(1);
            s.few_shots.add(e);
            auto all = extract_all_answers(assemble_final_prompt(s, "query without tags"));
            REQUIRE(all.size() == 1);
            CHECK(all[0] == a);
            ++checked;
        }
    }

    TEST_CASE("rng determinism and state round trip") {
        Rng a(7), b(7);
        CHECK(a.sample_indices(20, 3) == b.sample_indices(20, 3));
        auto saved = a.state();
        auto first = a.sample_indices(100, 10);
        auto restored = Rng::from_state(saved);
        CHECK(restored.sample_indices(100, 10) == first);
        CHECK(restored == a);
        CHECK_THROWS_AS(Rng::from_state("not a state"), CheckpointCorruptError);
    }

    TEST_CASE("rng sampling is distinct and in range") {
        Rng r(1);
        for (int trial = 0; trial < 200; ++trial) {
            auto n = static_cast<std::size_t>(1 + r.below(30));
            auto m = static_cast<std::size_t>(r.below(n + 1));
            auto s = r.sample_indices(n, m);
            CHECK(s.size() == m);
            std::set<std::size_t> uniq(s.begin(), s.end());
            CHECK(uniq.size() == m);
            for (auto i : s) CHECK(i < n);
        }
        CHECK_THROWS(r.sample_indices(3, 4));
    }
}
