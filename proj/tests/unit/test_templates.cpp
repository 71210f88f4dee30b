#include <doctest.h>

#include "promptforge/errors.hpp"
#include "promptforge/templates.hpp"

#include <random>

using namespace promptforge;

namespace {

const std::vector<std::pair<Component, std::vector<std::string>>> kRequiredSlots = {
    {Component::mutate, {"problem description", "current instruction", "thinking style pool", "style variation number"}},
    {Component::score, {"instruction", "answer format", "questions"}},
    {Component::critique_instruction, {"instruction", "examples", "failures"}},
    {Component::synthesize_instruction, {"instruction", "critique", "examples"}},
    {Component::critique_examples, {"instruction", "examples"}},
    {Component::synthesize_examples, {"instruction", "examples", "critique", "count"}},
    {Component::reasoning, {"instruction", "examples"}},
    {Component::validate, {"instruction", "examples"}},
    {Component::intent, {"problem description"}},
    {Component::persona, {"problem description"}},
    {Component::judge, {"question", "reference answer", "candidate answer"}},
};

}  // namespace

TEST_SUITE("templates") {
    TEST_CASE("mutate template substitutes description, styles and count") {
        auto out = render_component_template(Component::mutate, {{"problem description", "D"},
                                                                 {"current instruction", "P"},
                                                                 {"thinking style pool", "S1\nS2\nS3"},
                                                                 {"style variation number", "3"}});
        CHECK(out.find("D") != std::string::npos);
        CHECK(out.find("S1\nS2\nS3") != std::string::npos);
        CHECK(out.find("Number of variations: 3") != std::string::npos);
        CHECK(out.find("{{") == std::string::npos);
    }

    TEST_CASE("missing slot names the slot") {
        try {
            render_component_template(Component::mutate, {{"problem description", "D"},
                                                          {"current instruction", "P"},
                                                          {"style variation number", "3"}});
            FAIL("expected MissingSlotError");
        } catch (const MissingSlotError& e) {
            CHECK(e.slot() == "thinking style pool");
            CHECK(std::string(e.what()).find("thinking style pool") != std::string::npos);
        }
    }

    TEST_CASE("template without placeholders is returned unchanged") {
        CHECK(render_template("plain text, no markers", {}) == "plain text, no markers");
        CHECK(render_template("", {{"x", "y"}}) == "");
        CHECK(render_template("unclosed {{marker", {}) == "unclosed {{marker");
    }

    TEST_CASE("slot values are inserted verbatim and not rescanned") {
        CHECK(render_template("a {{x}} b", {{"x", "{{y}}"}}) == "a {{y}} b");
    }

    TEST_CASE("every component renders with its required slots and fails without any one") {
        for (const auto& [component, slots] : kRequiredSlots) {
            CAPTURE(to_string(component));
            SlotMap full;
            for (const auto& s : slots) full[s] = "<value of " + s + ">";
            auto out = render_component_template(component, full);
            CHECK(out.find("{{") == std::string::npos);
            for (const auto& s : slots) CHECK(out.find(full[s]) != std::string::npos);
            for (const auto& s : slots) {
                auto partial = full;
                partial.erase(s);
                CHECK_THROWS_AS(render_component_template(component, partial), MissingSlotError);
            }
        }
    }

    TEST_CASE("property: every slot value appears as a contiguous substring") {
        std::mt19937 gen(99);
        const std::string alphabet = "abc xyz\n{}<>0123";
        for (int trial = 0; trial < 200; ++trial) {
            for (const auto& [component, slots] : kRequiredSlots) {
                SlotMap values;
                for (const auto& s : slots) {
                    std::string v;
                    for (int i = std::uniform_int_distribution<int>(0, 30)(gen); i > 0; --i)
                        v += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(gen)];
                    values[s] = v;
                }
                auto out = render_component_template(component, values);
                for (const auto& [_, v] : values) CHECK(out.find(v) != std::string::npos);
            }
        }
    }

    TEST_CASE("synthesis templates ask for the documented delimiters") {
        CHECK(std::string(component_template(Component::synthesize_instruction)).find("<START>") != std::string::npos);
        CHECK(std::string(component_template(Component::score)).find("<ANS_START>") != std::string::npos);
        // The example-synthesis template carries no block markers of its own, so
        // parsing a reply never picks up text from the request.
        auto ex = std::string(component_template(Component::synthesize_examples));
        CHECK(ex.find("[Question]") == std::string::npos);
        CHECK(ex.find("<ANS_START>") == std::string::npos);
    }
}
