#include <doctest.h>

#include "support.hpp"

#include <json.hpp>

using pftest::quote;
using pftest::run_cli;

namespace {

std::string config_arg() { return "--config " + quote(pftest::data_path("config.yaml")); }
std::string train_arg() { return "--dataset " + quote(pftest::data_path("arith_train.jsonl")); }

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("cost-estimate prints the default breakdown") {
        auto r = run_cli("cost-estimate");
        CHECK(r.exit_code == 0);
        CHECK(r.output ==
              "refine_instructions: 48\nexample_selection: 5\nseq_opt: 12\nreason_validate: 2\nintent_expert: 2\n"
              "total: 69\n");
        auto j = run_cli("cost-estimate --json " + config_arg());
        CHECK(j.exit_code == 0);
        CHECK(nlohmann::json::parse(j.output)["total"] == 69);
    }

    TEST_CASE("usage and config errors exit with 2") {
        CHECK(run_cli("").exit_code == 2);
        CHECK(run_cli("optimize --bogus").exit_code == 2);
        pftest::TempDir dir;
        pftest::spit(dir / "bad.yaml", "task_name: t\ndescription: d\nbase_instruction: b\nanswer_format: f\n"
                                       "hyperparams:\n  mutate_round: 3\n");
        auto r = run_cli("optimize --config " + quote(dir / "bad.yaml") + " " + train_arg() + " --run-dir " +
                         quote(dir / "run"));
        CHECK(r.exit_code == 2);
        CHECK(r.output.find("mutate_round") != std::string::npos);
        auto missing = run_cli("optimize " + config_arg() + " --dataset " + quote(dir / "none.jsonl") +
                               " --run-dir " + quote(dir / "run2"));
        CHECK(missing.exit_code == 2);
        pftest::spit(dir / "broken.jsonl", "{\"question\": \"q\"}\n");
        auto broken = run_cli("optimize " + config_arg() + " --dataset " + quote(dir / "broken.jsonl") +
                              " --run-dir " + quote(dir / "run3"));
        CHECK(broken.exit_code == 2);
        CHECK(broken.output.find("line 1") != std::string::npos);
    }

    TEST_CASE("provider errors exit with 3") {
        pftest::TempDir dir;
        pftest::spit(dir / "empty.jsonl", "");
        auto r = run_cli("optimize " + config_arg() + " " + train_arg() + " --run-dir " + quote(dir / "run") +
                         " --provider replay --cassette " + quote(dir / "empty.jsonl"));
        CHECK(r.exit_code == 3);
        CHECK(r.output.find("mutate") != std::string::npos);
    }

    TEST_CASE("budget exhaustion exits with 4") {
        pftest::TempDir dir;
        auto r = run_cli("optimize " + config_arg() + " " + train_arg() + " --run-dir " + quote(dir / "run") +
                         " --max-total-calls 10");
        CHECK(r.exit_code == 4);
        CHECK(std::filesystem::exists(dir / "run" / "state.json"));
    }

    TEST_CASE("optimize, report and evaluate with the mock") {
        pftest::TempDir dir;
        auto run = dir / "run";
        auto opt = run_cli("optimize " + config_arg() + " " + train_arg() + " --run-dir " + quote(run));
        REQUIRE(opt.exit_code == 0);
        CHECK(opt.output.find("calls: 91") != std::string::npos);
        CHECK(std::filesystem::exists(run / "final_prompt.txt"));
        CHECK(std::filesystem::exists(run / "config.snapshot"));

        auto rep = run_cli("report --json --run-dir " + quote(run));
        REQUIRE(rep.exit_code == 0);
        auto j = nlohmann::json::parse(rep.output);
        CHECK(j["complete"] == true);
        CHECK(j["total"]["calls"] == 91);
        CHECK(j["stages"]["select_eval"]["calls"] == 25);
        CHECK(run_cli("report --run-dir " + quote(run)).output.find("generate_persona (complete)") !=
              std::string::npos);

        auto ev = run_cli("evaluate " + config_arg() + " --prompt-state " + quote(run / "prompt_state.json") +
                          " --dataset " + quote(pftest::data_path("arith_test.jsonl")) + " --jobs 4 --out " +
                          quote(dir / "eval.json"));
        REQUIRE(ev.exit_code == 0);
        CHECK(ev.output.find("mode: numeric") != std::string::npos);
        CHECK(ev.output.find("accuracy: 0.9167 (11/12)") != std::string::npos);
        CHECK(ev.output.find("inference calls: 12") != std::string::npos);
        auto out = nlohmann::json::parse(pftest::slurp(dir / "eval.json"));
        CHECK(out["per_example"].size() == 12);
        CHECK(out["per_example"][5]["correct"] == false);

        // A second fresh run into the same directory is refused.
        auto again = run_cli("optimize " + config_arg() + " " + train_arg() + " --run-dir " + quote(run));
        CHECK(again.exit_code == 1);
        CHECK(again.output.find("--resume") != std::string::npos);
    }

    TEST_CASE("stop-after then resume without --config") {
        pftest::TempDir dir;
        auto run = dir / "run";
        auto stop = run_cli("optimize " + config_arg() + " " + train_arg() + " --run-dir " + quote(run) +
                            " --stop-after sequential_optimize");
        REQUIRE(stop.exit_code == 0);
        CHECK(stop.output.find("stopped after sequential_optimize") != std::string::npos);
        CHECK_FALSE(std::filesystem::exists(run / "final_prompt.txt"));
        auto cont = run_cli("optimize " + train_arg() + " --run-dir " + quote(run) + " --resume");
        REQUIRE(cont.exit_code == 0);
        CHECK(cont.output.find("calls: 91") != std::string::npos);
        CHECK(std::filesystem::exists(run / "final_prompt.txt"));
        CHECK(run_cli("optimize " + train_arg() + " --run-dir " + quote(run) + " --stop-after nowhere").exit_code ==
              2);
    }

    TEST_CASE("record then replay reproduces the run") {
        pftest::TempDir dir;
        auto rec = run_cli("optimize " + config_arg() + " " + train_arg() + " --run-dir " + quote(dir / "a") +
                           " --record");
        REQUIRE(rec.exit_code == 0);
        REQUIRE(std::filesystem::exists(dir / "a" / "cassette.jsonl"));
        auto rep = run_cli("optimize " + config_arg() + " " + train_arg() + " --run-dir " + quote(dir / "b") +
                           " --provider replay --cassette " + quote(dir / "a" / "cassette.jsonl"));
        REQUIRE(rep.exit_code == 0);
        CHECK(pftest::slurp(dir / "a" / "final_prompt.txt") == pftest::slurp(dir / "b" / "final_prompt.txt"));
        CHECK(pftest::slurp(dir / "a" / "prompt_state.json") == pftest::slurp(dir / "b" / "prompt_state.json"));
    }

    TEST_CASE("profile-curve writes CSV and SVG") {
        pftest::TempDir dir;
        auto r = run_cli("profile-curve --matrix " + quote(pftest::data_path("bbii_zero_shot.csv")) + " --out " +
                         quote(dir / "curve.csv") + " --svg " + quote(dir / "curve.svg"));
        REQUIRE(r.exit_code == 0);
        CHECK(r.output.find("PromptWizard: 0.684") != std::string::npos);
        CHECK(r.output.find("APE: 0.053") != std::string::npos);
        CHECK(pftest::slurp(dir / "curve.csv").rfind("tau,", 0) == 0);
        CHECK(pftest::slurp(dir / "curve.svg").find("<polyline") != std::string::npos);
        CHECK(run_cli("profile-curve --matrix " + quote(dir / "nope.csv") + " --out " + quote(dir / "x.csv"))
                  .exit_code == 2);
        CHECK(run_cli("profile-curve --matrix " + quote(pftest::data_path("bbii_zero_shot.csv")) + " --out " +
                      quote(dir / "x.csv") + " --taus 0,zero")
                  .exit_code == 2);
    }
}
