#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "aidr/pcot.hpp"

using namespace aidr;

namespace {

DatasetManifest small_dataset(std::size_t n) {
    DatasetManifest m;
    for (std::size_t i = 0; i < n; ++i) {
        ReasoningQuestion q;
        q.id = "q" + std::to_string(i);
        q.question = kQuestionStem;
        q.choices = option_texts();
        q.answer = static_cast<int>(i % 8);
        q.context = "WiFi: SNR 10.0 dB";
        q.scenario = make_scenario(static_cast<Cause>(i % 8), 0.5, 1, "Playroom", q.id);
        m.questions.push_back(std::move(q));
    }
    return m;
}

TeacherOptions fast_options() {
    TeacherOptions o;
    o.backoff_base_ms = 1;
    o.clock = []() { return std::int64_t{0}; };
    return o;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("golden instruction strings") {
    CHECK(std::string(kLectureInstruction) ==
          "Based on the problems above, please provide a general lecture about the current "
          "multi-access technologies for image transmission and the 3D Gaussian Splatting "
          "model for the 3D rendering task, using no more than three sentences.");
    CHECK(std::string(kPlanInstruction) ==
          "Based on the lecture and problems above, please try to understand these issues "
          "and devise a general and brief step-by-step plan to solve these problems, "
          "starting with 1, 2, 3 ....");
    CHECK(std::string(kRationaleInstruction) ==
          "Based on the lecture, plan, and problems above, please execute the plan and "
          "then reason the problem step by step, starting with 1, 2, 3 ....");
}

TEST_CASE("build_lecture_prompt") {
    const std::vector<QaPair> pairs = {{"What failed first?", "(A) WiFi noise"},
                                       {"What failed second?", "(B) 5G noise"}};
    const std::string prompt = build_lecture_prompt(pairs);
    SUBCASE("question texts appear verbatim") {
        CHECK(prompt.find("What failed first?") != std::string::npos);
        CHECK(prompt.find("What failed second?") != std::string::npos);
    }
    SUBCASE("instruction substring present") {
        CHECK(prompt.find("using no more than three sentences") != std::string::npos);
    }
    SUBCASE("byte-identical across runs") { CHECK(prompt == build_lecture_prompt(pairs)); }
    SUBCASE("empty QA list rejected") {
        CHECK_THROWS_AS(build_lecture_prompt({}), std::invalid_argument);
    }
}

TEST_CASE("build_plan_prompt") {
    const std::vector<QaPair> pairs = {{"Q1", "A1"}};
    const std::string lecture = "mATs combine WiFi, 5G and LiFi.";
    const std::string prompt = build_plan_prompt(lecture, pairs);
    SUBCASE("lecture prefix and verbatim lecture") {
        CHECK(prompt.rfind("Lecture: ", 0) == 0);
        CHECK(prompt.find(lecture) != std::string::npos);
    }
    SUBCASE("instruction substring present") {
        CHECK(prompt.find("step-by-step plan") != std::string::npos);
    }
    SUBCASE("lecture precedes QA pairs precedes instruction") {
        const auto lec = prompt.find(lecture);
        const auto qa = prompt.find("Q1");
        const auto instr = prompt.find(kPlanInstruction);
        REQUIRE(lec != std::string::npos);
        REQUIRE(qa != std::string::npos);
        REQUIRE(instr != std::string::npos);
        CHECK(lec < qa);
        CHECK(qa < instr);
    }
    SUBCASE("missing lecture is a sequencing error") {
        CHECK_THROWS_AS(build_plan_prompt("", pairs), std::runtime_error);
    }
}

TEST_CASE("build_rationale_prompt") {
    const QaPair qa{"Q1", "A1"};
    const std::string prompt = build_rationale_prompt("LEC", "PLAN", qa);
    SUBCASE("contains lecture and plan verbatim") {
        CHECK(prompt.find("Lecture: LEC") != std::string::npos);
        CHECK(prompt.find("Plan: PLAN") != std::string::npos);
    }
    SUBCASE("instruction substring present") {
        CHECK(prompt.find("execute the plan") != std::string::npos);
    }
    SUBCASE("missing plan is a sequencing error") {
        CHECK_THROWS_AS(build_rationale_prompt("LEC", "", qa), std::runtime_error);
    }
    SUBCASE("missing lecture is a sequencing error") {
        CHECK_THROWS_AS(build_rationale_prompt("", "PLAN", qa), std::runtime_error);
    }
}

TEST_CASE("generate_pcot with the mock backend") {
    auto dataset = small_dataset(10);
    MockBackend backend;
    auto options = fast_options();

    SUBCASE("record carries LEC/PLAN/R-<id>") {
        const auto record = generate_pcot(dataset, backend, options);
        CHECK(record.lecture == "LEC");
        CHECK(record.plan == "PLAN");
        REQUIRE(record.rationales.size() == 10);
        for (const auto& q : dataset.questions)
            CHECK(record.rationales.at(q.id) == "R-" + q.id);
        CHECK(record.failures.empty());
    }
    SUBCASE("transient failures are retried") {
        backend.inject_transient_failures(2);
        options.max_retries = 3;
        const auto record = generate_pcot(dataset, backend, options);
        CHECK(record.rationales.size() == 10);
        CHECK(record.failures.empty());
        CHECK(backend.failures_injected() == 2);
        CHECK(backend.call_count() >= 14);  // 12 successes + 2 retried failures
    }
    SUBCASE("exhausted retries become per-question failures, run continues") {
        // Pre-seed lecture and plan via a checkpoint so the injected
        // failures land on rationale requests only.
        const std::string ckpt = temp_path("aidr_test_pcot_fail.checkpoint");
        PCoTRecord seed;
        seed.lecture = "LEC";
        seed.plan = "PLAN";
        write_pcot(seed, ckpt);
        options.checkpoint_path = ckpt;
        options.max_retries = 0;
        options.concurrency = 1;
        backend.inject_transient_failures(3);
        const auto record = generate_pcot(dataset, backend, options);
        CHECK(record.rationales.size() == 7);
        CHECK(record.failures.size() == 3);
        std::remove(ckpt.c_str());
    }
    SUBCASE("in-flight requests never exceed the limit") {
        options.concurrency = 3;
        generate_pcot(small_dataset(40), backend, options);
        CHECK(backend.max_in_flight() <= 3);
    }
    SUBCASE("entire run reproducible") {
        const auto a = generate_pcot(dataset, backend, options);
        const auto b = generate_pcot(dataset, backend, options);
        CHECK(a.lecture == b.lecture);
        CHECK(a.plan == b.plan);
        CHECK(a.rationales == b.rationales);
        CHECK(a.started_at_unix == b.started_at_unix);
        CHECK(a.finished_at_unix == b.finished_at_unix);
    }
}

TEST_CASE("checkpoint resume skips completed questions") {
    const std::string ckpt = temp_path("aidr_test_pcot.checkpoint");
    std::remove(ckpt.c_str());
    auto dataset = small_dataset(8);
    auto options = fast_options();
    options.checkpoint_path = ckpt;
    options.concurrency = 1;

    MockBackend first;
    const auto partial = generate_pcot(dataset, first, options);
    CHECK(partial.rationales.size() == 8);

    // Drop three rationales from the checkpoint to simulate a killed run.
    {
        PCoTRecord truncated = read_pcot(ckpt);
        truncated.rationales.erase("q5");
        truncated.rationales.erase("q6");
        truncated.rationales.erase("q7");
        write_pcot(truncated, ckpt);
    }

    MockBackend second;
    const auto resumed = generate_pcot(dataset, second, options);
    CHECK(resumed.rationales.size() == 8);
    // Lecture, plan and the five kept rationales are not re-requested.
    CHECK(second.call_count() == 3);
    std::remove(ckpt.c_str());
}

TEST_CASE("attach_rationales") {
    auto dataset = small_dataset(4);
    PCoTRecord record;
    record.lecture = "L";
    record.plan = "P";
    for (const auto& q : dataset.questions) record.rationales[q.id] = "R-" + q.id;

    SUBCASE("full coverage attaches everything with no warnings") {
        const auto warnings = attach_rationales(dataset, record);
        CHECK(warnings.empty());
        for (const auto& q : dataset.questions) CHECK(q.rationale == "R-" + q.id);
    }
    SUBCASE("one missing id yields exactly one warning naming it") {
        record.rationales.erase("q2");
        const auto warnings = attach_rationales(dataset, record);
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("q2") != std::string::npos);
    }
    SUBCASE("re-attachment is idempotent") {
        attach_rationales(dataset, record);
        const auto snapshot = dataset.questions;
        attach_rationales(dataset, record);
        for (std::size_t i = 0; i < snapshot.size(); ++i)
            CHECK(dataset.questions[i].rationale == snapshot[i].rationale);
    }
}

TEST_CASE("pcot record file round trip") {
    const std::string path = temp_path("aidr_test_pcot.json");
    PCoTRecord r;
    r.lecture = "L";
    r.plan = "P";
    r.rationales = {{"q0", "R0"}, {"q1", "R1"}};
    r.failures = {{"q2", "timeout"}};
    r.model_name = "gpt-3.5-turbo";
    r.prompt_tokens = 123;
    write_pcot(r, path);
    const auto back = read_pcot(path);
    CHECK(back.lecture == r.lecture);
    CHECK(back.plan == r.plan);
    CHECK(back.rationales == r.rationales);
    CHECK(back.failures == r.failures);
    CHECK(back.model_name == r.model_name);
    CHECK(back.prompt_tokens == r.prompt_tokens);
    std::remove(path.c_str());
}
