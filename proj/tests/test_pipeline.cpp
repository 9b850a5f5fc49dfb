#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>

#include "aidr/pipeline.hpp"

using namespace aidr;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

RunConfig tiny_config() {
    RunConfig cfg;
    cfg.seed = 21;
    cfg.scenes = {{"Playroom", 6}, {"Truck", 4}};
    cfg.image_width = 8;
    cfg.image_height = 8;
    cfg.teacher.mock = true;
    cfg.fusion.backend = "gold-echo";
    return cfg;
}

}  // namespace

TEST_CASE("parse_config") {
    SUBCASE("empty object yields defaults") {
        const auto cfg = parse_config("{}");
        CHECK(cfg.seed == 0);
        CHECK(cfg.profiles.size() == 3);
        CHECK(cfg.scenes.size() == 4);
        CHECK(cfg.split_mode == "random");
        CHECK(cfg.fusion.backend == "toy");
        CHECK(cfg.provenance.epochs == 30);
        CHECK(cfg.provenance.learning_rate == 5e-5);
        CHECK(cfg.provenance.max_input_tokens == 512);
    }
    SUBCASE("unknown top-level key rejected by name") {
        CHECK_THROWS_WITH_AS(parse_config(R"({"sede": 3})"),
                             doctest::Contains("unknown key 'sede'"), std::runtime_error);
    }
    SUBCASE("unknown nested key rejected by name") {
        CHECK_THROWS_WITH_AS(parse_config(R"({"teacher": {"modl": "x"}})"),
                             doctest::Contains("unknown key 'modl'"), std::runtime_error);
        CHECK_THROWS_WITH_AS(parse_config(R"({"fusion": {"dd": 4}})"),
                             doctest::Contains("unknown key 'dd'"), std::runtime_error);
    }
    SUBCASE("profiles are parsed and validated") {
        const auto cfg = parse_config(
            R"({"profiles": [{"tech": "WiFi", "throughput_bps": 1e6, "nominal_snr_db": 7.5}]})");
        REQUIRE(cfg.profiles.size() == 1);
        CHECK(cfg.profiles[0].tech == Tech::WiFi);
        CHECK(cfg.profiles[0].throughput_bps == 1e6);
        CHECK(cfg.profiles[0].nominal_snr_db == 7.5);
        CHECK_THROWS_WITH_AS(
            parse_config(
                R"({"profiles": [{"tech": "WiFi", "throughput_bps": 0, "nominal_snr_db": 1}]})"),
            doctest::Contains("throughput_bps"), std::runtime_error);
    }
    SUBCASE("split_mode validated") {
        CHECK(parse_config(R"({"split_mode": "scene"})").split_mode == "scene");
        CHECK_THROWS_WITH_AS(parse_config(R"({"split_mode": "half"})"),
                             doctest::Contains("split_mode"), std::runtime_error);
    }
    SUBCASE("malformed JSON is a config error") {
        CHECK_THROWS_WITH_AS(parse_config("{"), doctest::Contains("parse"),
                             std::runtime_error);
    }
}

TEST_CASE("generate_scene_images") {
    const auto dir = fresh_dir("aidr_test_scenes");
    const std::vector<SceneSpec> specs = {{"Playroom", 3}, {"Truck", 2}};
    const auto images = generate_scene_images(dir, specs, 8, 8, 5);

    REQUIRE(images.size() == 5);
    CHECK(images[0].second == "Playroom/Playroom_0.ppm");
    CHECK(images[4].second == "Truck/Truck_1.ppm");
    for (const auto& [scene, rel] : images) CHECK(fs::exists(fs::path(dir) / rel));

    SUBCASE("same seed regenerates byte-identical files") {
        const std::string before = slurp((fs::path(dir) / images[0].second).string());
        generate_scene_images(dir, specs, 8, 8, 5);
        CHECK(slurp((fs::path(dir) / images[0].second).string()) == before);
    }
    SUBCASE("different seed changes pixel data") {
        const std::string before = slurp((fs::path(dir) / images[0].second).string());
        generate_scene_images(dir, specs, 8, 8, 6);
        CHECK(slurp((fs::path(dir) / images[0].second).string()) != before);
    }
    fs::remove_all(dir);
}

TEST_CASE("run_simulate writes one line per image per profile") {
    const auto dir = fresh_dir("aidr_test_sim");
    RunConfig cfg = tiny_config();
    generate_scene_images(dir + "/scenes", cfg.scenes, 8, 8, cfg.seed);
    const std::string out_path = dir + "/outcomes.jsonl";
    run_simulate(cfg, dir + "/scenes", out_path, "simulate --seed 21");

    std::ifstream in(out_path);
    std::string line;
    std::size_t lines = 0;
    REQUIRE(std::getline(in, line));
    CHECK(line.find("\"format_version\":1") != std::string::npos);
    CHECK(line.find("simulate --seed 21") != std::string::npos);
    while (std::getline(in, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 10 * 3);  // 10 images, 3 technologies
    fs::remove_all(dir);
}

TEST_CASE("build_dataset") {
    const auto dir = fresh_dir("aidr_test_build");
    RunConfig cfg = tiny_config();
    generate_scene_images(dir, cfg.scenes, 8, 8, cfg.seed);
    const auto dataset = build_dataset(cfg, dir, cfg.seed);

    REQUIRE(dataset.questions.size() == 10);
    SUBCASE("causes cycle through the taxonomy in image order") {
        for (std::size_t i = 0; i < dataset.questions.size(); ++i)
            CHECK(static_cast<int>(dataset.questions[i].scenario.cause) ==
                  static_cast<int>(i % 8));
    }
    SUBCASE("answers agree with the gold labels") {
        for (const auto& q : dataset.questions)
            CHECK(q.answer == gold_label(q.scenario));
    }
    SUBCASE("severities land in the sampling interval") {
        for (const auto& q : dataset.questions) {
            CHECK(q.scenario.severity >= 0.25);
            CHECK(q.scenario.severity <= 1.0);
        }
    }
    SUBCASE("ids are unique and contexts carry telemetry") {
        std::set<std::string> ids;
        for (const auto& q : dataset.questions) {
            ids.insert(q.id);
            CHECK(q.context.find("WiFi:") != std::string::npos);
            CHECK(q.context.find("PSNR") != std::string::npos);
        }
        CHECK(ids.size() == dataset.questions.size());
    }
    SUBCASE("identical seed reproduces the dataset exactly") {
        const auto again = build_dataset(cfg, dir, cfg.seed);
        REQUIRE(again.questions.size() == dataset.questions.size());
        for (std::size_t i = 0; i < dataset.questions.size(); ++i) {
            CHECK(again.questions[i].context == dataset.questions[i].context);
            CHECK(again.questions[i].scenario.severity ==
                  dataset.questions[i].scenario.severity);
            CHECK(again.questions[i].split == dataset.questions[i].split);
        }
    }
    SUBCASE("scene split mode respects scene assignment") {
        cfg.split_mode = "scene";
        const auto by_scene = build_dataset(cfg, dir, cfg.seed);
        for (const auto& q : by_scene.questions) {
            if (q.scene == "Playroom") CHECK(q.split == Split::Train);
            if (q.scene == "Truck") CHECK(q.split == Split::Test);
        }
    }
    SUBCASE("missing scene directory rejected") {
        CHECK_THROWS_WITH_AS(build_dataset(cfg, dir + "/nowhere", 1),
                             doctest::Contains("scene directory"), std::runtime_error);
    }
    fs::remove_all(dir);
}

TEST_CASE("run_inference backends") {
    const auto dir = fresh_dir("aidr_test_infer");
    RunConfig cfg = tiny_config();
    generate_scene_images(dir, cfg.scenes, 8, 8, cfg.seed);
    auto dataset = build_dataset(cfg, dir, cfg.seed);
    for (auto& q : dataset.questions) q.rationale = "gold rationale for " + q.id;

    SUBCASE("gold-echo scores perfect accuracy") {
        FusionConfig fc = cfg.fusion;
        fc.backend = "gold-echo";
        const auto preds = run_inference(dataset, fc, dir);
        CHECK(answer_accuracy(preds, dataset.questions) == 1.0);
        CHECK(preds[0].generated_rationale == "gold rationale for q0");
    }
    SUBCASE("mock backend always answers option 0") {
        FusionConfig fc = cfg.fusion;
        fc.backend = "mock";
        const auto preds = run_inference(dataset, fc, dir);
        for (const auto& p : preds) {
            REQUIRE(p.predicted_answer.has_value());
            CHECK(*p.predicted_answer == 0);
        }
    }
    SUBCASE("uniform-random is seed deterministic and in range") {
        FusionConfig fc = cfg.fusion;
        fc.backend = "uniform-random";
        fc.seed = 77;
        const auto a = run_inference(dataset, fc, dir);
        const auto b = run_inference(dataset, fc, dir);
        for (std::size_t i = 0; i < a.size(); ++i) {
            REQUIRE(a[i].predicted_answer.has_value());
            CHECK(*a[i].predicted_answer >= 0);
            CHECK(*a[i].predicted_answer <= 7);
            CHECK(a[i].predicted_answer == b[i].predicted_answer);
        }
    }
    SUBCASE("toy backend extracts a valid option for every question") {
        FusionConfig fc = cfg.fusion;
        fc.backend = "toy";
        fc.seed = 3;
        const auto preds = run_inference(dataset, fc, dir);
        REQUIRE(preds.size() == dataset.questions.size());
        for (const auto& p : preds) {
            REQUIRE(p.predicted_answer.has_value());
            CHECK(*p.predicted_answer >= 0);
            CHECK(*p.predicted_answer <= 7);
            CHECK_FALSE(p.generated_rationale.empty());
        }
    }
    SUBCASE("unknown backend rejected") {
        FusionConfig fc = cfg.fusion;
        fc.backend = "oracle";
        CHECK_THROWS_WITH_AS(run_inference(dataset, fc, dir),
                             doctest::Contains("unknown inference backend"),
                             std::runtime_error);
    }
    fs::remove_all(dir);
}

TEST_CASE("run_pipeline with the mock teacher") {
    const auto out_a = fresh_dir("aidr_test_pipe_a");
    RunConfig cfg = tiny_config();

    const auto artifacts = run_pipeline(cfg, out_a, "pipeline --seed 21");

    SUBCASE("all artifacts exist") {
        CHECK(fs::exists(artifacts.outcomes_path));
        CHECK(fs::exists(artifacts.dataset_path));
        CHECK(fs::exists(artifacts.pcot_path));
        CHECK(fs::exists(artifacts.predictions_path));
        CHECK(fs::exists(artifacts.report_path));
        CHECK(fs::exists(artifacts.report_md_path));
    }
    SUBCASE("gold-echo run is perfect on answers and rationales") {
        CHECK(artifacts.report.a_acc == 1.0);
        CHECK(artifacts.report.n_evaluated == 10);
        CHECK(artifacts.report.bleu1 == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("dataset carries the mock rationales") {
        const auto dataset = read_dataset(artifacts.dataset_path);
        for (const auto& q : dataset.questions) CHECK(q.rationale == "R-" + q.id);
    }
    SUBCASE("identical config reruns byte-identically") {
        const auto out_b = fresh_dir("aidr_test_pipe_b");
        const auto again = run_pipeline(cfg, out_b, "pipeline --seed 21");
        CHECK(slurp(artifacts.dataset_path) == slurp(again.dataset_path));
        CHECK(slurp(artifacts.outcomes_path) == slurp(again.outcomes_path));
        CHECK(slurp(artifacts.pcot_path) == slurp(again.pcot_path));
        CHECK(slurp(artifacts.predictions_path) == slurp(again.predictions_path));
        CHECK(slurp(artifacts.report_path) == slurp(again.report_path));
        CHECK(slurp(artifacts.report_md_path) == slurp(again.report_md_path));
        fs::remove_all(out_b);
    }
    SUBCASE("failures name the stage") {
        RunConfig bad = cfg;
        bad.teacher.mock = false;
        bad.teacher.endpoint = "";
        const auto out_c = fresh_dir("aidr_test_pipe_c");
        CHECK_THROWS_WITH_AS(run_pipeline(bad, out_c, "pipeline"),
                             doctest::Contains("stage 'teach'"), std::runtime_error);
        fs::remove_all(out_c);
    }
    fs::remove_all(out_a);
}
