#include "aidr/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace aidr {

std::vector<SceneSpec> default_scene_specs() {
    return {{"Playroom", 900}, {"DrJohnson", 1052}, {"Truck", 1004}, {"Train", 1204}};
}

namespace {

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw std::runtime_error("config: unknown key '" + key + "' in " + where);
    }
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config parse error: ") + e.what());
    }
    reject_unknown_keys(j, {"seed", "profiles", "scenes", "image_width", "image_height",
                            "split_mode", "teacher", "fusion", "provenance"},
                        "top level");

    RunConfig cfg;
    cfg.seed = j.value("seed", 0ull);
    if (j.contains("profiles")) {
        cfg.profiles.clear();
        for (const auto& pj : j.at("profiles")) {
            reject_unknown_keys(pj, {"tech", "throughput_bps", "nominal_snr_db", "label"},
                                "profiles[]");
            TechnologyProfile p;
            p.tech = tech_from_name(pj.at("tech").get<std::string>());
            p.throughput_bps = pj.at("throughput_bps").get<double>();
            p.nominal_snr_db = pj.at("nominal_snr_db").get<double>();
            p.label = pj.value("label", std::string(tech_name(p.tech)));
            if (p.throughput_bps <= 0)
                throw std::runtime_error("config: throughput_bps must be positive");
            cfg.profiles.push_back(std::move(p));
        }
    }
    if (j.contains("scenes")) {
        cfg.scenes.clear();
        for (const auto& sj : j.at("scenes")) {
            reject_unknown_keys(sj, {"name", "count"}, "scenes[]");
            cfg.scenes.push_back({sj.at("name").get<std::string>(), sj.at("count").get<int>()});
        }
    }
    cfg.image_width = j.value("image_width", 16);
    cfg.image_height = j.value("image_height", 16);
    cfg.split_mode = j.value("split_mode", std::string("random"));
    if (cfg.split_mode != "random" && cfg.split_mode != "scene")
        throw std::runtime_error("config: split_mode must be 'random' or 'scene'");
    if (j.contains("teacher")) {
        const auto& tj = j.at("teacher");
        reject_unknown_keys(tj, {"endpoint", "model", "mock", "concurrency", "max_tokens"},
                            "teacher");
        cfg.teacher.endpoint = tj.value("endpoint", "");
        cfg.teacher.model = tj.value("model", cfg.teacher.model);
        cfg.teacher.mock = tj.value("mock", false);
        cfg.teacher.concurrency = tj.value("concurrency", 4);
        cfg.teacher.max_tokens = tj.value("max_tokens", 1024);
    }
    if (j.contains("fusion")) {
        const auto& fj = j.at("fusion");
        reject_unknown_keys(fj, {"d", "vocab", "seed", "backend", "patch_grid"}, "fusion");
        cfg.fusion.d = fj.value("d", cfg.fusion.d);
        cfg.fusion.vocab = fj.value("vocab", cfg.fusion.vocab);
        cfg.fusion.seed = fj.value("seed", cfg.fusion.seed);
        cfg.fusion.backend = fj.value("backend", cfg.fusion.backend);
        cfg.fusion.patch_grid = fj.value("patch_grid", cfg.fusion.patch_grid);
    }
    if (j.contains("provenance")) {
        const auto& pj = j.at("provenance");
        reject_unknown_keys(pj, {"epochs", "learning_rate", "max_input_tokens"}, "provenance");
        cfg.provenance.epochs = pj.value("epochs", 30);
        cfg.provenance.learning_rate = pj.value("learning_rate", 5e-5);
        cfg.provenance.max_input_tokens = pj.value("max_input_tokens", 512);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

std::vector<std::pair<std::string, std::string>> generate_scene_images(
    const std::string& dir, const std::vector<SceneSpec>& specs, int width, int height,
    std::uint64_t seed) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& spec : specs) {
        fs::create_directories(fs::path(dir) / spec.name);
        for (int i = 0; i < spec.count; ++i) {
            const std::uint64_t image_seed =
                derive_seed(seed, spec.name, std::to_string(i), Tech::WiFi);
            const Image img = synthetic_image(width, height, image_seed);
            const std::string rel =
                spec.name + "/" + spec.name + "_" + std::to_string(i) + ".ppm";
            save_ppm(img, (fs::path(dir) / rel).string());
            out.emplace_back(spec.name, rel);
        }
    }
    return out;
}

namespace {

std::vector<std::pair<std::string, std::string>> list_scene_images(
    const std::string& scene_dir) {
    // <scene>/<file> layout; files sorted per scene for stable ordering.
    std::vector<std::pair<std::string, std::string>> out;
    std::vector<std::string> scenes;
    for (const auto& entry : fs::directory_iterator(scene_dir))
        if (entry.is_directory()) scenes.push_back(entry.path().filename().string());
    std::sort(scenes.begin(), scenes.end());
    for (const auto& scene : scenes) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(fs::path(scene_dir) / scene)) {
            const auto ext = entry.path().extension().string();
            if (ext == ".ppm" || ext == ".png")
                files.push_back(entry.path().filename().string());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) out.emplace_back(scene, scene + "/" + f);
    }
    return out;
}

ordered_json outcome_to_json(const ChannelOutcome& o) {
    ordered_json j;
    j["tech"] = tech_name(o.tech);
    j["snr_db"] = o.snr_db;
    j["ber"] = o.ber;
    j["latency_s"] = o.latency_s;
    j["seed"] = o.seed;
    j["image_id"] = o.image_id;
    return j;
}

}  // namespace

void run_simulate(const RunConfig& config, const std::string& scene_dir,
                  const std::string& out_path, const std::string& command_line) {
    if (!fs::is_directory(scene_dir))
        throw std::runtime_error("scene directory not found: " + scene_dir);
    const auto images = list_scene_images(scene_dir);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write outcomes: " + out_path);

    ordered_json header;
    header["format_version"] = 1;
    header["command"] = command_line;
    out << header.dump() << "\n";

    for (const auto& [scene, rel] : images) {
        const Image img = load_image((fs::path(scene_dir) / rel).string());
        for (const auto& profile : config.profiles) {
            const std::uint64_t seed = derive_seed(config.seed, "simulate", rel, profile.tech);
            const ChannelOutcome o = transmit(img, profile, profile.nominal_snr_db, seed, rel);
            out << outcome_to_json(o).dump() << "\n";
        }
    }
}

DatasetManifest build_dataset(const RunConfig& config, const std::string& scene_dir,
                              std::uint64_t seed) {
    if (!fs::is_directory(scene_dir))
        throw std::runtime_error("scene directory not found: " + scene_dir);
    const auto images = list_scene_images(scene_dir);
    if (images.empty()) throw std::runtime_error("no images found in " + scene_dir);

    const auto& causes = taxonomy();
    std::mt19937_64 severity_rng(seed ^ 0x5e7e11ull);
    std::uniform_real_distribution<double> severity_dist(0.25, 1.0);

    std::vector<ReasoningQuestion> questions;
    questions.reserve(images.size());
    std::size_t index = 0;
    for (const auto& [scene, rel] : images) {
        const Cause cause = causes[index % causes.size()].code;
        const double severity = severity_dist(severity_rng);
        const std::string qid = "q" + std::to_string(index);
        const DegradationScenario scenario =
            make_scenario(cause, severity, seed, scene, qid);
        const InjectionResult injected = inject(scenario, config.profiles);

        const Image img = load_image((fs::path(scene_dir) / rel).string());
        std::vector<ChannelOutcome> telemetry;
        QualityReport quality;
        quality.psnr_db = 99.0;
        for (const auto& profile : injected.profiles) {
            const std::uint64_t tx_seed = derive_seed(seed, qid, rel, profile.tech);
            ChannelOutcome o =
                transmit(img, profile, profile.nominal_snr_db, tx_seed, rel);
            const Image received =
                deserialize_image(o.received_bits, img.width, img.height);
            const QualityReport q = measure_quality(img, received);
            if (q.psnr_db <= quality.psnr_db) {
                const auto keep = quality.per_tech_ber;
                quality = q;
                quality.per_tech_ber = keep;
            }
            quality.per_tech_ber[profile.tech] = o.ber;
            telemetry.push_back(std::move(o));
        }

        ReasoningQuestion q = build_question(scenario, telemetry, quality, rel);
        q.scene = scene;
        questions.push_back(std::move(q));
        ++index;
    }

    if (config.split_mode == "scene") return split_by_scene(std::move(questions));
    return split_random(std::move(questions), seed);
}

namespace {

class GoldEchoBackend : public ReasoningBackend {
public:
    GoldEchoBackend(const ReasoningQuestion& q, bool answer_mode)
        : q_(q), answer_mode_(answer_mode) {}
    std::string generate(const std::string&, const Matrix&) override {
        if (answer_mode_)
            return std::string("(") + static_cast<char>('A' + q_.answer) + ")";
        return q_.rationale.empty() ? "gold rationale unavailable" : q_.rationale;
    }

private:
    const ReasoningQuestion& q_;
    bool answer_mode_;
};

}  // namespace

std::vector<PredictionRecord> run_inference(const DatasetManifest& dataset,
                                            const FusionConfig& config,
                                            const std::string& scene_root) {
    std::vector<PredictionRecord> predictions;
    predictions.reserve(dataset.questions.size());

    std::mt19937_64 random_rng(config.seed ^ 0x4a5dull);
    std::uniform_int_distribution<int> option_dist(0, 7);

    ToyBackend toy_rationale(config.d, config.vocab, config.seed, ToyBackend::Mode::Rationale);
    ToyBackend toy_answer(config.d, config.vocab, config.seed ^ 0xa5ull,
                          ToyBackend::Mode::Answer);

    const Matrix no_features(1, config.d);  // used when images are not loaded

    for (const auto& q : dataset.questions) {
        const std::string language_input = q.question + "\n" + q.context;
        PredictionRecord p;
        p.question_id = q.id;

        try {
            TwoStageResult result;
            if (config.backend == "gold-echo") {
                GoldEchoBackend rationale(q, false), answer(q, true);
                result = two_stage_infer(language_input, no_features, rationale, answer);
            } else if (config.backend == "uniform-random") {
                FixedBackend rationale("");
                FixedBackend answer(std::string("(") +
                                    static_cast<char>('A' + option_dist(random_rng)) + ")");
                result = two_stage_infer(language_input, no_features, rationale, answer);
            } else if (config.backend == "mock") {
                FixedBackend rationale("R-" + q.id);
                FixedBackend answer("(A)");
                result = two_stage_infer(language_input, no_features, rationale, answer);
            } else if (config.backend == "toy") {
                Matrix features = no_features;
                if (!scene_root.empty()) {
                    const fs::path img_path = fs::path(scene_root) / q.image_ref;
                    if (fs::exists(img_path)) {
                        features = patch_features(load_image(img_path.string()),
                                                  config.patch_grid, config.d, config.seed);
                    }
                }
                result = two_stage_infer(language_input, features, toy_rationale, toy_answer);
            } else {
                throw std::runtime_error("unknown inference backend: " + config.backend);
            }
            p.predicted_answer = result.answer;
            p.generated_rationale = result.rationale;
        } catch (const ExtractionError& e) {
            p.predicted_answer.reset();
            p.generated_rationale = e.raw_text;
        }
        predictions.push_back(std::move(p));
    }
    return predictions;
}

PipelineArtifacts run_pipeline(const RunConfig& config, const std::string& out_dir,
                               const std::string& command_line) {
    fs::create_directories(out_dir);
    PipelineArtifacts artifacts;
    artifacts.scene_dir = (fs::path(out_dir) / "scenes").string();
    artifacts.outcomes_path = (fs::path(out_dir) / "outcomes.jsonl").string();
    artifacts.dataset_path = (fs::path(out_dir) / "dataset.json").string();
    artifacts.pcot_path = (fs::path(out_dir) / "pcot.json").string();
    artifacts.predictions_path = (fs::path(out_dir) / "predictions.jsonl").string();
    artifacts.report_path = (fs::path(out_dir) / "report.json").string();
    artifacts.report_md_path = (fs::path(out_dir) / "report.md").string();

    std::string stage = "simulate";
    try {
        if (!fs::exists(fs::path(artifacts.scene_dir) / config.scenes.front().name))
            generate_scene_images(artifacts.scene_dir, config.scenes, config.image_width,
                                  config.image_height, config.seed);
        run_simulate(config, artifacts.scene_dir, artifacts.outcomes_path, command_line);

        stage = "gen-dataset";
        DatasetManifest dataset = build_dataset(config, artifacts.scene_dir, config.seed);
        write_dataset(dataset, artifacts.dataset_path);

        stage = "teach";
        TeacherOptions teach_opts;
        teach_opts.model = config.teacher.model;
        teach_opts.concurrency = config.teacher.concurrency;
        teach_opts.max_tokens = config.teacher.max_tokens;
        teach_opts.jitter_seed = config.seed;
        PCoTRecord record;
        if (config.teacher.mock) {
            teach_opts.clock = []() { return std::int64_t{0}; };
            MockBackend backend;
            record = generate_pcot(dataset, backend, teach_opts);
        } else {
            if (config.teacher.endpoint.empty())
                throw std::runtime_error(
                    "teach: no endpoint configured and mock mode not requested");
            HttpBackend backend(config.teacher.endpoint);
            teach_opts.checkpoint_path = artifacts.pcot_path + ".checkpoint";
            record = generate_pcot(dataset, backend, teach_opts);
        }
        write_pcot(record, artifacts.pcot_path);
        attach_rationales(dataset, record);
        write_dataset(dataset, artifacts.dataset_path);

        stage = "infer";
        FusionConfig fusion = config.fusion;
        if (fusion.seed == 0) fusion.seed = config.seed;
        const auto predictions = run_inference(dataset, fusion, artifacts.scene_dir);
        write_predictions(predictions, artifacts.predictions_path);

        stage = "eval";
        artifacts.report = evaluate(predictions, dataset.questions);
        write_report(artifacts.report, artifacts.report_path);

        stage = "report";
        const std::string table = report_table({artifacts.report}, {fusion.backend});
        std::ofstream md(artifacts.report_md_path, std::ios::binary);
        if (!md) throw std::runtime_error("cannot write " + artifacts.report_md_path);
        md << table;
    } catch (const std::exception& e) {
        throw std::runtime_error("pipeline stage '" + stage + "' failed: " + e.what());
    }
    return artifacts;
}

}  // namespace aidr
