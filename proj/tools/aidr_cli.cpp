#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "aidr/pipeline.hpp"

namespace fs = std::filesystem;
using namespace aidr;

namespace {

std::string join_args(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += " ";
        out += argv[i];
    }
    return out;
}

// Creates synthetic scene images when the directory does not exist yet.
void ensure_scenes(const std::string& dir, const RunConfig& config, int count) {
    if (fs::is_directory(dir)) return;
    std::vector<SceneSpec> specs = config.scenes;
    if (count > 0) {
        // Distribute an explicit count round-robin across the scene names.
        for (auto& s : specs) s.count = 0;
        for (int i = 0; i < count; ++i) specs[i % specs.size()].count++;
    }
    generate_scene_images(dir, specs, config.image_width, config.image_height, config.seed);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"6G edge-AI degradation reasoning pipeline"};
    app.require_subcommand(1);

    std::string config_path, out_path, scenes_dir, dataset_path, predictions_path;
    std::string gold_path, endpoint, model = "gpt-3.5-turbo", backend = "toy";
    std::string split_filter, report_in, report_format = "markdown", report_label = "run";
    std::uint64_t seed = 0;
    bool seed_given = false, mock = false, verbose = false;
    int count = 0, concurrency = 4;
    std::string split_mode;

    app.add_option("--config", config_path, "JSON run configuration")->capture_default_str();
    app.add_flag("--verbose", verbose, "Verbose progress output");
    auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides config)");
    app.add_option("--out", out_path, "Output file or directory");

    auto* cmd_simulate = app.add_subcommand("simulate", "Transmit all scene images over all channels");
    cmd_simulate->add_option("--scenes", scenes_dir, "Scene image directory")->required();

    auto* cmd_gen = app.add_subcommand("gen-dataset", "Build the reasoning question dataset");
    cmd_gen->add_option("--scenes", scenes_dir, "Scene image directory (synthesized if absent)")
        ->required();
    cmd_gen->add_option("--count", count, "Synthetic image count (default: reference scene counts)");
    cmd_gen->add_option("--split", split_mode, "Splitting strategy: random | scene");

    auto* cmd_teach = app.add_subcommand("teach", "Generate PCoT rationales with the teacher");
    cmd_teach->add_option("--dataset", dataset_path, "Dataset file")->required();
    cmd_teach->add_option("--endpoint", endpoint, "OpenAI-compatible endpoint URL");
    cmd_teach->add_option("--model", model, "Teacher model name");
    cmd_teach->add_option("--concurrency", concurrency, "Max in-flight requests");
    cmd_teach->add_flag("--mock", mock, "Use the deterministic offline backend");

    auto* cmd_infer = app.add_subcommand("infer", "Two-stage rationale + answer inference");
    cmd_infer->add_option("--dataset", dataset_path, "Dataset file")->required();
    cmd_infer->add_option("--backend", backend, "toy | mock | gold-echo | uniform-random");
    cmd_infer->add_option("--scenes", scenes_dir, "Scene image root for vision features");

    auto* cmd_eval = app.add_subcommand("eval", "Score predictions against gold data");
    cmd_eval->add_option("--predictions", predictions_path, "Predictions JSONL")->required();
    cmd_eval->add_option("--gold", gold_path, "Gold dataset file")->required();
    cmd_eval->add_option("--split", split_filter, "Restrict to one split (train|val|test)");

    auto* cmd_report = app.add_subcommand("report", "Render a metric report as a table");
    cmd_report->add_option("--in", report_in, "Report JSON file")->required();
    cmd_report->add_option("--format", report_format, "Output format (markdown)");
    cmd_report->add_option("--label", report_label, "Row label");

    auto* cmd_pipe = app.add_subcommand("pipeline", "Run every stage end to end");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }
    seed_given = seed_opt->count() > 0;

    try {
        RunConfig config;
        if (!config_path.empty()) config = load_config(config_path);
        if (seed_given) config.seed = seed;
        const std::string command_line = join_args(argc, argv);

        if (cmd_simulate->parsed()) {
            if (out_path.empty()) out_path = "outcomes.jsonl";
            if (!fs::is_directory(scenes_dir)) {
                std::cerr << "error: scene directory not found: " << scenes_dir << "\n";
                return 2;
            }
            run_simulate(config, scenes_dir, out_path, command_line);
            if (verbose) std::cerr << "wrote " << out_path << "\n";
        } else if (cmd_gen->parsed()) {
            if (out_path.empty()) out_path = "dataset.json";
            if (!split_mode.empty()) {
                if (split_mode != "random" && split_mode != "scene") {
                    std::cerr << "error: --split must be 'random' or 'scene'\n";
                    return 2;
                }
                config.split_mode = split_mode;
            }
            ensure_scenes(scenes_dir, config, count);
            const DatasetManifest manifest = build_dataset(config, scenes_dir, config.seed);
            write_dataset(manifest, out_path);
            if (verbose) {
                const auto counts = manifest.split_counts();
                std::cerr << manifest.questions.size() << " questions: train "
                          << counts.at(Split::Train) << ", val " << counts.at(Split::Val)
                          << ", test " << counts.at(Split::Test) << "\n";
            }
        } else if (cmd_teach->parsed()) {
            if (out_path.empty()) out_path = "pcot.json";
            DatasetManifest dataset = read_dataset(dataset_path);
            TeacherOptions opts;
            opts.model = model;
            opts.concurrency = concurrency;
            opts.jitter_seed = config.seed;
            opts.checkpoint_path = out_path + ".checkpoint";
            PCoTRecord record;
            if (mock) {
                opts.clock = []() { return std::int64_t{0}; };
                MockBackend be;
                record = generate_pcot(dataset, be, opts);
            } else {
                if (endpoint.empty()) {
                    std::cerr << "error: teach requires --endpoint URL or --mock\n";
                    return 2;
                }
                HttpBackend be(endpoint);
                record = generate_pcot(dataset, be, opts);
            }
            write_pcot(record, out_path);
            const auto warnings = attach_rationales(dataset, record);
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
            write_dataset(dataset, dataset_path);
            if (verbose)
                std::cerr << record.rationales.size() << " rationales, "
                          << record.failures.size() << " failures\n";
        } else if (cmd_infer->parsed()) {
            if (out_path.empty()) out_path = "predictions.jsonl";
            const DatasetManifest dataset = read_dataset(dataset_path);
            FusionConfig fusion = config.fusion;
            fusion.backend = backend;
            if (seed_given || fusion.seed == 0) fusion.seed = config.seed;
            const auto predictions = run_inference(dataset, fusion, scenes_dir);
            write_predictions(predictions, out_path);
            if (verbose) std::cerr << predictions.size() << " predictions\n";
        } else if (cmd_eval->parsed()) {
            if (out_path.empty()) out_path = "report.json";
            const auto predictions = read_predictions(predictions_path);
            DatasetManifest gold = read_dataset(gold_path);
            std::vector<ReasoningQuestion> questions;
            if (split_filter.empty()) {
                questions = gold.questions;
            } else {
                const Split want = split_from_name(split_filter);
                for (auto& q : gold.questions)
                    if (q.split == want) questions.push_back(std::move(q));
            }
            const MetricReport report = evaluate(predictions, questions);
            write_report(report, out_path);
            std::cout << report_table({report}, {report_label});
        } else if (cmd_report->parsed()) {
            if (report_format != "markdown") {
                std::cerr << "error: unsupported report format '" << report_format << "'\n";
                return 2;
            }
            const MetricReport report = read_report(report_in);
            const std::string table = report_table({report}, {report_label});
            if (out_path.empty()) {
                std::cout << table;
            } else {
                std::ofstream out(out_path, std::ios::binary);
                out << table;
            }
        } else if (cmd_pipe->parsed()) {
            if (out_path.empty()) out_path = "pipeline_out";
            const PipelineArtifacts artifacts = run_pipeline(config, out_path, command_line);
            std::cout << report_table({artifacts.report}, {config.fusion.backend});
            if (verbose) std::cerr << "artifacts in " << out_path << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        const std::string what = e.what();
        std::cerr << "error: " << what << "\n";
        // Configuration problems are usage errors.
        if (what.rfind("config", 0) == 0 || what.find("unknown key") != std::string::npos)
            return 2;
        return 1;
    }
}
