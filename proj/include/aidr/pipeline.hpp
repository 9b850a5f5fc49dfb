#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aidr/dataset.hpp"
#include "aidr/eval.hpp"
#include "aidr/fusion.hpp"
#include "aidr/pcot.hpp"

namespace aidr {

struct SceneSpec {
    std::string name;
    int count = 0;
};

// The four reference scenes and their image counts.
std::vector<SceneSpec> default_scene_specs();

struct FusionConfig {
    std::size_t d = 8;
    std::size_t vocab = 16;
    std::uint64_t seed = 0;
    std::string backend = "toy";  // toy | mock | gold-echo | uniform-random | remote
    int patch_grid = 4;
};

struct TeacherConfig {
    std::string endpoint;
    std::string model = "gpt-3.5-turbo";
    bool mock = false;
    int concurrency = 4;
    int max_tokens = 1024;
};

// Reference training constants, recorded for traceability; nothing trains.
struct ProvenanceConfig {
    int epochs = 30;
    double learning_rate = 5e-5;
    int max_input_tokens = 512;
};

struct RunConfig {
    std::uint64_t seed = 0;
    std::vector<TechnologyProfile> profiles = default_profiles();
    std::vector<SceneSpec> scenes = default_scene_specs();
    int image_width = 16;
    int image_height = 16;
    std::string split_mode = "random";  // random | scene
    TeacherConfig teacher;
    FusionConfig fusion;
    ProvenanceConfig provenance;
};

// Loads and validates a JSON config; unknown keys are rejected by name.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

// Writes one seeded PPM per image into dir/<scene>/<scene>_<index>.ppm.
// Returns relative paths in generation order.
std::vector<std::pair<std::string, std::string>> generate_scene_images(
    const std::string& dir, const std::vector<SceneSpec>& specs, int width, int height,
    std::uint64_t seed);

// Transmits every image in the directory over every profile at nominal SNR
// and appends one JSON line per ChannelOutcome.
void run_simulate(const RunConfig& config, const std::string& scene_dir,
                  const std::string& out_path, const std::string& command_line);

// One question per image: scenarios cycle A-H with seeded severities, the
// perturbed channels carry the image, and the telemetry becomes the context.
DatasetManifest build_dataset(const RunConfig& config, const std::string& scene_dir,
                              std::uint64_t seed);

// Two-stage inference over every question with the configured backend.
std::vector<PredictionRecord> run_inference(const DatasetManifest& dataset,
                                            const FusionConfig& config,
                                            const std::string& scene_root);

struct PipelineArtifacts {
    std::string scene_dir;
    std::string outcomes_path;
    std::string dataset_path;
    std::string pcot_path;
    std::string predictions_path;
    std::string report_path;
    std::string report_md_path;
    MetricReport report;
};

// simulate -> gen-dataset -> teach -> infer -> eval -> report, each stage
// writing its artifact into out_dir before the next consumes it.
PipelineArtifacts run_pipeline(const RunConfig& config, const std::string& out_dir,
                               const std::string& command_line);

}  // namespace aidr
