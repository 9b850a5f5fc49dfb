#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aidr/degradation.hpp"

namespace aidr {

inline constexpr const char* kQuestionStem =
    "Which of the following is most likely to cause degradation in 3D rendering performance?";

inline constexpr int kDatasetFormatVersion = 1;

enum class Split { Train, Val, Test, Unassigned };

const char* split_name(Split s);
Split split_from_name(const std::string& name);

// One ScienceQA-style record. Option letters appear only in rendered
// text; the stored answer is a 0-based index.
struct ReasoningQuestion {
    std::string id;
    std::string question;  // always the canonical stem
    std::vector<std::string> choices;  // 8 option texts
    int answer = 0;
    std::string context;    // rendered mATs telemetry
    std::string image_ref;  // relative path
    std::string scene;
    Split split = Split::Unassigned;
    std::string rationale;  // empty until a teacher run attaches one
    DegradationScenario scenario;
};

struct DatasetManifest {
    std::vector<ReasoningQuestion> questions;
    std::uint64_t seed = 0;
    int format_version = kDatasetFormatVersion;

    std::map<Split, std::size_t> split_counts() const;
};

// Renders the eight option texts "(A) ..." .. "(H) ...".
std::vector<std::string> option_texts();

ReasoningQuestion build_question(const DegradationScenario& scenario,
                                 const std::vector<ChannelOutcome>& telemetry,
                                 const QualityReport& quality,
                                 const std::string& image_ref);

// Data Splitting I: deterministic shuffle, 3:1:1 with floor(n/5) to val
// and test and the remainder to train.
DatasetManifest split_random(std::vector<ReasoningQuestion> questions, std::uint64_t seed);

// Data Splitting II: Playroom+DrJohnson -> train, Train -> val, Truck -> test.
DatasetManifest split_by_scene(std::vector<ReasoningQuestion> questions);

void write_dataset(const DatasetManifest& manifest, const std::string& path);
DatasetManifest read_dataset(const std::string& path);

// Scenario batch files (JSON array of DegradationScenario).
void write_scenarios(const std::vector<DegradationScenario>& scenarios, const std::string& path);
std::vector<DegradationScenario> read_scenarios(const std::string& path);

}  // namespace aidr
