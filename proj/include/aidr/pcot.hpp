#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "aidr/dataset.hpp"
#include "aidr/llm_client.hpp"

namespace aidr {

// Three-step zero-shot plan-based CoT instructions. Golden-tested; do not
// reword.
inline constexpr const char* kLectureInstruction =
    "Based on the problems above, please provide a general lecture about the current "
    "multi-access technologies for image transmission and the 3D Gaussian Splatting "
    "model for the 3D rendering task, using no more than three sentences.";

inline constexpr const char* kPlanInstruction =
    "Based on the lecture and problems above, please try to understand these issues "
    "and devise a general and brief step-by-step plan to solve these problems, "
    "starting with 1, 2, 3 ....";

inline constexpr const char* kRationaleInstruction =
    "Based on the lecture, plan, and problems above, please execute the plan and "
    "then reason the problem step by step, starting with 1, 2, 3 ....";

struct QaPair {
    std::string question;  // question text including context and options
    std::string answer;    // rendered gold answer, e.g. "(A) ..."
};

QaPair qa_pair_from_question(const ReasoningQuestion& q);

std::string build_lecture_prompt(const std::vector<QaPair>& qa_pairs);
std::string build_plan_prompt(const std::string& lecture, const std::vector<QaPair>& qa_pairs);
std::string build_rationale_prompt(const std::string& lecture, const std::string& plan,
                                   const QaPair& qa);

struct PCoTRecord {
    std::string lecture;
    std::string plan;
    std::map<std::string, std::string> rationales;  // question id -> text
    std::map<std::string, std::string> failures;    // question id -> error
    std::string model_name;
    std::int64_t started_at_unix = 0;
    std::int64_t finished_at_unix = 0;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct TeacherOptions {
    std::string model = "gpt-3.5-turbo";
    double temperature = 0.0;
    int max_tokens = 1024;
    int concurrency = 4;
    int max_retries = 3;
    int backoff_base_ms = 250;  // exponential with jitter
    std::uint64_t jitter_seed = 0;
    std::string checkpoint_path;  // empty disables checkpointing
    // Clock is injectable so mock runs are byte-reproducible.
    std::function<std::int64_t()> clock;
    // How many QA pairs to show in the shared lecture/plan steps.
    std::size_t lecture_qa_pairs = 4;
};

// Runs Steps 1-2 once for the dataset and Step 3 per question. Transient
// failures retry with backoff and then land in record.failures; an
// AuthError aborts the run. An existing checkpoint is resumed: completed
// question ids are not re-requested.
PCoTRecord generate_pcot(const DatasetManifest& dataset, LlmBackend& backend,
                         const TeacherOptions& options);

// Fills each question's rationale from the record; returns one warning per
// question id the record does not cover. Idempotent.
std::vector<std::string> attach_rationales(DatasetManifest& dataset, const PCoTRecord& record);

void write_pcot(const PCoTRecord& record, const std::string& path);
PCoTRecord read_pcot(const std::string& path);

}  // namespace aidr
