#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aidr/dataset.hpp"

namespace aidr {

struct PredictionRecord {
    std::string question_id;
    std::optional<int> predicted_answer;  // nullopt marks an extraction failure
    std::string generated_rationale;
};

struct MetricReport {
    double a_acc = 0.0;
    double bleu1 = 0.0;
    double rouge_l = 0.0;
    double similarity = 0.0;
    std::size_t n_evaluated = 0;
    std::size_t n_extraction_failures = 0;
    std::size_t n_rationale_pairs = 0;  // pairs that entered the text metrics
};

// Lowercase, strip punctuation, split on whitespace. Fixed so scores are
// reproducible bit for bit.
std::vector<std::string> tokenize(const std::string& text);

// Missing predictions and extraction failures count as wrong.
double answer_accuracy(const std::vector<PredictionRecord>& predictions,
                       const std::vector<ReasoningQuestion>& gold);

// Clipped unigram precision times brevity penalty min(1, exp(1 - r/c)).
double bleu1(const std::vector<std::string>& candidate,
             const std::vector<std::string>& reference);

// LCS F1: R = LCS/|ref|, P = LCS/|cand|, F = 2PR/(P+R).
double rouge_l(const std::vector<std::string>& candidate,
               const std::vector<std::string>& reference);

// Cosine similarity of term-frequency vectors over the union vocabulary.
double similarity(const std::vector<std::string>& candidate,
                  const std::vector<std::string>& reference);

// Sentence-level averaging over evaluated pairs; pairs with an empty
// candidate or reference rationale score 0 for the text metrics.
MetricReport evaluate(const std::vector<PredictionRecord>& predictions,
                      const std::vector<ReasoningQuestion>& gold);

// Table-I-shaped rendering, percentages with two decimals, half-to-even.
std::string report_table(const std::vector<MetricReport>& reports,
                         const std::vector<std::string>& labels);

std::string format_percent(double value);

void write_predictions(const std::vector<PredictionRecord>& predictions,
                       const std::string& path);
std::vector<PredictionRecord> read_predictions(const std::string& path);

void write_report(const MetricReport& report, const std::string& path);
MetricReport read_report(const std::string& path);

}  // namespace aidr
