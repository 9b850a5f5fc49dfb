#include "aidr/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cfenv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "json.hpp"

using nlohmann::json;
using nlohmann::ordered_json;

namespace aidr {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto u = static_cast<unsigned char>(ch);
        if (std::isalnum(u)) {
            current += static_cast<char>(std::tolower(u));
        } else if (std::isspace(u)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        }
        // punctuation is dropped entirely
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

double answer_accuracy(const std::vector<PredictionRecord>& predictions,
                       const std::vector<ReasoningQuestion>& gold) {
    if (gold.empty()) throw std::invalid_argument("answer_accuracy: empty gold set");
    std::map<std::string, const PredictionRecord*> by_id;
    for (const auto& p : predictions)
        if (!by_id.emplace(p.question_id, &p).second)
            throw std::invalid_argument("answer_accuracy: duplicate prediction id '" +
                                        p.question_id + "'");
    std::size_t correct = 0;
    for (const auto& q : gold) {
        auto it = by_id.find(q.id);
        if (it == by_id.end()) continue;  // missing counts as wrong
        const auto& pred = it->second->predicted_answer;
        if (pred && *pred == q.answer) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(gold.size());
}

double bleu1(const std::vector<std::string>& candidate,
             const std::vector<std::string>& reference) {
    if (reference.empty()) throw std::invalid_argument("bleu1: empty reference");
    if (candidate.empty()) return 0.0;

    std::map<std::string, std::size_t> ref_counts;
    for (const auto& t : reference) ref_counts[t]++;

    std::map<std::string, std::size_t> cand_counts;
    for (const auto& t : candidate) cand_counts[t]++;

    std::size_t clipped = 0;
    for (const auto& [token, count] : cand_counts) {
        auto it = ref_counts.find(token);
        if (it != ref_counts.end()) clipped += std::min(count, it->second);
    }
    const double precision = static_cast<double>(clipped) / candidate.size();
    const double bp = std::min(
        1.0, std::exp(1.0 - static_cast<double>(reference.size()) / candidate.size()));
    return precision * bp;
}

double rouge_l(const std::vector<std::string>& candidate,
               const std::vector<std::string>& reference) {
    if (reference.empty()) throw std::invalid_argument("rouge_l: empty reference");
    if (candidate.empty()) return 0.0;

    const std::size_t n = candidate.size(), m = reference.size();
    std::vector<std::size_t> prev(m + 1, 0), curr(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            if (candidate[i - 1] == reference[j - 1])
                curr[j] = prev[j - 1] + 1;
            else
                curr[j] = std::max(prev[j], curr[j - 1]);
        }
        std::swap(prev, curr);
    }
    const std::size_t lcs = prev[m];
    if (lcs == 0) return 0.0;
    const double recall = static_cast<double>(lcs) / m;
    const double precision = static_cast<double>(lcs) / n;
    return 2.0 * precision * recall / (precision + recall);
}

double similarity(const std::vector<std::string>& candidate,
                  const std::vector<std::string>& reference) {
    if (candidate.empty() || reference.empty())
        throw std::invalid_argument("similarity: empty token sequence");

    std::map<std::string, double> cand_tf, ref_tf;
    for (const auto& t : candidate) cand_tf[t] += 1.0;
    for (const auto& t : reference) ref_tf[t] += 1.0;

    double dot = 0.0, norm_c = 0.0, norm_r = 0.0;
    for (const auto& [token, c] : cand_tf) {
        norm_c += c * c;
        auto it = ref_tf.find(token);
        if (it != ref_tf.end()) dot += c * it->second;
    }
    for (const auto& [token, r] : ref_tf) norm_r += r * r;
    const double cosine = dot / (std::sqrt(norm_c) * std::sqrt(norm_r));
    return std::clamp(cosine, 0.0, 1.0);
}

MetricReport evaluate(const std::vector<PredictionRecord>& predictions,
                      const std::vector<ReasoningQuestion>& gold) {
    MetricReport report;
    report.a_acc = answer_accuracy(predictions, gold);
    report.n_evaluated = gold.size();

    std::map<std::string, const PredictionRecord*> by_id;
    for (const auto& p : predictions) by_id[p.question_id] = &p;

    double sum_bleu = 0.0, sum_rouge = 0.0, sum_sim = 0.0;
    for (const auto& q : gold) {
        auto it = by_id.find(q.id);
        if (it != by_id.end() && !it->second->predicted_answer)
            report.n_extraction_failures++;
        const auto ref = tokenize(q.rationale);
        if (ref.empty()) continue;
        std::vector<std::string> cand;
        if (it != by_id.end()) cand = tokenize(it->second->generated_rationale);
        report.n_rationale_pairs++;
        if (cand.empty()) continue;  // all three text metrics stay 0 for this pair
        sum_bleu += bleu1(cand, ref);
        sum_rouge += rouge_l(cand, ref);
        sum_sim += similarity(cand, ref);
    }
    if (report.n_rationale_pairs > 0) {
        report.bleu1 = sum_bleu / report.n_rationale_pairs;
        report.rouge_l = sum_rouge / report.n_rationale_pairs;
        report.similarity = sum_sim / report.n_rationale_pairs;
    }
    return report;
}

std::string format_percent(double value) {
    // Percentage with two decimals, round half to even on the scaled value.
    const double scaled = value * 10000.0;
    const double floor_v = std::floor(scaled);
    const double frac = scaled - floor_v;
    double rounded;
    if (std::abs(frac - 0.5) < 1e-9) {
        rounded = (std::fmod(floor_v, 2.0) == 0.0) ? floor_v : floor_v + 1.0;
    } else {
        rounded = std::floor(scaled + 0.5);
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", rounded / 100.0);
    return buf;
}

std::string report_table(const std::vector<MetricReport>& reports,
                         const std::vector<std::string>& labels) {
    if (reports.empty()) throw std::invalid_argument("report_table: no reports");
    if (labels.size() != reports.size())
        throw std::invalid_argument("report_table: label count mismatch");

    std::string out = "| Model | A-Acc | BLEU-1 | ROUGE-L | Similarity |\n";
    out += "|---|---|---|---|---|\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        out += "| " + labels[i] + " | " + format_percent(r.a_acc) + " | " +
               format_percent(r.bleu1) + " | " + format_percent(r.rouge_l) + " | " +
               format_percent(r.similarity) + " |\n";
    }
    return out;
}

void write_predictions(const std::vector<PredictionRecord>& predictions,
                       const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write predictions: " + path);
    for (const auto& p : predictions) {
        ordered_json j;
        j["question_id"] = p.question_id;
        if (p.predicted_answer)
            j["answer"] = *p.predicted_answer;
        else
            j["answer"] = nullptr;
        j["rationale"] = p.generated_rationale;
        out << j.dump() << "\n";
    }
}

std::vector<PredictionRecord> read_predictions(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open predictions: " + path);
    std::vector<PredictionRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error("predictions " + path + " line " +
                                     std::to_string(line_no) + ": " + e.what());
        }
        PredictionRecord p;
        p.question_id = j.at("question_id").get<std::string>();
        if (!j.at("answer").is_null()) p.predicted_answer = j.at("answer").get<int>();
        p.generated_rationale = j.value("rationale", "");
        out.push_back(std::move(p));
    }
    return out;
}

void write_report(const MetricReport& report, const std::string& path) {
    ordered_json j;
    j["a_acc"] = report.a_acc;
    j["bleu1"] = report.bleu1;
    j["rouge_l"] = report.rouge_l;
    j["similarity"] = report.similarity;
    j["n_evaluated"] = report.n_evaluated;
    j["n_extraction_failures"] = report.n_extraction_failures;
    j["n_rationale_pairs"] = report.n_rationale_pairs;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << j.dump(2) << "\n";
}

MetricReport read_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open report: " + path);
    json j;
    in >> j;
    MetricReport r;
    r.a_acc = j.at("a_acc").get<double>();
    r.bleu1 = j.at("bleu1").get<double>();
    r.rouge_l = j.at("rouge_l").get<double>();
    r.similarity = j.at("similarity").get<double>();
    r.n_evaluated = j.at("n_evaluated").get<std::size_t>();
    r.n_extraction_failures = j.at("n_extraction_failures").get<std::size_t>();
    r.n_rationale_pairs = j.value("n_rationale_pairs", std::size_t{0});
    return r;
}

}  // namespace aidr
