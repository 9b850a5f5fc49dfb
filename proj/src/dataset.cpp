#include "aidr/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "json.hpp"

using nlohmann::json;
using nlohmann::ordered_json;

namespace aidr {

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
        case Split::Unassigned: return "unassigned";
    }
    return "?";
}

Split split_from_name(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "val") return Split::Val;
    if (name == "test") return Split::Test;
    if (name == "unassigned") return Split::Unassigned;
    throw std::invalid_argument("unknown split: " + name);
}

std::map<Split, std::size_t> DatasetManifest::split_counts() const {
    std::map<Split, std::size_t> counts = {{Split::Train, 0}, {Split::Val, 0},
                                           {Split::Test, 0}, {Split::Unassigned, 0}};
    for (const auto& q : questions) counts[q.split]++;
    return counts;
}

std::vector<std::string> option_texts() {
    std::vector<std::string> out;
    for (const auto& c : taxonomy())
        out.push_back(std::string("(") + c.letter + ") " + c.description);
    return out;
}

namespace {

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

std::string render_context(const std::vector<ChannelOutcome>& telemetry,
                           const QualityReport& quality, bool model_fault) {
    // Fixed WiFi/5G/LiFi order so identical inputs serialize identically.
    std::string out;
    for (Tech t : {Tech::WiFi, Tech::FiveG, Tech::LiFi}) {
        const ChannelOutcome* found = nullptr;
        for (const auto& o : telemetry)
            if (o.tech == t) found = &o;
        if (!found)
            throw std::runtime_error(std::string("build_question: missing telemetry for ") +
                                     tech_name(t));
        const double bits = static_cast<double>(found->received_bits.bits.size());
        const double throughput_mbps = found->latency_s > 0.0
                                           ? bits / found->latency_s / 1e6
                                           : 0.0;
        out += std::string(tech_name(t)) + ": SNR " + fmt("%.1f", found->snr_db) +
               " dB, throughput " + fmt("%.1f", throughput_mbps) + " Mbps, BER " +
               fmt("%.6f", found->ber) + "\n";
    }
    double psnr = quality.psnr_db;
    if (model_fault) psnr = std::max(0.0, psnr - kModelFaultPsnrPenaltyDb);
    out += "Received image PSNR " + fmt("%.2f", psnr) + " dB";
    return out;
}

ordered_json scenario_to_json(const DegradationScenario& s) {
    ordered_json j;
    j["id"] = s.id;
    j["cause"] = std::string(1, cause_letter(s.cause));
    j["severity"] = s.severity;
    j["snr_offset_db"] = s.snr_offset_db;
    j["throughput_multiplier"] = s.throughput_multiplier;
    if (s.affected_tech)
        j["affected_tech"] = tech_name(*s.affected_tech);
    else
        j["affected_tech"] = nullptr;
    j["seed"] = s.seed;
    j["scene_id"] = s.scene_id;
    return j;
}

DegradationScenario scenario_from_json(const json& j) {
    DegradationScenario s;
    s.id = j.at("id").get<std::string>();
    s.cause = cause_from_letter(j.at("cause").get<std::string>().at(0));
    s.severity = j.at("severity").get<double>();
    s.snr_offset_db = j.at("snr_offset_db").get<double>();
    s.throughput_multiplier = j.at("throughput_multiplier").get<double>();
    if (!j.at("affected_tech").is_null())
        s.affected_tech = tech_from_name(j.at("affected_tech").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    s.scene_id = j.at("scene_id").get<std::string>();
    return s;
}

ordered_json question_to_json(const ReasoningQuestion& q) {
    // ScienceQA field names: hint carries the context, solution the rationale.
    ordered_json j;
    j["id"] = q.id;
    j["question"] = q.question;
    j["choices"] = q.choices;
    j["answer"] = q.answer;
    j["hint"] = q.context;
    j["image"] = q.image_ref;
    j["scene"] = q.scene;
    j["split"] = split_name(q.split);
    j["solution"] = q.rationale;
    j["metadata"] = ordered_json{{"scenario", scenario_to_json(q.scenario)}};
    return j;
}

ReasoningQuestion question_from_json(const json& j) {
    const std::string id = j.value("id", std::string("<missing id>"));
    auto require = [&](const char* field) -> const json& {
        if (!j.contains(field))
            throw std::runtime_error("dataset record '" + id + "': missing field '" +
                                     field + "'");
        return j.at(field);
    };
    ReasoningQuestion q;
    q.id = require("id").get<std::string>();
    q.question = require("question").get<std::string>();
    q.choices = require("choices").get<std::vector<std::string>>();
    q.answer = require("answer").get<int>();
    q.context = require("hint").get<std::string>();
    q.image_ref = require("image").get<std::string>();
    q.scene = require("scene").get<std::string>();
    q.split = split_from_name(require("split").get<std::string>());
    q.rationale = require("solution").get<std::string>();
    q.scenario = scenario_from_json(require("metadata").at("scenario"));
    if (q.choices.size() != 8)
        throw std::runtime_error("dataset record '" + id + "': expected 8 choices");
    if (q.answer < 0 || q.answer > 7)
        throw std::runtime_error("dataset record '" + id + "': answer out of range");
    return q;
}

}  // namespace

ReasoningQuestion build_question(const DegradationScenario& scenario,
                                 const std::vector<ChannelOutcome>& telemetry,
                                 const QualityReport& quality,
                                 const std::string& image_ref) {
    ReasoningQuestion q;
    q.id = scenario.id;
    q.question = kQuestionStem;
    q.choices = option_texts();
    q.answer = gold_label(scenario);
    q.context = render_context(telemetry, quality, scenario.cause == Cause::ModelFault);
    q.image_ref = image_ref;
    q.scene = scenario.scene_id;
    q.scenario = scenario;
    return q;
}

DatasetManifest split_random(std::vector<ReasoningQuestion> questions, std::uint64_t seed) {
    if (questions.empty()) throw std::invalid_argument("split_random: empty question list");
    std::vector<std::size_t> order(questions.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    const std::size_t n = questions.size();
    const std::size_t n_val = n / 5;
    const std::size_t n_test = n / 5;
    const std::size_t n_train = n - n_val - n_test;  // remainder goes to train

    for (std::size_t i = 0; i < n; ++i) {
        Split s = Split::Train;
        if (i >= n_train && i < n_train + n_val)
            s = Split::Val;
        else if (i >= n_train + n_val)
            s = Split::Test;
        questions[order[i]].split = s;
    }
    DatasetManifest m;
    m.questions = std::move(questions);
    m.seed = seed;
    return m;
}

DatasetManifest split_by_scene(std::vector<ReasoningQuestion> questions) {
    for (auto& q : questions) {
        if (q.scene == "Playroom" || q.scene == "DrJohnson")
            q.split = Split::Train;
        else if (q.scene == "Train")
            q.split = Split::Val;
        else if (q.scene == "Truck")
            q.split = Split::Test;
        else
            throw std::invalid_argument("split_by_scene: unknown scene tag '" + q.scene + "'");
    }
    DatasetManifest m;
    m.questions = std::move(questions);
    return m;
}

void write_dataset(const DatasetManifest& manifest, const std::string& path) {
    ordered_json j;
    j["format_version"] = manifest.format_version;
    j["seed"] = manifest.seed;
    ordered_json counts;
    for (const auto& [split, n] : manifest.split_counts()) counts[split_name(split)] = n;
    j["counts"] = counts;
    ordered_json questions = ordered_json::array();
    for (const auto& q : manifest.questions) questions.push_back(question_to_json(q));
    j["questions"] = std::move(questions);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset: " + path);
    out << j.dump(2) << "\n";
}

DatasetManifest read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("dataset parse error in " + path + ": " + e.what());
    }
    if (!j.contains("format_version"))
        throw std::runtime_error("dataset " + path + ": missing format_version");
    if (j.at("format_version").get<int>() != kDatasetFormatVersion)
        throw std::runtime_error("dataset " + path + ": unsupported format_version " +
                                 j.at("format_version").dump() + " (expected " +
                                 std::to_string(kDatasetFormatVersion) + ")");
    DatasetManifest m;
    m.format_version = j.at("format_version").get<int>();
    m.seed = j.value("seed", 0ull);
    for (const auto& qj : j.at("questions")) m.questions.push_back(question_from_json(qj));

    const auto counts = m.split_counts();
    std::size_t total = 0;
    for (const auto& [split, n] : counts) total += n;
    if (total != m.questions.size())
        throw std::runtime_error("dataset " + path + ": split counts do not partition records");
    return m;
}

void write_scenarios(const std::vector<DegradationScenario>& scenarios,
                     const std::string& path) {
    ordered_json arr = ordered_json::array();
    for (const auto& s : scenarios) arr.push_back(scenario_to_json(s));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write scenarios: " + path);
    out << arr.dump(2) << "\n";
}

std::vector<DegradationScenario> read_scenarios(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open scenarios: " + path);
    json arr;
    in >> arr;
    std::vector<DegradationScenario> out;
    for (const auto& j : arr) out.push_back(scenario_from_json(j));
    return out;
}

}  // namespace aidr
