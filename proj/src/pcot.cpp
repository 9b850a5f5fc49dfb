#include "aidr/pcot.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include "json.hpp"

using nlohmann::json;
using nlohmann::ordered_json;

namespace aidr {

namespace {

std::string render_qa_pairs(const std::vector<QaPair>& qa_pairs) {
    std::string out;
    for (const auto& qa : qa_pairs) out += "[" + qa.question + ", " + qa.answer + "] ";
    return out;
}

std::int64_t wall_clock_unix() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write checkpoint: " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot replace checkpoint: " + path);
}

ordered_json record_to_json(const PCoTRecord& r) {
    ordered_json j;
    j["lecture"] = r.lecture;
    j["plan"] = r.plan;
    j["rationales"] = r.rationales;
    j["failures"] = r.failures;
    j["model_name"] = r.model_name;
    j["started_at_unix"] = r.started_at_unix;
    j["finished_at_unix"] = r.finished_at_unix;
    j["prompt_tokens"] = r.prompt_tokens;
    j["completion_tokens"] = r.completion_tokens;
    return j;
}

PCoTRecord record_from_json(const json& j) {
    PCoTRecord r;
    r.lecture = j.value("lecture", "");
    r.plan = j.value("plan", "");
    if (j.contains("rationales"))
        r.rationales = j.at("rationales").get<std::map<std::string, std::string>>();
    if (j.contains("failures"))
        r.failures = j.at("failures").get<std::map<std::string, std::string>>();
    r.model_name = j.value("model_name", "");
    r.started_at_unix = j.value("started_at_unix", 0ll);
    r.finished_at_unix = j.value("finished_at_unix", 0ll);
    r.prompt_tokens = j.value("prompt_tokens", 0ll);
    r.completion_tokens = j.value("completion_tokens", 0ll);
    return r;
}

}  // namespace

QaPair qa_pair_from_question(const ReasoningQuestion& q) {
    std::string text = "Question: " + q.question + " Context: " + q.context + " Options: ";
    for (const auto& c : q.choices) text += c + " ";
    QaPair qa;
    qa.question = std::move(text);
    qa.answer = q.choices.at(static_cast<std::size_t>(q.answer));
    return qa;
}

std::string build_lecture_prompt(const std::vector<QaPair>& qa_pairs) {
    if (qa_pairs.empty())
        throw std::invalid_argument("build_lecture_prompt: at least one QA pair required");
    return "QA pairs: " + render_qa_pairs(qa_pairs) + kLectureInstruction;
}

std::string build_plan_prompt(const std::string& lecture, const std::vector<QaPair>& qa_pairs) {
    if (lecture.empty())
        throw std::runtime_error("build_plan_prompt: lecture missing (Step 1 not run)");
    if (qa_pairs.empty())
        throw std::invalid_argument("build_plan_prompt: at least one QA pair required");
    return "Lecture: " + lecture + ". QA pairs: " + render_qa_pairs(qa_pairs) + kPlanInstruction;
}

std::string build_rationale_prompt(const std::string& lecture, const std::string& plan,
                                   const QaPair& qa) {
    if (lecture.empty())
        throw std::runtime_error("build_rationale_prompt: lecture missing (Step 1 not run)");
    if (plan.empty())
        throw std::runtime_error("build_rationale_prompt: plan missing (Step 2 not run)");
    return "Lecture: " + lecture + ". Plan: " + plan + ". QA pairs: " +
           render_qa_pairs({qa}) + kRationaleInstruction;
}

PCoTRecord generate_pcot(const DatasetManifest& dataset, LlmBackend& backend,
                         const TeacherOptions& options) {
    if (dataset.questions.empty())
        throw std::invalid_argument("generate_pcot: empty dataset");

    const auto now = options.clock ? options.clock : wall_clock_unix;

    PCoTRecord record;
    if (!options.checkpoint_path.empty()) {
        std::ifstream probe(options.checkpoint_path);
        if (probe) {
            json j;
            probe >> j;
            record = record_from_json(j);
        }
    }
    record.model_name = options.model;
    if (record.started_at_unix == 0) record.started_at_unix = now();
    record.failures.clear();  // failed items are retried on resume

    std::mutex mu;
    auto checkpoint = [&]() {
        if (options.checkpoint_path.empty()) return;
        atomic_write(options.checkpoint_path, record_to_json(record).dump(2) + "\n");
    };

    auto request_with_retry = [&](const std::string& prompt, const std::string& tag,
                                  std::uint64_t retry_seed) {
        LlmRequest req;
        req.model = options.model;
        req.temperature = options.temperature;
        req.max_tokens = options.max_tokens;
        req.messages = {{"user", prompt}};
        req.tag = tag;

        std::mt19937_64 rng(retry_seed);
        for (int attempt = 0;; ++attempt) {
            try {
                return backend.complete(req);
            } catch (const TransportError&) {
                if (attempt >= options.max_retries) throw;
                const int base = options.backoff_base_ms << attempt;
                std::uniform_int_distribution<int> jitter(0, base);
                std::this_thread::sleep_for(std::chrono::milliseconds(base + jitter(rng)));
            }
        }
    };

    std::vector<QaPair> shared_pairs;
    for (std::size_t i = 0; i < dataset.questions.size() && i < options.lecture_qa_pairs; ++i)
        shared_pairs.push_back(qa_pair_from_question(dataset.questions[i]));

    if (record.lecture.empty()) {
        auto resp = request_with_retry(build_lecture_prompt(shared_pairs), "lecture",
                                       options.jitter_seed ^ 0x1ecull);
        record.lecture = resp.text;
        record.prompt_tokens += resp.prompt_tokens;
        record.completion_tokens += resp.completion_tokens;
        checkpoint();
    }
    if (record.plan.empty()) {
        auto resp = request_with_retry(build_plan_prompt(record.lecture, shared_pairs), "plan",
                                       options.jitter_seed ^ 0x91aull);
        record.plan = resp.text;
        record.prompt_tokens += resp.prompt_tokens;
        record.completion_tokens += resp.completion_tokens;
        checkpoint();
    }

    // Step 3: per-question rationales, bounded-concurrency workers over a
    // shared index. Questions already present in the checkpoint are skipped.
    std::vector<const ReasoningQuestion*> pending;
    for (const auto& q : dataset.questions)
        if (!record.rationales.count(q.id)) pending.push_back(&q);

    std::atomic<std::size_t> next{0};
    std::atomic<bool> aborted{false};
    std::string abort_message;
    const int workers =
        std::max(1, std::min<int>(options.concurrency, static_cast<int>(pending.size())));

    auto worker = [&](int worker_id) {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pending.size() || aborted.load()) return;
            const ReasoningQuestion& q = *pending[i];
            const std::string prompt =
                build_rationale_prompt(record.lecture, record.plan, qa_pair_from_question(q));
            try {
                auto resp = request_with_retry(
                    prompt, q.id, options.jitter_seed ^ (0xabcdull + i * 1315423911ull));
                std::lock_guard<std::mutex> lock(mu);
                record.rationales[q.id] = resp.text;
                record.prompt_tokens += resp.prompt_tokens;
                record.completion_tokens += resp.completion_tokens;
                checkpoint();
            } catch (const AuthError& e) {
                std::lock_guard<std::mutex> lock(mu);
                aborted = true;
                abort_message = e.what();
                return;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                record.failures[q.id] = e.what();
                checkpoint();
            }
        }
        (void)worker_id;
    };

    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
    if (aborted) throw AuthError(abort_message);

    record.finished_at_unix = now();
    checkpoint();
    return record;
}

std::vector<std::string> attach_rationales(DatasetManifest& dataset, const PCoTRecord& record) {
    std::vector<std::string> warnings;
    for (auto& q : dataset.questions) {
        auto it = record.rationales.find(q.id);
        if (it == record.rationales.end())
            warnings.push_back("no rationale for question id '" + q.id + "'");
        else
            q.rationale = it->second;
    }
    return warnings;
}

void write_pcot(const PCoTRecord& record, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write PCoT record: " + path);
    out << record_to_json(record).dump(2) << "\n";
}

PCoTRecord read_pcot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open PCoT record: " + path);
    json j;
    in >> j;
    return record_from_json(j);
}

}  // namespace aidr
