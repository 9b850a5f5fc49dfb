#include "aidr/fusion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

namespace aidr {

namespace {

Matrix seeded_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    Matrix m(rows, cols);
    for (auto& v : m.data) v = dist(rng);
    return m;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// C = A B^T
Matrix mul_abt(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.rows; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += a.at(i, k) * b.at(j, k);
            c.at(i, j) = s;
        }
    return c;
}

// C = A^T B
Matrix mul_atb(const Matrix& a, const Matrix& b) {
    Matrix c(a.cols, b.cols);
    for (std::size_t i = 0; i < a.cols; ++i)
        for (std::size_t j = 0; j < b.cols; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.rows; ++k) s += a.at(k, i) * b.at(k, j);
            c.at(i, j) = s;
        }
    return c;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    double max_logit = logits[0];
    for (double v : logits) max_logit = std::max(max_logit, v);
    std::vector<double> probs(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - max_logit);
        sum += probs[i];
    }
    for (auto& p : probs) p /= sum;
    return probs;
}

double fusion_loss(const Matrix& language, const Matrix& vision, const FusionParams& params) {
    const Matrix fused = run_fusion(language, vision, params).fused;
    double loss = 0.0;
    for (double v : fused.data) loss += v * v;
    return loss;
}

}  // namespace

FusionParams init_fusion_params(std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    FusionParams p;
    p.w_language = seeded_uniform(d, d, rng);
    p.w_vision = seeded_uniform(d, d, rng);
    return p;
}

Matrix encode_language(const std::vector<int>& token_ids, const Matrix& embedding_table) {
    if (token_ids.empty()) throw std::invalid_argument("encode_language: empty token list");
    Matrix out(token_ids.size(), embedding_table.cols);
    for (std::size_t i = 0; i < token_ids.size(); ++i) {
        const int id = token_ids[i];
        if (id < 0 || static_cast<std::size_t>(id) >= embedding_table.rows)
            throw std::out_of_range("encode_language: token id " + std::to_string(id) +
                                    " outside vocabulary of " +
                                    std::to_string(embedding_table.rows));
        for (std::size_t j = 0; j < embedding_table.cols; ++j)
            out.at(i, j) = embedding_table.at(static_cast<std::size_t>(id), j);
    }
    return out;
}

Matrix align_attention(const Matrix& language, const Matrix& vision) {
    if (language.cols != vision.cols)
        throw std::invalid_argument("align_attention: feature dimensions differ");
    if (language.rows == 0 || vision.rows == 0)
        throw std::invalid_argument("align_attention: empty input");

    const double scale = 1.0 / std::sqrt(static_cast<double>(language.cols));
    Matrix scores = mul_abt(language, vision);
    for (auto& v : scores.data) v *= scale;

    Matrix aligned(language.rows, language.cols);
    std::vector<double> row(vision.rows);
    for (std::size_t i = 0; i < language.rows; ++i) {
        for (std::size_t j = 0; j < vision.rows; ++j) row[j] = scores.at(i, j);
        const std::vector<double> weights = softmax(row);
        for (std::size_t j = 0; j < vision.rows; ++j)
            for (std::size_t k = 0; k < vision.cols; ++k)
                aligned.at(i, k) += weights[j] * vision.at(j, k);
    }
    return aligned;
}

Matrix gate(const Matrix& language, const Matrix& aligned_vision, const FusionParams& params) {
    if (!language.same_shape(aligned_vision))
        throw std::invalid_argument("gate: H_L and H_V^a shapes differ");
    if (params.w_language.rows != language.cols || params.w_language.cols != language.cols ||
        !params.w_language.same_shape(params.w_vision))
        throw std::invalid_argument("gate: parameter shapes do not match d");

    Matrix pre = mul_abt(language, params.w_language);
    const Matrix pre_v = mul_abt(aligned_vision, params.w_vision);
    for (std::size_t i = 0; i < pre.data.size(); ++i) pre.data[i] += pre_v.data[i];
    for (auto& v : pre.data) v = sigmoid(v);
    return pre;
}

Matrix fuse(const Matrix& language, const Matrix& aligned_vision, const Matrix& gate_values) {
    if (!language.same_shape(aligned_vision) || !language.same_shape(gate_values))
        throw std::invalid_argument("fuse: shape mismatch");
    Matrix fused(language.rows, language.cols);
    for (std::size_t i = 0; i < fused.data.size(); ++i) {
        const double lam = gate_values.data[i];
        if (!(lam >= 0.0 && lam <= 1.0))
            throw std::domain_error("fuse: gate value " + std::to_string(lam) +
                                    " outside [0, 1]");
        fused.data[i] = (1.0 - lam) * language.data[i] + lam * aligned_vision.data[i];
    }
    return fused;
}

FusionState run_fusion(const Matrix& language, const Matrix& vision,
                       const FusionParams& params) {
    FusionState state;
    state.language = language;
    state.vision = vision;
    state.aligned_vision = align_attention(language, vision);
    state.gate = gate(language, state.aligned_vision, params);
    state.fused = fuse(language, state.aligned_vision, state.gate);
    return state;
}

ToyDecoderParams init_decoder_params(std::size_t vocab_size, std::size_t d,
                                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ToyDecoderParams p;
    p.vocab_size = vocab_size;
    p.d = d;
    p.embedding = seeded_uniform(vocab_size, d, rng);
    p.output_weight = seeded_uniform(vocab_size, d, rng);
    p.bos_token = 0;
    return p;
}

std::vector<double> decode_step(const Matrix& fused, int prev_token,
                                const ToyDecoderParams& params) {
    if (prev_token < 0 || static_cast<std::size_t>(prev_token) >= params.vocab_size)
        throw std::out_of_range("decode_step: token " + std::to_string(prev_token) +
                                " outside vocabulary");
    if (fused.cols != params.d) throw std::invalid_argument("decode_step: dimension mismatch");

    std::vector<double> hidden(params.d, 0.0);
    for (std::size_t i = 0; i < fused.rows; ++i)
        for (std::size_t j = 0; j < params.d; ++j) hidden[j] += fused.at(i, j);
    for (auto& h : hidden) h /= static_cast<double>(fused.rows);
    for (std::size_t j = 0; j < params.d; ++j)
        hidden[j] += params.embedding.at(static_cast<std::size_t>(prev_token), j);

    std::vector<double> logits(params.vocab_size, 0.0);
    for (std::size_t v = 0; v < params.vocab_size; ++v)
        for (std::size_t j = 0; j < params.d; ++j)
            logits[v] += params.output_weight.at(v, j) * hidden[j];
    return softmax(logits);
}

double sequence_log_prob(const Matrix& fused, const std::vector<int>& target_tokens,
                         const ToyDecoderParams& params) {
    if (target_tokens.empty())
        throw std::invalid_argument("sequence_log_prob: empty target sequence");
    double log_prob = 0.0;
    int prev = params.bos_token;
    for (int tok : target_tokens) {
        if (tok < 0 || static_cast<std::size_t>(tok) >= params.vocab_size)
            throw std::out_of_range("sequence_log_prob: token outside vocabulary");
        log_prob += std::log(decode_step(fused, prev, params)[static_cast<std::size_t>(tok)]);
        prev = tok;
    }
    return log_prob;
}

double grad_check(const Matrix& language, const Matrix& vision,
                  const FusionParams& params, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("grad_check: step must be positive");

    // Analytic gradient of L = sum(H_f^2) w.r.t. W_L and W_V. The aligned
    // vision features do not depend on the gate parameters.
    const FusionState state = run_fusion(language, vision, params);
    const std::size_t n = state.fused.data.size();

    Matrix d_pre(state.gate.rows, state.gate.cols);
    for (std::size_t i = 0; i < n; ++i) {
        const double d_fused = 2.0 * state.fused.data[i];
        const double d_gate =
            d_fused * (state.aligned_vision.data[i] - state.language.data[i]);
        d_pre.data[i] = d_gate * state.gate.data[i] * (1.0 - state.gate.data[i]);
    }
    const Matrix grad_wl = mul_atb(d_pre, state.language);        // d x d
    const Matrix grad_wv = mul_atb(d_pre, state.aligned_vision);  // d x d

    auto numeric = [&](Matrix FusionParams::* which, std::size_t idx) {
        FusionParams perturbed = params;
        (perturbed.*which).data[idx] += h;
        const double hi = fusion_loss(language, vision, perturbed);
        (perturbed.*which).data[idx] -= 2.0 * h;
        const double lo = fusion_loss(language, vision, perturbed);
        return (hi - lo) / (2.0 * h);
    };

    double max_rel = 0.0;
    auto compare = [&](const Matrix& analytic, Matrix FusionParams::* which) {
        for (std::size_t i = 0; i < analytic.data.size(); ++i) {
            const double a = analytic.data[i];
            const double g = numeric(which, i);
            const double rel = std::abs(a - g) / std::max({1.0, std::abs(a), std::abs(g)});
            max_rel = std::max(max_rel, rel);
        }
    };
    compare(grad_wl, &FusionParams::w_language);
    compare(grad_wv, &FusionParams::w_vision);
    return max_rel;
}

int extract_answer_index(const std::string& text) {
    for (std::size_t i = 0; i + 2 < text.size(); ++i)
        if (text[i] == '(' && text[i + 1] >= 'A' && text[i + 1] <= 'H' && text[i + 2] == ')')
            return text[i + 1] - 'A';
    // Fallback: a standalone capital letter A-H.
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] < 'A' || text[i] > 'H') continue;
        const bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1]));
        const bool right_ok =
            i + 1 == text.size() || !std::isalnum(static_cast<unsigned char>(text[i + 1]));
        if (left_ok && right_ok) return text[i] - 'A';
    }
    throw ExtractionError(text);
}

TwoStageResult two_stage_infer(const std::string& question_text,
                               const Matrix& image_features,
                               ReasoningBackend& rationale_backend,
                               ReasoningBackend& answer_backend) {
    TwoStageResult result;
    result.rationale = rationale_backend.generate(question_text, image_features);
    const std::string stage2_input = question_text + "\n" + result.rationale;
    const std::string answer_text = answer_backend.generate(stage2_input, image_features);
    result.answer = extract_answer_index(answer_text);
    return result;
}

Matrix patch_features(const Image& img, int grid, std::size_t d, std::uint64_t seed) {
    if (!img.valid()) throw std::invalid_argument("patch_features: invalid image");
    if (grid <= 0) throw std::invalid_argument("patch_features: grid must be positive");

    // Mean RGB per cell, then a fixed seeded projection from 3 to d dims.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> projection(3 * d);
    for (auto& v : projection) v = dist(rng);

    Matrix out(static_cast<std::size_t>(grid) * grid, d);
    for (int gy = 0; gy < grid; ++gy) {
        for (int gx = 0; gx < grid; ++gx) {
            const int x0 = gx * img.width / grid, x1 = (gx + 1) * img.width / grid;
            const int y0 = gy * img.height / grid, y1 = (gy + 1) * img.height / grid;
            double mean[3] = {0, 0, 0};
            int count = 0;
            for (int y = y0; y < std::max(y1, y0 + 1) && y < img.height; ++y)
                for (int x = x0; x < std::max(x1, x0 + 1) && x < img.width; ++x) {
                    const std::size_t base =
                        (static_cast<std::size_t>(y) * img.width + x) * 3;
                    for (int c = 0; c < 3; ++c) mean[c] += img.pixels[base + c];
                    ++count;
                }
            const std::size_t row = static_cast<std::size_t>(gy) * grid + gx;
            for (std::size_t j = 0; j < d; ++j)
                for (int c = 0; c < 3; ++c)
                    out.at(row, j) += projection[c * d + j] * mean[c] / (255.0 * count);
        }
    }
    return out;
}

ToyBackend::ToyBackend(std::size_t d, std::size_t vocab_size, std::uint64_t seed, Mode mode)
    : fusion_params_(init_fusion_params(d, seed)),
      decoder_params_(init_decoder_params(vocab_size, d, seed ^ 0x7055ull)),
      mode_(mode) {}

std::string ToyBackend::generate(const std::string& language_input,
                                 const Matrix& image_features) {
    // Words hash into the toy vocabulary; representation learning is out of
    // scope, only the fusion/decoding math runs end to end.
    std::vector<int> token_ids;
    std::uint64_t h = 1469598103934665603ull;
    for (char ch : language_input) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (h != 1469598103934665603ull) {
                token_ids.push_back(static_cast<int>(h % decoder_params_.vocab_size));
                h = 1469598103934665603ull;
            }
            continue;
        }
        h = (h ^ static_cast<unsigned char>(ch)) * 1099511628211ull;
    }
    if (h != 1469598103934665603ull)
        token_ids.push_back(static_cast<int>(h % decoder_params_.vocab_size));
    if (token_ids.empty()) token_ids.push_back(0);

    const Matrix language = encode_language(token_ids, decoder_params_.embedding);
    const FusionState state = run_fusion(language, image_features, fusion_params_);

    std::vector<int> generated;
    int prev = decoder_params_.bos_token;
    for (int s = 0; s < steps_; ++s) {
        const std::vector<double> probs = decode_step(state.fused, prev, decoder_params_);
        int best = 0;
        for (std::size_t v = 1; v < probs.size(); ++v)
            if (probs[v] > probs[best]) best = static_cast<int>(v);
        generated.push_back(best);
        prev = best;
    }

    if (mode_ == Mode::Answer) {
        const char letter = static_cast<char>('A' + generated.back() % 8);
        return std::string("(") + letter + ")";
    }
    std::string text;
    for (int tok : generated) text += "t" + std::to_string(tok) + " ";
    if (!text.empty()) text.pop_back();
    return text;
}

}  // namespace aidr
