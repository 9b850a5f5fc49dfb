#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "aidr/image.hpp"

namespace aidr {

// Dense row-major matrix, just big enough for the toy fusion core.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// Gate parameters: lambda = sigmoid(H_L W_L^T + H_V^a W_V^T), elementwise.
struct FusionParams {
    Matrix w_language;  // d x d
    Matrix w_vision;    // d x d
};

FusionParams init_fusion_params(std::size_t d, std::uint64_t seed);

struct FusionState {
    Matrix language;        // H_L, n_tokens x d
    Matrix vision;          // H_V, n_patches x d
    Matrix aligned_vision;  // H_V^a, n_tokens x d
    Matrix gate;            // lambda, n_tokens x d, entries in (0,1)
    Matrix fused;           // H_f, n_tokens x d
};

// Row i of the result is the embedding of token_ids[i].
Matrix encode_language(const std::vector<int>& token_ids, const Matrix& embedding_table);

// Scaled dot-product attention with queries H_L and keys/values H_V:
// softmax(H_L H_V^T / sqrt(d)) H_V. No learned projections.
Matrix align_attention(const Matrix& language, const Matrix& vision);

Matrix gate(const Matrix& language, const Matrix& aligned_vision, const FusionParams& params);

// H_f = (1 - lambda) .* H_L + lambda .* H_V^a. Gate entries must lie in
// [0, 1]; the closed endpoints admit forced-gate limit checks.
Matrix fuse(const Matrix& language, const Matrix& aligned_vision, const Matrix& gate);

FusionState run_fusion(const Matrix& language, const Matrix& vision,
                       const FusionParams& params);

// Minimal one-layer autoregressive decoder: logits over the vocabulary are
// W_o (meanrow(H_f) + E[prev_token]), probabilities via softmax.
struct ToyDecoderParams {
    std::size_t vocab_size = 0;
    std::size_t d = 0;
    Matrix embedding;      // V x d
    Matrix output_weight;  // V x d
    int bos_token = 0;
};

ToyDecoderParams init_decoder_params(std::size_t vocab_size, std::size_t d,
                                     std::uint64_t seed);

std::vector<double> decode_step(const Matrix& fused, int prev_token,
                                const ToyDecoderParams& params);

double sequence_log_prob(const Matrix& fused, const std::vector<int>& target_tokens,
                         const ToyDecoderParams& params);

// Max relative error between analytic gradients of sum(H_f^2) w.r.t. W_L
// and W_V and central finite differences at step h.
double grad_check(const Matrix& language, const Matrix& vision,
                  const FusionParams& params, double h);

struct ExtractionError : std::runtime_error {
    explicit ExtractionError(const std::string& raw)
        : std::runtime_error("cannot extract an option letter from: \"" + raw + "\""),
          raw_text(raw) {}
    std::string raw_text;
};

// First "(A)".."(H)" match, then first standalone letter A-H, else throws.
int extract_answer_index(const std::string& text);

// Text-generation contract shared by the toy decoder, mocks and remote
// answering backends.
class ReasoningBackend {
public:
    virtual ~ReasoningBackend() = default;
    virtual std::string generate(const std::string& language_input,
                                 const Matrix& image_features) = 0;
};

struct TwoStageResult {
    std::string rationale;
    int answer = -1;
};

// Stage 1: (X_L^1, X_V) -> rationale. Stage 2: (X_L^1 ++ rationale, X_V)
// -> answer text, parsed to an option index.
TwoStageResult two_stage_infer(const std::string& question_text,
                               const Matrix& image_features,
                               ReasoningBackend& rationale_backend,
                               ReasoningBackend& answer_backend);

// Mean RGB per grid cell, projected to d dims with a seeded random map.
Matrix patch_features(const Image& img, int grid, std::size_t d, std::uint64_t seed);

// Untrained end-to-end instantiation of the fusion core; deterministic
// given its seed. In answer mode the final greedy token selects an option
// letter so the output is always parseable.
class ToyBackend : public ReasoningBackend {
public:
    enum class Mode { Rationale, Answer };

    ToyBackend(std::size_t d, std::size_t vocab_size, std::uint64_t seed, Mode mode);
    std::string generate(const std::string& language_input,
                         const Matrix& image_features) override;

private:
    FusionParams fusion_params_;
    ToyDecoderParams decoder_params_;
    Mode mode_;
    int steps_ = 8;
};

// Always returns a fixed string; handy for contract tests.
class FixedBackend : public ReasoningBackend {
public:
    explicit FixedBackend(std::string text) : text_(std::move(text)) {}
    std::string generate(const std::string&, const Matrix&) override { return text_; }

private:
    std::string text_;
};

}  // namespace aidr
