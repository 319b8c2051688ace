#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "persona_motion/skeleton.hpp"

namespace persona {

struct StyleNetConfig {
  std::size_t d_model = 64;
  std::size_t heads = 4;
  double adain_eps = 1e-5;
  double ln_eps = 1e-5;

  std::size_t ffn_hidden() const { return 4 * d_model; }
  std::size_t head_dim() const { return d_model / heads; }
  /// Throws ValidationError unless d_model is even, positive and divisible by heads.
  void validate() const;
};

enum class FeatureRole { kContent, kStyle, kGated, kAdain, kEncoded, kAttended, kOutput };

std::string_view to_string(FeatureRole role);

/// F x d per-frame features.
struct FeatureSequence {
  Eigen::MatrixXd values;
  FeatureRole role = FeatureRole::kContent;

  Eigen::Index frames() const { return values.rows(); }
  Eigen::Index width() const { return values.cols(); }
};

/// The twenty content categories understood by the semantic tokenizer.
const std::array<std::string_view, 20>& content_vocabulary();
bool is_content_label(std::string_view label);

/// Gating vector for one content label; entries lie strictly in (0, 1).
struct SemanticToken {
  std::string label;
  Eigen::VectorXd embedding;
};

/// y = x W^T + b applied row-wise.
struct Affine {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

struct LayerNormParams {
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
};

struct MhaWeights {
  Affine query;
  Affine key;
  Affine value;
  Affine output;
};

struct SaPmtWeights {
  StyleNetConfig config;
  Affine pose_embed_content;  // 40 -> d
  Affine pose_embed_style;    // 40 -> d
  Affine mlp_hidden;          // d -> d, tanh
  Affine mlp_out;             // d -> d
  Affine encoder_hidden;      // d -> d, tanh
  Affine encoder_out;         // d -> d
  MhaWeights mha;
  LayerNormParams ln1;
  LayerNormParams ln2;
  Affine ffn_hidden;  // d -> 4d, relu
  Affine ffn_out;     // 4d -> d
  /// Pre-sigmoid logits per content label.
  std::map<std::string, Eigen::VectorXd, std::less<>> semantic_table;

  /// Uniform(-1/sqrt(d), 1/sqrt(d)) weights and biases, unit/zero layer norms.
  static SaPmtWeights seeded(std::uint64_t seed, const StyleNetConfig& config = {});

  /// Throws SchemaError on any shape inconsistent with config, ValidationError on non-finite values.
  void validate() const;
};

/// Logits for a label: uniform in [-2, 2] from a stream keyed on (label, seed).
Eigen::VectorXd semantic_logits(std::string_view label, std::uint64_t seed, std::size_t width);

SemanticToken semantic_token(std::string_view label, const SaPmtWeights& w);
SemanticToken semantic_token(std::string_view label, std::uint64_t seed, std::size_t width);

enum class PoseRole { kContent, kStyle };

FeatureSequence encode_pose(const PoseSequence& seq, PoseRole which, const SaPmtWeights& w);

/// Row-wise Hadamard product with the token embedding.
FeatureSequence semantic_gate(const FeatureSequence& style, const SemanticToken& token);

/// Two-layer tanh MLP mapping gated style features to AdaIN statistics.
FeatureSequence style_mlp(const FeatureSequence& gated, const SaPmtWeights& w);

/// Per-channel statistics over frames (population variance):
///   out = sigma_s * (c - mu_c) / max(sigma_c, eps) + mu_s
FeatureSequence adain(const FeatureSequence& content, const FeatureSequence& style, double eps = 1e-5);

/// Sinusoidal encoding: PE[t, 2i] = sin(t / 10000^(2i/d)), PE[t, 2i+1] = cos(...).
Eigen::MatrixXd positional_encoding(Eigen::Index frames, Eigen::Index width);

FeatureSequence sa_pmt_encode(const FeatureSequence& ada, const SaPmtWeights& w);

/// Row-wise (x - mean) / max(std, eps) * gamma + beta.
Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const LayerNormParams& p, double eps);

struct AttentionResult {
  Eigen::MatrixXd output;
  std::vector<Eigen::MatrixXd> weights;  // one F x F row-stochastic matrix per head
};

AttentionResult multi_head_attention(const Eigen::MatrixXd& x, const MhaWeights& w, std::size_t heads);

Eigen::MatrixXd feed_forward(const Eigen::MatrixXd& x, const SaPmtWeights& w);

struct SaPmtOutput {
  FeatureSequence ada;
  FeatureSequence encoded;
  FeatureSequence attended;
  FeatureSequence output;
  std::vector<Eigen::MatrixXd> attention;
};

/// adain(content, MLP(gated)) -> encode -> LN(x + MHA(x)) -> LN(y + FFN(y)).
SaPmtOutput sa_pmt_forward(const FeatureSequence& content, const FeatureSequence& gated_style, const SaPmtWeights& w);

/// Full feature path from two pose sequences and a content label.
SaPmtOutput run_sa_pmt(const PoseSequence& content, const PoseSequence& style, std::string_view label,
                       const SaPmtWeights& w);

SaPmtWeights load_weights(const std::filesystem::path& path);
SaPmtWeights parse_weights(std::string_view text);
std::string format_weights(const SaPmtWeights& w);
void save_weights(const SaPmtWeights& w, const std::filesystem::path& path);

std::string features_to_json(const FeatureSequence& features);

}  // namespace persona
