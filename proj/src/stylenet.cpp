#include "persona_motion/stylenet.hpp"

#include <cmath>

#include "persona_motion/errors.hpp"
#include "persona_motion/random.hpp"

namespace persona {

namespace {

constexpr std::array<std::string_view, 20> kContentVocabulary = {
    "Walk", "Run",   "Dance", "Skating", "Taichi", "Jump",  "Wave",  "Boxing", "Kick",       "Squat",
    "Clap", "Bow",   "Throw", "Swim",    "Climb",  "Crawl", "Golf",  "Sit",    "Basketball", "Stretch",
};

void require_width(const FeatureSequence& f, Eigen::Index width, std::string_view what) {
  if (f.width() != width) {
    throw ShapeError(std::string(what) + ": expected width " + std::to_string(width) + ", got " +
                     std::to_string(f.width()));
  }
}

Affine seeded_affine(Rng& rng, Eigen::Index out, Eigen::Index in, double bound) {
  Affine a;
  a.weight.resize(out, in);
  a.bias.resize(out);
  for (Eigen::Index r = 0; r < out; ++r) {
    for (Eigen::Index c = 0; c < in; ++c) a.weight(r, c) = rng.uniform(-bound, bound);
  }
  for (Eigen::Index r = 0; r < out; ++r) a.bias(r) = rng.uniform(-bound, bound);
  return a;
}

LayerNormParams unit_norm(Eigen::Index width) {
  return {Eigen::VectorXd::Ones(width), Eigen::VectorXd::Zero(width)};
}

void check_affine(const Affine& a, Eigen::Index out, Eigen::Index in, std::string_view name) {
  if (a.weight.rows() != out || a.weight.cols() != in || a.bias.size() != out) {
    throw SchemaError(std::string(name) + ": expected " + std::to_string(out) + "x" + std::to_string(in) +
                      " weight and " + std::to_string(out) + " bias");
  }
  if (!a.weight.allFinite() || !a.bias.allFinite()) throw ValidationError(std::string(name) + ": non-finite value");
}

void check_norm(const LayerNormParams& p, Eigen::Index width, std::string_view name) {
  if (p.gamma.size() != width || p.beta.size() != width) {
    throw SchemaError(std::string(name) + ": expected gamma/beta of length " + std::to_string(width));
  }
  if (!p.gamma.allFinite() || !p.beta.allFinite()) throw ValidationError(std::string(name) + ": non-finite value");
}

Eigen::MatrixXd tanh_of(Eigen::MatrixXd x) { return x.array().tanh().matrix(); }

Eigen::RowVectorXd column_means(const Eigen::MatrixXd& x) { return x.colwise().mean(); }

Eigen::RowVectorXd column_stddev(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& mean) {
  return (x.rowwise() - mean).array().square().colwise().mean().sqrt().matrix();
}

}  // namespace

void StyleNetConfig::validate() const {
  if (d_model == 0 || d_model % 2 != 0) throw ValidationError("d_model must be positive and even");
  if (heads == 0 || d_model % heads != 0) throw ValidationError("d_model must be divisible by heads");
  if (!(adain_eps > 0.0) || !(ln_eps > 0.0)) throw ValidationError("epsilons must be positive");
}

std::string_view to_string(FeatureRole role) {
  switch (role) {
    case FeatureRole::kContent: return "content";
    case FeatureRole::kStyle: return "style";
    case FeatureRole::kGated: return "gated";
    case FeatureRole::kAdain: return "adain";
    case FeatureRole::kEncoded: return "encoded";
    case FeatureRole::kAttended: return "attended";
    case FeatureRole::kOutput: return "output";
  }
  return "unknown";
}

const std::array<std::string_view, 20>& content_vocabulary() { return kContentVocabulary; }

bool is_content_label(std::string_view label) {
  return std::find(kContentVocabulary.begin(), kContentVocabulary.end(), label) != kContentVocabulary.end();
}

Eigen::MatrixXd Affine::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != weight.cols()) {
    throw ShapeError("affine input width " + std::to_string(x.cols()) + " != " + std::to_string(weight.cols()));
  }
  Eigen::MatrixXd y = x * weight.transpose();
  y.rowwise() += bias.transpose();
  return y;
}

SaPmtWeights SaPmtWeights::seeded(std::uint64_t seed, const StyleNetConfig& config) {
  config.validate();
  const auto d = static_cast<Eigen::Index>(config.d_model);
  const auto pose_in = static_cast<Eigen::Index>(kNumJoints * 2);
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.d_model));
  Rng rng(seed);

  SaPmtWeights w;
  w.config = config;
  w.pose_embed_content = seeded_affine(rng, d, pose_in, bound);
  w.pose_embed_style = seeded_affine(rng, d, pose_in, bound);
  w.mlp_hidden = seeded_affine(rng, d, d, bound);
  w.mlp_out = seeded_affine(rng, d, d, bound);
  w.encoder_hidden = seeded_affine(rng, d, d, bound);
  w.encoder_out = seeded_affine(rng, d, d, bound);
  w.mha.query = seeded_affine(rng, d, d, bound);
  w.mha.key = seeded_affine(rng, d, d, bound);
  w.mha.value = seeded_affine(rng, d, d, bound);
  w.mha.output = seeded_affine(rng, d, d, bound);
  w.ln1 = unit_norm(d);
  w.ln2 = unit_norm(d);
  w.ffn_hidden = seeded_affine(rng, static_cast<Eigen::Index>(config.ffn_hidden()), d, bound);
  w.ffn_out = seeded_affine(rng, d, static_cast<Eigen::Index>(config.ffn_hidden()), bound);
  for (auto label : kContentVocabulary) {
    w.semantic_table.emplace(std::string(label), semantic_logits(label, seed, config.d_model));
  }
  return w;
}

void SaPmtWeights::validate() const {
  config.validate();
  const auto d = static_cast<Eigen::Index>(config.d_model);
  const auto h = static_cast<Eigen::Index>(config.ffn_hidden());
  const auto pose_in = static_cast<Eigen::Index>(kNumJoints * 2);
  check_affine(pose_embed_content, d, pose_in, "pose_embed_content");
  check_affine(pose_embed_style, d, pose_in, "pose_embed_style");
  check_affine(mlp_hidden, d, d, "mlp_hidden");
  check_affine(mlp_out, d, d, "mlp_out");
  check_affine(encoder_hidden, d, d, "encoder_hidden");
  check_affine(encoder_out, d, d, "encoder_out");
  check_affine(mha.query, d, d, "mha.query");
  check_affine(mha.key, d, d, "mha.key");
  check_affine(mha.value, d, d, "mha.value");
  check_affine(mha.output, d, d, "mha.output");
  check_norm(ln1, d, "ln1");
  check_norm(ln2, d, "ln2");
  check_affine(ffn_hidden, h, d, "ffn_hidden");
  check_affine(ffn_out, d, h, "ffn_out");
  for (const auto& [label, logits] : semantic_table) {
    if (!is_content_label(label)) throw SchemaError("semantic table: unknown label \"" + label + "\"");
    if (logits.size() != d) throw SchemaError("semantic table \"" + label + "\": expected length " + std::to_string(d));
    if (!logits.allFinite()) throw ValidationError("semantic table \"" + label + "\": non-finite value");
  }
}

Eigen::VectorXd semantic_logits(std::string_view label, std::uint64_t seed, std::size_t width) {
  if (!is_content_label(label)) throw UnknownLabelError("unknown content label: " + std::string(label));
  Rng rng(fnv1a(label) ^ (seed * 0x9e3779b97f4a7c15ull));
  Eigen::VectorXd v(static_cast<Eigen::Index>(width));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(-2.0, 2.0);
  return v;
}

namespace {

SemanticToken token_from_logits(std::string_view label, const Eigen::VectorXd& logits) {
  SemanticToken t;
  t.label = std::string(label);
  t.embedding = (1.0 / (1.0 + (-logits.array()).exp())).matrix();
  return t;
}

}  // namespace

SemanticToken semantic_token(std::string_view label, const SaPmtWeights& w) {
  if (!is_content_label(label)) throw UnknownLabelError("unknown content label: " + std::string(label));
  const auto it = w.semantic_table.find(label);
  if (it == w.semantic_table.end()) {
    throw UnknownLabelError("weights carry no semantic embedding for label: " + std::string(label));
  }
  return token_from_logits(label, it->second);
}

SemanticToken semantic_token(std::string_view label, std::uint64_t seed, std::size_t width) {
  return token_from_logits(label, semantic_logits(label, seed, width));
}

FeatureSequence encode_pose(const PoseSequence& seq, PoseRole which, const SaPmtWeights& w) {
  const auto frames = static_cast<Eigen::Index>(seq.frame_count());
  Eigen::MatrixXd flat(frames, static_cast<Eigen::Index>(kNumJoints * 2));
  for (Eigen::Index f = 0; f < frames; ++f) {
    const auto pose = seq.frame(static_cast<std::size_t>(f));
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      flat(f, static_cast<Eigen::Index>(2 * j)) = pose[j].x;
      flat(f, static_cast<Eigen::Index>(2 * j + 1)) = pose[j].y;
    }
  }
  const bool content = which == PoseRole::kContent;
  const Affine& embed = content ? w.pose_embed_content : w.pose_embed_style;
  return {embed.apply(flat), content ? FeatureRole::kContent : FeatureRole::kStyle};
}

FeatureSequence semantic_gate(const FeatureSequence& style, const SemanticToken& token) {
  if (!is_content_label(token.label)) throw UnknownLabelError("unknown content label: " + token.label);
  require_width(style, token.embedding.size(), "semantic_gate");
  FeatureSequence out{style.values, FeatureRole::kGated};
  out.values.array().rowwise() *= token.embedding.transpose().array();
  return out;
}

FeatureSequence style_mlp(const FeatureSequence& gated, const SaPmtWeights& w) {
  return {w.mlp_out.apply(tanh_of(w.mlp_hidden.apply(gated.values))), FeatureRole::kStyle};
}

FeatureSequence adain(const FeatureSequence& content, const FeatureSequence& style, double eps) {
  require_width(style, content.width(), "adain");
  if (content.frames() == 0 || style.frames() == 0) throw ShapeError("adain: empty feature sequence");
  const Eigen::RowVectorXd mu_c = column_means(content.values);
  const Eigen::RowVectorXd sd_c = column_stddev(content.values, mu_c).cwiseMax(eps);
  const Eigen::RowVectorXd mu_s = column_means(style.values);
  const Eigen::RowVectorXd sd_s = column_stddev(style.values, mu_s);

  FeatureSequence out{content.values, FeatureRole::kAdain};
  for (Eigen::Index c = 0; c < out.width(); ++c) {
    for (Eigen::Index f = 0; f < out.frames(); ++f) {
      out.values(f, c) = sd_s(c) * ((content.values(f, c) - mu_c(c)) / sd_c(c)) + mu_s(c);
    }
  }
  return out;
}

Eigen::MatrixXd positional_encoding(Eigen::Index frames, Eigen::Index width) {
  Eigen::MatrixXd pe(frames, width);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index i = 0; i < width; i += 2) {
      const double angle =
          static_cast<double>(t) / std::pow(10000.0, static_cast<double>(i) / static_cast<double>(width));
      pe(t, i) = std::sin(angle);
      if (i + 1 < width) pe(t, i + 1) = std::cos(angle);
    }
  }
  return pe;
}

FeatureSequence sa_pmt_encode(const FeatureSequence& ada, const SaPmtWeights& w) {
  require_width(ada, static_cast<Eigen::Index>(w.config.d_model), "sa_pmt_encode");
  const Eigen::MatrixXd x = ada.values + positional_encoding(ada.frames(), ada.width());
  return {w.encoder_out.apply(tanh_of(w.encoder_hidden.apply(x))), FeatureRole::kEncoded};
}

Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const LayerNormParams& p, double eps) {
  Eigen::MatrixXd y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const Eigen::RowVectorXd centered = x.row(r).array() - mean;
    const double sd = std::max(std::sqrt(centered.squaredNorm() / static_cast<double>(x.cols())), eps);
    y.row(r) = (centered.array() / sd) * p.gamma.transpose().array() + p.beta.transpose().array();
  }
  return y;
}

AttentionResult multi_head_attention(const Eigen::MatrixXd& x, const MhaWeights& w, std::size_t heads) {
  const Eigen::MatrixXd q = w.query.apply(x);
  const Eigen::MatrixXd k = w.key.apply(x);
  const Eigen::MatrixXd v = w.value.apply(x);
  const Eigen::Index dk = x.cols() / static_cast<Eigen::Index>(heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  AttentionResult result;
  Eigen::MatrixXd concat(x.rows(), x.cols());
  for (std::size_t h = 0; h < heads; ++h) {
    const Eigen::Index off = static_cast<Eigen::Index>(h) * dk;
    Eigen::MatrixXd scores = (q.middleCols(off, dk) * k.middleCols(off, dk).transpose()) * scale;
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
      const double peak = scores.row(r).maxCoeff();
      scores.row(r) = (scores.row(r).array() - peak).exp().matrix();
      scores.row(r) /= scores.row(r).sum();
    }
    concat.middleCols(off, dk) = scores * v.middleCols(off, dk);
    result.weights.push_back(std::move(scores));
  }
  result.output = w.output.apply(concat);
  return result;
}

Eigen::MatrixXd feed_forward(const Eigen::MatrixXd& x, const SaPmtWeights& w) {
  return w.ffn_out.apply(w.ffn_hidden.apply(x).cwiseMax(0.0));
}

SaPmtOutput sa_pmt_forward(const FeatureSequence& content, const FeatureSequence& gated_style, const SaPmtWeights& w) {
  const auto d = static_cast<Eigen::Index>(w.config.d_model);
  require_width(content, d, "sa_pmt_forward content");
  require_width(gated_style, d, "sa_pmt_forward style");

  SaPmtOutput out;
  out.ada = adain(content, style_mlp(gated_style, w), w.config.adain_eps);
  out.encoded = sa_pmt_encode(out.ada, w);
  auto attn = multi_head_attention(out.encoded.values, w.mha, w.config.heads);
  out.attended = {layer_norm(out.encoded.values + attn.output, w.ln1, w.config.ln_eps), FeatureRole::kAttended};
  out.output = {layer_norm(out.attended.values + feed_forward(out.attended.values, w), w.ln2, w.config.ln_eps),
                FeatureRole::kOutput};
  out.attention = std::move(attn.weights);
  return out;
}

SaPmtOutput run_sa_pmt(const PoseSequence& content, const PoseSequence& style, std::string_view label,
                       const SaPmtWeights& w) {
  const auto token = semantic_token(label, w);
  const auto content_feat = encode_pose(content, PoseRole::kContent, w);
  const auto gated = semantic_gate(encode_pose(style, PoseRole::kStyle, w), token);
  return sa_pmt_forward(content_feat, gated, w);
}

}  // namespace persona
