#include "doctest.h"
#include "json.hpp"
#include "persona_motion/errors.hpp"
#include "persona_motion/stylenet.hpp"
#include "persona_motion/synthetic.hpp"
#include "test_support.hpp"

using namespace persona;
using namespace persona::testing;

namespace {

FeatureSequence random_features(Rng& rng, Eigen::Index frames, Eigen::Index width, double lo = -1.0, double hi = 1.0) {
  FeatureSequence f{Eigen::MatrixXd(frames, width), FeatureRole::kContent};
  for (Eigen::Index r = 0; r < frames; ++r) {
    for (Eigen::Index c = 0; c < width; ++c) f.values(r, c) = rng.uniform(lo, hi);
  }
  return f;
}

double population_std(const Eigen::VectorXd& v) {
  return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(v.size()));
}

PoseSequence walk(double swing, double cadence, std::size_t frames = 16) {
  WalkParams p;
  p.frames = frames;
  p.swing = swing;
  p.cadence = cadence;
  return synthetic_walk(p);
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(StyleNetConfig{}.validate());
  StyleNetConfig c;
  c.heads = 5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.d_model = 63;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  CHECK(c.ffn_hidden() == 256);
  CHECK(c.head_dim() == 16);
}

TEST_CASE("content vocabulary") {
  CHECK(content_vocabulary().size() == 20);
  for (const char* label : {"Walk", "Dance", "Skating", "Taichi"}) CHECK(is_content_label(label));
  CHECK_FALSE(is_content_label("walk"));
  CHECK_FALSE(is_content_label("Moonwalk"));
}

TEST_CASE("pose encoders") {
  const auto w = SaPmtWeights::seeded(1);
  SUBCASE("shape") {
    const auto f = encode_pose(walk(0.3, 1.0, 8), PoseRole::kContent, w);
    CHECK(f.frames() == 8);
    CHECK(f.width() == 64);
    CHECK(f.role == FeatureRole::kContent);
    CHECK(encode_pose(walk(0.3, 1.0, 8), PoseRole::kStyle, w).role == FeatureRole::kStyle);
  }
  SUBCASE("zero pose with zero bias") {
    auto zw = w;
    zw.pose_embed_content.bias.setZero();
    const auto f = encode_pose(coincident(3, {0.0, 0.0}), PoseRole::kContent, zw);
    CHECK(f.values.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("identical frames give identical rows") {
    const auto f = encode_pose(rigid_translation(rest_pose(), 4, 0.0, 0.0), PoseRole::kStyle, w);
    for (Eigen::Index r = 1; r < f.frames(); ++r) CHECK(f.values.row(r) == f.values.row(0));
  }
  SUBCASE("content and style encoders differ") {
    const auto seq = walk(0.3, 1.0, 4);
    CHECK(encode_pose(seq, PoseRole::kContent, w).values != encode_pose(seq, PoseRole::kStyle, w).values);
  }
}

TEST_CASE("semantic tokens and gating") {
  const auto w = SaPmtWeights::seeded(9);
  Rng rng(2);
  const auto style = random_features(rng, 6, 64);

  SUBCASE("token entries lie in (0, 1)") {
    for (auto label : content_vocabulary()) {
      const auto t = semantic_token(label, w);
      CHECK(t.embedding.size() == 64);
      CHECK(t.embedding.minCoeff() > 0.0);
      CHECK(t.embedding.maxCoeff() < 1.0);
    }
  }
  SUBCASE("seeded table matches the keyed stream") {
    CHECK(semantic_token("Dance", w).embedding == semantic_token("Dance", 9, 64).embedding);
    CHECK(semantic_token("Dance", 9, 64).embedding != semantic_token("Walk", 9, 64).embedding);
    CHECK(semantic_token("Dance", 9, 64).embedding != semantic_token("Dance", 10, 64).embedding);
  }
  SUBCASE("half gate halves every feature") {
    const SemanticToken half{"Walk", Eigen::VectorXd::Constant(64, 0.5)};
    const auto gated = semantic_gate(style, half);
    CHECK(gated.role == FeatureRole::kGated);
    CHECK(gated.values == style.values * 0.5);
  }
  SUBCASE("gating is a contraction") {
    const auto gated = semantic_gate(style, semantic_token("Boxing", w));
    CHECK((gated.values.array().abs() <= style.values.array().abs()).all());
  }
  SUBCASE("deterministic") {
    const auto a = semantic_gate(style, semantic_token("Taichi", 4, 64));
    const auto b = semantic_gate(style, semantic_token("Taichi", 4, 64));
    CHECK(a.values == b.values);
  }
  SUBCASE("unknown labels") {
    CHECK_THROWS_AS(semantic_token("Moonwalk", w), UnknownLabelError);
    CHECK_THROWS_AS(semantic_token("Moonwalk", 1, 64), UnknownLabelError);
    const SemanticToken bogus{"Moonwalk", Eigen::VectorXd::Constant(64, 0.5)};
    CHECK_THROWS_AS(semantic_gate(style, bogus), UnknownLabelError);
  }
  SUBCASE("width mismatch") {
    const SemanticToken narrow{"Walk", Eigen::VectorXd::Constant(32, 0.5)};
    CHECK_THROWS_AS(semantic_gate(style, narrow), ShapeError);
  }
}

TEST_CASE("AdaIN") {
  SUBCASE("hand example") {
    FeatureSequence content{Eigen::MatrixXd(2, 1), FeatureRole::kContent};
    content.values << 0.0, 2.0;
    FeatureSequence style{Eigen::MatrixXd(2, 1), FeatureRole::kStyle};
    style.values << 3.0, 7.0;  // mean 5, population std 2
    const auto out = adain(content, style);
    CHECK(out.role == FeatureRole::kAdain);
    CHECK(std::abs(out.values(0, 0) - 3.0) < 1e-12);
    CHECK(std::abs(out.values(1, 0) - 7.0) < 1e-12);
  }
  SUBCASE("identity when statistics already match") {
    Rng rng(5);
    const auto content = random_features(rng, 10, 64);
    CHECK((adain(content, content).values - content.values).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("constant content channel maps to the style mean") {
    Rng rng(6);
    auto content = random_features(rng, 5, 4);
    content.values.col(2).setConstant(0.75);
    const auto style = random_features(rng, 7, 4, 2.0, 3.0);
    const auto out = adain(content, style);
    for (Eigen::Index r = 0; r < 5; ++r) CHECK(out.values(r, 2) == doctest::Approx(style.values.col(2).mean()).epsilon(1e-12));
  }
  SUBCASE("output statistics equal style statistics") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      const auto frames = static_cast<Eigen::Index>(2 + trial % 30);
      const auto content = random_features(rng, frames, 16, -3.0, 3.0);
      const auto style = random_features(rng, frames + 3, 16, -5.0, 2.0);
      const auto out = adain(content, style);
      for (Eigen::Index c = 0; c < 16; ++c) {
        REQUIRE(population_std(content.values.col(c)) > 100 * 1e-5);
        CHECK(std::abs(out.values.col(c).mean() - style.values.col(c).mean()) < 1e-9);
        CHECK(std::abs(population_std(out.values.col(c)) - population_std(style.values.col(c))) < 1e-9);
      }
    }
  }
  SUBCASE("shape errors") {
    Rng rng(8);
    CHECK_THROWS_AS(adain(random_features(rng, 3, 4), random_features(rng, 3, 5)), ShapeError);
  }
}

TEST_CASE("positional encoding and encoder") {
  SUBCASE("position zero alternates 0 and 1") {
    const auto pe = positional_encoding(1, 64);
    for (Eigen::Index i = 0; i < 64; ++i) CHECK(pe(0, i) == (i % 2 == 0 ? 0.0 : 1.0));
  }
  SUBCASE("position one") {
    const auto pe = positional_encoding(2, 8);
    CHECK(pe(1, 0) == std::sin(1.0));
    CHECK(pe(1, 1) == std::cos(1.0));
    CHECK(pe(1, 2) == doctest::Approx(std::sin(1.0 / std::sqrt(100.0))).epsilon(1e-14));
  }
  SUBCASE("frame order matters") {
    const auto w = SaPmtWeights::seeded(3);
    Rng rng(3);
    auto ada = random_features(rng, 6, 64);
    ada.role = FeatureRole::kAdain;
    auto swapped = ada;
    swapped.values.row(0).swap(swapped.values.row(5));
    const auto a = sa_pmt_encode(ada, w);
    const auto b = sa_pmt_encode(swapped, w);
    CHECK(a.role == FeatureRole::kEncoded);
    CHECK((a.values.row(0) - b.values.row(5)).cwiseAbs().maxCoeff() > 1e-6);
  }
}

TEST_CASE("layer norm and attention") {
  const auto w = SaPmtWeights::seeded(11);
  Rng rng(11);
  const auto x = random_features(rng, 12, 64, -4.0, 4.0).values;
  SUBCASE("layer norm row statistics") {
    const auto y = layer_norm(x, w.ln1, 1e-5);
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      CHECK(std::abs(y.row(r).mean()) < 1e-9);
      CHECK(std::abs(population_std(y.row(r).transpose()) - 1.0) < 1e-6);
    }
  }
  SUBCASE("constant row stays finite") {
    const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(2, 64, 3.0);
    const auto y = layer_norm(flat, w.ln1, 1e-5);
    CHECK(y.allFinite());
    CHECK(y.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("attention rows are stochastic") {
    const auto result = multi_head_attention(x, w.mha, 4);
    REQUIRE(result.weights.size() == 4);
    CHECK(result.output.rows() == 12);
    CHECK(result.output.cols() == 64);
    for (const auto& a : result.weights) {
      CHECK(a.rows() == 12);
      CHECK(a.cols() == 12);
      CHECK(a.minCoeff() >= 0.0);
      for (Eigen::Index r = 0; r < a.rows(); ++r) CHECK(std::abs(a.row(r).sum() - 1.0) <= 1e-12);
    }
  }
  SUBCASE("large scores do not overflow") {
    const auto result = multi_head_attention(x * 1e4, w.mha, 4);
    CHECK(result.output.allFinite());
  }
}

TEST_CASE("full forward pass") {
  const auto w = SaPmtWeights::seeded(2024);
  const auto content = walk(0.3, 1.0);
  const auto style = walk(0.6, 2.0);

  SUBCASE("stage shapes, roles and statistics") {
    const auto out = run_sa_pmt(content, style, "Walk", w);
    for (const auto* f : {&out.ada, &out.encoded, &out.attended, &out.output}) {
      CHECK(f->frames() == 16);
      CHECK(f->width() == 64);
      CHECK(f->values.allFinite());
    }
    CHECK(out.output.role == FeatureRole::kOutput);
    CHECK(out.attended.role == FeatureRole::kAttended);
    for (Eigen::Index r = 0; r < 16; ++r) {
      CHECK(std::abs(out.output.values.row(r).mean()) < 1e-9);
      CHECK(std::abs(population_std(out.output.values.row(r).transpose()) - 1.0) < 1e-6);
    }
    for (const auto& a : out.attention) {
      for (Eigen::Index r = 0; r < a.rows(); ++r) CHECK(std::abs(a.row(r).sum() - 1.0) <= 1e-12);
    }
  }
  SUBCASE("bitwise deterministic") {
    const auto a = run_sa_pmt(content, style, "Dance", SaPmtWeights::seeded(2024));
    const auto b = run_sa_pmt(content, style, "Dance", SaPmtWeights::seeded(2024));
    CHECK(a.output.values == b.output.values);
    CHECK(a.ada.values == b.ada.values);
    const auto c = run_sa_pmt(content, style, "Dance", SaPmtWeights::seeded(2025));
    CHECK(a.output.values != c.output.values);
  }
  SUBCASE("label changes the output") {
    CHECK(run_sa_pmt(content, style, "Walk", w).output.values != run_sa_pmt(content, style, "Swim", w).output.values);
  }
  SUBCASE("random lengths keep F x d") {
    Rng rng(64);
    for (int trial = 0; trial < 20; ++trial) {
      const auto frames = static_cast<std::size_t>(1 + rng.uniform() * 63.999);
      const auto out = run_sa_pmt(random_pose(rng, frames, 0.5), random_pose(rng, 1 + frames / 2, 0.5), "Jump", w);
      for (const auto* f : {&out.ada, &out.encoded, &out.attended, &out.output}) {
        CHECK(f->frames() == static_cast<Eigen::Index>(frames));
        CHECK(f->width() == 64);
      }
    }
  }
  SUBCASE("width mismatch") {
    Rng rng(1);
    CHECK_THROWS_AS(sa_pmt_forward(random_features(rng, 3, 32), random_features(rng, 3, 64), w), ShapeError);
  }
}

TEST_CASE("weight files") {
  const auto dir = scratch_dir("weights");
  const auto w = SaPmtWeights::seeded(77);
  SUBCASE("round trip is exact") {
    save_weights(w, dir / "w.json");
    const auto back = load_weights(dir / "w.json");
    CHECK(back.mha.query.weight == w.mha.query.weight);
    CHECK(back.ffn_out.bias == w.ffn_out.bias);
    CHECK(back.ln2.gamma == w.ln2.gamma);
    CHECK(back.semantic_table.size() == 20);
    CHECK(back.semantic_table.at("Golf") == w.semantic_table.at("Golf"));
    CHECK(format_weights(back) == format_weights(w));
    const auto a = run_sa_pmt(walk(0.3, 1.0, 5), walk(0.5, 1.5, 5), "Golf", w);
    const auto b = run_sa_pmt(walk(0.3, 1.0, 5), walk(0.5, 1.5, 5), "Golf", back);
    CHECK(a.output.values == b.output.values);
  }
  SUBCASE("smaller model") {
    StyleNetConfig cfg;
    cfg.d_model = 16;
    cfg.heads = 2;
    const auto small = SaPmtWeights::seeded(1, cfg);
    const auto back = parse_weights(format_weights(small));
    CHECK(back.config.d_model == 16);
    CHECK(back.config.heads == 2);
    CHECK(run_sa_pmt(walk(0.3, 1.0, 4), walk(0.3, 1.0, 4), "Walk", back).output.width() == 16);
  }
  SUBCASE("shape mismatch is rejected") {
    auto j = nlohmann::json::parse(format_weights(w));
    j["params"]["mha.key.weight"]["shape"] = {64, 63};
    CHECK_THROWS_AS(parse_weights(j.dump()), SchemaError);
  }
  SUBCASE("missing parameter is rejected") {
    auto j = nlohmann::json::parse(format_weights(w));
    j["params"].erase("ln1.beta");
    CHECK_THROWS_WITH_AS(parse_weights(j.dump()), doctest::Contains("ln1.beta"), SchemaError);
  }
  SUBCASE("heads must divide the width") {
    auto j = nlohmann::json::parse(format_weights(w));
    j["heads"] = 5;
    CHECK_THROWS(parse_weights(j.dump()));
  }
  SUBCASE("malformed text and missing file") {
    CHECK_THROWS_AS(parse_weights("{"), ParseError);
    CHECK_THROWS_AS(load_weights(dir / "absent.json"), IoError);
  }
  SUBCASE("in-memory validation") {
    auto bad = w;
    bad.encoder_out.bias.resize(3);
    CHECK_THROWS_AS(bad.validate(), SchemaError);
    bad = w;
    bad.ffn_hidden.weight(0, 0) = std::nan("");
    CHECK_THROWS_AS(bad.validate(), ValidationError);
  }
}

TEST_CASE("feature export") {
  Rng rng(4);
  auto f = random_features(rng, 3, 64);
  f.role = FeatureRole::kOutput;
  const auto j = nlohmann::json::parse(features_to_json(f));
  CHECK(j["role"] == std::string(to_string(FeatureRole::kOutput)));
  CHECK(j["frames"] == 3);
  CHECK(j["width"] == 64);
  CHECK(j["values"][2][63].get<double>() == f.values(2, 63));
}
