#include <fstream>
#include <sstream>

#include "json.hpp"
#include "persona_motion/errors.hpp"
#include "persona_motion/format.hpp"
#include "persona_motion/stylenet.hpp"

namespace persona {

namespace {

using Json = nlohmann::ordered_json;

Json matrix_entry(const Eigen::MatrixXd& m) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"shape", {m.rows(), m.cols()}}, {"data", std::move(data)}};
}

Json vector_entry(const Eigen::VectorXd& v) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) data.push_back(v(i));
  return {{"shape", {v.size()}}, {"data", std::move(data)}};
}

const Json& entry(const Json& params, const std::string& name) {
  if (!params.contains(name)) throw SchemaError("weight file is missing parameter \"" + name + "\"");
  const auto& e = params[name];
  if (!e.is_object() || !e.contains("shape") || !e.contains("data") || !e["shape"].is_array() ||
      !e["data"].is_array()) {
    throw SchemaError("parameter \"" + name + "\" needs \"shape\" and \"data\" arrays");
  }
  return e;
}

std::vector<double> read_data(const Json& e, const std::string& name, std::size_t expected) {
  const auto& data = e["data"];
  if (data.size() != expected) {
    throw SchemaError("parameter \"" + name + "\": shape holds " + std::to_string(expected) + " values, data has " +
                      std::to_string(data.size()));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : data) {
    if (!v.is_number()) throw SchemaError("parameter \"" + name + "\": non-numeric entry");
    out.push_back(v.get<double>());
  }
  return out;
}

Eigen::MatrixXd read_matrix(const Json& params, const std::string& name, Eigen::Index rows, Eigen::Index cols) {
  const auto& e = entry(params, name);
  const auto& shape = e["shape"];
  if (shape.size() != 2 || shape[0] != rows || shape[1] != cols) {
    throw SchemaError("parameter \"" + name + "\": expected shape [" + std::to_string(rows) + ", " +
                      std::to_string(cols) + "], got " + shape.dump());
  }
  const auto data = read_data(e, name, static_cast<std::size_t>(rows * cols));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

Eigen::VectorXd read_vector(const Json& params, const std::string& name, Eigen::Index size) {
  const auto& e = entry(params, name);
  const auto& shape = e["shape"];
  if (shape.size() != 1 || shape[0] != size) {
    throw SchemaError("parameter \"" + name + "\": expected shape [" + std::to_string(size) + "], got " +
                      shape.dump());
  }
  const auto data = read_data(e, name, static_cast<std::size_t>(size));
  return Eigen::Map<const Eigen::VectorXd>(data.data(), size);
}

// W is SaPmtWeights or const SaPmtWeights.
template <typename W, typename Fn>
void for_each_affine(W& w, Fn&& fn) {
  fn("pose_embed_content", w.pose_embed_content);
  fn("pose_embed_style", w.pose_embed_style);
  fn("mlp.hidden", w.mlp_hidden);
  fn("mlp.out", w.mlp_out);
  fn("encoder.hidden", w.encoder_hidden);
  fn("encoder.out", w.encoder_out);
  fn("mha.query", w.mha.query);
  fn("mha.key", w.mha.key);
  fn("mha.value", w.mha.value);
  fn("mha.output", w.mha.output);
  fn("ffn.hidden", w.ffn_hidden);
  fn("ffn.out", w.ffn_out);
}

}  // namespace

std::string format_weights(const SaPmtWeights& w) {
  Json params = Json::object();
  for_each_affine(w, [&](const std::string& name, const Affine& a) {
    params[name + ".weight"] = matrix_entry(a.weight);
    params[name + ".bias"] = vector_entry(a.bias);
  });
  params["ln1.gamma"] = vector_entry(w.ln1.gamma);
  params["ln1.beta"] = vector_entry(w.ln1.beta);
  params["ln2.gamma"] = vector_entry(w.ln2.gamma);
  params["ln2.beta"] = vector_entry(w.ln2.beta);
  for (const auto& [label, logits] : w.semantic_table) params["semantic." + label] = vector_entry(logits);

  Json doc;
  doc["d_model"] = w.config.d_model;
  doc["heads"] = w.config.heads;
  doc["params"] = std::move(params);
  return doc.dump() + "\n";
}

SaPmtWeights parse_weights(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed weight file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("d_model") || !doc.contains("heads") || !doc.contains("params") ||
      !doc["d_model"].is_number_unsigned() || !doc["heads"].is_number_unsigned() || !doc["params"].is_object()) {
    throw SchemaError("weight file needs unsigned \"d_model\", \"heads\" and a \"params\" object");
  }

  SaPmtWeights w;
  w.config.d_model = doc["d_model"].get<std::size_t>();
  w.config.heads = doc["heads"].get<std::size_t>();
  w.config.validate();
  const auto d = static_cast<Eigen::Index>(w.config.d_model);
  const auto hidden = static_cast<Eigen::Index>(w.config.ffn_hidden());
  const auto pose_in = static_cast<Eigen::Index>(kNumJoints * 2);
  const auto& params = doc["params"];

  for_each_affine(w, [&](const std::string& name, Affine& a) {
    Eigen::Index out = d;
    Eigen::Index in = d;
    if (name.starts_with("pose_embed")) in = pose_in;
    if (name == "ffn.hidden") out = hidden;
    if (name == "ffn.out") in = hidden;
    a.weight = read_matrix(params, name + ".weight", out, in);
    a.bias = read_vector(params, name + ".bias", out);
  });
  w.ln1 = {read_vector(params, "ln1.gamma", d), read_vector(params, "ln1.beta", d)};
  w.ln2 = {read_vector(params, "ln2.gamma", d), read_vector(params, "ln2.beta", d)};
  for (const auto& [key, value] : params.items()) {
    if (!key.starts_with("semantic.")) continue;
    const std::string label = key.substr(9);
    if (!is_content_label(label)) throw SchemaError("weight file: unknown semantic label \"" + label + "\"");
    w.semantic_table[label] = read_vector(params, key, d);
  }
  w.validate();
  return w;
}

SaPmtWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("file not found: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_weights(buf.str());
}

void save_weights(const SaPmtWeights& w, const std::filesystem::path& path) {
  write_text_file(path, format_weights(w));
}

std::string features_to_json(const FeatureSequence& features) {
  Json doc;
  doc["role"] = std::string(to_string(features.role));
  doc["frames"] = features.frames();
  doc["width"] = features.width();
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < features.frames(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < features.width(); ++c) row.push_back(features.values(r, c));
    rows.push_back(std::move(row));
  }
  doc["values"] = std::move(rows);
  return doc.dump() + "\n";
}

}  // namespace persona
