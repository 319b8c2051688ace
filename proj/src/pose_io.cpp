#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "persona_motion/errors.hpp"
#include "persona_motion/format.hpp"
#include "persona_motion/skeleton.hpp"

namespace persona {

namespace {

constexpr double kCoordinateBound = 10.0;

std::size_t line_of_offset(std::string_view text, std::size_t byte) {
  const std::size_t end = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

constexpr const char* kNonFinite = "#nonfinite#";

// Replaces NaN / Infinity tokens and overflowing literals outside strings with a
// marker string, so the offending coordinate can be reported by frame and joint.
std::string mask_non_finite(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  auto is_num_char = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' || c == '+' || c == '-'; };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '"') {
      const std::size_t start = i++;
      while (i < text.size() && text[i] != '"') i += text[i] == '\\' ? 2 : 1;
      ++i;
      out.append(text.substr(start, std::min(i, text.size()) - start));
      continue;
    }
    std::size_t len = 0;
    for (std::string_view tok : {"-Infinity", "Infinity", "-NaN", "NaN"}) {
      if (text.substr(i, tok.size()) == tok) {
        len = tok.size();
        break;
      }
    }
    if (len == 0 && (c == '-' || std::isdigit(static_cast<unsigned char>(c)))) {
      std::size_t j = i;
      while (j < text.size() && is_num_char(text[j])) ++j;
      const std::string literal(text.substr(i, j - i));
      const double v = std::strtod(literal.c_str(), nullptr);
      if (std::isfinite(v)) {
        out += literal;
        i = j;
        continue;
      }
      len = j - i;
    }
    if (len > 0) {
      out += '"';
      out += kNonFinite;
      out += '"';
      i += len;
    } else {
      out += c;
      ++i;
    }
  }
  return out;
}

double read_number(const nlohmann::json& v, std::size_t f, std::size_t j) {
  if (v.is_string() && v.get<std::string>() == kNonFinite) return std::numeric_limits<double>::infinity();
  if (!v.is_number()) {
    throw SchemaError("frame " + std::to_string(f) + ", joint " + std::to_string(j) + ": coordinate is not a number");
  }
  return v.get<double>();
}

}  // namespace

PoseSequence parse_pose(std::string_view text, const PoseLoadOptions& options) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    doc = nlohmann::json::parse(mask_non_finite(text), nullptr, false);
    if (doc.is_discarded()) {
      throw ParseError("malformed pose JSON at line " + std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
    }
  } catch (const nlohmann::json::out_of_range&) {
    doc = nlohmann::json::parse(mask_non_finite(text), nullptr, false);
    if (doc.is_discarded()) throw ParseError("malformed pose JSON: number out of range");
  }
  if (!doc.is_object()) throw SchemaError("pose file must hold a JSON object");

  double fps = 30.0;
  if (doc.contains("fps")) {
    if (!doc["fps"].is_number()) throw SchemaError("\"fps\" must be a number");
    fps = doc["fps"].get<double>();
  }

  const auto& topo = canonical_topology();
  if (!doc.contains("joints") || !doc["joints"].is_array()) throw SchemaError("missing \"joints\" array");
  const auto& names = doc["joints"];
  if (names.size() != kNumJoints) {
    throw SchemaError("expected 20 joints in \"joints\", got " + std::to_string(names.size()));
  }
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    if (!names[j].is_string() || names[j].get<std::string>() != topo.joint_names()[j]) {
      throw SchemaError("joint " + std::to_string(j) + " must be named \"" + std::string(topo.joint_names()[j]) + "\"");
    }
  }

  if (!doc.contains("frames") || !doc["frames"].is_array()) throw SchemaError("missing \"frames\" array");
  const auto& frames = doc["frames"];
  if (frames.empty()) throw SchemaError("\"frames\" must contain at least one frame");

  const double scale = options.pixel_scale.value_or(1.0);
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("pixel scale must be positive");

  std::vector<Point2> joints;
  joints.reserve(frames.size() * kNumJoints);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& frame = frames[f];
    if (!frame.is_array() || frame.size() != kNumJoints) {
      throw SchemaError("frame " + std::to_string(f) + ": expected 20 joints, got " +
                        std::to_string(frame.is_array() ? frame.size() : 0));
    }
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      const auto& xy = frame[j];
      if (!xy.is_array() || xy.size() != 2) {
        throw SchemaError("frame " + std::to_string(f) + ", joint " + std::to_string(j) + ": expected [x, y]");
      }
      Point2 p{read_number(xy[0], f, j) / scale, read_number(xy[1], f, j) / scale};
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw ValidationError("non-finite coordinate at frame " + std::to_string(f) + ", joint " + std::to_string(j));
      }
      if (std::abs(p.x) > kCoordinateBound || std::abs(p.y) > kCoordinateBound) {
        throw ValidationError("coordinate outside [-10, 10] at frame " + std::to_string(f) + ", joint " +
                              std::to_string(j));
      }
      joints.push_back(p);
    }
  }
  return PoseSequence(std::move(joints), fps);
}

PoseSequence load_pose(const std::filesystem::path& path, const PoseLoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("file not found: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pose(buf.str(), options);
}

std::string format_pose(const PoseSequence& seq) {
  const auto& names = canonical_topology().joint_names();
  std::string out = "{\n  \"fps\": " + format_double(seq.fps()) + ",\n  \"joints\": [";
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    if (j) out += ", ";
    out += '"';
    out += names[j];
    out += '"';
  }
  out += "],\n  \"frames\": [\n";
  for (std::size_t f = 0; f < seq.frame_count(); ++f) {
    out += "    [";
    const auto frame = seq.frame(f);
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      if (j) out += ", ";
      out += '[' + format_double(frame[j].x) + ", " + format_double(frame[j].y) + ']';
    }
    out += f + 1 < seq.frame_count() ? "],\n" : "]\n";
  }
  out += "  ]\n}\n";
  return out;
}

void save_pose(const PoseSequence& seq, const std::filesystem::path& path) { write_text_file(path, format_pose(seq)); }

}  // namespace persona
