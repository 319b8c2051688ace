#include "persona_motion/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "persona_motion/errors.hpp"
#include "persona_motion/skeleton.hpp"

namespace persona {

namespace {

using Json = nlohmann::ordered_json;

bool alphanumeric(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) != 0; });
}

void check_word(std::string_view value, std::string_view field, std::string_view name) {
  if (value.empty()) throw ParseError("annotation \"" + std::string(name) + "\": empty " + std::string(field) + " field");
  if (!alphanumeric(value)) {
    throw ParseError("annotation \"" + std::string(name) + "\": " + std::string(field) + " field \"" +
                     std::string(value) + "\" must be alphanumeric");
  }
}

CorpusExpectation parse_expectation(const Json& j) {
  if (!j.is_object()) throw SchemaError("manifest \"expected\" must be an object");
  CorpusExpectation e;
  auto read = [&](const char* key, std::optional<std::size_t>& slot) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_unsigned()) throw SchemaError(std::string("manifest expected.") + key + " must be a count");
    slot = j[key].get<std::size_t>();
  };
  read("styles", e.styles);
  read("contents", e.contents);
  read("frames", e.frames);
  return e;
}

std::string row_text(const StatsRow& r, std::size_t width) {
  std::ostringstream os;
  os << "  " << r.key << std::string(width > r.key.size() ? width - r.key.size() : 0, ' ') << "  " << r.entries
     << " entries  " << r.frames << " frames\n";
  return os.str();
}

Json rows_json(const std::vector<StatsRow>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows) arr.push_back({{"key", r.key}, {"entries", r.entries}, {"frames", r.frames}});
  return arr;
}

}  // namespace

std::string Annotation::format() const {
  std::string num = std::to_string(number);
  if (num.size() < 2) num.insert(0, 2 - num.size(), '0');
  return content + "_" + style + "_" + num;
}

Annotation parse_annotation(std::string_view name) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = name.find('_', start);
    fields.push_back(name.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (fields.size() != 3) {
    throw ParseError("annotation \"" + std::string(name) + "\": expected 3 underscore-separated fields " +
                     "(Content_Style_Number), got " + std::to_string(fields.size()));
  }
  check_word(fields[0], "content", name);
  check_word(fields[1], "style", name);

  const auto number = fields[2];
  if (number.empty()) throw ParseError("annotation \"" + std::string(name) + "\": empty number field");
  if (!std::all_of(number.begin(), number.end(), [](unsigned char c) { return std::isdigit(c) != 0; })) {
    throw ParseError("annotation \"" + std::string(name) + "\": number field \"" + std::string(number) +
                     "\" is not numeric");
  }
  unsigned value = 0;
  const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
  if (ec != std::errc() || ptr != number.data() + number.size()) {
    throw ParseError("annotation \"" + std::string(name) + "\": number field out of range");
  }
  if (value < 1) throw ParseError("annotation \"" + std::string(name) + "\": number field must be at least 1");
  return {std::string(fields[0]), std::string(fields[1]), value};
}

Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed manifest JSON: ") + e.what());
  }
  Manifest m;
  const Json* entries = &doc;
  if (doc.is_object()) {
    if (!doc.contains("entries")) throw SchemaError("manifest object needs an \"entries\" array");
    entries = &doc["entries"];
    if (doc.contains("expected")) m.expected = parse_expectation(doc["expected"]);
  }
  if (!entries->is_array()) throw SchemaError("manifest entries must be an array");

  for (std::size_t i = 0; i < entries->size(); ++i) {
    const auto& e = (*entries)[i];
    const std::string where = "manifest entry " + std::to_string(i);
    if (!e.is_object()) throw SchemaError(where + " must be an object");
    if (!e.contains("name") || !e["name"].is_string()) throw SchemaError(where + ": missing string \"name\"");
    if (!e.contains("pose_path") || !e["pose_path"].is_string()) {
      throw SchemaError(where + ": missing string \"pose_path\"");
    }
    if (!e.contains("frames") || !e["frames"].is_number_unsigned()) {
      throw SchemaError(where + ": \"frames\" must be a nonnegative integer");
    }
    ManifestEntry entry;
    entry.name = e["name"].get<std::string>();
    try {
      entry.annotation = parse_annotation(entry.name);
    } catch (const ParseError& err) {
      throw ParseError(where + ": " + err.what());
    }
    const std::filesystem::path pose = e["pose_path"].get<std::string>();
    entry.pose_path = pose.is_absolute() || base_dir.empty() ? pose : base_dir / pose;
    entry.frames = e["frames"].get<std::size_t>();
    m.entries.push_back(std::move(entry));
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("file not found: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.parent_path());
}

bool ValidationReport::ok() const {
  return duplicates.empty() && missing_files.empty() && pose_problems.empty() && count_mismatches.empty();
}

ValidationReport validate_manifest(const Manifest& manifest, const ValidateOptions& options) {
  ValidationReport r;
  r.entries = manifest.entries.size();
  std::set<std::string> styles;
  std::set<std::string> contents;
  std::map<std::string, std::size_t> first_seen;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    styles.insert(e.annotation.style);
    contents.insert(e.annotation.content);
    r.total_frames += e.frames;
    if (auto [it, inserted] = first_seen.emplace(e.annotation.format(), i); !inserted) {
      r.duplicates.push_back({e.name, it->second, i});
    }
    std::error_code ec;
    if (!std::filesystem::is_regular_file(e.pose_path, ec)) {
      r.missing_files.push_back({i, e.pose_path.string()});
      continue;
    }
    if (options.check_pose_frames) {
      try {
        const auto seq = load_pose(e.pose_path);
        if (seq.frame_count() != e.frames) {
          r.pose_problems.push_back({i, "declared " + std::to_string(e.frames) + " frames, file has " +
                                            std::to_string(seq.frame_count())});
        }
      } catch (const Error& err) {
        r.pose_problems.push_back({i, err.what()});
      }
    }
  }
  r.styles = styles.size();
  r.contents = contents.size();

  auto expect = [&](const char* field, const std::optional<std::size_t>& want, std::size_t got) {
    if (want && *want != got) r.count_mismatches.push_back({field, *want, got});
  };
  expect("styles", manifest.expected.styles, r.styles);
  expect("contents", manifest.expected.contents, r.contents);
  expect("frames", manifest.expected.frames, r.total_frames);
  return r;
}

std::string ValidationReport::to_json() const {
  Json j;
  j["ok"] = ok();
  j["entries"] = entries;
  j["styles"] = styles;
  j["contents"] = contents;
  j["total_frames"] = total_frames;
  Json dup = Json::array();
  for (const auto& d : duplicates) dup.push_back({{"name", d.name}, {"first", d.first_index}, {"second", d.second_index}});
  j["duplicates"] = std::move(dup);
  Json miss = Json::array();
  for (const auto& m : missing_files) miss.push_back({{"index", m.index}, {"path", m.path}});
  j["missing_files"] = std::move(miss);
  Json poses = Json::array();
  for (const auto& p : pose_problems) poses.push_back({{"index", p.index}, {"message", p.message}});
  j["pose_problems"] = std::move(poses);
  Json counts = Json::array();
  for (const auto& c : count_mismatches) {
    counts.push_back({{"field", c.field}, {"expected", c.expected}, {"actual", c.actual}});
  }
  j["count_mismatches"] = std::move(counts);
  return j.dump(2) + "\n";
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  os << "entries: " << entries << "\nstyles: " << styles << "\ncontents: " << contents << "\nframes: " << total_frames
     << "\n";
  for (const auto& d : duplicates) {
    os << "duplicate annotation " << d.name << " at entries " << d.first_index << " and " << d.second_index << "\n";
  }
  for (const auto& m : missing_files) os << "missing pose file for entry " << m.index << ": " << m.path << "\n";
  for (const auto& p : pose_problems) os << "pose file for entry " << p.index << ": " << p.message << "\n";
  for (const auto& c : count_mismatches) {
    os << c.field << " mismatch: expected " << c.expected << ", found " << c.actual << "\n";
  }
  os << (ok() ? "OK\n" : "FAILED\n");
  return os.str();
}

StatsTable summarize(const Manifest& manifest) {
  std::map<std::string, StatsRow> contents;
  std::map<std::string, StatsRow> styles;
  StatsTable t;
  for (const auto& e : manifest.entries) {
    for (auto* table : {&contents, &styles}) {
      const auto& key = table == &contents ? e.annotation.content : e.annotation.style;
      auto& row = (*table)[key];
      row.key = key;
      ++row.entries;
      row.frames += e.frames;
    }
    ++t.totals.entries;
    t.totals.frames += e.frames;
  }
  for (auto& [k, row] : contents) t.by_content.push_back(row);
  for (auto& [k, row] : styles) t.by_style.push_back(row);
  return t;
}

std::string StatsTable::to_json() const {
  Json j;
  j["contents"] = rows_json(by_content);
  j["styles"] = rows_json(by_style);
  j["total"] = {{"entries", totals.entries}, {"frames", totals.frames}};
  return j.dump(2) + "\n";
}

std::string StatsTable::to_text() const {
  std::size_t width = 5;
  for (const auto* rows : {&by_content, &by_style}) {
    for (const auto& r : *rows) width = std::max(width, r.key.size());
  }
  std::string out = "contents (" + std::to_string(by_content.size()) + ")\n";
  for (const auto& r : by_content) out += row_text(r, width);
  out += "styles (" + std::to_string(by_style.size()) + ")\n";
  for (const auto& r : by_style) out += row_text(r, width);
  out += row_text(totals, width);
  return out;
}

}  // namespace persona
