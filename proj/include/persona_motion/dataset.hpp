#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace persona {

/// "Content_Style_Number" video label, e.g. Walk_Trump_05.
struct Annotation {
  std::string content;
  std::string style;
  unsigned number = 1;

  /// Number zero-padded to two digits.
  std::string format() const;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

/// Throws ParseError naming the offending field.
Annotation parse_annotation(std::string_view name);

struct ManifestEntry {
  std::string name;
  Annotation annotation;
  std::filesystem::path pose_path;  // resolved against the manifest directory
  std::size_t frames = 0;
};

/// Corpus totals a manifest may assert about itself.
struct CorpusExpectation {
  std::optional<std::size_t> styles;
  std::optional<std::size_t> contents;
  std::optional<std::size_t> frames;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  CorpusExpectation expected;
};

/// Accepts either a bare array of {name, pose_path, frames} records or an
/// object {"entries": [...], "expected": {"styles", "contents", "frames"}}.
Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {});
Manifest load_manifest(const std::filesystem::path& path);

struct DuplicateAnnotation {
  std::string name;
  std::size_t first_index = 0;
  std::size_t second_index = 0;
};

struct MissingFile {
  std::size_t index = 0;
  std::string path;
};

struct PoseFileProblem {
  std::size_t index = 0;
  std::string message;
};

struct CountMismatch {
  std::string field;
  std::size_t expected = 0;
  std::size_t actual = 0;
};

struct ValidationReport {
  std::size_t entries = 0;
  std::size_t styles = 0;
  std::size_t contents = 0;
  std::size_t total_frames = 0;
  std::vector<DuplicateAnnotation> duplicates;
  std::vector<MissingFile> missing_files;
  std::vector<PoseFileProblem> pose_problems;
  std::vector<CountMismatch> count_mismatches;

  bool ok() const;
  std::string to_json() const;
  std::string to_text() const;
};

struct ValidateOptions {
  /// Load every pose file and compare its frame count with the declared one.
  bool check_pose_frames = false;
};

/// Problems are collected in the report, never thrown.
ValidationReport validate_manifest(const Manifest& manifest, const ValidateOptions& options = {});

struct StatsRow {
  std::string key;
  std::size_t entries = 0;
  std::size_t frames = 0;
};

struct StatsTable {
  std::vector<StatsRow> by_content;  // lexicographic
  std::vector<StatsRow> by_style;    // lexicographic
  StatsRow totals{"total"};

  std::string to_json() const;
  std::string to_text() const;
};

StatsTable summarize(const Manifest& manifest);

}  // namespace persona
