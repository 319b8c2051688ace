#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace persona {

inline constexpr std::size_t kNumJoints = 20;
inline constexpr std::size_t kNumBones = kNumJoints - 1;
inline constexpr std::size_t kNumPairs = kNumJoints * (kNumJoints - 1) / 2;
inline constexpr std::size_t kNumNonAdjacentPairs = kNumPairs - kNumBones;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Unordered joint pair with first < second.
struct JointPair {
  std::size_t first = 0;
  std::size_t second = 0;

  friend bool operator==(const JointPair&, const JointPair&) = default;
};

using AdjacencyMatrix = std::array<std::array<std::uint8_t, kNumJoints>, kNumJoints>;
using DistanceMatrix = std::array<std::array<double, kNumJoints>, kNumJoints>;

/// The fixed 20-joint skeleton: joint names, bone tree and its adjacency.
class JointTopology {
 public:
  const std::array<std::string_view, kNumJoints>& joint_names() const { return names_; }
  const std::array<JointPair, kNumBones>& bones() const { return bones_; }
  const AdjacencyMatrix& adjacency() const { return adjacency_; }

  /// Every unordered pair i<j not joined by a bone, in lexicographic order.
  const std::array<JointPair, kNumNonAdjacentPairs>& non_adjacent_pairs() const { return non_adjacent_; }

  bool connected(std::size_t i, std::size_t j) const { return adjacency_[i][j] != 0; }

  std::optional<std::size_t> joint_index(std::string_view name) const;

 private:
  friend const JointTopology& canonical_topology();
  JointTopology();

  std::array<std::string_view, kNumJoints> names_;
  std::array<JointPair, kNumBones> bones_;
  AdjacencyMatrix adjacency_{};
  std::array<JointPair, kNumNonAdjacentPairs> non_adjacent_{};
};

/// Returns the process-wide canonical topology (COCO-18 plus two foot tips).
const JointTopology& canonical_topology();

/// F x 20 array of 2D joint coordinates, row-major by frame.
///
/// Construction rejects empty sequences, partial frames, non-finite values and
/// non-positive frame rates. The [-10, 10] sanity bound is applied by the
/// file loader, not here, so optimizer iterates are never rejected mid-run.
class PoseSequence {
 public:
  PoseSequence(std::vector<Point2> joints, double fps = 30.0);

  std::size_t frame_count() const { return joints_.size() / kNumJoints; }
  double fps() const { return fps_; }

  const Point2& at(std::size_t frame, std::size_t joint) const { return joints_[frame * kNumJoints + joint]; }
  std::span<const Point2> frame(std::size_t f) const {
    return std::span<const Point2>(joints_).subspan(f * kNumJoints, kNumJoints);
  }
  std::span<const Point2> joints() const { return joints_; }

  /// Coordinates flattened as x0, y0, x1, y1, ...
  std::vector<double> flatten() const;
  static PoseSequence from_flat(std::span<const double> coords, double fps = 30.0);

  friend bool operator==(const PoseSequence&, const PoseSequence&) = default;

 private:
  std::vector<Point2> joints_;
  double fps_;
};

/// F x 19 bone lengths, row-major by frame, columns in topology bone order.
struct LengthMatrix {
  std::size_t frames = 0;
  std::vector<double> values;

  double operator()(std::size_t f, std::size_t bone) const { return values[f * kNumBones + bone]; }
};

/// Euclidean distance with a fixed evaluation order shared by every loss.
inline double distance(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

LengthMatrix bone_lengths(const PoseSequence& seq, const JointTopology& topo = canonical_topology());

/// Throws std::out_of_range when f >= F.
DistanceMatrix distance_matrix(const PoseSequence& seq, std::size_t f);

struct PoseLoadOptions {
  /// When set, raw coordinates are divided by this value before validation,
  /// which maps pixel-space files into the normalized range.
  std::optional<double> pixel_scale;
};

PoseSequence load_pose(const std::filesystem::path& path, const PoseLoadOptions& options = {});
PoseSequence parse_pose(std::string_view text, const PoseLoadOptions& options = {});

/// Canonical JSON text for a pose; doubles printed with 17 significant digits.
std::string format_pose(const PoseSequence& seq);
void save_pose(const PoseSequence& seq, const std::filesystem::path& path);

}  // namespace persona
