#include "persona_motion/skeleton.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "persona_motion/errors.hpp"

namespace persona {

namespace {

constexpr std::array<std::string_view, kNumJoints> kJointNames = {
    "nose",    "neck",    "r-shoulder", "r-elbow", "r-wrist", "l-shoulder", "l-elbow",
    "l-wrist", "r-hip",   "r-knee",     "r-ankle", "l-hip",   "l-knee",     "l-ankle",
    "r-eye",   "l-eye",   "r-ear",      "l-ear",   "r-foot-tip", "l-foot-tip",
};

constexpr std::array<JointPair, kNumBones> kBones = {{
    {0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 5}, {5, 6}, {6, 7}, {1, 8}, {8, 9}, {9, 10},
    {1, 11}, {11, 12}, {12, 13}, {0, 14}, {0, 15}, {14, 16}, {15, 17}, {10, 18}, {13, 19},
}};

}  // namespace

JointTopology::JointTopology() : names_(kJointNames), bones_(kBones) {
  for (const auto& b : bones_) {
    adjacency_[b.first][b.second] = 1;
    adjacency_[b.second][b.first] = 1;
  }
  std::size_t n = 0;
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    for (std::size_t j = i + 1; j < kNumJoints; ++j) {
      if (!adjacency_[i][j]) non_adjacent_[n++] = {i, j};
    }
  }
}

std::optional<std::size_t> JointTopology::joint_index(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

const JointTopology& canonical_topology() {
  static const JointTopology topo;
  return topo;
}

PoseSequence::PoseSequence(std::vector<Point2> joints, double fps) : joints_(std::move(joints)), fps_(fps) {
  if (joints_.empty()) throw ValidationError("pose sequence must contain at least one frame");
  if (joints_.size() % kNumJoints != 0) {
    throw SchemaError("pose sequence size " + std::to_string(joints_.size()) + " is not a multiple of " +
                      std::to_string(kNumJoints) + " joints");
  }
  if (!std::isfinite(fps_) || fps_ <= 0.0) throw ValidationError("fps must be positive and finite");
  for (std::size_t k = 0; k < joints_.size(); ++k) {
    if (!std::isfinite(joints_[k].x) || !std::isfinite(joints_[k].y)) {
      throw ValidationError("non-finite coordinate at frame " + std::to_string(k / kNumJoints) + ", joint " +
                            std::to_string(k % kNumJoints));
    }
  }
}

std::vector<double> PoseSequence::flatten() const {
  std::vector<double> out;
  out.reserve(joints_.size() * 2);
  for (const auto& p : joints_) {
    out.push_back(p.x);
    out.push_back(p.y);
  }
  return out;
}

PoseSequence PoseSequence::from_flat(std::span<const double> coords, double fps) {
  if (coords.size() % 2 != 0) throw SchemaError("flat coordinate array has odd length");
  std::vector<Point2> joints(coords.size() / 2);
  for (std::size_t k = 0; k < joints.size(); ++k) joints[k] = {coords[2 * k], coords[2 * k + 1]};
  return PoseSequence(std::move(joints), fps);
}

LengthMatrix bone_lengths(const PoseSequence& seq, const JointTopology& topo) {
  LengthMatrix out;
  out.frames = seq.frame_count();
  out.values.resize(out.frames * kNumBones);
  for (std::size_t f = 0; f < out.frames; ++f) {
    const auto pose = seq.frame(f);
    for (std::size_t k = 0; k < kNumBones; ++k) {
      const auto& bone = topo.bones()[k];
      out.values[f * kNumBones + k] = distance(pose[bone.first], pose[bone.second]);
    }
  }
  return out;
}

DistanceMatrix distance_matrix(const PoseSequence& seq, std::size_t f) {
  if (f >= seq.frame_count()) {
    throw std::out_of_range("frame index " + std::to_string(f) + " out of range for " +
                            std::to_string(seq.frame_count()) + " frames");
  }
  const auto pose = seq.frame(f);
  DistanceMatrix d{};
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    for (std::size_t j = i + 1; j < kNumJoints; ++j) {
      d[i][j] = d[j][i] = distance(pose[i], pose[j]);
    }
  }
  return d;
}

}  // namespace persona
