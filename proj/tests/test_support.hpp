#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "persona_motion/pmsr.hpp"
#include "persona_motion/random.hpp"
#include "persona_motion/skeleton.hpp"

namespace persona::testing {

inline std::filesystem::path scratch_dir(const std::string& name) {
  std::filesystem::path root;
  if (const char* env = std::getenv("PERSONA_TEST_TMP")) {
    root = env;
  } else {
    root = std::filesystem::temp_directory_path() / "persona_motion_tests";
  }
  auto dir = root / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

/// Uniform random joints in [-lo, hi] per coordinate.
inline PoseSequence random_pose(Rng& rng, std::size_t frames, double half_width = 1.0) {
  std::vector<Point2> joints(frames * kNumJoints);
  for (auto& p : joints) p = {rng.uniform(-half_width, half_width), rng.uniform(-half_width, half_width)};
  return PoseSequence(std::move(joints));
}

/// Applies the same rotation + translation to every joint of every frame.
inline PoseSequence apply_isometry(const PoseSequence& seq, double angle, double tx, double ty) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  std::vector<Point2> joints;
  for (const auto& p : seq.joints()) joints.push_back({c * p.x - s * p.y + tx, s * p.x + c * p.y + ty});
  return PoseSequence(std::move(joints), seq.fps());
}

inline PoseSequence scaled(const PoseSequence& seq, double s) {
  std::vector<Point2> joints;
  for (const auto& p : seq.joints()) joints.push_back({s * p.x, s * p.y});
  return PoseSequence(std::move(joints), seq.fps());
}

/// Every joint at the same point in every frame.
inline PoseSequence coincident(std::size_t frames, Point2 at = {0.3, 0.3}) {
  return PoseSequence(std::vector<Point2>(frames * kNumJoints, at));
}

inline double rel_change(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Naive reference losses: triple loops straight from the formulas, with the
// same left-to-right summation order as the production code.
namespace reference {

inline double dist(const PoseSequence& s, std::size_t f, std::size_t i, std::size_t j) {
  const double dx = s.at(f, i).x - s.at(f, j).x;
  const double dy = s.at(f, i).y - s.at(f, j).y;
  return std::sqrt(dx * dx + dy * dy);
}

inline double stability(const PoseSequence& s, const JointTopology& topo) {
  const std::size_t F = s.frame_count();
  double total = 0.0;
  for (std::size_t f = 1; f + 1 < F; ++f) {
    double frame = 0.0;
    for (std::size_t k = 0; k < kNumBones; ++k) {
      const auto [i, j] = topo.bones()[k];
      const double dd = dist(s, f + 1, i, j) - 2.0 * dist(s, f, i, j) + dist(s, f - 1, i, j);
      frame += dd * dd;
    }
    total += frame / 19.0;
  }
  return total / static_cast<double>(F - 2);
}

inline double conn_plus(const PoseSequence& s, const JointTopology& topo) {
  double total = 0.0;
  for (std::size_t f = 0; f < s.frame_count(); ++f) {
    double frame = 0.0;
    for (std::size_t k = 0; k < kNumBones; ++k) frame += dist(s, f, topo.bones()[k].first, topo.bones()[k].second);
    total += frame / 19.0;
  }
  return total / static_cast<double>(s.frame_count());
}

inline double conn_minus(const PoseSequence& s, const JointTopology& topo, double delta) {
  double total = 0.0;
  for (std::size_t f = 0; f < s.frame_count(); ++f) {
    double frame = 0.0;
    for (std::size_t i = 0; i < kNumJoints; ++i) {
      for (std::size_t j = i + 1; j < kNumJoints; ++j) {
        if (topo.adjacency()[i][j]) continue;
        frame += std::max(0.0, delta - dist(s, f, i, j));
      }
    }
    total += frame / 171.0;
  }
  return total / static_cast<double>(s.frame_count());
}

}  // namespace reference

}  // namespace persona::testing
