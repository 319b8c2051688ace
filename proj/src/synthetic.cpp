#include "persona_motion/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "persona_motion/errors.hpp"
#include "persona_motion/random.hpp"

namespace persona {

namespace {

// Unit-height layout, indices follow the canonical joint order.
constexpr std::array<Point2, kNumJoints> kRestLayout = {{
    {0.00, 0.90}, {0.00, 0.80}, {-0.18, 0.78}, {-0.25, 0.58}, {-0.28, 0.40}, {0.18, 0.78}, {0.25, 0.58},
    {0.28, 0.40}, {-0.10, 0.45}, {-0.11, 0.24}, {-0.12, 0.03}, {0.10, 0.45}, {0.11, 0.24}, {0.12, 0.03},
    {-0.03, 0.93}, {0.03, 0.93}, {-0.07, 0.91}, {0.07, 0.91}, {-0.17, 0.00}, {0.17, 0.00},
}};

Point2 rotate_about(const Point2& p, const Point2& pivot, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double x = p.x - pivot.x;
  const double y = p.y - pivot.y;
  return {pivot.x + c * x - s * y, pivot.y + s * x + c * y};
}

bool differentiable_everywhere(std::span<const Point2> pose, const JointTopology& topo, double delta, double margin) {
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    for (std::size_t j = i + 1; j < kNumJoints; ++j) {
      const double d = distance(pose[i], pose[j]);
      if (d < margin) return false;
      if (!topo.connected(i, j) && std::abs(d - delta) < margin) return false;
    }
  }
  return true;
}

}  // namespace

std::vector<Point2> rest_pose(double height) {
  std::vector<Point2> pose(kRestLayout.begin(), kRestLayout.end());
  for (auto& p : pose) p = {p.x * height, p.y * height};
  return pose;
}

PoseSequence synthetic_walk(const WalkParams& params) {
  if (params.frames == 0) throw ValidationError("walk needs at least one frame");
  const auto base = rest_pose(params.height);
  std::vector<Point2> joints;
  joints.reserve(params.frames * kNumJoints);
  for (std::size_t f = 0; f < params.frames; ++f) {
    const double phase = 2.0 * std::numbers::pi * params.cadence * static_cast<double>(f) / params.fps;
    const double a = params.swing * std::sin(phase);
    auto pose = base;
    // Legs sway together and the arms counter-sway, so no limbs cross.
    for (std::size_t j : {3, 4}) pose[j] = rotate_about(pose[j], base[2], -a);
    for (std::size_t j : {6, 7}) pose[j] = rotate_about(pose[j], base[5], -a);
    for (std::size_t j : {9, 10, 18}) pose[j] = rotate_about(pose[j], base[8], a);
    for (std::size_t j : {12, 13, 19}) pose[j] = rotate_about(pose[j], base[11], a);
    // Alternating outward knee flexion.
    const double bend_r = 0.5 * params.swing * std::max(0.0, std::cos(phase));
    const double bend_l = 0.5 * params.swing * std::max(0.0, -std::cos(phase));
    for (std::size_t j : {10, 18}) pose[j] = rotate_about(pose[j], pose[9], -bend_r);
    for (std::size_t j : {13, 19}) pose[j] = rotate_about(pose[j], pose[12], bend_l);
    const double shift = params.stride * static_cast<double>(f);
    for (auto& p : pose) joints.push_back({p.x + shift, p.y});
  }
  return PoseSequence(std::move(joints), params.fps);
}

PoseSequence rigid_translation(const std::vector<Point2>& pose, std::size_t frames, double dx, double dy, double fps) {
  if (pose.size() != kNumJoints) throw SchemaError("pose must have 20 joints");
  std::vector<Point2> joints;
  joints.reserve(frames * kNumJoints);
  for (std::size_t f = 0; f < frames; ++f) {
    for (const auto& p : pose) {
      joints.push_back({p.x + dx * static_cast<double>(f), p.y + dy * static_cast<double>(f)});
    }
  }
  return PoseSequence(std::move(joints), fps);
}

PoseSequence random_smooth_sequence(std::uint64_t seed, std::size_t frames, double delta, double margin) {
  const auto& topo = canonical_topology();
  Rng rng(seed);
  std::vector<Point2> joints;
  joints.reserve(frames * kNumJoints);
  std::vector<Point2> pose(kNumJoints);
  for (std::size_t f = 0; f < frames; ++f) {
    do {
      for (auto& p : pose) p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    } while (!differentiable_everywhere(pose, topo, delta, margin));
    joints.insert(joints.end(), pose.begin(), pose.end());
  }
  return PoseSequence(std::move(joints));
}

}  // namespace persona
