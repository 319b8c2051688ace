#pragma once

#include <cstdint>

#include "persona_motion/pmsr.hpp"
#include "persona_motion/skeleton.hpp"

namespace persona {

/// Upright standing pose about `height` units tall, feet on y = 0, centred on x = 0.
std::vector<Point2> rest_pose(double height = 3.0);

struct WalkParams {
  std::size_t frames = 24;
  double fps = 30.0;
  double height = 3.0;
  /// Limb swing amplitude in radians.
  double swing = 0.35;
  /// Gait cycles per second.
  double cadence = 1.0;
  /// Forward translation per frame.
  double stride = 0.0;
};

/// Frontal-view gait cycle: limbs rotate about shoulders, hips and knees, so
/// every bone keeps its rest length in every frame.
PoseSequence synthetic_walk(const WalkParams& params);

/// The same pose in every frame, translated by (dx, dy) per frame.
PoseSequence rigid_translation(const std::vector<Point2>& pose, std::size_t frames, double dx, double dy,
                               double fps = 30.0);

/// Seeded random sequence whose coordinates lie in [-1, 1] and whose joint
/// pairs all stay at least `margin` away from zero distance and from the
/// repulsion threshold `delta`, so every PMSR term is differentiable there.
PoseSequence random_smooth_sequence(std::uint64_t seed, std::size_t frames, double delta = 0.1, double margin = 1e-4);

}  // namespace persona
