#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "persona_motion/skeleton.hpp"

namespace persona {

struct RenderConfig {
  int width = 512;
  int height = 512;
  double stroke_width = 3.0;
  double joint_radius = 4.0;
  /// Map the all-frame bounding box onto the canvas with a 5% margin,
  /// preserving aspect ratio. Off: coordinates are canvas fractions.
  bool fit = true;
  /// Pose y grows upward (synthetic poses); false for image-space data.
  bool y_up = true;
  std::optional<double> fps;

  void validate() const;
};

/// One frame: static SVG with 19 <line> bones and 20 <circle> joints.
/// Several frames: the same elements animated with discrete SMIL keyframes.
std::string render_svg(const PoseSequence& seq, const RenderConfig& cfg = {},
                       const JointTopology& topo = canonical_topology());

void render_svg_file(const PoseSequence& seq, const std::filesystem::path& path, const RenderConfig& cfg = {});

}  // namespace persona
