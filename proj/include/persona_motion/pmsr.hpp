#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "persona_motion/skeleton.hpp"

namespace persona {

/// Physics regularization settings. `delta` is the minimum distance kept
/// between joints that share no bone.
struct PmsrConfig {
  double delta = 0.1;
  double w_stability = 1.0;
  double w_conn = 1.0;
  /// Normalize the repulsion sum by the nonzero adjacency count ||A||_0 = 38
  /// instead of by the 171 pairs it sums.
  bool legacy_adjacency_normalizer = false;

  /// Throws ValidationError on delta <= 0 or negative weights.
  void validate() const;
  double repulsion_normalizer() const;
};

/// Frame-level values. `stability` is the bone-mean squared second difference
/// (zero at the two boundary frames); `conn_plus` / `conn_minus` are the
/// frame's normalized attraction and repulsion sums.
struct FrameLosses {
  double stability = 0.0;
  double conn_plus = 0.0;
  double conn_minus = 0.0;
};

/// Scalar totals relate to `per_frame` by
///   stability  = sum(per_frame.stability)  / (F - 2)
///   conn_plus  = sum(per_frame.conn_plus)  / F
///   conn_minus = sum(per_frame.conn_minus) / F
struct LossReport {
  double stability = 0.0;
  double conn_plus = 0.0;
  double conn_minus = 0.0;
  double conn = 0.0;
  double total = 0.0;
  std::vector<FrameLosses> per_frame;

  std::string to_json() const;
};

/// d(total)/d(coordinate), flattened like PoseSequence::flatten().
struct PoseGradient {
  std::size_t frames = 0;
  std::vector<double> values;

  double norm() const;
};

/// (F-2) x 19 second temporal differences of bone lengths, row r holding
/// l[r+2] - 2 l[r+1] + l[r]. Throws InsufficientFramesError when F < 3.
struct SecondDiff {
  std::size_t rows = 0;
  std::vector<double> values;

  double operator()(std::size_t r, std::size_t bone) const { return values[r * kNumBones + bone]; }
};

SecondDiff second_diff(const LengthMatrix& lengths);

double loss_stability(const PoseSequence& seq, const JointTopology& topo = canonical_topology());
double loss_conn_plus(const PoseSequence& seq, const JointTopology& topo = canonical_topology());
double loss_conn_minus(const PoseSequence& seq, const JointTopology& topo = canonical_topology(),
                       const PmsrConfig& cfg = {});
double loss_conn(const PoseSequence& seq, const JointTopology& topo = canonical_topology(), const PmsrConfig& cfg = {});

LossReport pmsr_total(const PoseSequence& seq, const JointTopology& topo = canonical_topology(),
                      const PmsrConfig& cfg = {});

/// Analytic gradient of pmsr_total().total. Coincident joints and the exact
/// hinge boundary contribute zero (a valid subgradient).
PoseGradient pmsr_grad(const PoseSequence& seq, const JointTopology& topo = canonical_topology(),
                       const PmsrConfig& cfg = {});

/// Central differences of pmsr_total().total with step h per coordinate.
PoseGradient finite_diff_grad(const PoseSequence& seq, const JointTopology& topo, const PmsrConfig& cfg, double h);

/// max_i |a_i - b_i| / max(||a||_inf, ||b||_inf); 0 when both vanish.
double max_relative_error(const PoseGradient& a, const PoseGradient& b);

}  // namespace persona
