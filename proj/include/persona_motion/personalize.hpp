#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "persona_motion/pmsr.hpp"
#include "persona_motion/skeleton.hpp"

namespace persona {

struct PersonalizeConfig {
  double w_content = 1.0;
  double w_style = 1.0;
  double w_stability = 1.0;
  double w_conn = 1.0;
  double delta = 0.1;
  bool legacy_adjacency_normalizer = false;

  /// Initial trial step. Each later line search starts at twice the last
  /// accepted step and halves until the Armijo condition holds.
  double step = 1e-2;
  std::size_t max_iters = 2000;
  /// Relative decrease threshold; `patience` consecutive iterations below it stop the run.
  double tol = 1e-8;
  std::size_t patience = 10;
  double grad_tol = 1e-9;
  double min_step = 1e-12;
  double armijo = 1e-4;

  /// Optional uniform jitter (+-init_jitter) added to the content before the
  /// first iteration, drawn from `seed`. Zero leaves the start at the content.
  double init_jitter = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  PmsrConfig pmsr() const;
};

struct LossWithGradient {
  double value = 0.0;
  PoseGradient gradient;
};

/// Mean squared coordinate difference over F * 20 * 2 entries.
LossWithGradient content_fidelity_loss(const PoseSequence& candidate, const PoseSequence& content);

/// Per-joint velocity-magnitude moments, mean and population std over the
/// F-1 frame steps, matched between candidate and style and averaged over joints:
///   (1/20) sum_j (mu_c - mu_s)^2 + (sd_c - sd_s)^2
/// The two sequences may differ in length; both need F >= 2.
LossWithGradient style_stat_loss(const PoseSequence& candidate, const PoseSequence& style);

struct ObjectiveTerms {
  double total = 0.0;
  double content = 0.0;
  double style = 0.0;
  double stability = 0.0;
  double conn_plus = 0.0;
  double conn_minus = 0.0;
};

struct ObjectiveEvaluation {
  ObjectiveTerms terms;
  PoseGradient gradient;
};

ObjectiveEvaluation evaluate_objective(const PoseSequence& candidate, const PoseSequence& content,
                                       const PoseSequence& style, const JointTopology& topo,
                                       const PersonalizeConfig& cfg);

enum class StopReason { kConverged, kMaxIters };

struct IterationRecord {
  std::size_t iteration = 0;
  ObjectiveTerms terms;
  double grad_norm = 0.0;
  /// Accepted step for this iteration; 0 for the initial record.
  double step = 0.0;
};

/// records[0] is the starting point, records[k] the state after k accepted steps.
struct OptimTrace {
  std::vector<IterationRecord> records;
  std::size_t iterations = 0;
  StopReason stop = StopReason::kMaxIters;

  /// One JSON object per line.
  std::string to_jsonl() const;
};

struct PersonalizeResult {
  PoseSequence pose;
  OptimTrace trace;
};

/// Gradient descent with Armijo backtracking from the content sequence.
/// Requires content F >= 3 and style F >= 2.
PersonalizeResult personalize(const PoseSequence& content, const PoseSequence& style,
                              const JointTopology& topo = canonical_topology(), const PersonalizeConfig& cfg = {});

std::string_view to_string(StopReason reason);

}  // namespace persona
