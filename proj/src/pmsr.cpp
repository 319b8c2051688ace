#include "persona_motion/pmsr.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "persona_motion/errors.hpp"
#include "persona_motion/parallel.hpp"

namespace persona {

namespace {

void require_frames(std::size_t frames, std::size_t needed) {
  if (frames < needed) {
    throw InsufficientFramesError("need at least " + std::to_string(needed) + " frames, got " +
                                  std::to_string(frames));
  }
}

double frame_attraction(std::span<const Point2> pose, const JointTopology& topo) {
  double sum = 0.0;
  for (const auto& b : topo.bones()) sum += distance(pose[b.first], pose[b.second]);
  return sum / static_cast<double>(kNumBones);
}

double frame_repulsion(std::span<const Point2> pose, const JointTopology& topo, const PmsrConfig& cfg) {
  double sum = 0.0;
  for (const auto& p : topo.non_adjacent_pairs()) {
    sum += std::max(0.0, cfg.delta - distance(pose[p.first], pose[p.second]));
  }
  return sum / cfg.repulsion_normalizer();
}

/// Bone-mean of squared second differences, one value per interior frame.
std::vector<double> interior_stability(const SecondDiff& dd) {
  std::vector<double> out(dd.rows);
  for (std::size_t r = 0; r < dd.rows; ++r) {
    double sum = 0.0;
    for (std::size_t k = 0; k < kNumBones; ++k) {
      const double e = dd(r, k);
      sum += e * e;
    }
    out[r] = sum / static_cast<double>(kNumBones);
  }
  return out;
}

double ordered_sum(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum;
}

// u = (a - b) / |a - b|, or zero for coincident points.
Point2 unit_direction(const Point2& a, const Point2& b) {
  const double d = distance(a, b);
  if (d == 0.0) return {0.0, 0.0};
  return {(a.x - b.x) / d, (a.y - b.y) / d};
}

}  // namespace

void PmsrConfig::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("delta must be positive");
  if (!(w_stability >= 0.0) || !(w_conn >= 0.0)) throw ValidationError("loss weights must be nonnegative");
}

double PmsrConfig::repulsion_normalizer() const {
  return legacy_adjacency_normalizer ? static_cast<double>(2 * kNumBones) : static_cast<double>(kNumNonAdjacentPairs);
}

double PoseGradient::norm() const {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

SecondDiff second_diff(const LengthMatrix& lengths) {
  require_frames(lengths.frames, 3);
  SecondDiff out;
  out.rows = lengths.frames - 2;
  out.values.resize(out.rows * kNumBones);
  for (std::size_t r = 0; r < out.rows; ++r) {
    for (std::size_t k = 0; k < kNumBones; ++k) {
      out.values[r * kNumBones + k] = lengths(r + 2, k) - 2.0 * lengths(r + 1, k) + lengths(r, k);
    }
  }
  return out;
}

double loss_stability(const PoseSequence& seq, const JointTopology& topo) {
  require_frames(seq.frame_count(), 3);
  const auto per_frame = interior_stability(second_diff(bone_lengths(seq, topo)));
  return ordered_sum(per_frame) / static_cast<double>(per_frame.size());
}

double loss_conn_plus(const PoseSequence& seq, const JointTopology& topo) {
  const std::size_t frames = seq.frame_count();
  std::vector<double> per_frame(frames);
  parallel_for(frames, [&](std::size_t f) { per_frame[f] = frame_attraction(seq.frame(f), topo); });
  return ordered_sum(per_frame) / static_cast<double>(frames);
}

double loss_conn_minus(const PoseSequence& seq, const JointTopology& topo, const PmsrConfig& cfg) {
  cfg.validate();
  const std::size_t frames = seq.frame_count();
  std::vector<double> per_frame(frames);
  parallel_for(frames, [&](std::size_t f) { per_frame[f] = frame_repulsion(seq.frame(f), topo, cfg); });
  return ordered_sum(per_frame) / static_cast<double>(frames);
}

double loss_conn(const PoseSequence& seq, const JointTopology& topo, const PmsrConfig& cfg) {
  return loss_conn_plus(seq, topo) + loss_conn_minus(seq, topo, cfg);
}

LossReport pmsr_total(const PoseSequence& seq, const JointTopology& topo, const PmsrConfig& cfg) {
  cfg.validate();
  const std::size_t frames = seq.frame_count();
  require_frames(frames, 3);

  LossReport report;
  report.per_frame.resize(frames);
  const auto stab = interior_stability(second_diff(bone_lengths(seq, topo)));
  for (std::size_t r = 0; r < stab.size(); ++r) report.per_frame[r + 1].stability = stab[r];
  parallel_for(frames, [&](std::size_t f) {
    report.per_frame[f].conn_plus = frame_attraction(seq.frame(f), topo);
    report.per_frame[f].conn_minus = frame_repulsion(seq.frame(f), topo, cfg);
  });

  double plus = 0.0;
  double minus = 0.0;
  for (const auto& fl : report.per_frame) {
    plus += fl.conn_plus;
    minus += fl.conn_minus;
  }
  report.stability = ordered_sum(stab) / static_cast<double>(stab.size());
  report.conn_plus = plus / static_cast<double>(frames);
  report.conn_minus = minus / static_cast<double>(frames);
  report.conn = report.conn_plus + report.conn_minus;
  report.total = cfg.w_stability * report.stability + cfg.w_conn * report.conn;
  return report;
}

PoseGradient pmsr_grad(const PoseSequence& seq, const JointTopology& topo, const PmsrConfig& cfg) {
  cfg.validate();
  const std::size_t frames = seq.frame_count();
  require_frames(frames, 3);

  const auto dd = second_diff(bone_lengths(seq, topo));
  const double stab_scale = cfg.w_stability * 2.0 / (static_cast<double>(kNumBones) * static_cast<double>(frames - 2));
  const double plus_scale = cfg.w_conn / (static_cast<double>(kNumBones) * static_cast<double>(frames));
  const double minus_scale = cfg.w_conn / (cfg.repulsion_normalizer() * static_cast<double>(frames));

  // Second difference at interior row r = f - 1; zero outside the interior.
  auto dd_at = [&](std::ptrdiff_t f, std::size_t k) -> double {
    if (f < 1 || f > static_cast<std::ptrdiff_t>(frames) - 2) return 0.0;
    return dd(static_cast<std::size_t>(f - 1), k);
  };

  PoseGradient grad;
  grad.frames = frames;
  grad.values.assign(frames * kNumJoints * 2, 0.0);
  parallel_for(frames, [&](std::size_t f) {
    const auto pose = seq.frame(f);
    double* g = grad.values.data() + f * kNumJoints * 2;
    auto push = [&](const JointPair& pair, double coeff) {
      const Point2 u = unit_direction(pose[pair.first], pose[pair.second]);
      g[2 * pair.first] += coeff * u.x;
      g[2 * pair.first + 1] += coeff * u.y;
      g[2 * pair.second] -= coeff * u.x;
      g[2 * pair.second + 1] -= coeff * u.y;
    };
    const auto fi = static_cast<std::ptrdiff_t>(f);
    for (std::size_t k = 0; k < kNumBones; ++k) {
      // l[f] enters the second differences centred at f-1, f and f+1.
      const double dl = stab_scale * (dd_at(fi - 1, k) - 2.0 * dd_at(fi, k) + dd_at(fi + 1, k));
      push(topo.bones()[k], dl + plus_scale);
    }
    for (const auto& pair : topo.non_adjacent_pairs()) {
      const double d = distance(pose[pair.first], pose[pair.second]);
      if (d < cfg.delta) push(pair, -minus_scale);
    }
  });
  return grad;
}

PoseGradient finite_diff_grad(const PoseSequence& seq, const JointTopology& topo, const PmsrConfig& cfg, double h) {
  if (!(h > 0.0)) throw ValidationError("finite-difference step must be positive");
  auto coords = seq.flatten();
  PoseGradient grad;
  grad.frames = seq.frame_count();
  grad.values.resize(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const double x0 = coords[i];
    coords[i] = x0 + h;
    const double up = pmsr_total(PoseSequence::from_flat(coords, seq.fps()), topo, cfg).total;
    coords[i] = x0 - h;
    const double down = pmsr_total(PoseSequence::from_flat(coords, seq.fps()), topo, cfg).total;
    coords[i] = x0;
    grad.values[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double max_relative_error(const PoseGradient& a, const PoseGradient& b) {
  if (a.values.size() != b.values.size()) throw ShapeError("gradient sizes differ");
  double scale = 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    scale = std::max({scale, std::abs(a.values[i]), std::abs(b.values[i])});
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  }
  return scale == 0.0 ? 0.0 : worst / scale;
}

std::string LossReport::to_json() const {
  nlohmann::ordered_json j;
  j["stability"] = stability;
  j["conn_plus"] = conn_plus;
  j["conn_minus"] = conn_minus;
  j["conn"] = conn;
  j["total"] = total;
  auto frames = nlohmann::ordered_json::array();
  for (const auto& f : per_frame) {
    frames.push_back({{"stability", f.stability}, {"conn_plus", f.conn_plus}, {"conn_minus", f.conn_minus}});
  }
  j["per_frame"] = std::move(frames);
  return j.dump(2) + "\n";
}

}  // namespace persona
