#include "persona_motion/personalize.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "persona_motion/errors.hpp"
#include "persona_motion/random.hpp"

namespace persona {

namespace {

struct VelocityStats {
  std::vector<double> mean;  // per joint
  std::vector<double> sd;
  std::vector<double> speed;  // (F-1) x 20
};

VelocityStats velocity_stats(const PoseSequence& seq) {
  const std::size_t steps = seq.frame_count() - 1;
  VelocityStats s;
  s.mean.assign(kNumJoints, 0.0);
  s.sd.assign(kNumJoints, 0.0);
  s.speed.resize(steps * kNumJoints);
  for (std::size_t f = 0; f < steps; ++f) {
    for (std::size_t j = 0; j < kNumJoints; ++j) s.speed[f * kNumJoints + j] = distance(seq.at(f + 1, j), seq.at(f, j));
  }
  const double n = static_cast<double>(steps);
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    double sum = 0.0;
    for (std::size_t f = 0; f < steps; ++f) sum += s.speed[f * kNumJoints + j];
    s.mean[j] = sum / n;
    double var = 0.0;
    for (std::size_t f = 0; f < steps; ++f) {
      const double c = s.speed[f * kNumJoints + j] - s.mean[j];
      var += c * c;
    }
    s.sd[j] = std::sqrt(var / n);
  }
  return s;
}

void require_frames(const PoseSequence& seq, std::size_t needed, std::string_view what) {
  if (seq.frame_count() < needed) {
    throw InsufficientFramesError(std::string(what) + " needs at least " + std::to_string(needed) + " frames, got " +
                                  std::to_string(seq.frame_count()));
  }
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

nlohmann::ordered_json terms_json(const ObjectiveTerms& t) {
  return {{"total", t.total},         {"content", t.content},     {"style", t.style},
          {"stability", t.stability}, {"conn_plus", t.conn_plus}, {"conn_minus", t.conn_minus}};
}

}  // namespace

void PersonalizeConfig::validate() const {
  for (double w : {w_content, w_style, w_stability, w_conn}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("objective weights must be nonnegative");
  }
  if (!(step > 0.0)) throw ValidationError("step must be positive");
  if (max_iters < 1) throw ValidationError("max_iters must be at least 1");
  if (!(tol >= 0.0) || !(grad_tol >= 0.0) || !(min_step > 0.0)) throw ValidationError("invalid tolerances");
  if (!(armijo > 0.0 && armijo < 1.0)) throw ValidationError("armijo constant must lie in (0, 1)");
  if (!(init_jitter >= 0.0)) throw ValidationError("init_jitter must be nonnegative");
  pmsr().validate();
}

PmsrConfig PersonalizeConfig::pmsr() const {
  return {.delta = delta, .w_stability = w_stability, .w_conn = w_conn, .legacy_adjacency_normalizer = legacy_adjacency_normalizer};
}

LossWithGradient content_fidelity_loss(const PoseSequence& candidate, const PoseSequence& content) {
  if (candidate.frame_count() != content.frame_count()) {
    throw ShapeError("content fidelity: frame counts differ (" + std::to_string(candidate.frame_count()) + " vs " +
                     std::to_string(content.frame_count()) + ")");
  }
  const auto a = candidate.flatten();
  const auto b = content.flatten();
  const double n = static_cast<double>(a.size());
  LossWithGradient out;
  out.gradient.frames = candidate.frame_count();
  out.gradient.values.resize(a.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
    out.gradient.values[i] = 2.0 * d / n;
  }
  out.value = sum / n;
  return out;
}

LossWithGradient style_stat_loss(const PoseSequence& candidate, const PoseSequence& style) {
  require_frames(candidate, 2, "style statistics (candidate)");
  require_frames(style, 2, "style statistics (style)");
  const auto cs = velocity_stats(candidate);
  const auto ss = velocity_stats(style);
  const std::size_t steps = candidate.frame_count() - 1;
  const double n = static_cast<double>(steps);
  const double joint_scale = 1.0 / static_cast<double>(kNumJoints);

  LossWithGradient out;
  out.gradient.frames = candidate.frame_count();
  out.gradient.values.assign(candidate.frame_count() * kNumJoints * 2, 0.0);
  double sum = 0.0;
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    const double dm = cs.mean[j] - ss.mean[j];
    const double ds = cs.sd[j] - ss.sd[j];
    sum += dm * dm + ds * ds;
    for (std::size_t f = 0; f < steps; ++f) {
      const double v = cs.speed[f * kNumJoints + j];
      if (v == 0.0) continue;
      double dv = 2.0 * dm / n;
      if (cs.sd[j] > 0.0) dv += 2.0 * ds * (v - cs.mean[j]) / (n * cs.sd[j]);
      dv *= joint_scale;
      const Point2& next = candidate.at(f + 1, j);
      const Point2& prev = candidate.at(f, j);
      const double ux = (next.x - prev.x) / v;
      const double uy = (next.y - prev.y) / v;
      out.gradient.values[((f + 1) * kNumJoints + j) * 2] += dv * ux;
      out.gradient.values[((f + 1) * kNumJoints + j) * 2 + 1] += dv * uy;
      out.gradient.values[(f * kNumJoints + j) * 2] -= dv * ux;
      out.gradient.values[(f * kNumJoints + j) * 2 + 1] -= dv * uy;
    }
  }
  out.value = sum * joint_scale;
  return out;
}

ObjectiveEvaluation evaluate_objective(const PoseSequence& candidate, const PoseSequence& content,
                                       const PoseSequence& style, const JointTopology& topo,
                                       const PersonalizeConfig& cfg) {
  const auto fidelity = content_fidelity_loss(candidate, content);
  const auto stats = style_stat_loss(candidate, style);
  const auto pmsr_cfg = cfg.pmsr();
  const auto report = pmsr_total(candidate, topo, pmsr_cfg);
  const auto physics = pmsr_grad(candidate, topo, pmsr_cfg);

  ObjectiveEvaluation ev;
  ev.terms.content = fidelity.value;
  ev.terms.style = stats.value;
  ev.terms.stability = report.stability;
  ev.terms.conn_plus = report.conn_plus;
  ev.terms.conn_minus = report.conn_minus;
  ev.terms.total = cfg.w_content * fidelity.value + cfg.w_style * stats.value + report.total;
  ev.gradient.frames = candidate.frame_count();
  ev.gradient.values.resize(physics.values.size());
  for (std::size_t i = 0; i < physics.values.size(); ++i) {
    ev.gradient.values[i] =
        cfg.w_content * fidelity.gradient.values[i] + cfg.w_style * stats.gradient.values[i] + physics.values[i];
  }
  return ev;
}

PersonalizeResult personalize(const PoseSequence& content, const PoseSequence& style, const JointTopology& topo,
                              const PersonalizeConfig& cfg) {
  cfg.validate();
  require_frames(content, 3, "personalize (content)");
  require_frames(style, 2, "personalize (style)");

  auto x = content.flatten();
  if (cfg.init_jitter > 0.0) {
    Rng rng(cfg.seed);
    for (auto& v : x) v += rng.uniform(-cfg.init_jitter, cfg.init_jitter);
  }
  PoseSequence current = PoseSequence::from_flat(x, content.fps());
  auto ev = evaluate_objective(current, content, style, topo, cfg);

  OptimTrace trace;
  trace.records.push_back({0, ev.terms, ev.gradient.norm(), 0.0});
  double trial = cfg.step;
  std::size_t slow = 0;
  trace.stop = StopReason::kMaxIters;

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    const double gnorm = trace.records.back().grad_norm;
    if (gnorm < cfg.grad_tol) {
      trace.stop = StopReason::kConverged;
      break;
    }
    const double g2 = gnorm * gnorm;

    // Backtracking: halve until sufficient decrease or the step underflows.
    bool accepted = false;
    std::vector<double> candidate(x.size());
    for (double t = trial; t >= cfg.min_step; t *= 0.5) {
      for (std::size_t i = 0; i < x.size(); ++i) candidate[i] = x[i] - t * ev.gradient.values[i];
      if (!all_finite(candidate)) continue;
      PoseSequence next = PoseSequence::from_flat(candidate, content.fps());
      auto next_ev = evaluate_objective(next, content, style, topo, cfg);
      if (next_ev.terms.total <= ev.terms.total - cfg.armijo * t * g2) {
        const double prev_total = ev.terms.total;
        x.swap(candidate);
        current = std::move(next);
        ev = std::move(next_ev);
        trace.records.push_back({it, ev.terms, ev.gradient.norm(), t});
        trial = 2.0 * t;
        accepted = true;
        const double rel = (prev_total - ev.terms.total) / std::max(std::abs(prev_total), 1e-300);
        slow = rel < cfg.tol ? slow + 1 : 0;
        break;
      }
    }
    if (!accepted || slow >= cfg.patience) {
      trace.stop = StopReason::kConverged;
      break;
    }
  }
  trace.iterations = trace.records.size() - 1;
  return {std::move(current), std::move(trace)};
}

std::string_view to_string(StopReason reason) {
  return reason == StopReason::kConverged ? "converged" : "max_iters";
}

std::string OptimTrace::to_jsonl() const {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["iteration"] = r.iteration;
    j["step"] = r.step;
    j["grad_norm"] = r.grad_norm;
    j["terms"] = terms_json(r.terms);
    if (&r == &records.back()) j["stop"] = std::string(to_string(stop));
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace persona
