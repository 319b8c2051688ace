#include "persona_motion/cli.hpp"

#include <algorithm>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "persona_motion/dataset.hpp"
#include "persona_motion/errors.hpp"
#include "persona_motion/format.hpp"
#include "persona_motion/personalize.hpp"
#include "persona_motion/pmsr.hpp"
#include "persona_motion/render.hpp"
#include "persona_motion/stylenet.hpp"
#include "persona_motion/synthetic.hpp"

namespace persona::cli {

namespace {

constexpr double kGradcheckThreshold = 1e-5;

/// Failure while reading inputs or writing outputs.
struct StageError {
  int code;
  std::string message;
};

template <typename Fn>
auto io_stage(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw StageError{kIoOrParseError, e.what()};
  }
}

template <typename Fn>
auto compute_stage(Fn&& fn) {
  try {
    return fn();
  } catch (const IoError& e) {
    throw StageError{kIoOrParseError, e.what()};
  } catch (const Error& e) {
    throw StageError{kPrecondition, e.what()};
  }
}

PoseLoadOptions load_options(const std::optional<double>& pixel_scale) {
  PoseLoadOptions o;
  o.pixel_scale = pixel_scale;
  return o;
}

struct StylizeArgs {
  std::string content;
  std::string style;
  std::string out;
  std::string trace;
  std::string label;
  std::string features_out;
  std::string weights;
  std::optional<double> pixel_scale;
  PersonalizeConfig cfg;
};

struct LossArgs {
  std::string pose;
  std::string out;
  std::optional<double> pixel_scale;
  PmsrConfig cfg;
};

struct GradcheckArgs {
  std::uint64_t seed = 0;
  std::size_t frames = 8;
  double h = 1e-6;
  std::size_t trials = 1;
  double delta = 0.1;
  bool corrupt = false;
};

struct RenderArgs {
  std::string pose;
  std::string out;
  std::optional<double> pixel_scale;
  bool no_fit = false;
  bool y_down = false;
  std::optional<double> fps;
  RenderConfig cfg;
};

struct DatasetArgs {
  std::string manifest;
  bool json = false;
  bool deep = false;
};

void add_weight_flags(CLI::App* cmd, double& w_stability, double& w_conn, double& delta, bool& legacy) {
  cmd->add_option("--w-stability", w_stability, "Bone stability weight")->capture_default_str();
  cmd->add_option("--w-conn", w_conn, "Body connectivity weight")->capture_default_str();
  cmd->add_option("--delta", delta, "Minimum distance between unconnected joints")->capture_default_str();
  cmd->add_flag("--legacy-normalizer", legacy, "Normalize the repulsion term by the adjacency count (38)");
}

std::string terms_text(const ObjectiveTerms& t) {
  return "total " + format_double(t.total) + "\ncontent " + format_double(t.content) + "\nstyle " +
         format_double(t.style) + "\nstability " + format_double(t.stability) + "\nconn_plus " +
         format_double(t.conn_plus) + "\nconn_minus " + format_double(t.conn_minus) + "\n";
}

int run_stylize(const StylizeArgs& a, std::ostream& out) {
  const auto [content, style] = io_stage([&] {
    return std::pair{load_pose(a.content, load_options(a.pixel_scale)), load_pose(a.style, load_options(a.pixel_scale))};
  });
  std::optional<SaPmtWeights> weights;
  if (!a.label.empty() || !a.weights.empty()) {
    weights = io_stage([&] { return a.weights.empty() ? SaPmtWeights::seeded(a.cfg.seed) : load_weights(a.weights); });
  }

  const auto result = compute_stage([&] { return personalize(content, style, canonical_topology(), a.cfg); });
  std::optional<SaPmtOutput> features;
  if (!a.label.empty()) {
    features = compute_stage([&] { return run_sa_pmt(content, style, a.label, *weights); });
  }

  io_stage([&] {
    save_pose(result.pose, a.out);
    if (!a.trace.empty()) write_text_file(a.trace, result.trace.to_jsonl());
    if (features) {
      const std::string path = a.features_out.empty() ? a.out + ".features.json" : a.features_out;
      write_text_file(path, features_to_json(features->output));
    }
    return 0;
  });

  const auto& first = result.trace.records.front();
  const auto& last = result.trace.records.back();
  out << "iterations " << result.trace.iterations << "\nstop " << to_string(result.trace.stop) << "\n";
  out << "initial_total " << format_double(first.terms.total) << "\n";
  out << terms_text(last.terms);
  return kSuccess;
}

int run_loss(const LossArgs& a, std::ostream& out) {
  const auto seq = io_stage([&] { return load_pose(a.pose, load_options(a.pixel_scale)); });
  const auto report = compute_stage([&] { return pmsr_total(seq, canonical_topology(), a.cfg); });
  const std::string json = report.to_json();
  if (a.out.empty()) {
    out << json;
  } else {
    io_stage([&] {
      write_text_file(a.out, json);
      return 0;
    });
  }
  return kSuccess;
}

int run_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  PmsrConfig cfg;
  cfg.delta = a.delta;
  const double worst = compute_stage([&] {
    if (a.frames < 3) throw InsufficientFramesError("need at least 3 frames, got " + std::to_string(a.frames));
    if (a.trials < 1) throw ValidationError("trials must be at least 1");
    double w = 0.0;
    for (std::size_t t = 0; t < a.trials; ++t) {
      const auto seq = random_smooth_sequence(a.seed + t, a.frames, cfg.delta, 10.0 * a.h);
      auto analytic = pmsr_grad(seq, canonical_topology(), cfg);
      // Negative control: a deliberately wrong gradient must fail the check.
      if (a.corrupt) analytic.values[0] += 1e-2 + std::abs(analytic.values[0]);
      w = std::max(w, max_relative_error(analytic, finite_diff_grad(seq, canonical_topology(), cfg, a.h)));
    }
    return w;
  });
  const bool pass = worst < kGradcheckThreshold;
  out << "max_relative_error " << format_double(worst) << "\n" << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kSuccess : kSemanticFailure;
}

int run_render(RenderArgs a, std::ostream& out) {
  const auto seq = io_stage([&] { return load_pose(a.pose, load_options(a.pixel_scale)); });
  a.cfg.fit = !a.no_fit;
  a.cfg.y_up = !a.y_down;
  a.cfg.fps = a.fps;
  const auto svg = compute_stage([&] { return render_svg(seq, a.cfg); });
  io_stage([&] {
    write_text_file(a.out, svg);
    return 0;
  });
  out << "wrote " << a.out << " (" << seq.frame_count() << " frames)\n";
  return kSuccess;
}

int run_dataset(bool validate, const DatasetArgs& a, std::ostream& out) {
  const auto manifest = io_stage([&] { return load_manifest(a.manifest); });
  if (validate) {
    ValidateOptions opts;
    opts.check_pose_frames = a.deep;
    const auto report = validate_manifest(manifest, opts);
    out << (a.json ? report.to_json() : report.to_text());
    return report.ok() ? kSuccess : kSemanticFailure;
  }
  const auto table = summarize(manifest);
  out << (a.json ? table.to_json() : table.to_text());
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pose-level motion personalization with physics-aware regularization", "persona-motion"};
  app.require_subcommand(1);

  StylizeArgs stylize;
  auto* cmd_stylize = app.add_subcommand("stylize", "Optimize a personalized pose sequence");
  cmd_stylize->add_option("--content", stylize.content, "Content pose JSON")->required();
  cmd_stylize->add_option("--style", stylize.style, "Style pose JSON")->required();
  cmd_stylize->add_option("--out", stylize.out, "Output pose JSON")->required();
  cmd_stylize->add_option("--trace", stylize.trace, "Optimization trace (JSON lines)");
  cmd_stylize->add_option("--label", stylize.label, "Content label; also emits SA-PMT features");
  cmd_stylize->add_option("--features-out", stylize.features_out, "Feature JSON path (default <out>.features.json)");
  cmd_stylize->add_option("--weights", stylize.weights, "SA-PMT weight file (default: seeded)");
  cmd_stylize->add_option("--seed", stylize.cfg.seed, "Seed for weights and initial jitter")->capture_default_str();
  cmd_stylize->add_option("--w-content", stylize.cfg.w_content, "Content fidelity weight")->capture_default_str();
  cmd_stylize->add_option("--w-style", stylize.cfg.w_style, "Style statistics weight")->capture_default_str();
  add_weight_flags(cmd_stylize, stylize.cfg.w_stability, stylize.cfg.w_conn, stylize.cfg.delta,
                   stylize.cfg.legacy_adjacency_normalizer);
  cmd_stylize->add_option("--step", stylize.cfg.step, "Initial line-search step")->capture_default_str();
  cmd_stylize->add_option("--max-iters", stylize.cfg.max_iters, "Iteration cap")->capture_default_str();
  cmd_stylize->add_option("--tol", stylize.cfg.tol, "Relative decrease tolerance")->capture_default_str();
  cmd_stylize->add_option("--jitter", stylize.cfg.init_jitter, "Seeded initial perturbation")->capture_default_str();
  cmd_stylize->add_option("--pixel-scale", stylize.pixel_scale, "Divide input coordinates by this value");

  LossArgs loss;
  auto* cmd_loss = app.add_subcommand("loss", "Score a pose sequence with the physics losses");
  cmd_loss->add_option("pose", loss.pose, "Pose JSON")->required();
  cmd_loss->add_option("--out", loss.out, "Write the report here instead of stdout");
  add_weight_flags(cmd_loss, loss.cfg.w_stability, loss.cfg.w_conn, loss.cfg.delta, loss.cfg.legacy_adjacency_normalizer);
  cmd_loss->add_option("--pixel-scale", loss.pixel_scale, "Divide input coordinates by this value");

  GradcheckArgs grad;
  auto* cmd_grad = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  cmd_grad->set_help_flag("--help", "Print this help message and exit");  // frees -h for the step
  cmd_grad->add_option("--seed", grad.seed, "First random seed")->capture_default_str();
  cmd_grad->add_option("--frames", grad.frames, "Frames per random sequence")->capture_default_str();
  cmd_grad->add_option("--h", grad.h, "Central-difference step")->capture_default_str();
  cmd_grad->add_option("--trials", grad.trials, "Number of seeded sequences")->capture_default_str();
  cmd_grad->add_option("--delta", grad.delta, "Minimum distance threshold")->capture_default_str();
  cmd_grad->add_flag("--corrupt-gradient", grad.corrupt, "Perturb the analytic gradient (negative control)");

  RenderArgs render;
  auto* cmd_render = app.add_subcommand("render", "Draw a pose sequence as (animated) SVG");
  cmd_render->add_option("pose", render.pose, "Pose JSON")->required();
  cmd_render->add_option("--out", render.out, "Output SVG")->required();
  cmd_render->add_option("--width", render.cfg.width, "Canvas width (px)")->capture_default_str();
  cmd_render->add_option("--height", render.cfg.height, "Canvas height (px)")->capture_default_str();
  cmd_render->add_option("--stroke-width", render.cfg.stroke_width, "Bone stroke width")->capture_default_str();
  cmd_render->add_option("--joint-radius", render.cfg.joint_radius, "Joint circle radius")->capture_default_str();
  cmd_render->add_flag("--no-fit", render.no_fit, "Treat coordinates as canvas fractions");
  cmd_render->add_flag("--y-down", render.y_down, "Input y grows downward (image coordinates)");
  cmd_render->add_option("--fps", render.fps, "Override the sequence frame rate");
  cmd_render->add_option("--pixel-scale", render.pixel_scale, "Divide input coordinates by this value");

  DatasetArgs dataset;
  auto* cmd_dataset = app.add_subcommand("dataset", "Validate or summarize a dataset manifest");
  cmd_dataset->require_subcommand(1);
  auto* cmd_validate = cmd_dataset->add_subcommand("validate", "Check counts, duplicates and files");
  auto* cmd_stats = cmd_dataset->add_subcommand("stats", "Per-content and per-style tables");
  for (auto* sub : {cmd_validate, cmd_stats}) {
    sub->add_option("manifest", dataset.manifest, "Manifest JSON")->required();
    sub->add_flag("--json", dataset.json, "Emit JSON");
  }
  cmd_validate->add_flag("--deep", dataset.deep, "Load pose files and check frame counts");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kIoOrParseError;
  }

  try {
    if (cmd_stylize->parsed()) return run_stylize(stylize, out);
    if (cmd_loss->parsed()) return run_loss(loss, out);
    if (cmd_grad->parsed()) return run_gradcheck(grad, out);
    if (cmd_render->parsed()) return run_render(render, out);
    if (cmd_validate->parsed()) return run_dataset(true, dataset, out);
    if (cmd_stats->parsed()) return run_dataset(false, dataset, out);
  } catch (const StageError& e) {
    err << "error: " << e.message << "\n";
    return e.code;
  }
  return kIoOrParseError;
}

}  // namespace persona::cli
