#include "persona_motion/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "persona_motion/errors.hpp"
#include "persona_motion/format.hpp"

namespace persona {

namespace {

constexpr double kMargin = 0.05;

struct CanvasMap {
  double scale_x = 1.0;
  double scale_y = 1.0;
  double offset_x = 0.0;
  double offset_y = 0.0;

  Point2 operator()(const Point2& p) const { return {offset_x + scale_x * p.x, offset_y + scale_y * p.y}; }
};

CanvasMap fit_map(const PoseSequence& seq, const RenderConfig& cfg) {
  const double w = cfg.width;
  const double h = cfg.height;
  if (!cfg.fit) return cfg.y_up ? CanvasMap{w, -h, 0.0, h} : CanvasMap{w, h, 0.0, 0.0};

  double lo_x = std::numeric_limits<double>::infinity();
  double lo_y = lo_x;
  double hi_x = -lo_x;
  double hi_y = -lo_x;
  for (const auto& p : seq.joints()) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  }
  const double span_x = hi_x - lo_x;
  const double span_y = hi_y - lo_y;
  const double avail_x = w * (1.0 - 2.0 * kMargin);
  const double avail_y = h * (1.0 - 2.0 * kMargin);
  double scale = 1.0;
  if (span_x > 0.0 && span_y > 0.0) {
    scale = std::min(avail_x / span_x, avail_y / span_y);
  } else if (span_x > 0.0) {
    scale = avail_x / span_x;
  } else if (span_y > 0.0) {
    scale = avail_y / span_y;
  }
  const double cx = 0.5 * (lo_x + hi_x);
  const double cy = 0.5 * (lo_y + hi_y);
  const double sy = cfg.y_up ? -scale : scale;
  return {scale, sy, 0.5 * w - scale * cx, 0.5 * h - sy * cy};
}

std::string num(double v) { return format_fixed(v, 3); }

class Animator {
 public:
  Animator(std::size_t frames, double fps) : frames_(frames) {
    if (frames_ < 2) return;
    for (std::size_t f = 0; f < frames_; ++f) {
      if (f) key_times_ += ';';
      key_times_ += format_fixed(static_cast<double>(f) / static_cast<double>(frames_), 6);
    }
    duration_ = format_fixed(static_cast<double>(frames_) / fps, 6) + "s";
  }

  bool animated() const { return frames_ > 1; }

  std::string animate(std::string_view attribute, const std::vector<double>& values) const {
    std::string v;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) v += ';';
      v += num(values[i]);
    }
    return "    <animate attributeName=\"" + std::string(attribute) + "\" values=\"" + v + "\" keyTimes=\"" +
           key_times_ + "\" dur=\"" + duration_ + "\" calcMode=\"discrete\" repeatCount=\"indefinite\"/>\n";
  }

 private:
  std::size_t frames_;
  std::string key_times_;
  std::string duration_;
};

}  // namespace

void RenderConfig::validate() const {
  if (width <= 0 || height <= 0) throw ValidationError("canvas dimensions must be positive");
  if (!(stroke_width > 0.0) || !(joint_radius > 0.0)) throw ValidationError("stroke width and joint radius must be positive");
  if (fps && !(*fps > 0.0)) throw ValidationError("fps override must be positive");
}

std::string render_svg(const PoseSequence& seq, const RenderConfig& cfg, const JointTopology& topo) {
  cfg.validate();
  const std::size_t frames = seq.frame_count();
  const CanvasMap map = fit_map(seq, cfg);
  const Animator anim(frames, cfg.fps.value_or(seq.fps()));

  std::vector<Point2> px(seq.joints().size());
  std::transform(seq.joints().begin(), seq.joints().end(), px.begin(), map);
  auto at = [&](std::size_t f, std::size_t j) -> const Point2& { return px[f * kNumJoints + j]; };
  auto track = [&](std::size_t j, bool use_x) {
    std::vector<double> v(frames);
    for (std::size_t f = 0; f < frames; ++f) v[f] = use_x ? at(f, j).x : at(f, j).y;
    return v;
  };

  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(cfg.width) + "\" height=\"" +
         std::to_string(cfg.height) + "\" viewBox=\"0 0 " + std::to_string(cfg.width) + " " +
         std::to_string(cfg.height) + "\">\n";
  out += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "  <g stroke=\"black\" stroke-width=\"" + num(cfg.stroke_width) + "\" stroke-linecap=\"round\">\n";
  for (const auto& b : topo.bones()) {
    const Point2& a = at(0, b.first);
    const Point2& c = at(0, b.second);
    std::string line = "  <line x1=\"" + num(a.x) + "\" y1=\"" + num(a.y) + "\" x2=\"" + num(c.x) + "\" y2=\"" +
                       num(c.y) + "\"";
    if (!anim.animated()) {
      out += line + "/>\n";
      continue;
    }
    out += line + ">\n";
    out += anim.animate("x1", track(b.first, true));
    out += anim.animate("y1", track(b.first, false));
    out += anim.animate("x2", track(b.second, true));
    out += anim.animate("y2", track(b.second, false));
    out += "  </line>\n";
  }
  out += "  </g>\n";
  out += "  <g fill=\"crimson\">\n";
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    const Point2& p = at(0, j);
    std::string circle = "  <circle cx=\"" + num(p.x) + "\" cy=\"" + num(p.y) + "\" r=\"" + num(cfg.joint_radius) + "\"";
    if (!anim.animated()) {
      out += circle + "/>\n";
      continue;
    }
    out += circle + ">\n";
    out += anim.animate("cx", track(j, true));
    out += anim.animate("cy", track(j, false));
    out += "  </circle>\n";
  }
  out += "  </g>\n</svg>\n";
  return out;
}

void render_svg_file(const PoseSequence& seq, const std::filesystem::path& path, const RenderConfig& cfg) {
  write_text_file(path, render_svg(seq, cfg));
}

}  // namespace persona
