#include <queue>
#include <set>

#include "doctest.h"
#include "persona_motion/errors.hpp"
#include "persona_motion/skeleton.hpp"
#include "persona_motion/synthetic.hpp"
#include "test_support.hpp"

using namespace persona;
using namespace persona::testing;

namespace {

PoseSequence pose_with(std::initializer_list<std::pair<std::size_t, Point2>> joints, std::size_t frames = 1) {
  std::vector<Point2> base = rest_pose(3.0);
  for (const auto& [j, p] : joints) base[j] = p;
  return rigid_translation(base, frames, 0.0, 0.0);
}

}  // namespace

TEST_CASE("canonical topology shape") {
  const auto& topo = canonical_topology();
  CHECK(topo.joint_names().size() == 20);
  CHECK(topo.bones().size() == 19);
  CHECK(topo.non_adjacent_pairs().size() == 171);
  CHECK(topo.joint_index("neck") == 1);
  CHECK(topo.joint_index("nose") == 0);
  CHECK(topo.joint_index("l-foot-tip") == 19);
  CHECK_FALSE(topo.joint_index("tail").has_value());
  CHECK(&canonical_topology() == &topo);

  int nonzero = 0;
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    CHECK(topo.adjacency()[i][i] == 0);
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      CHECK(topo.adjacency()[i][j] == topo.adjacency()[j][i]);
      nonzero += topo.adjacency()[i][j];
    }
  }
  CHECK(nonzero == 38);

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& b : topo.bones()) {
    CHECK(b.first < b.second);
    CHECK(b.second < kNumJoints);
    CHECK(seen.insert({b.first, b.second}).second);
    CHECK(topo.connected(b.first, b.second));
  }
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    for (std::size_t j = i + 1; j < kNumJoints; ++j) CHECK(topo.connected(i, j) == seen.contains({i, j}));
  }
}

TEST_CASE("bone graph is a spanning tree") {
  const auto& topo = canonical_topology();
  std::vector<bool> visited(kNumJoints, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  visited[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const auto i = frontier.front();
    frontier.pop();
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      if (topo.connected(i, j) && !visited[j]) {
        visited[j] = true;
        ++reached;
        frontier.push(j);
      }
    }
  }
  CHECK(reached == 20);
}

TEST_CASE("pose sequence construction rejects bad input") {
  CHECK_THROWS_AS(PoseSequence(std::vector<Point2>{}), ValidationError);
  CHECK_THROWS_AS(PoseSequence(std::vector<Point2>(19)), SchemaError);
  std::vector<Point2> nan_pose(20);
  nan_pose[7].y = std::nan("");
  CHECK_THROWS_AS(PoseSequence{nan_pose}, ValidationError);
  CHECK_THROWS_AS(PoseSequence(std::vector<Point2>(20), 0.0), ValidationError);
  CHECK(PoseSequence(std::vector<Point2>(40)).frame_count() == 2);
}

TEST_CASE("bone lengths") {
  SUBCASE("3-4-5 triangle") {
    const auto seq = pose_with({{0, {0.0, 0.0}}, {1, {3.0, 4.0}}});
    CHECK(bone_lengths(seq)(0, 0) == 5.0);
  }
  SUBCASE("coincident endpoints") {
    const auto seq = pose_with({{0, {1.0, 1.0}}, {1, {1.0, 1.0}}});
    CHECK(bone_lengths(seq)(0, 0) == 0.0);
  }
  SUBCASE("constant column across frames") {
    const auto seq = pose_with({{0, {1.0, 1.0}}, {1, {1.0, 1.2}}}, 6);
    const auto l = bone_lengths(seq);
    CHECK(l.frames == 6);
    for (std::size_t f = 0; f < 6; ++f) CHECK(l(f, 0) == doctest::Approx(0.2).epsilon(1e-15));
  }
}

TEST_CASE("bone lengths are isometry invariant and scale linearly") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto seq = random_pose(rng, 3);
    const auto moved = apply_isometry(seq, rng.uniform(-3.0, 3.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    const double s = rng.uniform(0.1, 4.0);
    const auto a = bone_lengths(seq);
    const auto b = bone_lengths(moved);
    const auto c = bone_lengths(scaled(seq, s));
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      CHECK(rel_change(a.values[i], b.values[i]) <= 1e-12);
      CHECK(rel_change(s * a.values[i], c.values[i]) <= 1e-12);
    }
  }
}

TEST_CASE("distance matrix") {
  SUBCASE("degenerate pose is all zeros") {
    const auto d = distance_matrix(coincident(1), 0);
    for (const auto& row : d) {
      for (double v : row) CHECK(v == 0.0);
    }
  }
  SUBCASE("unit separation") {
    const auto d = distance_matrix(pose_with({{0, {0.0, 0.0}}, {1, {1.0, 0.0}}}), 0);
    CHECK(d[0][1] == 1.0);
    CHECK(d[1][0] == 1.0);
  }
  SUBCASE("symmetric with zero diagonal and matching bone lengths") {
    Rng rng(5);
    const auto seq = random_pose(rng, 4);
    const auto l = bone_lengths(seq);
    for (std::size_t f = 0; f < 4; ++f) {
      const auto d = distance_matrix(seq, f);
      for (std::size_t i = 0; i < kNumJoints; ++i) {
        CHECK(d[i][i] == 0.0);
        for (std::size_t j = 0; j < kNumJoints; ++j) CHECK(d[i][j] == d[j][i]);
      }
      for (std::size_t k = 0; k < kNumBones; ++k) {
        const auto& b = canonical_topology().bones()[k];
        CHECK(d[b.first][b.second] == l(f, k));
      }
    }
  }
  SUBCASE("frame out of range") { CHECK_THROWS_AS(distance_matrix(coincident(2), 2), std::out_of_range); }
}

TEST_CASE("pose JSON loading") {
  const auto dir = scratch_dir("pose_json");
  const std::string names =
      R"(["nose","neck","r-shoulder","r-elbow","r-wrist","l-shoulder","l-elbow","l-wrist","r-hip","r-knee",)"
      R"("r-ankle","l-hip","l-knee","l-ankle","r-eye","l-eye","r-ear","l-ear","r-foot-tip","l-foot-tip"])";
  auto frame_of = [](std::size_t joints, const std::string& xy = "[0.5,0.25]") {
    std::string f = "[";
    for (std::size_t j = 0; j < joints; ++j) f += (j ? "," : "") + xy;
    return f + "]";
  };

  SUBCASE("minimal valid file") {
    const auto seq = parse_pose(R"({"fps": 25, "joints": )" + names + R"(, "frames": [)" + frame_of(20) + "]}");
    CHECK(seq.frame_count() == 1);
    CHECK(seq.fps() == 25.0);
    CHECK(seq.at(0, 19) == Point2{0.5, 0.25});
  }
  SUBCASE("fps defaults to 30") {
    CHECK(parse_pose(R"({"joints": )" + names + R"(, "frames": [)" + frame_of(20) + "]}").fps() == 30.0);
  }
  SUBCASE("wrong joint count in a frame") {
    CHECK_THROWS_WITH_AS(parse_pose(R"({"joints": )" + names + R"(, "frames": [)" + frame_of(19) + "]}"),
                         doctest::Contains("expected 20 joints"), SchemaError);
  }
  SUBCASE("joint names must match the canonical order") {
    std::string swapped = names;
    swapped.replace(swapped.find("\"nose\""), 6, "\"head\"");
    CHECK_THROWS_AS(parse_pose(R"({"joints": )" + swapped + R"(, "frames": [)" + frame_of(20) + "]}"), SchemaError);
  }
  SUBCASE("malformed JSON reports the line") {
    CHECK_THROWS_WITH_AS(parse_pose("{\n\"fps\": 30,\n\"joints\": [,\n}"), doctest::Contains("line 3"), ParseError);
  }
  SUBCASE("overflowing coordinate is non-finite") {
    std::string frame = frame_of(20);
    frame.replace(frame.rfind("[0.5,0.25]"), 10, "[1e400,0.25]");
    CHECK_THROWS_WITH_AS(parse_pose(R"({"joints": )" + names + R"(, "frames": [)" + frame_of(20) + "," + frame + "]}"),
                         doctest::Contains("frame 1, joint 19"), ValidationError);
  }
  SUBCASE("NaN and Infinity tokens") {
    std::string frame = frame_of(20);
    frame.replace(frame.find("[0.5,0.25]"), 10, "[0.5,NaN]");
    CHECK_THROWS_WITH_AS(parse_pose(R"({"joints": )" + names + R"(, "frames": [)" + frame + "]}"),
                         doctest::Contains("frame 0, joint 0"), ValidationError);
    frame = frame_of(20);
    frame.replace(frame.rfind("[0.5,0.25]"), 10, "[-Infinity,0]");
    CHECK_THROWS_WITH_AS(parse_pose(R"({"joints": )" + names + R"(, "frames": [)" + frame + "]}"),
                         doctest::Contains("frame 0, joint 19"), ValidationError);
  }
  SUBCASE("coordinates beyond the sanity bound") {
    CHECK_THROWS_AS(parse_pose(R"({"joints": )" + names + R"(, "frames": [)" + frame_of(20, "[11,0]") + "]}"),
                    ValidationError);
  }
  SUBCASE("pixel scale normalizes before the bound check") {
    PoseLoadOptions opts;
    opts.pixel_scale = 512.0;
    const auto seq = parse_pose(R"({"joints": )" + names + R"(, "frames": [)" + frame_of(20, "[256,128]") + "]}", opts);
    CHECK(seq.at(0, 3) == Point2{0.5, 0.25});
  }
  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(load_pose(dir / "nope.json"), doctest::Contains("file not found"), IoError);
  }
}

TEST_CASE("pose save/load round trip is bit exact") {
  const auto dir = scratch_dir("pose_roundtrip");
  Rng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t frames = 1 + static_cast<std::size_t>(rng.uniform(0.0, 12.0));
    std::vector<Point2> joints(frames * kNumJoints);
    // Mix of magnitudes, including tiny and negative values.
    for (auto& p : joints) p = {rng.uniform(-10.0, 10.0) * std::pow(10.0, -rng.uniform(0.0, 8.0)), rng.uniform(-1.0, 1.0)};
    const PoseSequence seq(std::move(joints), rng.uniform(1.0, 120.0));
    const auto path = dir / ("seq" + std::to_string(trial) + ".json");
    save_pose(seq, path);
    const auto back = load_pose(path);
    CHECK(back == seq);
    CHECK(format_pose(back) == read_file(path));
  }
}
