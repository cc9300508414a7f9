#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "temporalot/error.hpp"
#include "temporalot/trajectory.hpp"

using namespace temporalot;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "temporalot_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("three dim-2 records load as T=3, D=2") {
  const Trajectory t = parse_trajectory("TRAJ v1 dim=2 len=3 actions=0\n1 2\n3 4\n5 6\n");
  CHECK(t.length() == 3);
  CHECK(t.dim() == 2);
  CHECK(t.features()(2, 1) == 6.0);
  CHECK_FALSE(t.has_actions());
}

TEST_CASE("NaN entry is a validation error") {
  CHECK_THROWS_AS(parse_trajectory("TRAJ v1 dim=2 len=1 actions=0\n1 nan\n"), ValidationError);
}

TEST_CASE("malformed files are parse errors") {
  CHECK_THROWS_AS(parse_trajectory(""), ParseError);
  CHECK_THROWS_AS(parse_trajectory("TRAJ v2 dim=1 len=1 actions=0\n1\n"), ParseError);
  CHECK_THROWS_AS(parse_trajectory("TRAJ v1 dim=1 len=2 actions=0\n1\n"), ParseError);
  CHECK_THROWS_AS(parse_trajectory("TRAJ v1 dim=1 len=1 actions=1\n1\n"), ParseError);
  CHECK_THROWS_AS(parse_trajectory("TRAJ v1 dim=2 len=1 actions=0\n1\n"), ValidationError);
}

TEST_CASE("empty feature list is rejected") {
  CHECK_THROWS_AS(Trajectory::from_rows({}), ValidationError);
  CHECK_THROWS_AS(Trajectory(Matrix(0, 2)), ValidationError);
}

TEST_CASE("save then load is bit-exact, actions included") {
  std::mt19937_64 rng(1);
  Matrix f = oracle::random_trajectory(rng, 9, 3).features();
  f(0, 0) = 0.1;
  f(1, 1) = std::numeric_limits<double>::denorm_min();
  f(2, 2) = -1e300;
  std::vector<std::string> actions{"0", "1", "2", "3", "4", "up", "a:b", "0", "1"};
  const Trajectory t(f, actions);
  const auto path = scratch("roundtrip.traj");
  save_trajectory(t, path);
  const Trajectory back = load_trajectory(path);
  CHECK(back == t);
  REQUIRE(back.has_actions());
  CHECK((*back.actions())[6] == "a:b");

  const Trajectory one = Trajectory::from_rows({{0.0}});
  save_trajectory(one, path);
  CHECK(load_trajectory(path) == one);
}

TEST_CASE("action ids may not contain separators") {
  CHECK_THROWS_AS(Trajectory::from_rows({{1.0}}, std::vector<std::string>{"a b"}), ValidationError);
  CHECK_THROWS_AS(Trajectory::from_rows({{1.0}}, std::vector<std::string>{"a|b"}), ValidationError);
  CHECK_THROWS_AS(Trajectory::from_rows({{1.0}, {2.0}}, std::vector<std::string>{"a"}),
                  ValidationError);
}

TEST_CASE("loading a missing file names the path") {
  CHECK_THROWS_WITH_AS(load_trajectory("/nonexistent/x.traj"),
                       doctest::Contains("/nonexistent/x.traj"), Error);
}

TEST_CASE("subsample keeps frames 0, N, 2N, ...") {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({static_cast<double>(i)});
  const Trajectory t = Trajectory::from_rows(rows);
  CHECK(subsample_demo(t, 1) == t);
  const Trajectory s2 = subsample_demo(t, 2);
  REQUIRE(s2.length() == 5);
  for (Index i = 0; i < 5; ++i) CHECK(s2.features()(i, 0) == 2.0 * static_cast<double>(i));
  const Trajectory s3 = subsample_demo(subsample_demo(t, 1), 1);
  CHECK(s3 == t);

  rows.resize(7);
  const Trajectory seven = subsample_demo(Trajectory::from_rows(rows), 3);
  REQUIRE(seven.length() == 3);
  CHECK(seven.features()(2, 0) == 6.0);
  CHECK_THROWS_AS(subsample_demo(t, 0), ArgumentError);
}

TEST_CASE("subsampling composes exactly") {
  for (int len = 1; len <= 30; ++len) {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < len; ++i) rows.push_back({static_cast<double>(i)});
    const Trajectory t = Trajectory::from_rows(rows, std::vector<std::string>(len, "0"));
    for (int a = 1; a <= 4; ++a) {
      for (int b = 1; b <= 4; ++b) {
        CHECK(subsample_demo(subsample_demo(t, a), b) == subsample_demo(t, a * b));
      }
    }
  }
}

TEST_CASE("demo sets share one dimension") {
  const Trajectory a = Trajectory::from_rows({{1, 0}});
  const Trajectory b = Trajectory::from_rows({{1, 0}, {0, 1}});
  CHECK(DemoSet({a, b}).size() == 2);
  CHECK_THROWS_AS(DemoSet({a, Trajectory::from_rows({{1.0}})}), ValidationError);
  CHECK_THROWS_AS(DemoSet({}), ValidationError);
}
