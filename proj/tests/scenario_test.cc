#include "naclab/scenario.h"

#include <gtest/gtest.h>

#include <fstream>

#include "naclab/errors.h"
#include "test_support.h"

namespace naclab {
namespace {

const char* kSmall = R"(# two-state plant
name: small
system {
  A: [[-1, 0], [0, -2]]
  B: [[1], [1]]
  C: [[1, 1]]
}
actions {
  directions: [[1], [-1]]
}
quantizer {
  kind: uniform
  lambda: 0.25
}
simulation {
  x0: [1, -0.5]
  t_end: 2
  dt: 0.01
  hold: 0.02
  disturbance: [[0, 0.1],
                [1, 0]]
}
analysis {
  tau: [1, 2]
  include_dc: false
}
)";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

void expect_parse_error(const std::string& text, int line, const std::string& field) {
  try {
    parse_scenario(text);
    ADD_FAILURE() << "no ParseError for field " << field;
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
    EXPECT_EQ(e.field(), field) << e.what();
  }
}

TEST(ParseScenarioTest, ReadsEveryBlock) {
  const Scenario sc = parse_scenario(kSmall);
  EXPECT_EQ(sc.name, "small");
  EXPECT_EQ(sc.system.n(), 2);
  EXPECT_EQ(sc.system.m(), 1);
  EXPECT_EQ(sc.system.A()(1, 1), -2.0);
  EXPECT_EQ(sc.actions.base.size(), 2);
  EXPECT_EQ(sc.actions.scales.kind(), ScaleSet::Kind::kUniform);
  EXPECT_EQ(sc.actions.scales.lambda(), 0.25);
  EXPECT_EQ(sc.quantizer, QuantizerKind::kUniform);
  EXPECT_EQ(sc.x0, Eigen::Vector2d(1, -0.5));
  EXPECT_EQ(sc.t_end, 2.0);
  EXPECT_EQ(sc.dt, 0.01);
  EXPECT_EQ(sc.hold, 0.02);
  ASSERT_EQ(sc.disturbance.times.size(), 2u);
  EXPECT_EQ(sc.disturbance.values[0](0), 0.1);
  EXPECT_EQ(sc.analysis.tau_grid, (std::vector<double>{1, 2}));
  EXPECT_FALSE(sc.analysis.spr.include_dc);
  EXPECT_EQ(sc.analysis.spr.points, 400);
}

TEST(ParseScenarioTest, OptionalKeysDefault) {
  std::string text = replace(kSmall, "  hold: 0.02\n", "");
  text = replace(text, "  disturbance: [[0, 0.1],\n                [1, 0]]\n", "");
  const Scenario sc = parse_scenario(text);
  EXPECT_EQ(sc.hold, sc.dt);
  EXPECT_TRUE(sc.disturbance.empty());
}

TEST(ParseScenarioTest, QuantizerKinds) {
  const Scenario log = parse_scenario(
      replace(kSmall, "  kind: uniform\n  lambda: 0.25\n", "  kind: logarithmic-symmetric\n  lambda: 2\n"));
  EXPECT_EQ(log.actions.scales.kind(), ScaleSet::Kind::kLogarithmic);
  EXPECT_EQ(log.actions.scales.min_exponent(), -400);
  const Scenario minimal = parse_scenario(replace(kSmall, "  kind: uniform\n  lambda: 0.25\n", "  kind: minimal\n"));
  EXPECT_EQ(minimal.quantizer, QuantizerKind::kMinimal);
  EXPECT_EQ(minimal.actions.scales.scales(), std::vector<double>{1.0});
  const Scenario expl = parse_scenario(
      replace(kSmall, "  kind: uniform\n  lambda: 0.25\n", "  kind: explicit\n  scales: [0.5, 2]\n"));
  EXPECT_EQ(expl.actions.scales.scales(), (std::vector<double>{0.5, 2.0}));
}

TEST(ParseScenarioTest, AnglesMatchDirections) {
  const std::string planar = R"(name: planar
system {
  A: [[-1, 0], [0, -1]]
  B: [[1, 0], [0, 1]]
  C: [[1, 0], [0, 1]]
}
actions {
  angles: [0, 2.0943951023931957, 4.1887902047863914]
}
quantizer {
  kind: uniform
  lambda: 1
}
simulation {
  x0: [1, 1]
}
)";
  const Scenario p = parse_scenario(planar);
  EXPECT_NEAR(p.actions.base.direction(1)(0), -0.5, 1e-15);
  EXPECT_EQ(p.t_end, 50.0);
}

TEST(ParseScenarioTest, StrictErrorsCarryLineAndField) {
  expect_parse_error(replace(kSmall, "  lambda: 0.25\n", "  lambda: 0.25\n  lamda: 3\n"), 14, "lamda");
  expect_parse_error(replace(kSmall, "analysis {", "extras {\n}\nanalysis {"), 23, "extras");
  expect_parse_error(replace(kSmall, "  t_end: 2\n", "  t_end: 2\n  t_end: 3\n"), 18, "t_end");
  expect_parse_error(replace(kSmall, "  x0: [1, -0.5]\n", ""), 15, "x0");
  expect_parse_error(replace(kSmall, "  x0: [1, -0.5]\n", "  x0: [1, -0.5\n"), 16, "x0");
  expect_parse_error(replace(kSmall, "  t_end: 2\n", "  t_end: two\n"), 17, "t_end");
  expect_parse_error(replace(kSmall, "  kind: uniform\n", "  kind: cubic\n"), 12, "kind");
  expect_parse_error(replace(kSmall, "  kind: uniform\n  lambda: 0.25\n", "  kind: minimal\n  lambda: 0.25\n"),
                     13, "lambda");
  expect_parse_error(replace(kSmall, "  lambda: 0.25\n", ""), 12, "lambda");
  expect_parse_error(replace(kSmall, "  include_dc: false\n", "  include_dc: maybe\n"), 25, "include_dc");
  expect_parse_error(replace(kSmall, "name: small\n", "name: small\ntitle: x\n"), 3, "title");
}

TEST(ParseScenarioTest, MalformedArraysAndShapes) {
  EXPECT_THROW(parse_scenario(replace(kSmall, "[[-1, 0], [0, -2]]", "[[-1, 0], [0]]")), ParseError);
  EXPECT_THROW(parse_scenario(replace(kSmall, "[[-1, 0], [0, -2]]", "[[-1, 0], [0, -2],]")), ParseError);
  EXPECT_THROW(parse_scenario(replace(kSmall, "[[-1, 0], [0, -2]]", "[[-1, 0] [0, -2]]")), ParseError);
  EXPECT_THROW(parse_scenario(replace(kSmall, "directions: [[1], [-1]]", "directions: [[1], [-0.5]]")),
               ParseError);
  EXPECT_THROW(parse_scenario(replace(kSmall, "  B: [[1], [1]]\n", "  B: [[1, 0], [1, 0]]\n")), ParseError);
  EXPECT_THROW(parse_scenario(replace(kSmall, "  hold: 0.02\n", "  hold: 0.015\n")), ParseError);
  EXPECT_THROW(parse_scenario(replace(kSmall, "system {", "system {\nsystem {")), ParseError);
  EXPECT_THROW(parse_scenario(replace(kSmall, "analysis {", "}\nanalysis {")), ParseError);
}

TEST(FormatScenarioTest, RoundTrip) {
  for (const std::string& text : {std::string(kSmall), builtin_scenario_text("ocean-battery-uniform"),
                                  builtin_scenario_text("ocean-battery-log"),
                                  builtin_scenario_text("ocean-battery-minimal")}) {
    const Scenario a = parse_scenario(text);
    const Scenario b = parse_scenario(format_scenario(a));
    EXPECT_EQ(a.name, b.name);
    EXPECT_TRUE(a.system == b.system);
    EXPECT_EQ(a.actions.base.rows(), b.actions.base.rows());
    EXPECT_TRUE(a.actions.scales == b.actions.scales);
    EXPECT_EQ(a.quantizer, b.quantizer);
    EXPECT_EQ(a.x0, b.x0);
    EXPECT_EQ(a.t_end, b.t_end);
    EXPECT_EQ(a.dt, b.dt);
    EXPECT_EQ(a.hold, b.hold);
    EXPECT_TRUE(a.disturbance == b.disturbance);
    EXPECT_EQ(a.analysis.tau_grid, b.analysis.tau_grid);
    EXPECT_EQ(a.analysis.seed, b.analysis.seed);
    EXPECT_EQ(a.analysis.spr.include_dc, b.analysis.spr.include_dc);
    EXPECT_EQ(format_scenario(a), format_scenario(b));
  }
}

TEST(BuiltinScenarioTest, OceanBatteryContents) {
  EXPECT_EQ(builtin_scenario_names().size(), 3u);
  EXPECT_TRUE(is_builtin_scenario("ocean-battery-log"));
  EXPECT_FALSE(is_builtin_scenario("ocean-battery"));
  EXPECT_THROW(builtin_scenario_text("nope"), PreconditionError);
  const Scenario u = load_scenario("ocean-battery-uniform");
  EXPECT_TRUE(u.system == testing::ocean_battery());
  const ActionSet t = testing::triangle();
  EXPECT_LE((u.actions.base.rows() - t.rows()).norm(), 1e-15);
  EXPECT_EQ(u.actions.scales.lambda(), 0.5);
  EXPECT_EQ(u.x0, Eigen::Vector4d(5, -3, 4, -2));
  EXPECT_EQ(u.dt, 1e-3);
  EXPECT_EQ(u.t_end, 50.0);
  EXPECT_EQ(load_scenario("ocean-battery-log").actions.scales.lambda(), 1.1);
  EXPECT_EQ(load_scenario("ocean-battery-minimal").quantizer, QuantizerKind::kMinimal);
}

TEST(LoadScenarioTest, FilesAndMissingPaths) {
  const auto dir = testing::temp_dir("scenario_test");
  const auto path = dir / "small.scn";
  std::ofstream(path) << kSmall;
  EXPECT_EQ(load_scenario(path.string()).name, "small");
  EXPECT_THROW(load_scenario((dir / "missing.scn").string()), std::runtime_error);
}

}  // namespace
}  // namespace naclab
