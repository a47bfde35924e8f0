#include <gtest/gtest.h>

#include <json.hpp>

#include "scabs/config.hpp"
#include "scabs/error.hpp"

using namespace scabs;
using nlohmann::json;

namespace {

Errc code_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::InvalidArgument;
}

}  // namespace

TEST(Config, DefaultsDescribeThePendulumProblem) {
  const ProjectConfig c = parse_config(json::object());
  EXPECT_EQ(c.system.type, "pendulum");
  EXPECT_EQ(c.abstraction.N, 3);
  EXPECT_EQ(c.quantizer.type, "hex");
  EXPECT_TRUE(c.quantizer.superset_radius.has_value());
  EXPECT_DOUBLE_EQ(*c.quantizer.superset_radius, 0.4);
  EXPECT_TRUE(c.wants("json"));
}

TEST(Config, EmitParseIsAFixedPoint) {
  json doc = {{"system", {{"omega", 1.5}, {"gamma", 0.02}}},
              {"quantizer", {{"superset_radius", "auto"}, {"obstacles", {{1, 2}, {3, -4}}}}},
              {"abstraction", {{"N", 2}, {"threads", 3}}},
              {"output", {{"formats", {"csv"}}}}};
  const json once = emit_config(parse_config(doc));
  const json twice = emit_config(parse_config(once));
  EXPECT_EQ(once, twice);
  EXPECT_EQ(once["quantizer"]["superset_radius"], "auto");
  EXPECT_EQ(once["abstraction"]["N"], 2);
}

TEST(Config, RejectsUnknownKeys) {
  EXPECT_EQ(code_of({{"sytem", json::object()}}), Errc::ConfigError);
  EXPECT_EQ(code_of({{"abstraction", {{"n", 2}}}}), Errc::ConfigError);
  EXPECT_EQ(code_of({{"quantizer", {{"radius", 0.3}}}}), Errc::ConfigError);
}

TEST(Config, RejectsBadValues) {
  EXPECT_EQ(code_of({{"version", 2}}), Errc::ConfigError);
  EXPECT_EQ(code_of({{"abstraction", {{"N", 9}}}}), Errc::ConfigError);
  EXPECT_EQ(code_of({{"abstraction", {{"N", "3"}}}}), Errc::ConfigError);
  EXPECT_EQ(code_of({{"system", {{"T", -1}}}}), Errc::ConfigError);
  EXPECT_EQ(code_of({{"certificate", {{"method", "guess"}}}}), Errc::ConfigError);
  EXPECT_EQ(code_of({{"quantizer", {{"superset_radius", "big"}}}}), Errc::ConfigError);
  EXPECT_EQ(code_of({{"output", {{"formats", {"pdf"}}}}}), Errc::ConfigError);
  EXPECT_EQ(code_of({{"system", {{"type", "custom"}, {"inputs", {{0}}}}}}), Errc::ConfigError);
}

TEST(Config, OverridesSetLeafValues) {
  json doc = json::object();
  apply_override(doc, "abstraction.N=2");
  apply_override(doc, "quantizer.obstacles=[[1,2]]");
  apply_override(doc, "output.directory=runs/a");
  apply_override(doc, "certificate.method=\"m1m2\"");
  const ProjectConfig c = parse_config(doc);
  EXPECT_EQ(c.abstraction.N, 2);
  ASSERT_EQ(c.quantizer.obstacles.size(), 1u);
  EXPECT_EQ(c.quantizer.obstacles[0], std::make_pair(1, 2));
  EXPECT_EQ(c.output.directory, "runs/a");
  EXPECT_EQ(c.certificate.method, "m1m2");
  EXPECT_THROW(apply_override(doc, "novalue"), Error);
  EXPECT_THROW(apply_override(doc, "abstraction.N.x=1"), Error);
}
