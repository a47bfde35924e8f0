#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "scabs/cli.hpp"

using namespace scabs;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "scabs");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string config(const std::string& name) { return std::string(SCABS_SOURCE_DIR) + "/configs/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("scabs_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST(Cli, CertifyReportsClosedFormRadius) {
  const auto dir = scratch("certify");
  const auto r = run({"certify", "-c", config("pendulum_N3.json"), "-o", dir.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("r_max = 0.401 (closed form), admissible superset radius 0.4: OK"), std::string::npos)
      << r.out;
  const auto doc = nlohmann::json::parse(slurp(dir / "certificate.json"));
  EXPECT_NEAR(doc["chosen"]["r_max"].get<double>(), 0.4014, 1e-4);
  EXPECT_TRUE(doc["admissible"].get<bool>());
  EXPECT_TRUE(fs::exists(dir / "config.json"));
}

TEST(Cli, CertificateFailureExitsWithTwo) {
  const auto dir = scratch("cert_fail");
  const auto r = run({"certify", "-c", config("pendulum_N3.json"), "-o", dir.string(), "--set",
                      "quantizer.superset_radius=0.45"});
  EXPECT_EQ(r.code, kExitCertificate);
  EXPECT_NE(r.out.find("VIOLATED"), std::string::npos);
  const auto s = run({"abstract", "-c", config("pendulum_N3.json"), "-o", dir.string(), "--set",
                      "quantizer.superset_radius=0.45"});
  EXPECT_EQ(s.code, kExitCertificate);
  EXPECT_NE(s.err.find("CONDITIONS_VIOLATED"), std::string::npos);
}

TEST(Cli, InfeasibleSynthesisExitsWithThree) {
  const auto dir = scratch("infeasible");
  const auto r = run({"synthesize", "-c", config("pendulum_N2.json"), "-o", dir.string()});
  EXPECT_EQ(r.code, kExitInfeasible) << r.err;
  EXPECT_NE(r.out.find("not winnable"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "strategy.json"));
}

TEST(Cli, ConfigurationErrorsExitWithOne) {
  const auto dir = scratch("errors");
  EXPECT_EQ(run({"certify", "-c", config("missing.json")}).code, kExitError);
  const auto r = run({"certify", "-c", config("pendulum_N3.json"), "-o", dir.string(), "--set", "abstraction.M=2"});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_NE(r.err.find("abstraction.M: unknown key"), std::string::npos) << r.err;
  EXPECT_EQ(run({"frobnicate"}).code, kExitError);
  EXPECT_EQ(run({"certify"}).code, kExitError);
}

TEST(Cli, AbstractPrintsStatsPerSpan) {
  const auto dir = scratch("abstract");
  const auto r = run({"abstract", "-c", config("pendulum_N2.json"), "-o", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("304 operating"), std::string::npos);
  EXPECT_NE(r.out.find("4412"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "transitions_N1.json"));
  EXPECT_TRUE(fs::exists(dir / "transitions_N2.json"));
  EXPECT_TRUE(fs::exists(dir / "quantizer.json"));
  const std::string csv = slurp(dir / "stats.csv");
  EXPECT_EQ(csv.rfind("N,half_spaces,feasibility_tests,states,transitions\r\n", 0), 0u);
  EXPECT_NE(csv.find("2,23086,95480,4412,34570\r\n"), std::string::npos);
}

TEST(Cli, OutputsAreDeterministic) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (const auto& [dir, threads] : {std::pair{a, "1"}, std::pair{b, "4"}}) {
    ASSERT_EQ(run({"simulate", "-c", config("duffing_sampled.json"), "-o", dir.string(), "-j", threads}).code,
              kExitOk);
  }
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    if (name == "config.json") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(b / name)) << name;
    ++compared;
  }
  EXPECT_GE(compared, 8);
}

TEST(Cli, SimulateWritesTrajectories) {
  const auto dir = scratch("simulate");
  const auto r = run({"simulate", "-c", config("linear_discrete.json"), "-o", dir.string(), "--x0", "1.35,1.35",
                      "--x0", "-1.2,1.4"});
  ASSERT_EQ(r.code, kExitOk) << r.err << r.out;
  const std::string csv = slurp(dir / "trajectory_1.csv");
  EXPECT_EQ(csv.rfind("t,x1,x2,u,cell\r\n0,-1.2,1.4,", 0), 0u) << csv;
  EXPECT_FALSE(fs::exists(dir / "trajectory_2.csv"));
  const std::string svg = slurp(dir / "phase.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_EQ(run({"simulate", "-c", config("linear_discrete.json"), "-o", dir.string(), "--x0", "1,x"}).code,
            kExitError);
}

TEST(Cli, PluginConfigMatchesExpressionConfig) {
  const auto a = scratch("plugin"), b = scratch("expressions");
  ASSERT_EQ(run({"synthesize", "-c", config("duffing_plugin.json"), "-o", a.string(), "--set",
                 "system.plugin=" SCABS_TEST_PLUGIN})
                .code,
            kExitOk);
  ASSERT_EQ(run({"synthesize", "-c", config("duffing_sampled.json"), "-o", b.string()}).code, kExitOk);
  EXPECT_EQ(slurp(a / "strategy.json"), slurp(b / "strategy.json"));
}

TEST(Cli, PlotDrawsWithoutTrajectories) {
  const auto dir = scratch("plot");
  ASSERT_EQ(run({"plot", "-c", config("pendulum_obstacles.json"), "-o", dir.string(), "--set", "abstraction.N=1"}).code,
            kExitOk);
  const std::string svg = slurp(dir / "phase.svg");
  EXPECT_NE(svg.find("url(#hatch)"), std::string::npos);
  EXPECT_EQ(svg.find("<polyline"), std::string::npos);
}
