#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace scabs {

struct SystemConfig {
  std::string type = "pendulum";  // "pendulum" or "custom"
  double omega = 1.0;
  double gamma = 0.01;
  double u_hat = 2.0;
  double T = 0.2;
  // custom systems
  std::string kind = "sampled";  // "sampled" or "discrete"
  int state_dim = 2;
  std::vector<std::string> expressions;
  std::string plugin;
  std::vector<std::vector<double>> inputs;
  std::vector<std::string> input_names;
  std::map<std::string, double> constants;
  std::vector<double> period;  // empty: no periodic coordinate
};

struct CertificateConfig {
  std::string method = "auto";  // auto, closed_form, discrete, m1m2, c2
  int samples = 500;
  double safety = 1.05;
  std::uint64_t seed = 1;
  std::vector<double> region_lo;  // empty: operating range of the quantizer
  std::vector<double> region_hi;
};

struct QuantizerConfig {
  std::string type = "hex";  // "hex" or "box"
  double s = 0.0;            // 0: the pendulum size pi / (16 sqrt 3)
  double strip_lo = -3.14159265358979323846;
  double strip_hi = 3.14159265358979323846;
  double period = 2 * 3.14159265358979323846;
  std::optional<double> superset_radius = 0.4;  // nullopt: from the certificate
  std::vector<std::pair<int, int>> obstacles;   // (col, row)
  int stencil = 3;
  double origin_x = 0.0;
  double origin_y = 0.0;
  std::vector<double> box_lo;
  std::vector<double> box_hi;
  std::vector<int> box_counts;
};

struct AbstractionConfig {
  int N = 3;
  double feasibility_tol = 1e-8;
  int threads = 0;  // 0: SCABS_THREADS or the hardware concurrency
  bool test_against_superset = false;
};

struct SynthesisConfig {
  std::vector<double> start{0.0, 0.0};
  std::string target = "pendulum_ellipsoid";  // or "ellipsoid"
  std::vector<double> center;
  std::vector<std::vector<double>> Q;
  double level = 1.0;
};

struct SimulationConfig {
  std::vector<std::vector<double>> x0{{0.0, 0.0}};
  int max_steps = 100;
};

struct OutputConfig {
  std::string directory = "scabs-out";
  std::vector<std::string> formats{"json", "csv", "svg"};
};

struct ProjectConfig {
  int version = 1;
  SystemConfig system;
  CertificateConfig certificate;
  QuantizerConfig quantizer;
  AbstractionConfig abstraction;
  SynthesisConfig synthesis;
  SimulationConfig simulation;
  OutputConfig output;

  bool wants(const std::string& format) const;
};

/// Strict parse: unknown keys, wrong types and non-positive tolerances throw
/// ConfigError naming the offending path. Missing keys take defaults.
ProjectConfig parse_config(const nlohmann::json& doc);

/// Full document with every key, so that parse(emit(parse(d))) == parse(d).
nlohmann::json emit_config(const ProjectConfig& cfg);

/// Sets the leaf at a dotted path. The value is read as JSON when it parses,
/// as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace scabs
