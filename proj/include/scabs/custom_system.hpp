#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scabs/dynamics.hpp"

namespace scabs {

enum class SystemKind { Discrete, Sampled };

struct CustomSystemSpec {
  SystemKind kind = SystemKind::Sampled;
  int state_dim = 0;
  /// Input values (each of the plugin's or expressions' input dimension).
  std::vector<Vec> inputs;
  std::vector<std::string> input_names;
  double T = 0.0;  // sampled systems
  std::optional<Vec> period;
};

/// Right-hand side (sampled) or step map (discrete) given componentwise in
/// the variables x1..xn and u1..um, with named constants. Jacobians and
/// Hessians are differentiated symbolically. Throws ConfigError.
SystemModel make_expression_system(const CustomSystemSpec& spec, const std::vector<std::string>& exprs,
                                   const std::map<std::string, double>& constants = {});

/// System from a shared object implementing plugin_abi.h. The library stays
/// loaded while the returned model (or a copy) is alive. Throws PluginError.
SystemModel load_plugin_system(const CustomSystemSpec& spec, const std::string& path);

}  // namespace scabs
