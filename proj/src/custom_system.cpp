#include "scabs/custom_system.hpp"

#include <dlfcn.h>

#include <memory>

#include "scabs/error.hpp"
#include "scabs/expr.hpp"
#include "scabs/plugin_abi.h"

namespace scabs {

namespace {

using EvalFn = std::function<Vec(const Vec&, const Vec&)>;
using JacFn = std::function<Mat(const Vec&, const Vec&)>;

void check_spec(const CustomSystemSpec& spec, int input_dim, Errc err) {
  if (spec.state_dim < 1) throw Error(err, "state dimension must be positive");
  if (spec.inputs.empty()) throw Error(err, "at least one input value is required");
  for (const auto& u : spec.inputs) {
    if (u.size() != input_dim) throw Error(err, "input values must have " + std::to_string(input_dim) + " components");
  }
  if (!spec.input_names.empty() && spec.input_names.size() != spec.inputs.size()) {
    throw Error(err, "one name per input value is required");
  }
  if (spec.kind == SystemKind::Sampled && !(spec.T > 0)) throw Error(err, "sampling time must be positive");
  if (spec.period && spec.period->size() != spec.state_dim) throw Error(err, "period must have one entry per state");
}

std::vector<std::string> names_of(const CustomSystemSpec& spec) {
  if (!spec.input_names.empty()) return spec.input_names;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < spec.inputs.size(); ++i) out.push_back("u" + std::to_string(i));
  return out;
}

SystemModel assemble(const CustomSystemSpec& spec, EvalFn f, JacFn jac, HessianField hess) {
  if (spec.kind == SystemKind::Discrete) {
    DiscreteSystem d;
    d.n = spec.state_dim;
    d.input_names = names_of(spec);
    d.step = [f, in = spec.inputs](const Vec& x, int u) { return f(x, in.at(u)); };
    d.jacobian = [jac, in = spec.inputs](const Vec& x, int u) { return jac(x, in.at(u)); };
    d.period = spec.period;
    return d;
  }
  SampledSystem s;
  s.n = spec.state_dim;
  s.inputs = spec.inputs;
  s.input_names = names_of(spec);
  s.rhs = std::move(f);
  s.rhs_jac = std::move(jac);
  s.rhs_hess = std::move(hess);
  s.T = spec.T;
  s.period = spec.period;
  return s;
}

}  // namespace

SystemModel make_expression_system(const CustomSystemSpec& spec, const std::vector<std::string>& exprs,
                                   const std::map<std::string, double>& constants) {
  const int n = spec.state_dim;
  const int m = spec.inputs.empty() ? 0 : static_cast<int>(spec.inputs[0].size());
  check_spec(spec, m, Errc::ConfigError);
  if (static_cast<int>(exprs.size()) != n) throw Error(Errc::ConfigError, "one expression per state is required");
  std::vector<std::string> vars;
  for (int i = 1; i <= n; ++i) vars.push_back("x" + std::to_string(i));
  for (int j = 1; j <= m; ++j) vars.push_back("u" + std::to_string(j));

  auto F = std::make_shared<std::vector<expr::Expr>>();
  auto J = std::make_shared<std::vector<expr::Expr>>();
  auto H = std::make_shared<std::vector<expr::Expr>>();
  for (const auto& text : exprs) F->push_back(expr::parse(text, vars, constants));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) J->push_back(expr::derivative((*F)[i], j));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) H->push_back(expr::derivative((*J)[i * n + j], k));

  auto pack = [n, m](const Vec& x, const Vec& u) {
    std::vector<double> v(static_cast<std::size_t>(n + m));
    for (int i = 0; i < n; ++i) v[i] = x(i);
    for (int j = 0; j < m; ++j) v[n + j] = u(j);
    return v;
  };
  EvalFn f = [F, n, pack](const Vec& x, const Vec& u) {
    const auto v = pack(x, u);
    Vec out(n);
    for (int i = 0; i < n; ++i) out(i) = expr::eval((*F)[i], v);
    return out;
  };
  JacFn jac = [J, n, pack](const Vec& x, const Vec& u) {
    const auto v = pack(x, u);
    Mat out(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = expr::eval((*J)[i * n + j], v);
    return out;
  };
  HessianField hess = [H, n, pack](const Vec& x, const Vec& u) {
    const auto v = pack(x, u);
    std::vector<Mat> out(n, Mat(n, n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) out[i](j, k) = expr::eval((*H)[(i * n + j) * n + k], v);
    return out;
  };
  return assemble(spec, std::move(f), std::move(jac), std::move(hess));
}

SystemModel load_plugin_system(const CustomSystemSpec& spec, const std::string& path) {
  void* raw = dlopen(path.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (!raw) throw Error(Errc::PluginError, "cannot load " + path + ": " + dlerror());
  std::shared_ptr<void> handle(raw, [](void* h) { dlclose(h); });
  auto sym = [&](const char* name, bool required) -> void* {
    void* p = dlsym(handle.get(), name);
    if (!p && required) throw Error(Errc::PluginError, path + " lacks symbol " + name);
    return p;
  };
  auto abi = reinterpret_cast<scabs_plugin_int_fn>(sym("scabs_plugin_abi", true));
  if (abi() != SCABS_PLUGIN_ABI) throw Error(Errc::PluginError, path + " has an unsupported ABI version");
  const int n = reinterpret_cast<scabs_plugin_int_fn>(sym("scabs_plugin_state_dim", true))();
  const int m = reinterpret_cast<scabs_plugin_int_fn>(sym("scabs_plugin_input_dim", true))();
  if (n != spec.state_dim) throw Error(Errc::PluginError, path + " reports state dimension " + std::to_string(n));
  check_spec(spec, m, Errc::PluginError);
  auto ev = reinterpret_cast<scabs_plugin_eval_fn>(sym("scabs_plugin_eval", true));
  auto jf = reinterpret_cast<scabs_plugin_eval_fn>(sym("scabs_plugin_jacobian", true));
  auto hf = reinterpret_cast<scabs_plugin_eval_fn>(sym("scabs_plugin_hessian", false));

  EvalFn f = [handle, ev, n](const Vec& x, const Vec& u) {
    Vec out(n);
    ev(x.data(), u.data(), out.data());
    return out;
  };
  JacFn jac = [handle, jf, n](const Vec& x, const Vec& u) {
    std::vector<double> buf(static_cast<std::size_t>(n * n));
    jf(x.data(), u.data(), buf.data());
    Mat out(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = buf[static_cast<std::size_t>(i * n + j)];
    return out;
  };
  HessianField hess;
  if (hf) {
    hess = [handle, hf, n](const Vec& x, const Vec& u) {
      std::vector<double> buf(static_cast<std::size_t>(n * n * n));
      hf(x.data(), u.data(), buf.data());
      std::vector<Mat> out(n, Mat(n, n));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) out[i](j, k) = buf[static_cast<std::size_t>((i * n + j) * n + k)];
      return out;
    };
  }
  return assemble(spec, std::move(f), std::move(jac), std::move(hess));
}

}  // namespace scabs
