#include "scabs/config.hpp"

#include <algorithm>
#include <set>

#include "scabs/error.hpp"

namespace scabs {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw Error(Errc::ConfigError, path + ": " + what);
}

/// Reads the keys of one object and rejects the ones nobody asked for.
class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) bad(path_, "expected an object");
  }

  void finish() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it) {
      if (!seen_.count(it.key())) bad(sub(it.key()), "unknown key");
    }
  }

  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (const json* v = find(key)) {
      try {
        out = v->get<T>();
      } catch (const json::exception&) {
        bad(sub(key), "wrong type");
      }
    }
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) bad(sub(key), "expected a number");
      out = v->get<double>();
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) bad(sub(key), "expected an integer");
      out = v->get<int>();
    }
  }

  void text(const std::string& key, std::string& out, std::initializer_list<const char*> allowed = {}) {
    if (const json* v = find(key)) {
      if (!v->is_string()) bad(sub(key), "expected a string");
      out = v->get<std::string>();
    }
    if (allowed.size() && std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return out == a; })) {
      bad(sub(key), "unsupported value \"" + out + "\"");
    }
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

void positive(const std::string& path, double v) {
  if (!(v > 0)) bad(path, "must be positive");
}

const json& object_or_empty(const json* v) {
  static const json empty = json::object();
  return v ? *v : empty;
}

}  // namespace

bool ProjectConfig::wants(const std::string& format) const {
  return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

ProjectConfig parse_config(const json& doc) {
  ProjectConfig c;
  Section top(doc, "");
  top.integer("version", c.version);
  if (c.version != 1) bad("version", "only version 1 is supported");

  {
    Section s(object_or_empty(top.find("system")), "system");
    auto& y = c.system;
    s.text("type", y.type, {"pendulum", "custom"});
    s.number("omega", y.omega);
    s.number("gamma", y.gamma);
    s.number("u_hat", y.u_hat);
    s.number("T", y.T);
    s.text("kind", y.kind, {"sampled", "discrete"});
    s.integer("state_dim", y.state_dim);
    s.get("expressions", y.expressions);
    s.text("plugin", y.plugin);
    s.get("inputs", y.inputs);
    s.get("input_names", y.input_names);
    s.get("constants", y.constants);
    s.get("period", y.period);
    positive("system.T", y.T);
    if (y.type == "pendulum") {
      positive("system.omega", y.omega);
      if (y.gamma < 0) bad("system.gamma", "must be non-negative");
      positive("system.u_hat", y.u_hat);
    } else {
      if (y.expressions.empty() == y.plugin.empty()) bad("system", "custom systems need exactly one of expressions and plugin");
      if (y.inputs.empty()) bad("system.inputs", "at least one input value is required");
      if (y.state_dim < 1) bad("system.state_dim", "must be positive");
    }
    s.finish();
  }
  {
    Section s(object_or_empty(top.find("certificate")), "certificate");
    auto& k = c.certificate;
    s.text("method", k.method, {"auto", "closed_form", "discrete", "m1m2", "c2"});
    s.integer("samples", k.samples);
    s.number("safety", k.safety);
    s.get("seed", k.seed);
    s.get("region_lo", k.region_lo);
    s.get("region_hi", k.region_hi);
    if (k.samples < 1) bad("certificate.samples", "must be positive");
    positive("certificate.safety", k.safety);
    if (k.region_lo.size() != k.region_hi.size()) bad("certificate.region_hi", "must match region_lo");
    s.finish();
  }
  {
    Section s(object_or_empty(top.find("quantizer")), "quantizer");
    auto& q = c.quantizer;
    s.text("type", q.type, {"hex", "box"});
    s.number("s", q.s);
    s.number("strip_lo", q.strip_lo);
    s.number("strip_hi", q.strip_hi);
    s.number("period", q.period);
    if (const json* r = s.find("superset_radius")) {
      if (r->is_string() && r->get<std::string>() == "auto") q.superset_radius.reset();
      else if (r->is_number()) q.superset_radius = r->get<double>();
      else bad("quantizer.superset_radius", "expected a number or \"auto\"");
    }
    s.get("obstacles", q.obstacles);
    s.integer("stencil", q.stencil);
    s.number("origin_x", q.origin_x);
    s.number("origin_y", q.origin_y);
    s.get("box_lo", q.box_lo);
    s.get("box_hi", q.box_hi);
    s.get("box_counts", q.box_counts);
    if (q.s < 0) bad("quantizer.s", "must be non-negative");
    if (q.superset_radius) positive("quantizer.superset_radius", *q.superset_radius);
    if (!(q.strip_hi > q.strip_lo)) bad("quantizer.strip_hi", "must exceed strip_lo");
    if (q.type == "box" && (q.box_lo.size() != 2 || q.box_hi.size() != 2 || q.box_counts.size() != 2)) {
      bad("quantizer", "box quantizers need 2-D box_lo, box_hi and box_counts");
    }
    s.finish();
  }
  {
    Section s(object_or_empty(top.find("abstraction")), "abstraction");
    auto& a = c.abstraction;
    s.integer("N", a.N);
    s.number("feasibility_tol", a.feasibility_tol);
    s.integer("threads", a.threads);
    s.get("test_against_superset", a.test_against_superset);
    if (a.N < 0 || a.N > 8) bad("abstraction.N", "must lie in 0..8");
    positive("abstraction.feasibility_tol", a.feasibility_tol);
    if (a.threads < 0) bad("abstraction.threads", "must be non-negative");
    s.finish();
  }
  {
    Section s(object_or_empty(top.find("synthesis")), "synthesis");
    auto& y = c.synthesis;
    s.get("start", y.start);
    s.text("target", y.target, {"pendulum_ellipsoid", "ellipsoid"});
    s.get("center", y.center);
    s.get("Q", y.Q);
    s.number("level", y.level);
    positive("synthesis.level", y.level);
    if (y.target == "ellipsoid") {
      const std::size_t n = y.center.size();
      if (n == 0 || y.Q.size() != n ||
          std::any_of(y.Q.begin(), y.Q.end(), [&](const auto& row) { return row.size() != n; })) {
        bad("synthesis.Q", "must be square and match center");
      }
    }
    s.finish();
  }
  {
    Section s(object_or_empty(top.find("simulation")), "simulation");
    s.get("x0", c.simulation.x0);
    s.integer("max_steps", c.simulation.max_steps);
    if (c.simulation.max_steps < 0) bad("simulation.max_steps", "must be non-negative");
    s.finish();
  }
  {
    Section s(object_or_empty(top.find("output")), "output");
    s.text("directory", c.output.directory);
    s.get("formats", c.output.formats);
    for (const auto& f : c.output.formats) {
      if (f != "json" && f != "csv" && f != "svg") bad("output.formats", "unknown format \"" + f + "\"");
    }
    s.finish();
  }
  top.finish();
  return c;
}

json emit_config(const ProjectConfig& c) {
  json d;
  d["version"] = c.version;
  const auto& y = c.system;
  d["system"] = {{"type", y.type},         {"omega", y.omega},
                 {"gamma", y.gamma},       {"u_hat", y.u_hat},
                 {"T", y.T},               {"kind", y.kind},
                 {"state_dim", y.state_dim}, {"expressions", y.expressions},
                 {"plugin", y.plugin},     {"inputs", y.inputs},
                 {"input_names", y.input_names}, {"constants", y.constants},
                 {"period", y.period}};
  const auto& k = c.certificate;
  d["certificate"] = {{"method", k.method}, {"samples", k.samples}, {"safety", k.safety},
                      {"seed", k.seed},     {"region_lo", k.region_lo}, {"region_hi", k.region_hi}};
  const auto& q = c.quantizer;
  d["quantizer"] = {{"type", q.type},
                    {"s", q.s},
                    {"strip_lo", q.strip_lo},
                    {"strip_hi", q.strip_hi},
                    {"period", q.period},
                    {"superset_radius", q.superset_radius ? json(*q.superset_radius) : json("auto")},
                    {"obstacles", q.obstacles},
                    {"stencil", q.stencil},
                    {"origin_x", q.origin_x},
                    {"origin_y", q.origin_y},
                    {"box_lo", q.box_lo},
                    {"box_hi", q.box_hi},
                    {"box_counts", q.box_counts}};
  const auto& a = c.abstraction;
  d["abstraction"] = {{"N", a.N}, {"feasibility_tol", a.feasibility_tol}, {"threads", a.threads},
                      {"test_against_superset", a.test_against_superset}};
  const auto& s = c.synthesis;
  d["synthesis"] = {{"start", s.start}, {"target", s.target}, {"center", s.center}, {"Q", s.Q}, {"level", s.level}};
  d["simulation"] = {{"x0", c.simulation.x0}, {"max_steps", c.simulation.max_steps}};
  d["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
  return d;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) bad(assignment, "expected key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) bad(path, "empty key");
    if (!node->is_object()) bad(path, "parent is not an object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

}  // namespace scabs
