#include "scabs/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "scabs/abstraction.hpp"
#include "scabs/custom_system.hpp"
#include "scabs/error.hpp"
#include "scabs/plot.hpp"
#include "scabs/supervisor.hpp"

namespace scabs {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double hex_size(const ProjectConfig& cfg) {
  return cfg.quantizer.s > 0 ? cfg.quantizer.s : M_PI / (16 * std::sqrt(3.0));
}

/// Operating range of the configured quantizer, used as the sampling region
/// of estimated certificates.
Box operating_region(const ProjectConfig& cfg) {
  const auto& k = cfg.certificate;
  if (!k.region_lo.empty()) return {to_vec(k.region_lo), to_vec(k.region_hi)};
  const auto& q = cfg.quantizer;
  if (q.type == "box") return {to_vec(q.box_lo), to_vec(q.box_hi)};
  const double pitch = 2 * std::sqrt(3.0) * hex_size(cfg);
  const double width = q.period > 0 ? q.period : pitch;
  Vec lo(2), hi(2);
  lo << q.origin_x - pitch / 2, q.strip_lo;
  hi << q.origin_x - pitch / 2 + width, q.strip_hi;
  return {lo, hi};
}

bool is_sampled(const SystemModel& sys) { return std::holds_alternative<SampledSystem>(sys); }

std::string num(double v, int digits = 6) {
  if (std::isinf(v)) return "unbounded";
  std::ostringstream o;
  o << std::setprecision(digits) << v;
  return o.str();
}

json cert_json(const Certificate& c) {
  json j{{"kind", to_string(c.kind)},
         {"horizon", c.horizon},
         {"r_max", c.unbounded() ? json("unbounded") : json(c.r_max)},
         {"valid", c.valid},
         {"estimated", c.estimated},
         {"bounds", c.bounds}};
  if (!c.reason.empty()) j["reason"] = c.reason;
  return j;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::ConfigError, "cannot write " + path.string());
  f << text;
}

struct Session {
  ProjectConfig cfg;
  fs::path dir;
  std::ostream& out;
  std::ostream& err;
  SystemModel sys;
  CertifyReport cert;
  std::shared_ptr<const Quantizer> q;
  std::optional<Abstraction> abs;

  Session(ProjectConfig c, std::ostream& o, std::ostream& e)
      : cfg(std::move(c)), dir(cfg.output.directory), out(o), err(e) {
    fs::create_directories(dir);
    write_file(dir / "config.json", emit_config(cfg).dump(2) + "\n");
    sys = build_system(cfg);
  }

  void run_certify(bool report) {
    cert = certify(cfg, sys);
    if (report) print_certificate();
    if (!cert.chosen.valid) throw Error(Errc::ConditionsViolated, cert.chosen.reason);
    if (!cert.admissible) {
      throw Error(Errc::ConditionsViolated, "superset radius " + num(cert.radius) + " exceeds r_max " +
                                                num(cert.chosen.r_max));
    }
  }

  void print_certificate() {
    const bool sampled = is_sampled(sys);
    out << "certificate: " << to_string(cert.chosen.kind) << (cert.chosen.estimated ? " (ESTIMATED bounds)" : "")
        << "\n";
    for (const auto& [k, v] : cert.chosen.bounds) out << "  " << k << " = " << num(v) << "\n";
    for (std::size_t i = 0; i < cert.per_horizon.size(); ++i) {
      const auto& c = cert.per_horizon[i];
      out << "  horizon " << (i + 1) << (sampled ? " (t = " + num(c.horizon) + ")" : "") << ": r_max = "
          << num(c.r_max) << (c.valid ? "" : "  [violated: " + c.reason + "]") << "\n";
    }
    const auto& c = cert.chosen;
    out << "r_max = " << num(c.r_max, 3) << " (" << (c.kind == CertKind::PendulumClosedForm ? "closed form" : to_string(c.kind))
        << (c.estimated ? ", ESTIMATED" : "") << "), admissible superset radius " << num(cert.radius, 3) << ": "
        << (c.valid && cert.admissible ? "OK" : "VIOLATED") << "\n";
    if (cfg.wants("json")) {
      json doc{{"schema", "scabs-certificate"}, {"version", 1}, {"chosen", cert_json(c)},
               {"superset_radius", std::isinf(cert.radius) ? json("unbounded") : json(cert.radius)},
               {"admissible", c.valid && cert.admissible}};
      json per = json::array();
      for (const auto& h : cert.per_horizon) per.push_back(cert_json(h));
      doc["per_horizon"] = per;
      write_file(dir / "certificate.json", doc.dump(2) + "\n");
    }
  }

  void run_abstract(bool report) {
    run_certify(false);
    q = std::make_shared<const Quantizer>(build_quantizer(cfg, cert.radius));
    AbstractionOptions o;
    o.feasibility_tol = cfg.abstraction.feasibility_tol;
    o.test_against_superset = cfg.abstraction.test_against_superset;
    const auto t0 = std::chrono::steady_clock::now();
    abs.emplace(build_abstraction(sys, q, cfg.abstraction.N, cert.chosen, o));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!report) return;
    out << "cells: " << q->count(CellKind::Operating) << " operating, " << q->count(CellKind::Obstacle)
        << " obstacle, " << (q->count(CellKind::OverflowNeg) + q->count(CellKind::OverflowPos)) << " overflow\n";
    out << std::setw(3) << "N" << std::setw(14) << "half-spaces" << std::setw(20) << "feasibility-tests"
        << std::setw(10) << "states" << std::setw(14) << "transitions" << "\n";
    std::string csv = "N,half_spaces,feasibility_tests,states,transitions\r\n";
    const int first = cfg.abstraction.N == 0 ? 0 : 1;
    for (int k = first; k <= cfg.abstraction.N; ++k) {
      const auto s = abs->stats(k);
      out << std::setw(3) << k << std::setw(14) << s.half_spaces << std::setw(20) << s.feasibility_tests
          << std::setw(10) << s.states << std::setw(14) << s.transitions << "\n";
      csv += std::to_string(k) + "," + std::to_string(s.half_spaces) + "," + std::to_string(s.feasibility_tests) +
             "," + std::to_string(s.states) + "," + std::to_string(s.transitions) + "\r\n";
      if (cfg.wants("json")) {
        std::ostringstream ts;
        write_transition_system(AbstractionAutomaton(*abs, k), sys, ts);
        write_file(dir / ("transitions_N" + std::to_string(k) + ".json"), ts.str());
      }
    }
    err << "abstraction built in " << std::fixed << std::setprecision(2) << secs << " s\n"
              << std::defaultfloat;
    if (cfg.wants("csv")) write_file(dir / "stats.csv", csv);
    if (cfg.wants("json")) {
      std::ostringstream qs;
      write_quantizer(*q, qs);
      write_file(dir / "quantizer.json", qs.str());
    }
  }

  Ellipsoid target() const {
    const auto& s = cfg.synthesis;
    if (s.target == "pendulum_ellipsoid") return pendulum_target_ellipsoid(cfg.system.omega);
    Ellipsoid e;
    e.center = to_vec(s.center);
    const auto n = static_cast<Eigen::Index>(s.center.size());
    e.Q = Mat(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) e.Q(i, j) = s.Q[i][j];
    e.level = s.level;
    return e;
  }
};

std::vector<char> cell_flags(int n, const std::vector<int>& cells) {
  std::vector<char> f(n, 0);
  for (int c : cells) f[c] = 1;
  return f;
}

int cmd_certify(Session& s) {
  s.run_certify(true);
  return kExitOk;
}

int cmd_abstract(Session& s) {
  s.run_abstract(true);
  return kExitOk;
}

struct Synthesis {
  std::unique_ptr<AbstractionAutomaton> automaton;
  SynthesisProblem problem;
  Strategy strategy;
};

Synthesis synthesize_session(Session& s, bool report) {
  if (s.cfg.abstraction.N < 1) throw Error(Errc::ConfigError, "abstraction.N: synthesis needs N >= 1");
  s.run_abstract(report);
  Synthesis y;
  y.automaton = std::make_unique<AbstractionAutomaton>(*s.abs, s.cfg.abstraction.N);
  y.problem = make_problem(*y.automaton, to_vec(s.cfg.synthesis.start), s.target());
  y.strategy = synthesize(y.problem);
  const auto& st = y.strategy;
  s.out << "start cells: " << y.problem.start.size() << ", target cells: " << y.problem.target.size() << "\n";
  long winning = 0;
  for (int x = 0; x < y.automaton->num_states(); ++x) winning += st.winning(x);
  s.out << "winning states: " << winning << " of " << y.automaton->num_states() << "\n";
  if (st.winnable()) s.out << "winnable, bound " << st.bound() << "\n";
  else s.out << "not winnable\n";
  if (s.cfg.wants("json")) {
    std::ostringstream o;
    write_strategy(st, s.sys, o);
    write_file(s.dir / "strategy.json", o.str());
  }
  return y;
}

PhasePlot phase_plot(const Session& s, const Synthesis& y) {
  PhasePlot p;
  p.quantizer = s.q.get();
  const int n = s.q->size();
  p.target = cell_flags(n, y.problem.target);
  p.start = cell_flags(n, y.problem.start);
  p.winning.assign(n, 0);
  const Abstraction& a = *s.abs;
  for (int c = 0; c < n; ++c) p.winning[c] = y.strategy.winning(a.root(c));
  p.ellipse = s.target();
  return p;
}

int cmd_synthesize(Session& s) {
  auto y = synthesize_session(s, true);
  return y.strategy.winnable() ? kExitOk : kExitInfeasible;
}

int cmd_plot(Session& s) {
  auto y = synthesize_session(s, true);
  if (s.cfg.wants("svg")) {
    std::ostringstream o;
    write_phase_svg(phase_plot(s, y), o);
    write_file(s.dir / "phase.svg", o.str());
  }
  return kExitOk;
}

int cmd_simulate(Session& s, const std::vector<std::vector<double>>& x0_override) {
  auto y = synthesize_session(s, true);
  if (!y.strategy.winnable()) return kExitInfeasible;
  const auto& x0s_raw = x0_override.empty() ? s.cfg.simulation.x0 : x0_override;
  std::vector<Vec> x0s;
  for (const auto& v : x0s_raw) {
    if (static_cast<int>(v.size()) != state_dim(s.sys)) throw Error(Errc::ConfigError, "simulation.x0: wrong dimension");
    x0s.push_back(to_vec(v));
  }
  const auto runs = run_closed_loop_batch(s.sys, y.strategy, x0s, s.cfg.simulation.max_steps, thread_count(s.cfg));
  const double T = is_sampled(s.sys) ? std::get<SampledSystem>(s.sys).T : 1.0;
  PhasePlot plot = phase_plot(s, y);
  bool all = true;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    all = all && r.reached;
    double max_x2 = 0;
    for (const auto& x : r.states) max_x2 = std::max(max_x2, std::abs(x(x.size() - 1)));
    s.out << "run " << i << ": " << (r.reached ? "reached target" : "did not reach target") << " after "
          << r.inputs.size() << " samples, max |x" << state_dim(s.sys) << "| = " << num(max_x2, 4) << "\n";
    if (s.cfg.wants("csv")) {
      std::string csv = "t";
      for (int d = 1; d <= state_dim(s.sys); ++d) csv += ",x" + std::to_string(d);
      csv += ",u,cell\r\n";
      for (std::size_t k = 0; k < r.states.size(); ++k) {
        std::ostringstream row;
        row << std::setprecision(10) << k * T;
        for (Eigen::Index d = 0; d < r.states[k].size(); ++d) row << ',' << r.states[k](d);
        row << ',' << (k < r.inputs.size() ? input_name(s.sys, r.inputs[k]) : "") << ','
            << to_string(s.q->cell(r.cells[k]).id) << "\r\n";
        csv += row.str();
      }
      write_file(s.dir / ("trajectory_" + std::to_string(i) + ".csv"), csv);
    }
    plot.trajectories.push_back(r.states);
  }
  if (s.cfg.wants("svg")) {
    std::ostringstream o;
    write_phase_svg(plot, o);
    write_file(s.dir / "phase.svg", o.str());
  }
  return all ? kExitOk : kExitInfeasible;
}

}  // namespace

int thread_count(const ProjectConfig& cfg) {
  if (cfg.abstraction.threads > 0) return cfg.abstraction.threads;
  if (const char* env = std::getenv("SCABS_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SystemModel build_system(const ProjectConfig& cfg) {
  const auto& y = cfg.system;
  if (y.type == "pendulum") return make_pendulum(y.omega, y.gamma, y.T, {0.0, -y.u_hat, y.u_hat});
  CustomSystemSpec spec;
  spec.kind = y.kind == "discrete" ? SystemKind::Discrete : SystemKind::Sampled;
  spec.state_dim = y.state_dim;
  for (const auto& u : y.inputs) spec.inputs.push_back(to_vec(u));
  spec.input_names = y.input_names;
  spec.T = y.T;
  if (!y.period.empty()) spec.period = to_vec(y.period);
  if (!y.plugin.empty()) return load_plugin_system(spec, y.plugin);
  return make_expression_system(spec, y.expressions, y.constants);
}

CertifyReport certify(const ProjectConfig& cfg, const SystemModel& sys) {
  const int N = std::max(1, cfg.abstraction.N);
  const bool sampled = is_sampled(sys);
  const bool pendulum = cfg.system.type == "pendulum";
  std::string method = cfg.certificate.method;
  if (method == "auto") method = pendulum ? "closed_form" : (sampled ? "m1m2" : "discrete");
  if (method == "closed_form" && !pendulum) throw Error(Errc::ConfigError, "certificate.method: closed form exists for the pendulum only");
  if (method == "discrete" && sampled) throw Error(Errc::ConfigError, "certificate.method: discrete needs a discrete system");
  if ((method == "m1m2" || method == "c2") && !sampled) throw Error(Errc::ConfigError, "certificate.method: needs a sampled system");
  const bool try_c2 = cfg.certificate.method == "auto" && sampled && !pendulum &&
                      static_cast<bool>(std::get<SampledSystem>(sys).rhs_hess);
  if (method == "c2" && !std::get<SampledSystem>(sys).rhs_hess) {
    throw Error(Errc::HessianUnavailable, "certificate.method c2 needs second derivatives");
  }

  EstimateOptions eo;
  eo.n_samples = cfg.certificate.samples;
  eo.safety = cfg.certificate.safety;
  eo.seed = cfg.certificate.seed;
  const RegionSampler tube = forward_tube_sampler(sys, box_sampler(operating_region(cfg)), N);
  const double T = sampled ? std::get<SampledSystem>(sys).T : 1.0;

  CertifyReport rep;
  std::optional<DiscreteBounds> db;
  std::optional<ContinuousBounds> cb;
  for (int k = 1; k <= N; ++k) {
    const double t = k * T;
    Certificate c;
    if (method == "closed_form") {
      c = radius_pendulum(cfg.system.omega, cfg.system.gamma, cfg.system.u_hat, t);
    } else if (method == "discrete") {
      if (!db) db = estimate_bounds_discrete(sys, tube, eo);
      c = radius_discrete(db->L1, db->L2, k);
      c.estimated = true;
    } else if (method == "m1m2") {
      if (!cb) cb = estimate_bounds_continuous(std::get<SampledSystem>(sys), tube, eo);
      c = radius_continuous(cb->M1, cb->M2, t);
      c.estimated = true;
    }
    if (method == "c2" || try_c2) {
      Certificate c2 = radius_c2(estimate_L2_integral(std::get<SampledSystem>(sys), tube, t, eo), t);
      c2.estimated = true;
      if (method == "c2" || (c2.valid && (!c.valid || c2.r_max > c.r_max))) c = c2;
    }
    rep.per_horizon.push_back(c);
  }
  rep.chosen = rep.per_horizon.back();
  rep.radius = cfg.quantizer.superset_radius ? *cfg.quantizer.superset_radius : rep.chosen.r_max;
  rep.admissible = rep.chosen.valid && (rep.chosen.unbounded() || rep.radius <= rep.chosen.r_max);
  return rep;
}

Quantizer build_quantizer(const ProjectConfig& cfg, double radius) {
  const auto& c = cfg.quantizer;
  if (c.type == "box") {
    if (!c.obstacles.empty()) throw Error(Errc::ConfigError, "quantizer.obstacles: box quantizers take no obstacles");
    return build_box_quantizer(to_vec(c.box_lo), to_vec(c.box_hi), c.box_counts, radius);
  }
  HexQuantizerOptions o;
  o.s = hex_size(cfg);
  o.strip_lo = c.strip_lo;
  o.strip_hi = c.strip_hi;
  o.period = c.period;
  o.radius = radius;
  for (const auto& [col, row] : c.obstacles) o.obstacles.push_back({CellKind::Obstacle, col, row});
  o.stencil = c.stencil;
  o.origin_x = c.origin_x;
  o.origin_y = c.origin_y;
  return build_hex_quantizer(o);
}

void write_quantizer(const Quantizer& q, std::ostream& out) {
  json doc;
  doc["schema"] = "scabs-quantizer";
  doc["version"] = 1;
  doc["dimension"] = q.dim();
  doc["periodic_axis"] = q.periodic_axis();
  doc["period"] = q.period();
  doc["superset_radius"] = std::isinf(q.superset_radius()) ? json("unbounded") : json(q.superset_radius());
  if (q.lattice()) {
    const auto& L = *q.lattice();
    doc["lattice"] = {{"s", L.s}, {"columns", L.n_cols}, {"row_min", L.row_min}, {"row_max", L.row_max},
                      {"stencil", L.stencil}};
  }
  auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json cells = json::array();
  for (const auto& c : q.cells()) {
    json j{{"id", to_string(c.id)}, {"kind", to_string(c.kind())}, {"col", c.id.col}, {"row", c.id.row}};
    if (c.polytope) {
      json verts = json::array();
      for (const auto& v : c.polytope->vertices()) verts.push_back(vec(v));
      j["vertices"] = verts;
    }
    json region = json::array();
    for (const auto& h : c.region) region.push_back({{"p", vec(h.p)}, {"v", vec(h.v)}});
    j["region"] = region;
    if (c.superset) {
      json balls = json::array();
      for (const auto& b : c.superset->balls()) balls.push_back({{"center", vec(b.center)}, {"radius", b.radius}});
      j["superset_balls"] = balls;
    }
    json support = json::array();
    for (const auto& h : c.support.pairs()) support.push_back({{"p", vec(h.p)}, {"v", vec(h.v)}});
    j["support"] = support;
    cells.push_back(j);
  }
  doc["cells"] = cells;
  out << doc.dump(1) << "\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-state abstractions and supervisors for sampled nonlinear systems"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> sets;
  std::string output_dir;
  int threads = 0;
  std::vector<std::string> x0s;
  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Project configuration (JSON)")->required();
    sub->add_option("--set", sets, "Override a leaf key, e.g. abstraction.N=2");
    sub->add_option("-o,--output", output_dir, "Output directory");
    sub->add_option("-j,--threads", threads, "Worker threads");
  };
  auto* c_cert = app.add_subcommand("certify", "Evaluate the convexity certificate");
  auto* c_abs = app.add_subcommand("abstract", "Compute abstractions for memory spans 1..N");
  auto* c_syn = app.add_subcommand("synthesize", "Synthesize a reach-while-avoid supervisor");
  auto* c_sim = app.add_subcommand("simulate", "Run the closed loop from initial states");
  auto* c_plot = app.add_subcommand("plot", "Draw quantizer, winning region and target");
  for (auto* sub : {c_cert, c_abs, c_syn, c_sim, c_plot}) common(sub);
  c_sim->add_option("--x0", x0s, "Initial state as comma-separated values (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    std::ifstream f(config_path);
    if (!f) throw Error(Errc::ConfigError, "cannot read " + config_path);
    json doc = json::parse(f, nullptr, false);
    if (doc.is_discarded()) throw Error(Errc::ConfigError, config_path + " is not valid JSON");
    for (const auto& s : sets) apply_override(doc, s);
    ProjectConfig cfg = parse_config(doc);
    if (!output_dir.empty()) cfg.output.directory = output_dir;
    // plugin paths are relative to the configuration file
    if (!cfg.system.plugin.empty() && fs::path(cfg.system.plugin).is_relative()) {
      cfg.system.plugin = (fs::path(config_path).parent_path() / cfg.system.plugin).lexically_normal().string();
    }
    if (threads > 0) cfg.abstraction.threads = threads;
    std::vector<std::vector<double>> x0v;
    for (const auto& s : x0s) {
      std::vector<double> v;
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          v.push_back(std::stod(item));
        } catch (const std::exception&) {
          throw Error(Errc::ConfigError, "--x0: cannot read \"" + s + "\"");
        }
      }
      x0v.push_back(v);
    }
    Session session(cfg, out, err);
    if (c_cert->parsed()) return cmd_certify(session);
    if (c_abs->parsed()) return cmd_abstract(session);
    if (c_syn->parsed()) return cmd_synthesize(session);
    if (c_sim->parsed()) return cmd_simulate(session, x0v);
    return cmd_plot(session);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == Errc::ConditionsViolated ? kExitCertificate : kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace scabs
