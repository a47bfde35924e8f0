#include "scabs/supervisor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "scabs/error.hpp"

namespace scabs {

double Ellipsoid::support(const Vec& a) const {
  return std::sqrt(level * a.dot(Q.ldlt().solve(a)));
}

Ellipsoid pendulum_target_ellipsoid(double omega) {
  Ellipsoid e;
  e.center = Vec(2);
  e.center << M_PI, 0.0;
  e.Q = Mat(2, 2);
  e.Q << 63 * omega * omega, 6 * omega, 6 * omega, 56;
  e.level = 42 * omega * omega;
  return e;
}

bool cell_inside(const Quantizer& q, int cell, const Ellipsoid& e) {
  const Cell& c = q.cell(cell);
  if (!c.polytope) return false;
  const auto& verts = c.polytope->vertices();
  auto all_in = [&](const Vec& shift) {
    return std::all_of(verts.begin(), verts.end(), [&](const Vec& v) { return e.contains(v + shift); });
  };
  if (q.periodic_axis() < 0) return all_in(Vec::Zero(q.dim()));
  const int axis = q.periodic_axis();
  const int k0 = static_cast<int>(std::lround((e.center(axis) - c.center(axis)) / q.period()));
  for (int k = k0 - 1; k <= k0 + 1; ++k) {
    if (all_in(q.shift_vector(k))) return true;
  }
  return false;
}

SynthesisProblem make_problem(const AbstractionAutomaton& a, const Vec& start_point, const Ellipsoid& e) {
  const Quantizer& q = a.abstraction().quantizer();
  SynthesisProblem p;
  p.automaton = &a;
  for (int c : q.locate(start_point)) {
    if (q.cell(c).in_operating_range()) p.start.push_back(c);
  }
  for (int c = 0; c < q.size(); ++c) {
    if (q.cell(c).in_operating_range() && cell_inside(q, c, e)) p.target.push_back(c);
  }
  return p;
}

bool Strategy::is_target(int state) const {
  return target_cell.at(automaton->newest_cell(state)) != 0;
}

bool Strategy::winnable() const {
  if (start_states.empty()) return false;
  return std::all_of(start_states.begin(), start_states.end(), [&](int s) { return winning(s); });
}

int Strategy::bound() const {
  int b = 0;
  for (int s : start_states) b = std::max(b, value.at(s));
  return start_states.empty() ? kLosing : b;
}

GameSolution solve_game(const GameGraph& g) {
  const int S = static_cast<int>(g.succ.size());
  GameSolution sol;
  sol.value.assign(S, Strategy::kLosing);
  sol.policy.assign(S, -1);

  // hyperarc (s, u) is ready once all its successors are settled
  std::vector<int> pending;
  std::vector<int> owner;
  std::vector<std::vector<int>> rev(S);
  for (int s = 0; s < S; ++s) {
    if (g.target[s] || g.avoid[s]) continue;
    for (const auto& out : g.succ[s]) {
      const int h = static_cast<int>(pending.size());
      pending.push_back(static_cast<int>(out.size()));
      owner.push_back(s);
      for (int t : out) rev[t].push_back(h);
    }
  }

  std::vector<std::vector<int>> buckets(1);
  for (int s = 0; s < S; ++s) {
    if (g.target[s]) {
      sol.value[s] = 0;
      buckets[0].push_back(s);
    }
  }
  std::vector<char> settled(S, 0);
  for (std::size_t v = 0; v < buckets.size(); ++v) {
    for (std::size_t i = 0; i < buckets[v].size(); ++i) {
      const int t = buckets[v][i];
      if (settled[t]) continue;
      settled[t] = 1;
      for (int h : rev[t]) {
        if (--pending[h] != 0) continue;
        const int s = owner[h];
        if (settled[s] || sol.value[s] <= static_cast<int>(v) + 1) continue;
        sol.value[s] = static_cast<int>(v) + 1;
        if (buckets.size() <= v + 1) buckets.resize(v + 2);
        buckets[v + 1].push_back(s);
      }
    }
  }

  for (int s = 0; s < S; ++s) {
    if (sol.value[s] == Strategy::kLosing || sol.value[s] == 0) continue;
    for (int u = 0; u < static_cast<int>(g.succ[s].size()); ++u) {
      const auto& out = g.succ[s][u];
      if (out.empty()) continue;
      int worst = 0;
      for (int t : out) worst = std::max(worst, sol.value[t]);
      if (worst == sol.value[s] - 1) {
        sol.policy[s] = u;
        break;
      }
    }
  }
  return sol;
}

namespace {

std::vector<char> target_cells(const Quantizer& q, const std::vector<int>& target) {
  std::vector<char> flags(q.size(), 0);
  for (int c : target) {
    if (!q.cell(c).in_operating_range()) throw Error(Errc::InvalidArgument, "target cell outside the operating range");
    flags[c] = 1;
  }
  return flags;
}

const AbstractionAutomaton& checked_automaton(const SynthesisProblem& p) {
  if (!p.automaton) throw Error(Errc::InvalidArgument, "synthesis problem without automaton");
  if (p.automaton->span() < 1) throw Error(Errc::InvalidArgument, "synthesis needs memory span >= 1");
  return *p.automaton;
}

}  // namespace

GameGraph game_graph(const SynthesisProblem& p) {
  const AbstractionAutomaton& A = checked_automaton(p);
  const Quantizer& q = A.abstraction().quantizer();
  const auto flags = target_cells(q, p.target);
  const int S = A.num_states();
  GameGraph g;
  g.succ.resize(S);
  g.target.assign(S, 0);
  g.avoid.assign(S, 0);
  for (int s = 0; s < S; ++s) {
    const int c = A.newest_cell(s);
    g.target[s] = flags[c];
    g.avoid[s] = !q.cell(c).in_operating_range();
    g.succ[s].resize(A.num_inputs());
    if (g.target[s] || g.avoid[s]) continue;
    for (int u = 0; u < A.num_inputs(); ++u) {
      auto out = A.successors(s, u);
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      g.succ[s][u] = std::move(out);
    }
  }
  return g;
}

Strategy synthesize(const SynthesisProblem& p) {
  const AbstractionAutomaton& A = checked_automaton(p);
  const Quantizer& q = A.abstraction().quantizer();
  Strategy st;
  st.automaton = &A;
  st.target_cell = target_cells(q, p.target);
  auto sol = solve_game(game_graph(p));
  st.value = std::move(sol.value);
  st.policy = std::move(sol.policy);
  const Abstraction& abs = A.abstraction();
  for (int c : p.start) st.start_states.push_back(abs.root(c));
  std::sort(st.start_states.begin(), st.start_states.end());
  return st;
}

ClosedLoopRun run_closed_loop(const SystemModel& sys, const Strategy& strat, const Vec& x0,
                              int max_steps) {
  const AbstractionAutomaton& A = *strat.automaton;
  const Quantizer& q = A.abstraction().quantizer();
  ClosedLoopRun run;
  Vec x = x0;
  while (true) {
    const int c = q.locate_first(x);
    run.states.push_back(x);
    run.cells.push_back(c);
    if (strat.target_cell[c]) {
      run.reached = true;
      return run;
    }
    if (static_cast<int>(run.inputs.size()) >= max_steps) return run;
    auto state = A.state_of(run.cells, run.inputs);
    if (!state || !strat.winning(*state) || strat.policy[*state] < 0) {
      throw Error(Errc::PolicyGap, "no winning policy entry at sample " + std::to_string(run.inputs.size()) +
                                       " in cell " + to_string(q.cell(c).id));
    }
    const int u = strat.policy[*state];
    run.inputs.push_back(u);
    x = step(sys, x, u);
  }
}

std::vector<ClosedLoopRun> run_closed_loop_batch(const SystemModel& sys, const Strategy& strat,
                                                 const std::vector<Vec>& x0s, int max_steps,
                                                 int threads) {
  std::vector<ClosedLoopRun> out(x0s.size());
  std::vector<std::exception_ptr> errors(x0s.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < x0s.size(); i = next++) {
      try {
        out[i] = run_closed_loop(sys, strat, x0s[i], max_steps);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(x0s.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

InvarianceReport verify_ellipsoid_invariance(double omega, double gamma, int n_samples, double T,
                                             double u_max, bool saturate) {
  if (!(omega > 0) || !(gamma >= 0) || gamma > omega) {
    throw Error(Errc::InvalidArgument, "low-level feedback needs omega > 0 and 0 <= gamma <= omega");
  }
  const Ellipsoid e = pendulum_target_ellipsoid(omega);
  const SampledSystem pend = make_pendulum(omega, gamma, T);
  auto feedback = [&](const Vec& x) {
    const double u = 2.0 * (M_PI - x(0) - x(1) / omega);
    return saturate ? std::clamp(u, -u_max, u_max) : u;
  };

  InvarianceReport rep;
  Vec a(2);
  a << 1.0, 1.0 / omega;
  const double h = e.support(a);
  rep.max_control = 2.0 * h;
  if (saturate) rep.max_control = std::min(rep.max_control, u_max);
  if (rep.max_control > u_max * (1.0 + 1e-12)) {
    rep.control_bound = false;
    // u = -2 a'(x - c) is largest where a'(x - c) is most negative
    rep.witness = e.center - e.Q.ldlt().solve(a) * (e.level / h);
  }

  const OdeRhs f = [&](const Vec& x, Vec& dx) {
    Vec u(1);
    u << feedback(x);
    dx = pend.rhs(x, u);
  };
  const Mat L = e.Q.llt().matrixL();
  const Mat Lt_inv = L.transpose().inverse();
  const int chunks = 100;
  IntegratorOptions opts = pend.integrator;
  for (int k = 0; k < n_samples && rep.invariant; ++k) {
    const double th = 2.0 * M_PI * k / n_samples;
    Vec w(2);
    w << std::cos(th), std::sin(th);
    Vec x = e.center + std::sqrt(e.level) * (Lt_inv * w);
    for (int j = 0; j < chunks; ++j) {
      x = integrate_ode(f, x, 5.0 * T / chunks, opts, 2).x_end;
      if (!e.contains(x, 1e-6)) {
        rep.invariant = false;
        if (rep.control_bound) rep.witness = e.center + std::sqrt(e.level) * (Lt_inv * w);
        break;
      }
    }
  }
  return rep;
}

void write_strategy(const Strategy& strat, const SystemModel& sys, std::ostream& out) {
  using nlohmann::json;
  const AbstractionAutomaton& A = *strat.automaton;
  const Abstraction& abs = A.abstraction();
  const Quantizer& q = abs.quantizer();
  json doc;
  doc["schema"] = "scabs-strategy";
  doc["version"] = 1;
  doc["memory_span"] = A.span();
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fingerprint(q)));
  doc["quantizer_hash"] = hash;
  json inputs = json::array();
  for (int u = 0; u < A.num_inputs(); ++u) inputs.push_back(input_name(sys, u));
  doc["inputs"] = inputs;
  doc["winnable"] = strat.winnable();
  if (strat.winnable()) doc["bound"] = strat.bound();
  else doc["bound"] = nullptr;
  json start = json::array();
  for (int s : strat.start_states) {
    start.push_back({{"cell", to_string(q.cell(A.newest_cell(s)).id)},
                     {"value", strat.winning(s) ? json(strat.value[s]) : json(nullptr)}});
  }
  doc["start"] = start;
  std::map<int, long> hist;
  long losing = 0;
  for (int v : strat.value) {
    if (v == Strategy::kLosing) ++losing;
    else ++hist[v];
  }
  json histogram = json::object();
  for (auto [v, n] : hist) histogram[std::to_string(v)] = n;
  doc["value_histogram"] = histogram;
  doc["losing_states"] = losing;
  json targets = json::array();
  for (int c = 0; c < q.size(); ++c) {
    if (strat.target_cell[c]) targets.push_back(to_string(q.cell(c).id));
  }
  doc["targets"] = targets;
  json table = json::array();
  for (int s = 0; s < A.num_states(); ++s) {
    if (strat.policy[s] < 0) continue;
    json cells = json::array();
    for (int c : abs.window_cells(s)) cells.push_back(to_string(q.cell(c).id));
    json ins = json::array();
    for (int u : abs.window_inputs(s)) ins.push_back(input_name(sys, u));
    table.push_back({{"cells", cells}, {"inputs", ins}, {"input", input_name(sys, strat.policy[s])},
                     {"value", strat.value[s]}});
  }
  doc["policy"] = table;
  out << doc.dump(1) << '\n';
}

}  // namespace scabs
