#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "scabs/abstraction.hpp"

namespace scabs {

/// {x : (x - center)' Q (x - center) <= level}.
struct Ellipsoid {
  Vec center;
  Mat Q;
  double level = 1.0;

  double value(const Vec& x) const { return (x - center).dot(Q * (x - center)); }
  bool contains(const Vec& x, double tol = 0.0) const { return value(x) <= level * (1.0 + tol); }
  /// Maximum of a'(x - center) over the ellipsoid.
  double support(const Vec& a) const;
};

/// Positively invariant set of the pendulum's low-level feedback
/// u = 2(pi - x1 - x2/omega).
Ellipsoid pendulum_target_ellipsoid(double omega);

/// All vertices of some periodic copy of the cell lie in E. Unbounded cells
/// never qualify.
bool cell_inside(const Quantizer& q, int cell, const Ellipsoid& e);

/// Reach-while-avoid game on the automaton: every run from a start state must
/// stay in the operating range until its newest cell is a target.
struct SynthesisProblem {
  const AbstractionAutomaton* automaton = nullptr;
  std::vector<int> start;   // cells
  std::vector<int> target;  // cells, all in the operating range
};

/// Start cells are the operating cells containing `start_point`, targets the
/// operating cells inside `e`.
SynthesisProblem make_problem(const AbstractionAutomaton& a, const Vec& start_point, const Ellipsoid& e);

struct Strategy {
  static constexpr int kLosing = std::numeric_limits<int>::max();

  const AbstractionAutomaton* automaton = nullptr;
  /// Worst-case steps to a target, kLosing if the state cannot be won.
  std::vector<int> value;
  /// Input per state; -1 for targets and losing states.
  std::vector<int> policy;
  std::vector<char> target_cell;  // per cell
  std::vector<int> start_states;

  bool is_target(int state) const;
  bool winning(int state) const { return value.at(state) != kLosing; }
  /// Every start state wins.
  bool winnable() const;
  /// Largest value over start states (kLosing if some start state loses).
  int bound() const;
};

/// Explicit reach-while-avoid game: succ[s][u] lists the possible successors.
struct GameGraph {
  std::vector<std::vector<std::vector<int>>> succ;
  std::vector<char> target;
  std::vector<char> avoid;
};

struct GameSolution {
  std::vector<int> value;
  std::vector<int> policy;
};

/// Minimax shortest path on the AND-OR graph with a bucket queue. Inputs
/// without successors are never chosen. Ties go to the lowest input index.
GameSolution solve_game(const GameGraph& g);

/// Game graph of the automaton: targets have their newest cell in the target
/// set, avoid states their newest cell outside the operating range.
GameGraph game_graph(const SynthesisProblem& p);

Strategy synthesize(const SynthesisProblem& p);

struct ClosedLoopRun {
  std::vector<Vec> states;  // x_0 .. x_k at sampling instants
  std::vector<int> cells;   // quantized cell per sample
  std::vector<int> inputs;  // input applied after each sample but the last
  bool reached = false;
};

/// Samples, quantizes (lowest cell index on ties), looks up the window in the
/// strategy and applies the chosen input until a target cell is entered or
/// `max_steps` inputs have been applied. Throws PolicyGap when a window has no
/// winning policy entry.
ClosedLoopRun run_closed_loop(const SystemModel& sys, const Strategy& strat, const Vec& x0,
                              int max_steps);

/// Runs many initial points on `threads` workers; results keep input order.
std::vector<ClosedLoopRun> run_closed_loop_batch(const SystemModel& sys, const Strategy& strat,
                                                 const std::vector<Vec>& x0s, int max_steps,
                                                 int threads);

struct InvarianceReport {
  bool invariant = true;
  bool control_bound = true;
  /// Largest |u| of the feedback over E.
  double max_control = 0.0;
  Vec witness;
  bool ok() const { return invariant && control_bound; }
};

/// Boundary samples of E flowed under the pendulum with the low-level
/// feedback over [0, 5T] must stay in E (relative tolerance 1e-6), and the
/// feedback must satisfy |u| <= u_max on E. `saturate` clamps the feedback to
/// [-u_max, u_max]. Throws InvalidArgument unless omega > 0, 0 <= gamma <= omega.
InvarianceReport verify_ellipsoid_invariance(double omega, double gamma, int n_samples,
                                             double T = 0.2, double u_max = 2.0,
                                             bool saturate = false);

/// Strategy document (schema "scabs-strategy", version 1).
void write_strategy(const Strategy& strat, const SystemModel& sys, std::ostream& out);

}  // namespace scabs
