#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scabs/convexity.hpp"
#include "scabs/dynamics.hpp"
#include "scabs/quantizer.hpp"

namespace scabs {

struct AbstractionOptions {
  double feasibility_tol = 1e-8;
  /// Level-0 candidates from the lattice neighbourhood (when available).
  bool use_stencil = true;
  /// Also add cells meeting the LP bounding box of each level-0 image.
  bool bbox_guard = true;
  /// Reject certificates that do not cover the horizon and superset radius.
  bool check_certificate = true;
  /// Test images against an inscribed polygon of the target's superset
  /// instead of the target cell. Coarser, still sound.
  bool test_against_superset = false;
};

/// Work done while extending level k windows to level k+1 (index k), plus
/// the window count of each level.
struct LevelStats {
  long windows = 0;
  long half_spaces = 0;  // complementary-extension solves
  long failed_solves = 0;
  long feasibility_tests = 0;
  long separations = 0;  // tests settled without an LP
  long lp_solves = 0;
  long shift_conflicts = 0;
};

/// Summary counters for a memory span.
struct AutomatonStats {
  int N = 0;
  long half_spaces = 0;
  long feasibility_tests = 0;
  long states = 0;
  long transitions = 0;
};

/// Memoized supports of all feasible windows up to length N. Windows form a
/// prefix tree: node ids grow level by level and each node stores its last
/// cell, last input, parent (drop newest) and suffix (drop oldest).
/// Supports are lists of shared pair blocks expressed in the home chart of
/// the window's newest cell.
class Abstraction {
 public:
  struct Node {
    int parent = -1;
    int suffix = -1;
    int cell = 0;
    int input = -1;
    int level = 0;
    /// Periods between the parent's newest-cell chart and this cell's home copy.
    int shift = 0;
    int block_begin = 0;
    int block_count = 0;
  };

  struct BlockRef {
    int block = 0;
    int wraps = 0;
  };

  int horizon() const { return N_; }
  int num_inputs() const { return m_; }
  const Quantizer& quantizer() const { return *q_; }
  std::shared_ptr<const Quantizer> quantizer_ptr() const { return q_; }
  const Certificate& certificate() const { return cert_; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int id) const { return nodes_.at(id); }
  /// First node id of a level; level_begin(N + 1) == num_nodes().
  int level_begin(int level) const { return level_begin_.at(level); }
  int root(int cell) const { return roots_.at(cell); }
  std::span<const int> children(int node, int u) const;

  std::vector<int> window_cells(int node) const;
  std::vector<int> window_inputs(int node) const;
  /// Pairs of the node's support in the home chart of its newest cell.
  std::vector<HalfSpacePair> window_support(int node) const;
  /// Whole space for windows ending outside the operating range.
  SupportSet window_support_set(int node) const;
  /// x (any periodic copy) lies in P(support) within tol.
  bool support_contains(int node, const Vec& x, double tol) const;

  /// Stored node for the window, if it was found feasible. Windows passing
  /// through a cell outside the operating range are not stored.
  std::optional<int> find(std::span<const int> cells, std::span<const int> inputs) const;

  /// Feasibility of a window (cells.size() == inputs.size() + 1). After a
  /// cell outside the operating range the support is empty, so only the
  /// prefix up to that cell is checked. Throws HorizonExceeded.
  bool window_feasible(std::span<const int> cells, std::span<const int> inputs) const;

  const std::vector<LevelStats>& level_stats() const { return levels_; }
  /// Counters for the realization with memory span n <= N.
  AutomatonStats stats(int n) const;
  long initial_half_spaces() const { return initial_half_spaces_; }

 private:
  friend Abstraction build_abstraction(const SystemModel&, std::shared_ptr<const Quantizer>, int,
                                       const Certificate&, const AbstractionOptions&);
  friend class AbstractionBuilder;

  int N_ = 0;
  int m_ = 0;
  std::shared_ptr<const Quantizer> q_;
  Certificate cert_;
  std::vector<Node> nodes_;
  std::vector<int> level_begin_;
  std::vector<int> roots_;
  std::vector<BlockRef> block_refs_;
  std::vector<std::vector<HalfSpacePair>> blocks_;
  std::vector<std::vector<int>> children_;
  std::vector<LevelStats> levels_;
  long initial_half_spaces_ = 0;
};

/// Runs the half-space propagation for memory span N. Throws
/// ConditionsViolated when the certificate does not cover the request.
Abstraction build_abstraction(const SystemModel& sys, std::shared_ptr<const Quantizer> q, int N,
                              const Certificate& cert, const AbstractionOptions& opts = {});

/// Shift-register realization with memory span n <= N: states are the
/// feasible windows shorter than n, a transition appends (u, cell) and
/// drops the oldest entry once the window reaches length n.
class AbstractionAutomaton {
 public:
  AbstractionAutomaton(const Abstraction& a, int n);

  int span() const { return n_; }
  int num_states() const { return num_states_; }
  int num_inputs() const { return a_->num_inputs(); }
  const Abstraction& abstraction() const { return *a_; }
  /// State id equals the node id of its window.
  int newest_cell(int state) const { return a_->node(state).cell; }
  std::vector<int> successors(int state, int u) const;
  long num_transitions() const;
  AutomatonStats stats() const { return a_->stats(n_); }
  /// State reached from a window history (trailing n-1 entries are used).
  std::optional<int> state_of(std::span<const int> cells, std::span<const int> inputs) const;

 private:
  const Abstraction* a_;
  int n_;
  int num_states_;
};

/// Transition-system document (schema "scabs-transition-system", version 1).
void write_transition_system(const AbstractionAutomaton& a, const SystemModel& sys,
                             std::ostream& out);

}  // namespace scabs
