#include "scabs/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "scabs/error.hpp"

namespace scabs {

namespace {

bool radius_covers(double r_max, double radius) {
  if (std::isinf(radius)) return std::isinf(r_max);
  return r_max >= radius;
}

}  // namespace

std::span<const int> Abstraction::children(int node, int u) const {
  const auto& c = children_.at(static_cast<std::size_t>(node) * m_ + u);
  return {c.data(), c.size()};
}

std::vector<int> Abstraction::window_cells(int id) const {
  std::vector<int> out;
  for (int n = id; n >= 0; n = nodes_[n].parent) out.push_back(nodes_[n].cell);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<int> Abstraction::window_inputs(int id) const {
  std::vector<int> out;
  for (int n = id; nodes_[n].parent >= 0; n = nodes_[n].parent) out.push_back(nodes_[n].input);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<HalfSpacePair> Abstraction::window_support(int id) const {
  const Node& n = nodes_.at(id);
  std::vector<HalfSpacePair> out;
  for (int i = n.block_begin; i < n.block_begin + n.block_count; ++i) {
    const BlockRef& r = block_refs_[i];
    const Vec shift = q_->shift_vector(r.wraps);
    for (const auto& h : blocks_[r.block]) out.push_back(h.translated(shift));
  }
  return out;
}

SupportSet Abstraction::window_support_set(int id) const {
  if (!q_->cell(nodes_.at(id).cell).in_operating_range()) return SupportSet::whole_space();
  return SupportSet(window_support(id));
}

bool Abstraction::support_contains(int id, const Vec& x, double tol) const {
  const Node& n = nodes_.at(id);
  if (!q_->cell(n.cell).in_operating_range()) return true;
  const Vec y = q_->wrap_to(x, n.cell);
  for (int i = n.block_begin; i < n.block_begin + n.block_count; ++i) {
    const BlockRef& r = block_refs_[i];
    const Vec z = y - q_->shift_vector(r.wraps);
    for (const auto& h : blocks_[r.block])
      if (!h.contains(z, tol)) return false;
  }
  return true;
}

std::optional<int> Abstraction::find(std::span<const int> cells, std::span<const int> inputs) const {
  if (cells.empty() || cells.size() != inputs.size() + 1)
    throw Error(Errc::InvalidArgument, "window needs one more cell than inputs");
  if (static_cast<int>(inputs.size()) > N_)
    throw Error(Errc::HorizonExceeded, "window longer than the memory span");
  int node = roots_.at(cells[0]);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i] < 0 || inputs[i] >= m_) throw Error(Errc::InvalidArgument, "input out of range");
    int next = -1;
    for (int c : children(node, inputs[i])) {
      if (nodes_[c].cell == cells[i + 1]) {
        next = c;
        break;
      }
    }
    if (next < 0) return std::nullopt;
    node = next;
  }
  return node;
}

bool Abstraction::window_feasible(std::span<const int> cells, std::span<const int> inputs) const {
  if (static_cast<int>(inputs.size()) > N_)
    throw Error(Errc::HorizonExceeded, "window longer than the memory span");
  if (cells.size() != inputs.size() + 1)
    throw Error(Errc::InvalidArgument, "window needs one more cell than inputs");
  // constraints vanish once the window has left the operating range
  std::size_t end = cells.size();
  for (std::size_t j = 0; j < cells.size(); ++j) {
    if (!q_->cell(cells[j]).in_operating_range()) {
      end = j + 1;
      break;
    }
  }
  return find(cells.subspan(0, end), inputs.subspan(0, end - 1)).has_value();
}

AutomatonStats Abstraction::stats(int n) const {
  if (n < 0 || n > N_) throw Error(Errc::HorizonExceeded, "memory span beyond the built horizon");
  AutomatonStats s;
  s.N = n;
  s.half_spaces = initial_half_spaces_;
  for (int k = 0; k < n; ++k) {
    s.half_spaces += levels_[k].half_spaces;
    s.feasibility_tests += levels_[k].feasibility_tests;
    s.states += levels_[k].windows;
  }
  for (int k = 1; k <= n; ++k) s.transitions += levels_[k].windows;
  if (n == 0) s.states = levels_[0].windows;
  return s;
}

class AbstractionBuilder {
 public:
  AbstractionBuilder(Abstraction& a, const SystemModel& sys, const AbstractionOptions& o)
      : a_(a), q_(*a.q_), sys_(sys), opts_(o), m_(a.m_) {}

  void run() {
    init_level0();
    for (int k = 0; k < a_.N_; ++k) {
      stats_ = &a_.levels_[k];
      const int begin = a_.level_begin_[k], end = static_cast<int>(a_.nodes_.size());
      for (int w = begin; w < end; ++w) {
        if (!q_.cell(a_.nodes_[w].cell).in_operating_range()) continue;
        for (int u = 0; u < m_; ++u) extend(w, u, k);
      }
      a_.level_begin_.push_back(static_cast<int>(a_.nodes_.size()));
      a_.levels_[k + 1].windows = a_.level_begin_[k + 2] - a_.level_begin_[k + 1];
    }
  }

 private:
  void init_level0() {
    a_.level_begin_ = {0};
    a_.levels_.assign(a_.N_ + 1, {});
    sigma_.assign(q_.size(), -1);
    for (int c = 0; c < q_.size(); ++c) {
      const Cell& cell = q_.cell(c);
      if (!cell.in_operating_range()) continue;
      sigma_[c] = new_block(cell.support.pairs());
      a_.initial_half_spaces_ += static_cast<long>(cell.support.size());
    }
    a_.roots_.resize(q_.size());
    for (int c = 0; c < q_.size(); ++c) {
      Abstraction::Node n;
      n.cell = c;
      n.block_begin = static_cast<int>(a_.block_refs_.size());
      if (sigma_[c] >= 0) {
        a_.block_refs_.push_back({sigma_[c], 0});
        n.block_count = 1;
      }
      a_.roots_[c] = add_node(n);
    }
    a_.level_begin_.push_back(static_cast<int>(a_.nodes_.size()));
    a_.levels_[0].windows = q_.size();
  }

  int new_block(std::vector<HalfSpacePair> pairs) {
    a_.blocks_.push_back(std::move(pairs));
    block_child_.resize(a_.blocks_.size() * m_, -1);
    return static_cast<int>(a_.blocks_.size()) - 1;
  }

  int add_node(const Abstraction::Node& n) {
    a_.nodes_.push_back(n);
    a_.children_.resize(a_.nodes_.size() * m_);
    return static_cast<int>(a_.nodes_.size()) - 1;
  }

  int push(int block, int u) {
    const std::size_t key = static_cast<std::size_t>(block) * m_ + u;
    if (block_child_[key] >= 0) return block_child_[key];
    std::vector<HalfSpacePair> out;
    out.reserve(a_.blocks_[block].size());
    for (const auto& h : a_.blocks_[block]) {
      ++stats_->half_spaces;
      try {
        out.push_back(comp_ext(sys_, u, h));
      } catch (const Error& e) {
        // dropping a constraint only enlarges the set
        if (e.code() != Errc::SingularJacobian && e.code() != Errc::FlowEscape) throw;
        ++stats_->failed_solves;
      }
    }
    const int child = new_block(std::move(out));
    block_child_[key] = child;
    return child;
  }

  std::vector<CellShift> level0_candidates(int cell, const std::vector<HalfSpacePair>& image) {
    std::vector<CellShift> cand;
    if (opts_.use_stencil) cand = q_.stencil(cell);
    if (cand.empty() || opts_.bbox_guard) {
      std::optional<Box> box;
      if (image.empty()) {
        const int d = q_.dim();
        box = Box{Vec::Constant(d, -std::numeric_limits<double>::infinity()),
                  Vec::Constant(d, std::numeric_limits<double>::infinity())};
      } else {
        box = polyhedron_bounds(image, q_.cell(cell).center, opts_.feasibility_tol);
      }
      if (box) {
        auto extra = q_.query(*box);
        cand.insert(cand.end(), extra.begin(), extra.end());
      }
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    return cand;
  }

  bool test(const std::vector<Abstraction::BlockRef>& pushed, int target, int shift,
            std::vector<HalfSpacePair>& scratch) {
    ++stats_->feasibility_tests;
    const Cell& c = q_.cell(target);
    scratch.clear();
    for (const auto& r : pushed) {
      const Vec t = q_.shift_vector(r.wraps - shift);
      for (const auto& h : a_.blocks_[r.block]) scratch.push_back(h.translated(t));
    }
    const std::vector<Vec>* verts = c.polytope ? &c.polytope->vertices() : nullptr;
    if (opts_.test_against_superset && !c.support_polygon.empty()) verts = &c.support_polygon;
    if (verts) {
      for (const auto& h : scratch) {
        const bool separates = std::all_of(verts->begin(), verts->end(), [&](const Vec& v) {
          return h.excess(v) > opts_.feasibility_tol;
        });
        if (separates) {
          ++stats_->separations;
          return false;
        }
      }
    }
    // the image is tested against the cell itself
    const std::size_t own = scratch.size();
    const auto& target_set =
        opts_.test_against_superset && !c.superset_inner.empty() ? c.superset_inner : c.region;
    scratch.insert(scratch.end(), target_set.begin(), target_set.end());
    if (own == 0) return true;
    ++stats_->lp_solves;
    const Vec origin = c.polytope ? c.center : scratch.front().p;
    return feasible(scratch, origin, opts_.feasibility_tol).feasible();
  }

  void extend(int w, int u, int k) {
    const Abstraction::Node W = a_.nodes_[w];
    std::vector<Abstraction::BlockRef> pushed;
    for (int i = W.block_begin; i < W.block_begin + W.block_count; ++i) {
      const auto r = a_.block_refs_[i];
      pushed.push_back({push(r.block, u), r.wraps});
    }
    // candidates with the node that will serve as suffix (level >= 1)
    std::vector<std::pair<CellShift, int>> cand;
    if (k == 0) {
      std::vector<HalfSpacePair> image;
      for (const auto& r : pushed)
        for (const auto& h : a_.blocks_[r.block]) image.push_back(h);
      for (const auto& cs : level0_candidates(W.cell, image)) cand.push_back({cs, a_.roots_[cs.cell]});
    } else {
      for (int s : a_.children(W.suffix, u)) {
        const auto& S = a_.nodes_[s];
        cand.push_back({{S.cell, S.shift}, s});
      }
    }
    std::vector<HalfSpacePair> scratch;
    std::vector<int> accepted_cells;
    for (const auto& [cs, suffix] : cand) {
      if (std::find(accepted_cells.begin(), accepted_cells.end(), cs.cell) != accepted_cells.end()) {
        ++stats_->shift_conflicts;
        continue;
      }
      if (!test(pushed, cs.cell, cs.shift, scratch)) continue;
      accepted_cells.push_back(cs.cell);
      Abstraction::Node n;
      n.parent = w;
      n.suffix = suffix;
      n.cell = cs.cell;
      n.input = u;
      n.level = k + 1;
      n.shift = cs.shift;
      n.block_begin = static_cast<int>(a_.block_refs_.size());
      if (q_.cell(cs.cell).in_operating_range()) {
        for (const auto& r : pushed) a_.block_refs_.push_back({r.block, r.wraps - cs.shift});
        a_.block_refs_.push_back({sigma_[cs.cell], 0});
        n.block_count = static_cast<int>(pushed.size()) + 1;
      }
      const int id = add_node(n);
      a_.children_[static_cast<std::size_t>(w) * m_ + u].push_back(id);
    }
  }

  Abstraction& a_;
  const Quantizer& q_;
  const SystemModel& sys_;
  AbstractionOptions opts_;
  int m_;
  std::vector<int> sigma_;
  std::vector<int> block_child_;
  LevelStats* stats_ = nullptr;
};

Abstraction build_abstraction(const SystemModel& sys, std::shared_ptr<const Quantizer> q, int N,
                              const Certificate& cert, const AbstractionOptions& opts) {
  if (!q) throw Error(Errc::InvalidArgument, "no quantizer");
  if (N < 0) throw Error(Errc::InvalidArgument, "negative memory span");
  if (q->dim() != state_dim(sys)) throw Error(Errc::InvalidArgument, "dimension mismatch");
  if (opts.check_certificate) {
    require_valid(cert);
    if (!radius_covers(cert.r_max, q->superset_radius()))
      throw Error(Errc::ConditionsViolated, "certified radius is below the superset radius");
    double needed = N;
    if (cert.kind != CertKind::DiscreteL1L2) {
      const auto* s = std::get_if<SampledSystem>(&sys);
      if (!s) throw Error(Errc::ConditionsViolated, "continuous-time certificate for a map");
      needed = N * s->T;
    }
    if (cert.horizon < needed * (1 - 1e-12))
      throw Error(Errc::ConditionsViolated, "certificate horizon is shorter than the memory span");
  }
  Abstraction a;
  a.N_ = N;
  a.m_ = num_inputs(sys);
  a.q_ = std::move(q);
  a.cert_ = cert;
  AbstractionBuilder(a, sys, opts).run();
  return a;
}

AbstractionAutomaton::AbstractionAutomaton(const Abstraction& a, int n) : a_(&a), n_(n) {
  if (n < 0 || n > a.horizon()) throw Error(Errc::HorizonExceeded, "memory span beyond the built horizon");
  num_states_ = n == 0 ? a.level_begin(1) : a.level_begin(n);
}

std::vector<int> AbstractionAutomaton::successors(int state, int u) const {
  std::vector<int> out;
  if (n_ == 0) return out;
  for (int c : a_->children(state, u)) {
    const auto& node = a_->node(c);
    out.push_back(node.level == n_ ? node.suffix : c);
  }
  return out;
}

long AbstractionAutomaton::num_transitions() const {
  long t = 0;
  if (n_ == 0) return 0;
  for (int s = 0; s < num_states_; ++s)
    for (int u = 0; u < num_inputs(); ++u) t += static_cast<long>(a_->children(s, u).size());
  return t;
}

std::optional<int> AbstractionAutomaton::state_of(std::span<const int> cells,
                                                  std::span<const int> inputs) const {
  if (cells.size() != inputs.size() + 1 || cells.empty())
    throw Error(Errc::InvalidArgument, "window needs one more cell than inputs");
  const std::size_t keep = std::min<std::size_t>(inputs.size(), n_ > 0 ? n_ - 1 : 0);
  return a_->find(cells.subspan(cells.size() - keep - 1), inputs.subspan(inputs.size() - keep));
}

void write_transition_system(const AbstractionAutomaton& a, const SystemModel& sys,
                             std::ostream& out) {
  using nlohmann::json;
  const Abstraction& abs = a.abstraction();
  const Quantizer& q = abs.quantizer();
  json doc;
  doc["schema"] = "scabs-transition-system";
  doc["version"] = 1;
  doc["memory_span"] = a.span();
  json inputs = json::array();
  for (int u = 0; u < a.num_inputs(); ++u) inputs.push_back(input_name(sys, u));
  doc["inputs"] = inputs;
  json cells = json::array();
  for (const auto& c : q.cells()) {
    cells.push_back({{"kind", to_string(c.kind())}, {"col", c.id.col}, {"row", c.id.row}});
  }
  doc["cells"] = cells;
  json states = json::array();
  json avoid = json::array();
  for (int s = 0; s < a.num_states(); ++s) {
    const auto cw = abs.window_cells(s);
    states.push_back({{"id", s}, {"cells", cw}, {"inputs", abs.window_inputs(s)}});
    if (std::any_of(cw.begin(), cw.end(), [&](int c) { return !q.cell(c).in_operating_range(); }))
      avoid.push_back(s);
  }
  doc["states"] = states;
  json trans = json::array();
  for (int s = 0; s < a.num_states(); ++s)
    for (int u = 0; u < a.num_inputs(); ++u)
      for (int t : a.successors(s, u)) trans.push_back({s, u, t});
  doc["transitions"] = trans;
  doc["marked"] = {{"outside_operating_range", avoid}};
  const auto st = a.stats();
  doc["stats"] = {{"half_spaces", st.half_spaces},
                  {"feasibility_tests", st.feasibility_tests},
                  {"states", st.states},
                  {"transitions", st.transitions}};
  doc["estimated_bounds"] = abs.certificate().estimated;
  out << doc.dump() << '\n';
}

}  // namespace scabs
