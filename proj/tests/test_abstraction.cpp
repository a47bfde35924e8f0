#include <gtest/gtest.h>

#include <json.hpp>
#include <random>
#include <set>
#include <sstream>

#include "scabs/abstraction.hpp"
#include "scabs/error.hpp"

using namespace scabs;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

DiscreteSystem affine_system(Mat A, Vec b) {
  DiscreteSystem s;
  s.n = 2;
  s.input_names = {"0"};
  s.step = [A, b](const Vec& x, int) -> Vec { return A * x + b; };
  s.jacobian = [A](const Vec&, int) -> Mat { return A; };
  return s;
}

std::shared_ptr<const Quantizer> unit_boxes() {
  return std::make_shared<const Quantizer>(build_box_quantizer(v2(-3, -3), v2(3, 3), {6, 6}));
}

int cell_at(const Quantizer& q, double a, double b) { return q.locate_first(v2(a, b)); }

const Abstraction& pendulum_abstraction() {
  static const Abstraction a = [] {
    auto q = std::make_shared<const Quantizer>(build_pendulum_quantizer());
    return build_abstraction(make_pendulum(1, 0.01, 0.2), q, 2, radius_pendulum(1, 0.01, 2, 0.6));
  }();
  return a;
}

}  // namespace

TEST(Abstraction, ContractionKeepsCellOnItself) {
  auto q = unit_boxes();
  auto sys = affine_system(Mat::Identity(2, 2) * 0.5, v2(0.25, 0.25));
  auto a = build_abstraction(sys, q, 1, radius_discrete(0.5, 0.0, 1));
  const int c = cell_at(*q, 0.5, 0.5);
  auto kids = a.children(a.root(c), 0);
  ASSERT_EQ(kids.size(), 1u);
  EXPECT_EQ(a.node(kids[0]).cell, c);
}

TEST(Abstraction, ShiftWindowBecomesInfeasible) {
  auto q = unit_boxes();
  auto sys = affine_system(Mat::Identity(2, 2), v2(0.6, 0));
  auto a = build_abstraction(sys, q, 2, radius_discrete(1.0, 0.0, 2));
  const int c = cell_at(*q, 0.5, 0.5);
  const int right = cell_at(*q, 1.5, 0.5);
  const std::vector<int> u1{0}, u2{0, 0};
  EXPECT_TRUE(a.window_feasible(std::vector<int>{c, c}, u1));
  EXPECT_TRUE(a.window_feasible(std::vector<int>{c, right}, u1));
  EXPECT_FALSE(a.window_feasible(std::vector<int>{c, c, c}, u2));
  EXPECT_TRUE(a.window_feasible(std::vector<int>{c, c, right}, u2));
  EXPECT_THROW(a.window_feasible(std::vector<int>{c, c, c, c}, std::vector<int>{0, 0, 0}), Error);
}

TEST(Abstraction, RejectsUncoveredHorizon) {
  auto q = std::make_shared<const Quantizer>(build_pendulum_quantizer());
  auto sys = make_pendulum(1, 0.01, 0.2);
  EXPECT_THROW(build_abstraction(sys, q, 4, radius_pendulum(1, 0.01, 2, 0.6)), Error);
  EXPECT_THROW(build_abstraction(sys, q, 1, radius_pendulum(1, 0.01, 2, 3.0)), Error);
}

TEST(Abstraction, ZeroSpanCounts) {
  const auto& a = pendulum_abstraction();
  auto s = a.stats(0);
  EXPECT_EQ(s.states, 306);
  EXPECT_EQ(s.transitions, 0);
  EXPECT_EQ(s.half_spaces, a.initial_half_spaces());
  EXPECT_GT(a.stats(1).transitions, 306);
}

TEST(Abstraction, SuffixOfFeasibleWindowIsFeasible) {
  const auto& a = pendulum_abstraction();
  for (int id = a.level_begin(2); id < a.level_begin(3); ++id) {
    const auto& nd = a.node(id);
    ASSERT_GE(nd.suffix, 0);
    const auto& sf = a.node(nd.suffix);
    EXPECT_EQ(sf.cell, nd.cell);
    EXPECT_EQ(sf.level, 1);
  }
}

TEST(Abstraction, SupportsNestAlongSuffixes) {
  const auto& a = pendulum_abstraction();
  const auto& q = a.quantizer();
  std::mt19937_64 rng(3);
  int checked = 0;
  for (int id = a.level_begin(2); id < a.level_begin(3); id += 7) {
    const auto& cell = q.cell(a.node(id).cell);
    if (cell.kind() != CellKind::Operating) continue;
    std::uniform_real_distribution<double> dx(cell.bbox.lo(0), cell.bbox.hi(0));
    std::uniform_real_distribution<double> dy(cell.bbox.lo(1), cell.bbox.hi(1));
    for (int k = 0; k < 20; ++k) {
      Vec x = v2(dx(rng), dy(rng));
      if (a.support_contains(id, x, 1e-9)) {
        EXPECT_TRUE(a.support_contains(a.node(id).suffix, x, 1e-7));
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Abstraction, BlocksAreShared) {
  const auto& a = pendulum_abstraction();
  EXPECT_LT(a.level_stats()[1].half_spaces, a.level_stats()[2].windows);
}

TEST(Abstraction, SampledTrajectoriesAreContained) {
  const auto& a = pendulum_abstraction();
  const auto& q = a.quantizer();
  auto sys = make_pendulum(1, 0.01, 0.2);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d1(0, 2 * M_PI), d2(-3.0, 3.0);
  std::uniform_int_distribution<int> du(0, 2);
  for (int k = 0; k < 400; ++k) {
    Vec x0 = v2(d1(rng), d2(rng));
    const int u0 = du(rng), u1 = du(rng);
    Vec x1 = flow(sys, x0, u0, 0.2);
    Vec x2 = flow(sys, x1, u1, 0.2);
    auto c0 = q.locate(x0), c1 = q.locate(x1), c2 = q.locate(x2);
    if (c0.size() != 1 || c1.size() != 1 || c2.size() != 1) continue;
    const std::vector<int> cells{c0[0], c1[0], c2[0]}, inputs{u0, u1};
    EXPECT_TRUE(a.window_feasible(cells, inputs)) << "sample " << k;
  }
}

TEST(Abstraction, SupersetTestIsCoarser) {
  auto q = std::make_shared<const Quantizer>(build_pendulum_quantizer());
  AbstractionOptions o;
  o.test_against_superset = true;
  auto b = build_abstraction(make_pendulum(1, 0.01, 0.2), q, 1, radius_pendulum(1, 0.01, 2, 0.6), o);
  EXPECT_GE(b.stats(1).transitions, pendulum_abstraction().stats(1).transitions);
}

TEST(Abstraction, AutomatonMatchesStats) {
  const auto& a = pendulum_abstraction();
  for (int n = 0; n <= 2; ++n) {
    AbstractionAutomaton m(a, n);
    EXPECT_EQ(m.num_states(), a.stats(n).states);
    EXPECT_EQ(m.num_transitions(), a.stats(n).transitions);
  }
  AbstractionAutomaton m(a, 2);
  for (int s = 0; s < m.num_states(); s += 97) {
    for (int u = 0; u < m.num_inputs(); ++u) {
      for (int t : m.successors(s, u)) {
        ASSERT_LT(t, m.num_states());
        EXPECT_LE(a.node(t).level, 1);
      }
    }
  }
}

TEST(Abstraction, TransitionSystemExport) {
  const auto& a = pendulum_abstraction();
  AbstractionAutomaton m(a, 1);
  std::ostringstream out;
  write_transition_system(m, make_pendulum(1, 0.01, 0.2), out);
  auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j["schema"], "scabs-transition-system");
  EXPECT_EQ(j["version"], 1);
  EXPECT_EQ(j["memory_span"], 1);
  EXPECT_EQ(j["inputs"].size(), 3u);
  EXPECT_EQ(j["states"].size(), static_cast<std::size_t>(m.num_states()));
  EXPECT_EQ(j["transitions"].size(), static_cast<std::size_t>(m.num_transitions()));
}
