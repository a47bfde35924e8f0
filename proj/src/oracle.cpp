#include "scabs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "scabs/error.hpp"

namespace scabs {

namespace {

constexpr double kClipEps = 1e-12;
constexpr std::size_t kMaxWindow = 6;

std::vector<Vec> map_loop(const LinearSystem& sys, const std::vector<Vec>& loop, int u) {
  std::vector<Vec> out;
  out.reserve(loop.size());
  for (const auto& x : loop) out.push_back(sys.step(x, u));
  return out;
}

std::vector<Vec> clip_by(std::vector<Vec> loop, const std::vector<HalfSpacePair>& hs) {
  for (const auto& h : hs) {
    if (loop.empty()) break;
    loop = clip_polygon_2d(loop, h, kClipEps);
  }
  return loop;
}

/// Outward edge half-planes of a nondegenerate convex loop.
std::vector<HalfSpacePair> edge_halfspaces(const std::vector<Vec>& loop) {
  const double sign = polygon_area_2d(loop) >= 0 ? 1.0 : -1.0;
  std::vector<HalfSpacePair> hs;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec& a = loop[i];
    const Vec& b = loop[(i + 1) % loop.size()];
    Vec n(2);
    n << sign * (b(1) - a(1)), -sign * (b(0) - a(0));
    hs.push_back({a, n});
  }
  return hs;
}

const std::vector<Vec>& bounded_loop(const Quantizer& q, int cell) {
  const Cell& c = q.cell(cell);
  if (!c.polytope) throw Error(Errc::InvalidArgument, "window cell " + to_string(c.id) + " is unbounded");
  return c.polytope->vertices();
}

void check_window(const LinearSystem& sys, const Quantizer& q, std::span<const int> cells,
                  std::span<const int> inputs) {
  if (q.dim() != 2) throw Error(Errc::InvalidArgument, "exact window sets are 2-D only");
  if (cells.size() != inputs.size() + 1) throw Error(Errc::InvalidArgument, "window needs one more cell than inputs");
  if (inputs.size() > kMaxWindow) throw Error(Errc::InvalidArgument, "window longer than 6 inputs");
  for (int u : inputs) {
    if (u < 0 || u >= sys.num_inputs()) throw Error(Errc::InvalidArgument, "input out of range");
  }
}

}  // namespace

DiscreteSystem to_discrete(const LinearSystem& sys) {
  DiscreteSystem d;
  d.n = sys.A.empty() ? 0 : static_cast<int>(sys.A[0].rows());
  for (int u = 0; u < sys.num_inputs(); ++u) d.input_names.push_back(std::to_string(u));
  d.step = [sys](const Vec& x, int u) { return sys.step(x, u); };
  d.jacobian = [sys](const Vec&, int u) -> Mat { return sys.A.at(u); };
  return d;
}

std::vector<Vec> exact_window_set(const LinearSystem& sys, const Quantizer& q,
                                  std::span<const int> cells, std::span<const int> inputs) {
  check_window(sys, q, cells, inputs);
  std::vector<Vec> m = bounded_loop(q, cells[0]);
  for (std::size_t k = 0; k < inputs.size() && !m.empty(); ++k) {
    m = clip_by(map_loop(sys, m, inputs[k]), q.cell(cells[k + 1]).region);
  }
  return m;
}

std::vector<Vec> exact_window_set_intersection(const LinearSystem& sys, const Quantizer& q,
                                               std::span<const int> cells,
                                               std::span<const int> inputs) {
  check_window(sys, q, cells, inputs);
  const std::size_t k = inputs.size();
  // start from the newest cell unmapped and cut by every older cell's image
  std::vector<Vec> m;
  std::vector<HalfSpacePair> newest = q.cell(cells[k]).region;
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<Vec> img = bounded_loop(q, cells[j]);
    for (std::size_t t = j; t < k; ++t) img = map_loop(sys, img, inputs[t]);
    if (m.empty() && j == 0) {
      m = clip_by(img, newest);
    } else {
      m = clip_by(m, edge_halfspaces(img));
    }
    if (m.empty()) return m;
  }
  if (k == 0) m = bounded_loop(q, cells[0]);
  return m;
}

std::set<Window> sampled_behavior(const SystemModel& sys, const Quantizer& q, int N, int n_init,
                                  const SampledBehaviorOptions& opts) {
  const int n = state_dim(sys);
  const int m = num_inputs(sys);
  Vec lo = Vec::Constant(n, std::numeric_limits<double>::infinity());
  Vec hi = -lo;
  for (const auto& c : q.cells()) {
    if (!c.in_operating_range()) continue;
    lo = lo.cwiseMin(c.bbox.lo);
    hi = hi.cwiseMax(c.bbox.hi);
  }
  std::vector<Vec> starts;
  if (n == 2 && opts.grid > 1) {
    for (int i = 0; i < opts.grid; ++i) {
      for (int j = 0; j < opts.grid; ++j) {
        Vec x(2);
        x << lo(0) + (hi(0) - lo(0)) * (i + 0.5) / opts.grid, lo(1) + (hi(1) - lo(1)) * (j + 0.5) / opts.grid;
        starts.push_back(x);
      }
    }
  }
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < n_init; ++k) {
    Vec x(n);
    for (int d = 0; d < n; ++d) x(d) = lo(d) + (hi(d) - lo(d)) * unit(rng);
    starts.push_back(x);
  }

  std::set<Window> out;
  std::vector<std::vector<int>> located;
  std::vector<int> word;
  // emit every combination of located cells along the current path
  auto emit = [&] {
    Window w;
    w.inputs = word;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == located.size()) {
        out.insert(w);
        return;
      }
      for (int c : located[i]) {
        w.cells.push_back(c);
        rec(i + 1);
        w.cells.pop_back();
      }
    };
    rec(0);
  };
  std::function<void(const Vec&, int)> walk = [&](const Vec& x, int depth) {
    located.push_back(q.locate(x));
    if (depth == N) {
      emit();
    } else {
      for (int u = 0; u < m; ++u) {
        Vec y;
        try {
          y = step(sys, x, u);
        } catch (const Error& e) {
          if (e.code() != Errc::FlowEscape) throw;
          emit();
          continue;
        }
        word.push_back(u);
        walk(y, depth + 1);
        word.pop_back();
      }
    }
    located.pop_back();
  };
  for (const auto& x : starts) walk(x, 0);
  return out;
}

FdReport fd_jacobian_check(const SystemModel& sys, const Box& region, int n_probes, std::uint64_t seed) {
  const int n = state_dim(sys);
  const int m = num_inputs(sys);
  std::function<Vec(const Vec&, int)> f;
  std::function<Mat(const Vec&, int)> jac;
  if (const auto* d = std::get_if<DiscreteSystem>(&sys)) {
    f = d->step;
    jac = d->jacobian;
  } else {
    const auto& s = std::get<SampledSystem>(sys);
    f = [&s](const Vec& x, int u) { return s.rhs(x, s.inputs.at(u)); };
    jac = [&s](const Vec& x, int u) { return s.rhs_jac(x, s.inputs.at(u)); };
  }
  FdReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < n_probes; ++k) {
    Vec x(n);
    for (int d = 0; d < n; ++d) x(d) = region.lo(d) + (region.hi(d) - region.lo(d)) * unit(rng);
    const int u = k % std::max(1, m);
    const Mat J = jac(x, u);
    Mat fd(n, n);
    for (int i = 0; i < n; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
      Vec xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      fd.col(i) = (f(xp, u) - f(xm, u)) / (2 * h);
    }
    const double err = (J - fd).norm() / std::max(1.0, J.norm());
    ++rep.probes;
    if (err > rep.worst_error || rep.worst_input < 0) {
      rep.worst_error = err;
      rep.worst_point = x;
      rep.worst_input = u;
    }
  }
  rep.passed = rep.worst_error <= 1e-5;
  return rep;
}

}  // namespace scabs
