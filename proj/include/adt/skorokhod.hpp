#pragma once

// Quantile (Skorokhod) representation of finite filtered processes as
// adapted step functions on ([0,1]^N, Lebesgue), L^p distances between such
// representations and convergence diagnostics.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "adt/canonical.hpp"
#include "adt/couplings.hpp"
#include "adt/transport.hpp"

namespace adt {

// One interval [lo, hi) at coordinate `time` (the last box of a level is closed at 1).
struct Box {
  int time = 0;
  Rational lo;
  Rational hi;
  std::size_t parent = kNoParent;
  std::vector<std::size_t> children;
  Value value;

  Rational length() const { return hi - lo; }
};

// Nested boxes mirroring the canonical tree: a box at time t is the product of
// the intervals along its ancestry.
struct BoxPartition {
  int N = 0;
  std::vector<Box> boxes;
  std::vector<std::size_t> roots;

  const std::vector<std::size_t>& children(std::size_t b) const { return b == kNoParent ? roots : boxes[b].children; }

  std::vector<std::size_t> leaves() const {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      if (boxes[b].time == N) out.push_back(b);
    }
    return out;
  }

  // lambda^N of the product box ending at b.
  Rational measure(std::size_t b) const {
    Rational m = 1;
    for (; b != kNoParent; b = boxes[b].parent) m *= boxes[b].length();
    return m;
  }

  // Sorted distinct breakpoints used at coordinate t.
  std::vector<Rational> breakpoints(int t) const {
    std::set<Rational> points;
    for (const Box& box : boxes) {
      if (box.time == t) {
        points.insert(box.lo);
        points.insert(box.hi);
      }
    }
    return {points.begin(), points.end()};
  }
};

struct QuantileMap {
  MetricConfig config;
  BoxPartition partition;

  Path path(std::size_t leaf) const {
    Path out(static_cast<std::size_t>(config.N));
    for (std::size_t b = leaf; b != kNoParent; b = partition.boxes[b].parent) {
      out[partition.boxes[b].time - 1] = partition.boxes[b].value;
    }
    return out;
  }

  // Leaf box containing u.
  std::size_t locate(const std::vector<Rational>& u) const {
    if (u.size() != static_cast<std::size_t>(config.N)) {
      throw Error(ErrorCode::kDimensionMismatch, "point has " + std::to_string(u.size()) + " coordinates, expected " +
                                                     std::to_string(config.N));
    }
    std::size_t b = kNoParent;
    for (int t = 1; t <= config.N; ++t) {
      const auto& kids = partition.children(b);
      std::size_t pick = kids.back();
      for (std::size_t c : kids) {
        if (u[t - 1] < partition.boxes[c].hi) {
          pick = c;
          break;
        }
      }
      b = pick;
    }
    return b;
  }

  Path operator()(const std::vector<Rational>& u) const { return path(locate(u)); }

  // Box-measure weighted path law.
  std::map<Path, Rational> pushforward() const {
    std::map<Path, Rational> law;
    for (std::size_t leaf : partition.leaves()) law[path(leaf)] += partition.measure(leaf);
    return law;
  }

  // The process (T_t)_t on [0,1]^N with the coordinate filtration.
  FilteredTree induced_process() const {
    TreeBuilder builder(config);
    std::vector<NodeIndex> index(partition.boxes.size());
    for (std::size_t b = 0; b < partition.boxes.size(); ++b) {
      const Box& box = partition.boxes[b];
      NodeIndex parent = box.parent == kNoParent ? kRoot : index[box.parent];
      std::string info = "[" + to_string(box.lo) + "," + to_string(box.hi) + ")";
      index[b] = builder.add(parent, box.value, box.length(), info);
    }
    return std::move(builder).build();
  }
};

// Successors at every node ordered canonically, consecutive subintervals of
// [0,1] with lengths equal to the transition probabilities.
inline QuantileMap quantile_map(const FilteredTree& tree) {
  FilteredTree canon = canonical_tree(tree);
  QuantileMap q;
  q.config = canon.config();
  q.partition.N = canon.N();
  std::vector<std::size_t> box_of(canon.size());
  for (NodeIndex u = 0; u < canon.size(); ++u) {
    const Node& n = canon.node(u);
    std::size_t parent = n.parent == kRoot ? kNoParent : box_of[n.parent];
    Rational lo = 0;
    for (const Edge& e : canon.children(n.parent)) {
      if (e.child == u) break;
      lo += e.prob;
    }
    Box box{n.time, lo, lo + edge_probability(canon, u), parent, {}, n.value};
    box_of[u] = q.partition.boxes.size();
    q.partition.boxes.push_back(std::move(box));
    if (parent == kNoParent) {
      q.partition.roots.push_back(box_of[u]);
    } else {
      q.partition.boxes[parent].children.push_back(box_of[u]);
    }
  }
  return q;
}

struct LpResult {
  Cost integral;          // int d(f, g)^p (truncated L^1 in weak mode)
  double distance = 0;    // integral^(1/p)
  double grid_max = 0;    // max of d(f(u), g(u)) over midpoints of the common refinement
  std::size_t cells = 0;  // number of refinement cells
};

// Exact integral over the common refinement of the two box partitions.
inline LpResult lp_distance(const QuantileMap& f, const QuantileMap& g) {
  require_same_config(f.config, g.config);
  const MetricConfig& config = f.config;
  const BoxPartition& F = f.partition;
  const BoxPartition& G = g.partition;
  LpResult result;
  result.integral = 0;
  std::function<void(std::size_t, std::size_t, const Rational&, const Cost&)> walk =
      [&](std::size_t bf, std::size_t bg, const Rational& weight, const Cost& acc) {
        for (std::size_t cf : F.children(bf)) {
          const Box& x = F.boxes[cf];
          for (std::size_t cg : G.children(bg)) {
            const Box& y = G.boxes[cg];
            Rational overlap = std::min(x.hi, y.hi) - std::max(x.lo, y.lo);
            if (overlap <= 0) continue;
            Cost next = acc;
            next += step_cost(x.value, y.value, config.p);
            Rational w = weight * overlap;
            if (x.time == config.N) {
              Cost total = finish_path_cost(next, config.p);
              result.integral += total * w;
              result.grid_max = std::max(result.grid_max, cost_root(total, config.p));
              ++result.cells;
            } else {
              walk(cf, cg, w, next);
            }
          }
        }
      };
  walk(kNoParent, kNoParent, Rational(1), Cost(0));
  result.distance = cost_root(result.integral, config.p);
  return result;
}

// A column counts as convergent when its last value is at most 1/8 of its
// maximum and its second half is non-increasing.
inline bool column_converges(const std::vector<double>& column) {
  if (column.empty()) return false;
  double top = *std::max_element(column.begin(), column.end());
  if (column.back() > top / 8) return false;
  for (std::size_t i = column.size() / 2; i + 1 < column.size(); ++i) {
    if (column[i + 1] > column[i] + 1e-12) return false;
  }
  return true;
}

struct ConvergenceRow {
  std::size_t n = 0;
  Cost aw;  // AW_p^p
  double aw_distance = 0;
  Cost lp;  // int d^p
  double lp_distance = 0;
  double grid_max = 0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  bool aw_convergent = false;
  bool lp_convergent = false;
  bool grid_convergent = false;
  // AW and L^p columns agree on convergence.
  bool consistent() const { return aw_convergent == lp_convergent; }
};

inline ConvergenceReport convergence_report(const std::vector<FilteredTree>& sequence, const FilteredTree& limit) {
  if (sequence.empty()) throw Error(ErrorCode::kInvalidArgument, "convergence report needs a non-empty sequence");
  ConvergenceReport report;
  QuantileMap target = quantile_map(limit);
  std::vector<double> aw;
  std::vector<double> lp;
  std::vector<double> grid;
  for (std::size_t k = 0; k < sequence.size(); ++k) {
    require_same_config(sequence[k].config(), limit.config());
    AwResult a = aw_distance(sequence[k], limit);
    LpResult l = lp_distance(quantile_map(sequence[k]), target);
    report.rows.push_back({k + 1, a.value, a.distance(), l.integral, l.distance, l.grid_max});
    aw.push_back(a.distance());
    lp.push_back(l.distance);
    grid.push_back(l.grid_max);
  }
  report.aw_convergent = column_converges(aw);
  report.lp_convergent = column_converges(lp);
  report.grid_convergent = column_converges(grid);
  return report;
}

struct CommonBasisRepresentation {
  ProductTree tree;
  Cost cost;  // E[d(X, Y)^p] on the common basis
};

inline CommonBasisRepresentation lp_representation_on_common_basis(const FilteredTree& a, const FilteredTree& b) {
  AwResult aw = aw_distance(a, b);
  PathCoupling pi = assemble_optimal_coupling(aw.table, a, b);
  ProductTree tree = product_process(pi);
  Cost cost = tree.expected_cost();
  return {std::move(tree), std::move(cost)};
}

// ---------------------------------------------------------------------------
// Finite-scale version of the non-coexistence construction: mu^n is the law
// of (U, 1_{A_n}(U)) and mu the law of (U, 0), with U uniform on k cells.

struct NonCoexistenceFixture {
  int n = 1;
  int k = 4;
  FilteredTree mu_n;
  FilteredTree mu;
  Rational segment_start;   // a_{n-1} mod 1
  Rational segment_end;     // a_n mod 1
  Rational segment_length;  // lambda(A_n)
  bool grid_aligned = false;
  Rational indicator_mass;  // mass of cells inside A_n
  Cost w;                   // W_p^p(mu^n, mu)
  bool diagonal_plan = false;
  Cost min_perturbed;  // cheapest plan that swaps two adjacent cells
  std::vector<Rational> swept;  // lambda of the union of A_2..A_j for j = 2..n
};

namespace detail {

inline Rational harmonic(int n) {
  Rational h = 0;
  for (int j = 1; j <= n; ++j) h += Rational(1, j);
  return h;
}

inline Rational frac(const Rational& q) {
  Integer whole = numerator_of(q) / denominator_of(q);
  return q - Rational(whole);
}

// Cells of the k-grid whose midpoint lies on the wrap-around segment [a, a + len).
inline std::vector<bool> segment_cells(const Rational& start, const Rational& length, int k) {
  std::vector<bool> in(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    Rational mid(2 * i + 1, 2 * k);
    Rational offset = frac(mid - start + 1);
    in[i] = length >= 1 || offset < length;
  }
  return in;
}

}  // namespace detail

inline NonCoexistenceFixture non_coexistence_fixture(int n, int k, const Order& p = Order{1}) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be at least 1");
  if (k < 4) throw Error(ErrorCode::kInvalidArgument, "k must be at least 4");
  if (p.weak()) throw Error(ErrorCode::kInvalidArgument, "the fixture uses p >= 1");
  NonCoexistenceFixture fx;
  fx.n = n;
  fx.k = k;
  fx.segment_start = detail::frac(detail::harmonic(n - 1));
  fx.segment_end = detail::frac(detail::harmonic(n));
  fx.segment_length = Rational(1, n);
  fx.grid_aligned = (denominator_of(fx.segment_start * k) == 1) && (denominator_of(fx.segment_end * k) == 1);
  std::vector<bool> in = detail::segment_cells(fx.segment_start, fx.segment_length, k);

  MetricConfig config{2, 1, p};
  TreeBuilder bn(config);
  TreeBuilder b0(config);
  for (int i = 0; i < k; ++i) {
    Value x{Rational(2 * i + 1, 2 * k)};
    NodeIndex u = bn.add(kRoot, x, Rational(1, k));
    bn.add(u, Value{Rational(in[i] ? 1 : 0)}, Rational(1));
    NodeIndex v = b0.add(kRoot, x, Rational(1, k));
    b0.add(v, Value{Rational(0)}, Rational(1));
    if (in[i]) fx.indicator_mass += Rational(1, k);
  }
  fx.mu_n = std::move(bn).build();
  fx.mu = std::move(b0).build();

  // Costs scaled by (2k)^p: |x_i - x_j| = |i - j| / k.
  auto scaled = [&](int i, int j) {
    std::int64_t dx = 2 * std::abs(i - j);
    std::int64_t dy = in[i] ? 2 * k : 0;
    std::int64_t a = 1;
    std::int64_t b = 1;
    for (unsigned e = 0; e < p.integer(); ++e) {
      a *= dx;
      b *= dy;
    }
    return a + b;
  };
  if (!p.integral()) throw Error(ErrorCode::kInvalidArgument, "the fixture uses integer p");
  Integer denominator = 1;
  for (unsigned e = 0; e < p.integer(); ++e) denominator *= 2 * k;
  std::vector<Rational> weights(static_cast<std::size_t>(k), Rational(1, k));
  std::vector<std::int64_t> costs(static_cast<std::size_t>(k) * k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) costs[static_cast<std::size_t>(i) * k + j] = scaled(i, j);
  }
  OtResult ot = ot_solve_scaled(weights, weights, std::move(costs), denominator);
  fx.w = ot.value;
  fx.diagonal_plan = ot.plan.support.size() == static_cast<std::size_t>(k) &&
                     std::all_of(ot.plan.support.begin(), ot.plan.support.end(),
                                 [](const PlanEntry& e) { return e.row == e.col; });

  // Swapping cells i and i+1 moves first coordinates by one grid cell.
  Rational diagonal = 0;
  for (int i = 0; i < k; ++i) diagonal += Rational(scaled(i, i));
  Rational best = -1;
  for (int i = 0; i + 1 < k; ++i) {
    Rational c = diagonal - scaled(i, i) - scaled(i + 1, i + 1) + scaled(i, i + 1) + scaled(i + 1, i);
    if (best < 0 || c < best) best = c;
  }
  fx.min_perturbed = Cost(best / Rational(denominator * k));

  std::vector<bool> covered(static_cast<std::size_t>(k));
  for (int j = 2; j <= n; ++j) {
    auto cells = detail::segment_cells(detail::frac(detail::harmonic(j - 1)), Rational(1, j), k);
    int count = 0;
    for (int i = 0; i < k; ++i) {
      covered[i] = covered[i] || cells[i];
      if (covered[i]) ++count;
    }
    fx.swept.push_back(Rational(count, k));
  }
  return fx;
}

// Least grid size on which A_{n-1} and A_n both have grid-aligned endpoints.
inline int aligned_grid(int n) {
  Integer k = lcm(denominator_of(detail::frac(detail::harmonic(n - 1))), denominator_of(detail::frac(detail::harmonic(n))));
  int out = k.convert_to<int>();
  while (out < 4) out *= 2;
  return out;
}

}  // namespace adt
