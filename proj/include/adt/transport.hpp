#pragma once

// Adapted Wasserstein distance by nested backward recursion.
//
// For p >= 1 the path cost is additive over time and the recursion runs on
// pairs of canonical atoms (the nested distance):
//
//   V_N(z, z')   = d_N(z, z')^p
//   V_t(z, z')   = d_t(z, z')^p + OT(z^+, z'^+; V_{t+1})
//   AW_p^p       = OT(law ip_1(X), law ip_1(Y); V_1)
//
// The weak mode cost min(sum_t |x_t - y_t|_1, 1) is not additive, so the
// recursion runs on the expanded canonical trees, where every state carries
// its full history and only the terminal pair pays the truncated path cost.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "adt/canonical.hpp"
#include "adt/ot.hpp"
#include "adt/process.hpp"

namespace adt {

inline constexpr std::size_t kNoParent = std::numeric_limits<std::size_t>::max();

// States of one side of the recursion: canonical atoms, expanded canonical
// tree nodes, or plain tree nodes.
struct DpState {
  int time = 0;
  Value value;
  std::size_t parent = kNoParent;
  AtomId atom = 0;
  std::vector<std::pair<std::size_t, Rational>> successors;
};

struct DpSpace {
  std::vector<DpState> states;
  std::vector<std::pair<std::size_t, Rational>> initial;
};

// The DAG of atoms reachable from a canonical form, successors in canonical order.
inline DpSpace atom_dp_space(const CanonicalForm& form) {
  DpSpace out;
  const AtomSpace& space = *form.space;
  std::map<AtomId, std::size_t> index;
  std::function<std::size_t(AtomId)> visit = [&](AtomId a) -> std::size_t {
    auto it = index.find(a);
    if (it != index.end()) return it->second;
    std::size_t s = out.states.size();
    index.emplace(a, s);
    out.states.push_back({space.atom(a).time, space.atom(a).value, kNoParent, a, {}});
    std::vector<std::pair<std::size_t, Rational>> successors;
    for (const auto& [b, w] : space.ordered_successors(a)) successors.emplace_back(visit(b), w);
    out.states[s].successors = std::move(successors);
    return s;
  };
  for (const auto& [a, w] : form.ordered_law()) out.initial.emplace_back(visit(a), w);
  return out;
}

// The canonical form expanded into a tree (one state per atom path).
inline DpSpace expanded_dp_space(const CanonicalForm& form) {
  DpSpace out;
  const AtomSpace& space = *form.space;
  std::function<std::size_t(AtomId, std::size_t)> visit = [&](AtomId a, std::size_t parent) -> std::size_t {
    std::size_t s = out.states.size();
    out.states.push_back({space.atom(a).time, space.atom(a).value, parent, a, {}});
    std::vector<std::pair<std::size_t, Rational>> successors;
    for (const auto& [b, w] : space.ordered_successors(a)) successors.emplace_back(visit(b, s), w);
    out.states[s].successors = std::move(successors);
    return s;
  };
  for (const auto& [a, w] : form.ordered_law()) out.initial.emplace_back(visit(a, kNoParent), w);
  return out;
}

// The tree itself; `atom` holds the node index.
inline DpSpace tree_dp_space(const FilteredTree& tree) {
  DpSpace out;
  out.states.resize(tree.size());
  for (NodeIndex u = 0; u < tree.size(); ++u) {
    const Node& n = tree.node(u);
    DpState& s = out.states[u];
    s.time = n.time;
    s.value = n.value;
    s.parent = n.parent == kRoot ? kNoParent : n.parent;
    s.atom = u;
    for (const Edge& e : n.children) s.successors.emplace_back(e.child, e.prob);
  }
  for (const Edge& e : tree.root_children()) out.initial.emplace_back(e.child, e.prob);
  return out;
}

enum class DpMode {
  kAdditive,  // stage cost d_t^p at every pair
  kPath,      // full path cost at terminal pairs only
};

// Values and stage-optimal plans of the bicausal recursion, keyed by state pairs.
class NestedDistanceTable {
 public:
  struct Entry {
    Cost value;
    TransportPlan plan;  // over successor positions; empty at time N
  };

  const MetricConfig& config() const { return config_; }
  DpMode mode() const { return mode_; }
  const DpSpace& left() const { return left_; }
  const DpSpace& right() const { return right_; }
  const std::shared_ptr<AtomSpace>& atoms() const { return atoms_; }
  const CanonicalForm& left_form() const { return left_form_; }
  const CanonicalForm& right_form() const { return right_form_; }

  const Entry& top() const { return top_; }
  const Entry& entry(std::size_t i, std::size_t j) const { return entries_.at({i, j}); }
  bool contains(std::size_t i, std::size_t j) const { return entries_.count({i, j}) > 0; }
  const std::map<std::pair<std::size_t, std::size_t>, Entry>& entries() const { return entries_; }

  static NestedDistanceTable solve(DpSpace left, DpSpace right, const MetricConfig& config, DpMode mode) {
    NestedDistanceTable table;
    table.config_ = config;
    table.mode_ = mode;
    table.left_ = std::move(left);
    table.right_ = std::move(right);
    table.top_ = table.couple(table.left_.initial, table.right_.initial);
    return table;
  }

 private:
  friend class AwSolver;

  Cost accumulated(std::size_t i, std::size_t j) const {
    Cost total = 0;
    while (i != kNoParent && j != kNoParent) {
      total += step_cost(left_.states[i].value, right_.states[j].value, config_.p);
      i = left_.states[i].parent;
      j = right_.states[j].parent;
    }
    return total;
  }

  Entry couple(const std::vector<std::pair<std::size_t, Rational>>& mu,
               const std::vector<std::pair<std::size_t, Rational>>& nu) {
    CostMatrix cost(mu.size(), nu.size());
    std::vector<Rational> wa;
    std::vector<Rational> wb;
    for (const auto& [s, w] : mu) wa.push_back(w);
    for (const auto& [s, w] : nu) wb.push_back(w);
    for (std::size_t k = 0; k < mu.size(); ++k) {
      for (std::size_t l = 0; l < nu.size(); ++l) cost(k, l) = value(mu[k].first, nu[l].first);
    }
    OtResult ot = ot_solve(wa, wb, cost);
    return Entry{ot.value, std::move(ot.plan)};
  }

  const Cost& value(std::size_t i, std::size_t j) {
    auto it = entries_.find({i, j});
    if (it != entries_.end()) return it->second.value;
    const DpState& a = left_.states[i];
    const DpState& b = right_.states[j];
    Entry e;
    if (a.time == config_.N) {
      e.value = mode_ == DpMode::kAdditive ? step_cost(a.value, b.value, config_.p)
                                           : finish_path_cost(accumulated(i, j), config_.p);
    } else {
      e = couple(a.successors, b.successors);
      if (mode_ == DpMode::kAdditive) e.value += step_cost(a.value, b.value, config_.p);
    }
    return entries_.emplace(std::make_pair(i, j), std::move(e)).first->second.value;
  }

  MetricConfig config_;
  DpMode mode_ = DpMode::kAdditive;
  DpSpace left_;
  DpSpace right_;
  std::shared_ptr<AtomSpace> atoms_;
  CanonicalForm left_form_;
  CanonicalForm right_form_;
  Entry top_;
  std::map<std::pair<std::size_t, std::size_t>, Entry> entries_;
};

class AwSolver {
 public:
  static NestedDistanceTable solve(const FilteredTree& a, const FilteredTree& b) {
    require_same_config(a.config(), b.config());
    auto space = std::make_shared<AtomSpace>();
    CanonicalForm fa = information_process(a, space).form;
    CanonicalForm fb = information_process(b, space).form;
    NestedDistanceTable table =
        a.config().p.weak()
            ? NestedDistanceTable::solve(expanded_dp_space(fa), expanded_dp_space(fb), a.config(), DpMode::kPath)
            : NestedDistanceTable::solve(atom_dp_space(fa), atom_dp_space(fb), a.config(), DpMode::kAdditive);
    table.atoms_ = space;
    table.left_form_ = std::move(fa);
    table.right_form_ = std::move(fb);
    return table;
  }
};

struct AwResult {
  Cost value;  // AW_p^p, or the truncated value in weak mode
  NestedDistanceTable table;

  double distance() const { return cost_root(value, table.config().p); }
};

inline AwResult aw_distance(const FilteredTree& a, const FilteredTree& b) {
  NestedDistanceTable table = AwSolver::solve(a, b);
  Cost value = table.top().value;
  return AwResult{std::move(value), std::move(table)};
}

// W_p^p between the path laws (no adaptedness constraint).
inline Cost wasserstein_paths(const FilteredTree& a, const FilteredTree& b) {
  require_same_config(a.config(), b.config());
  auto mu = law_on_paths(a);
  auto nu = law_on_paths(b);
  CostMatrix cost(mu.size(), nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) cost(i, j) = path_cost(mu.atoms[i], nu.atoms[j], a.config());
  }
  return ot_solve(mu.weights, nu.weights, cost).value;
}

// The bicausal recursion run directly on the two trees (no canonicalization).
inline NestedDistanceTable bicausal_dp_on_trees(const FilteredTree& a, const FilteredTree& b) {
  require_same_config(a.config(), b.config());
  return NestedDistanceTable::solve(tree_dp_space(a), tree_dp_space(b), a.config(), DpMode::kPath);
}

// Metric d_{Z_t} (nested, p = 1) on the states of self_aware_lift(tree),
// whose last coordinate is the rank of the ip atom.
inline StateMetric information_lift_metric(const FilteredTree& tree) {
  MetricConfig config = tree.config();
  config.p = Order{1};
  auto space = std::make_shared<AtomSpace>();
  InformationProcess ip = information_process(tree, space);
  std::vector<Rational> rank = detail::atom_ranks(tree, ip);
  auto states = std::make_shared<DpSpace>(atom_dp_space(ip.form));
  std::map<AtomId, std::size_t> state_of_atom;
  for (std::size_t s = 0; s < states->states.size(); ++s) state_of_atom[states->states[s].atom] = s;
  std::map<std::pair<int, Rational>, std::size_t> state_of;
  for (NodeIndex u = 0; u < tree.size(); ++u) state_of[{tree.node(u).time, rank[u]}] = state_of_atom.at(ip.node_atom[u]);
  auto cache = std::make_shared<std::map<std::pair<std::size_t, std::size_t>, double>>();
  return [states, state_of, config, cache](int t, const Value& x, const Value& y) {
    std::size_t a = state_of.at({t, x.back()});
    std::size_t b = state_of.at({t, y.back()});
    if (a == b) return 0.0;
    auto it = cache->find({a, b});
    if (it != cache->end()) return it->second;
    DpSpace l = *states;
    DpSpace r = *states;
    l.initial = {{a, Rational(1)}};
    r.initial = {{b, Rational(1)}};
    double v = NestedDistanceTable::solve(std::move(l), std::move(r), config, DpMode::kAdditive).top().value.to_double();
    cache->emplace(std::make_pair(a, b), v);
    return v;
  };
}

// ---------------------------------------------------------------------------
// Compositional bicausal couplings: an independent soundness oracle.

// Chooses a coupling of the children of (u, v); kRoot stands for the roots.
using StagePlanChooser =
    std::function<TransportPlan(NodeIndex u, NodeIndex v, std::span<const Rational> mu, std::span<const Rational> nu)>;

// Path cost E[c(X, Y)] of the coupling obtained by composing stage plans.
inline Cost composition_cost(const FilteredTree& a, const FilteredTree& b, const StagePlanChooser& choose) {
  require_same_config(a.config(), b.config());
  const Order& p = a.config().p;
  Cost total = 0;
  std::function<void(NodeIndex, NodeIndex, const Rational&, const Cost&)> walk =
      [&](NodeIndex u, NodeIndex v, const Rational& mass, const Cost& acc) {
        const auto& cu = a.children(u);
        if (u != kRoot && cu.empty()) {
          total += finish_path_cost(acc, p) * mass;
          return;
        }
        const auto& cv = b.children(v);
        std::vector<Rational> mu;
        std::vector<Rational> nu;
        for (const Edge& e : cu) mu.push_back(e.prob);
        for (const Edge& e : cv) nu.push_back(e.prob);
        TransportPlan plan = choose(u, v, mu, nu);
        for (const PlanEntry& pe : plan.support) {
          NodeIndex x = cu[pe.row].child;
          NodeIndex y = cv[pe.col].child;
          walk(x, y, mass * pe.weight, acc + step_cost(a.node(x).value, b.node(y).value, p));
        }
      };
  walk(kRoot, kRoot, Rational(1), Cost(0));
  return total;
}

// North-west corner rule on the given row/column orders: a vertex of cpl(mu, nu).
inline TransportPlan northwest_corner_plan(std::span<const Rational> mu, std::span<const Rational> nu,
                                           const std::vector<std::size_t>& row_order,
                                           const std::vector<std::size_t>& col_order) {
  std::vector<Rational> a(mu.begin(), mu.end());
  std::vector<Rational> b(nu.begin(), nu.end());
  TransportPlan plan;
  std::size_t r = 0;
  std::size_t c = 0;
  while (r < row_order.size() && c < col_order.size()) {
    std::size_t i = row_order[r];
    std::size_t j = col_order[c];
    Rational x = a[i] < b[j] ? a[i] : b[j];
    if (x > 0) plan.support.push_back({i, j, x});
    a[i] -= x;
    b[j] -= x;
    if (a[i] == 0) ++r;
    if (b[j] == 0) ++c;
  }
  std::sort(plan.support.begin(), plan.support.end(),
            [](const PlanEntry& x, const PlanEntry& y) { return std::tie(x.row, x.col) < std::tie(y.row, y.col); });
  return plan;
}

inline TransportPlan product_plan(std::span<const Rational> mu, std::span<const Rational> nu) {
  TransportPlan plan;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) plan.support.push_back({i, j, mu[i] * nu[j]});
  }
  return plan;
}

inline TransportPlan mix_plans(const TransportPlan& x, const TransportPlan& y, const Rational& lambda) {
  std::map<std::pair<std::size_t, std::size_t>, Rational> mixed;
  for (const auto& e : x.support) mixed[{e.row, e.col}] += (1 - lambda) * e.weight;
  for (const auto& e : y.support) mixed[{e.row, e.col}] += lambda * e.weight;
  TransportPlan plan;
  for (auto& [k, w] : mixed) {
    if (w > 0) plan.support.push_back({k.first, k.second, w});
  }
  return plan;
}

// Deterministic across platforms (std distributions are not).
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[below(i)]);
    return p;
  }

 private:
  std::mt19937_64 engine_;
};

// Path costs of `samples` compositional bicausal couplings. Element 0 is the
// composition of stage-wise optimal plans from the recursion on the trees
// themselves; the rest mix random vertices, product plans and locally optimal
// plans at random.
inline std::vector<Cost> random_bicausal_cost(const FilteredTree& a, const FilteredTree& b, std::uint64_t seed,
                                              std::size_t samples) {
  if (samples == 0) throw Error(ErrorCode::kInvalidArgument, "samples must be >= 1");
  NestedDistanceTable dp = bicausal_dp_on_trees(a, b);
  auto optimal = [&](NodeIndex u, NodeIndex v, std::span<const Rational>, std::span<const Rational>) {
    if (u == kRoot) return dp.top().plan;
    return dp.entry(u, v).plan;
  };
  std::vector<Cost> out;
  out.push_back(composition_cost(a, b, optimal));
  SplitRng rng(seed);
  for (std::size_t s = 1; s < samples; ++s) {
    std::size_t style = rng.below(4);
    auto random_stage = [&](NodeIndex u, NodeIndex v, std::span<const Rational> mu, std::span<const Rational> nu) {
      std::size_t pick = style == 3 ? rng.below(4) : style;
      switch (pick) {
        case 0:
          return northwest_corner_plan(mu, nu, rng.permutation(mu.size()), rng.permutation(nu.size()));
        case 1:
          return product_plan(mu, nu);
        case 2: {
          TransportPlan x = northwest_corner_plan(mu, nu, rng.permutation(mu.size()), rng.permutation(nu.size()));
          TransportPlan y = optimal(u, v, mu, nu);
          return mix_plans(x, y, Rational(static_cast<long>(rng.below(5)), 4));
        }
        default:
          return optimal(u, v, mu, nu);
      }
    };
    out.push_back(composition_cost(a, b, random_stage));
  }
  return out;
}

}  // namespace adt
