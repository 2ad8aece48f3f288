#pragma once

// Optimal stopping (Snell envelope), Doob decomposition and their stability
// with respect to the adapted Wasserstein distance.

#include <cmath>
#include <string>
#include <vector>

#include "adt/payoff.hpp"
#include "adt/skorokhod.hpp"
#include "adt/transport.hpp"

namespace adt {

struct StoppingResult {
  Rational value;
  std::vector<Rational> snell;   // Snell envelope per node
  std::vector<Rational> payoff;  // f_t at the node
  std::vector<bool> stop;        // stop at this node (ties stop)
};

// Backward recursion over the tree's own atoms, so info labels count.
inline StoppingResult optimal_stopping(const FilteredTree& tree, const PayoffSpec& payoff) {
  payoff.check_horizon(tree.N());
  StoppingResult r;
  r.snell.resize(tree.size());
  r.payoff.resize(tree.size());
  r.stop.resize(tree.size());
  for (NodeIndex u = tree.size(); u-- > 0;) {
    const Node& n = tree.node(u);
    r.payoff[u] = payoff.evaluate(tree.value_path(u));
    if (n.children.empty()) {
      r.snell[u] = r.payoff[u];
      r.stop[u] = true;
      continue;
    }
    Rational continuation = 0;
    for (const Edge& e : n.children) continuation += e.prob * r.snell[e.child];
    r.stop[u] = r.payoff[u] >= continuation;
    r.snell[u] = r.stop[u] ? r.payoff[u] : continuation;
  }
  r.value = 0;
  for (const Edge& e : tree.root_children()) r.value += e.prob * r.snell[e.child];
  return r;
}

struct StoppingStability {
  Rational value_a;
  Rational value_b;
  Rational gap;  // |v(a) - v(b)|
  Cost aw1;      // AW_1(a, b)
  double bound = 0;  // L * AW_1
  bool holds = false;
  LipschitzSample lipschitz;
};

// Evaluated at p = 1 whatever the trees' configured order.
inline StoppingStability stopping_stability_report(const FilteredTree& a, const FilteredTree& b,
                                                   const PayoffSpec& payoff, std::uint64_t seed = 0) {
  MetricConfig config = a.config();
  config.p = Order{1};
  FilteredTree a1 = a.with_config(config);
  FilteredTree b1 = b.with_config(MetricConfig{b.N(), b.d(), Order{1}});
  StoppingStability s;
  s.value_a = optimal_stopping(a1, payoff).value;
  s.value_b = optimal_stopping(b1, payoff).value;
  s.gap = abs(s.value_a - s.value_b);
  s.aw1 = aw_distance(a1, b1).value;
  s.bound = payoff.lipschitz * s.aw1.to_double();
  s.holds = to_double(s.gap) <= s.bound + 1e-9;
  std::vector<Value> pool;
  for (const Node& n : a.nodes()) pool.push_back(n.value);
  for (const Node& n : b.nodes()) pool.push_back(n.value);
  s.lipschitz = sample_lipschitz(payoff, pool, a.N(), a.d(), seed);
  return s;
}

struct DoobDecomposition {
  std::vector<Value> martingale;   // M_t per node
  std::vector<Value> predictable;  // A_t per node
};

// A_1 = 0, A_{t+1} = A_t + E[X_{t+1} | F_t] - X_t, M = X - A, componentwise.
inline DoobDecomposition doob(const FilteredTree& tree) {
  const auto d = static_cast<std::size_t>(tree.d());
  DoobDecomposition dec;
  dec.martingale.resize(tree.size());
  dec.predictable.resize(tree.size());
  for (NodeIndex u = 0; u < tree.size(); ++u) {
    const Node& n = tree.node(u);
    Value a(d, Rational(0));
    if (n.parent != kRoot) {
      const Node& parent = tree.node(n.parent);
      for (std::size_t i = 0; i < d; ++i) {
        Rational mean = 0;
        for (const Edge& e : parent.children) mean += e.prob * tree.node(e.child).value[i];
        a[i] = dec.predictable[n.parent][i] + mean - parent.value[i];
      }
    }
    Value m(d);
    for (std::size_t i = 0; i < d; ++i) m[i] = n.value[i] - a[i];
    dec.predictable[u] = std::move(a);
    dec.martingale[u] = std::move(m);
  }
  return dec;
}

// X = M + A, A_1 = 0, A constant across siblings, E[M_{t+1} - M_t | F_t] = 0.
inline bool check_doob(const FilteredTree& tree, const DoobDecomposition& dec) {
  const auto d = static_cast<std::size_t>(tree.d());
  if (dec.martingale.size() != tree.size() || dec.predictable.size() != tree.size()) return false;
  for (NodeIndex u = 0; u < tree.size(); ++u) {
    const Node& n = tree.node(u);
    for (std::size_t i = 0; i < d; ++i) {
      if (dec.martingale[u][i] + dec.predictable[u][i] != n.value[i]) return false;
      if (n.time == 1 && dec.predictable[u][i] != 0) return false;
    }
    if (n.children.empty()) continue;
    const Value& a = dec.predictable[n.children.front().child];
    for (const Edge& e : n.children) {
      if (dec.predictable[e.child] != a) return false;
    }
    for (std::size_t i = 0; i < d; ++i) {
      Rational drift = 0;
      for (const Edge& e : n.children) drift += e.prob * (dec.martingale[e.child][i] - dec.martingale[u][i]);
      if (drift != 0) return false;
    }
  }
  return true;
}

// The process ((X_t, A_t))_t on the same tree.
inline FilteredTree doob_decorated(const FilteredTree& tree) {
  DoobDecomposition dec = doob(tree);
  return map_values(tree, 2 * tree.d(), [&](NodeIndex u) {
    Value v = tree.node(u).value;
    v.insert(v.end(), dec.predictable[u].begin(), dec.predictable[u].end());
    return v;
  });
}

struct DoobStabilityRow {
  std::size_t n = 0;
  Cost aw;            // AW_1(X^n, X)
  Cost decorated_aw;  // AW_1 between (X, A) processes
};

struct DoobStabilityReport {
  std::vector<DoobStabilityRow> rows;
  bool aw_convergent = false;
  bool decorated_convergent = false;
  // Decorated distances go to zero whenever the plain ones do.
  bool consistent() const { return !aw_convergent || decorated_convergent; }
};

inline DoobStabilityReport doob_stability_report(const std::vector<FilteredTree>& sequence, const FilteredTree& limit) {
  if (sequence.empty()) throw Error(ErrorCode::kInvalidArgument, "doob report needs a non-empty sequence");
  auto at_p1 = [](const FilteredTree& t) { return t.with_config(MetricConfig{t.N(), t.d(), Order{1}}); };
  FilteredTree x = at_p1(limit);
  FilteredTree xd = at_p1(doob_decorated(limit));
  DoobStabilityReport report;
  std::vector<double> plain;
  std::vector<double> decorated;
  for (std::size_t k = 0; k < sequence.size(); ++k) {
    Cost a = aw_distance(at_p1(sequence[k]), x).value;
    Cost b = aw_distance(at_p1(doob_decorated(sequence[k])), xd).value;
    plain.push_back(a.to_double());
    decorated.push_back(b.to_double());
    report.rows.push_back({k + 1, a, b});
  }
  report.aw_convergent = column_converges(plain);
  report.decorated_convergent = column_converges(decorated);
  return report;
}

}  // namespace adt
