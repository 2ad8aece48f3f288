#pragma once

// Named example processes and seeded random trees.

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adt/process.hpp"
#include "adt/transport.hpp"

namespace adt::fixtures {

inline MetricConfig scalar_config(int N, const Order& p = Order{1}) { return MetricConfig{N, 1, p}; }

inline Value v(const Rational& x) { return Value{x}; }

// Single path with the given values.
inline FilteredTree deterministic_path(const std::vector<Rational>& values, const Order& p = Order{1}) {
  TreeBuilder b(scalar_config(static_cast<int>(values.size()), p));
  NodeIndex u = kRoot;
  for (const auto& x : values) u = b.add(u, v(x), Rational(1));
  return std::move(b).build();
}

// X_1 = 0, X_2 = -s or +s with probability 1/2 each.
inline FilteredTree symmetric_two_step(const Rational& s, const Order& p = Order{1}) {
  TreeBuilder b(scalar_config(2, p));
  NodeIndex r = b.add(kRoot, v(0), Rational(1));
  b.add(r, v(-s), Rational(1, 2));
  b.add(r, v(s), Rational(1, 2));
  return std::move(b).build();
}

inline FilteredTree worked_x(const Order& p = Order{1}) { return symmetric_two_step(1, p); }

// Y_1 = -eps or +eps with probability 1/2, Y_2 = sign(Y_1).
inline FilteredTree worked_y(const Rational& eps, const Order& p = Order{1}) {
  TreeBuilder b(scalar_config(2, p));
  NodeIndex lo = b.add(kRoot, v(-eps), Rational(1, 2));
  NodeIndex hi = b.add(kRoot, v(eps), Rational(1, 2));
  b.add(lo, v(-1), Rational(1));
  b.add(hi, v(1), Rational(1));
  return std::move(b).build();
}

// X with F_1 already revealing the sign of X_2.
inline FilteredTree sign_revealing_lift(const Order& p = Order{1}) {
  TreeBuilder b(scalar_config(2, p));
  NodeIndex l = b.add(kRoot, v(0), Rational(1, 2), "L");
  NodeIndex r = b.add(kRoot, v(0), Rational(1, 2), "R");
  b.add(l, v(-1), Rational(1));
  b.add(r, v(1), Rational(1));
  return std::move(b).build();
}

// X with an info label at time 1 that carries no information.
inline FilteredTree redundant_lift(const Order& p = Order{1}) {
  TreeBuilder b(scalar_config(2, p));
  for (const char* info : {"a", "b"}) {
    NodeIndex u = b.add(kRoot, v(0), Rational(1, 2), info);
    b.add(u, v(-1), Rational(1, 2));
    b.add(u, v(1), Rational(1, 2));
  }
  return std::move(b).build();
}

// Values (0, +-(1 + 1/n)).
inline FilteredTree perturbed_x(int n, const Order& p = Order{1}) {
  return symmetric_two_step(1 + Rational(1, n), p);
}

// Three periods, a coin revealed at t = 2 for one branch only.
inline FilteredTree three_period(const Order& p = Order{1}) {
  TreeBuilder b(scalar_config(3, p));
  NodeIndex a = b.add(kRoot, v(0), Rational(1, 3));
  NodeIndex c = b.add(kRoot, v(1), Rational(2, 3));
  NodeIndex a1 = b.add(a, v(1), Rational(1, 2), "early");
  NodeIndex a2 = b.add(a, v(1), Rational(1, 2), "late");
  b.add(a1, v(2), Rational(1));
  b.add(a2, v(0), Rational(1, 2));
  b.add(a2, v(2), Rational(1, 2));
  NodeIndex c1 = b.add(c, v(-1), Rational(1, 4));
  NodeIndex c2 = b.add(c, v(2), Rational(3, 4));
  b.add(c1, v(0), Rational(1));
  b.add(c2, v(1), Rational(1, 3));
  b.add(c2, v(3), Rational(2, 3));
  return std::move(b).build();
}

// Same path law as three_period, natural filtration.
inline FilteredTree three_period_natural(const Order& p = Order{1}) {
  TreeBuilder b(scalar_config(3, p));
  NodeIndex a = b.add(kRoot, v(0), Rational(1, 3));
  NodeIndex c = b.add(kRoot, v(1), Rational(2, 3));
  NodeIndex a1 = b.add(a, v(1), Rational(1));
  b.add(a1, v(0), Rational(1, 4));
  b.add(a1, v(2), Rational(3, 4));
  NodeIndex c1 = b.add(c, v(-1), Rational(1, 4));
  NodeIndex c2 = b.add(c, v(2), Rational(3, 4));
  b.add(c1, v(0), Rational(1));
  b.add(c2, v(1), Rational(1, 3));
  b.add(c2, v(3), Rational(2, 3));
  return std::move(b).build();
}

// Two-dimensional values.
inline FilteredTree planar(int shift, const Order& p = Order{1}) {
  TreeBuilder b(MetricConfig{2, 2, p});
  NodeIndex u = b.add(kRoot, Value{0, Rational(shift)}, Rational(1, 2));
  NodeIndex w = b.add(kRoot, Value{1, 0}, Rational(1, 2));
  b.add(u, Value{1, 1}, Rational(1, 3));
  b.add(u, Value{-1, 1}, Rational(2, 3));
  b.add(w, Value{0, Rational(shift)}, Rational(1));
  return std::move(b).build();
}

struct RandomTreeOptions {
  int max_children = 3;
  int value_range = 2;     // values in [-value_range, value_range]
  int max_weight = 3;      // edge weights drawn from 1..max_weight, normalized
  bool info_labels = true;  // sometimes attach labels "a"/"b"
};

// Random tree of depth N; siblings are kept distinct by redrawing.
inline FilteredTree random_tree(SplitRng& rng, int N, int d, const Order& p = Order{1},
                                const RandomTreeOptions& options = {}) {
  TreeBuilder b(MetricConfig{N, d, p});
  bool labelled = options.info_labels && rng.below(3) == 0;
  auto grow = [&](auto&& self, NodeIndex parent, int t) -> void {
    std::size_t count = 1 + rng.below(static_cast<std::size_t>(options.max_children));
    std::vector<std::pair<Value, std::string>> seen;
    std::vector<std::pair<Value, std::string>> kids;
    std::vector<long> weights;
    long total = 0;
    for (std::size_t k = 0; k < count; ++k) {
      for (int attempt = 0; attempt < 16; ++attempt) {
        Value x(static_cast<std::size_t>(d));
        for (auto& c : x) c = static_cast<long>(rng.below(2 * options.value_range + 1)) - options.value_range;
        std::string info = labelled ? std::string(1, static_cast<char>('a' + rng.below(2))) : "";
        std::pair<Value, std::string> key{x, info};
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
        seen.push_back(key);
        kids.push_back(std::move(key));
        long w = 1 + static_cast<long>(rng.below(static_cast<std::size_t>(options.max_weight)));
        weights.push_back(w);
        total += w;
        break;
      }
    }
    for (std::size_t k = 0; k < kids.size(); ++k) {
      NodeIndex c = b.add(parent, kids[k].first, Rational(weights[k], total), kids[k].second);
      if (t < N) self(self, c, t + 1);
    }
  };
  grow(grow, kRoot, 1);
  return std::move(b).build();
}

struct NamedTree {
  std::string name;
  FilteredTree tree;
};

inline std::vector<NamedTree> regression_trees(const Order& p = Order{1}) {
  std::vector<NamedTree> out;
  out.push_back({"x", worked_x(p)});
  out.push_back({"y_1/10", worked_y(Rational(1, 10), p)});
  out.push_back({"y_1/100", worked_y(Rational(1, 100), p)});
  out.push_back({"sign_lift", sign_revealing_lift(p)});
  out.push_back({"redundant_lift", redundant_lift(p)});
  out.push_back({"path_0_1", deterministic_path({0, 1}, p)});
  out.push_back({"x_2", perturbed_x(2, p)});
  out.push_back({"x_3", perturbed_x(3, p)});
  out.push_back({"three_period", three_period(p)});
  out.push_back({"three_period_natural", three_period_natural(p)});
  out.push_back({"path_0_1_2", deterministic_path({0, 1, 2}, p)});
  out.push_back({"planar_0", planar(0, p)});
  out.push_back({"planar_1", planar(1, p)});
  SplitRng rng(20240611);
  for (int k = 0; k < 4; ++k) out.push_back({"random_" + std::to_string(k), random_tree(rng, 2, 1, p)});
  for (int k = 0; k < 2; ++k) out.push_back({"random3_" + std::to_string(k), random_tree(rng, 3, 1, p)});
  return out;
}

// Every ordered pair (a, b), a before or equal to b, with matching N and d.
inline std::vector<std::pair<NamedTree, NamedTree>> regression_pairs(const Order& p = Order{1}) {
  auto trees = regression_trees(p);
  std::vector<std::pair<NamedTree, NamedTree>> out;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    for (std::size_t j = i; j < trees.size(); ++j) {
      if (trees[i].tree.config() == trees[j].tree.config()) out.emplace_back(trees[i], trees[j]);
    }
  }
  return out;
}

}  // namespace adt::fixtures
