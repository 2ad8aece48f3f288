#pragma once

// Finite filtered processes stored as probability trees.
//
// A FilteredTree of depth N has a virtual time-0 root (the trivial sigma
// algebra) whose children carry the time-1 distribution. The nodes at level t
// are the atoms of F_t; each node carries a value in R^d (the process value
// X_t on that atom) and an opaque info label. Two siblings may share a value
// when their info labels differ, which is how filtrations richer than the
// natural one are represented.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "adt/cost.hpp"
#include "adt/error.hpp"
#include "adt/rational.hpp"

namespace adt {

using NodeIndex = std::size_t;
inline constexpr NodeIndex kRoot = std::numeric_limits<NodeIndex>::max();

// Order of the transport cost. Zero selects the weak (L^0) mode.
struct Order {
  Rational value = 1;

  bool weak() const { return value == 0; }
  bool integral() const { return !weak() && is_integer(value); }
  unsigned integer() const { return numerator_of(value).convert_to<unsigned>(); }
  double to_double() const { return adt::to_double(value); }

  friend bool operator==(const Order&, const Order&) = default;
};

inline Order parse_order(std::string_view text) {
  Order p{parse_rational(text)};
  if (!p.weak() && p.value < 1) {
    throw Error(ErrorCode::kInvalidArgument, "order p must be 0 (weak) or >= 1, got " + std::string(text));
  }
  return p;
}

struct MetricConfig {
  int N = 1;
  int d = 1;
  Order p;

  void validate() const {
    if (N < 1) throw Error(ErrorCode::kInvalidArgument, "N must be >= 1");
    if (d < 1) throw Error(ErrorCode::kInvalidArgument, "d must be >= 1");
    if (!p.weak() && p.value < 1) throw Error(ErrorCode::kInvalidArgument, "p must be 0 or >= 1");
  }

  friend bool operator==(const MetricConfig&, const MetricConfig&) = default;
};

inline void require_same_config(const MetricConfig& a, const MetricConfig& b) {
  if (!(a == b)) {
    throw Error(ErrorCode::kConfigMismatch,
                "metric configurations differ: (N=" + std::to_string(a.N) + ", d=" + std::to_string(a.d) +
                    ", p=" + to_string(a.p.value) + ") vs (N=" + std::to_string(b.N) + ", d=" +
                    std::to_string(b.d) + ", p=" + to_string(b.p.value) + ")");
  }
}

// One step of the path metric raised to the p-th power: sum_i |x_i - y_i|^p.
// In weak mode this is the plain l1 distance; truncation happens on the path.
inline Cost step_cost(const Value& x, const Value& y, const Order& p) {
  if (x.size() != y.size()) throw Error(ErrorCode::kDimensionMismatch, "value dimensions differ");
  if (p.weak() || p.value == 1) {
    Rational s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += abs(x[i] - y[i]);
    return s;
  }
  if (p.integral()) {
    unsigned k = p.integer();
    Rational s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += pow(abs(x[i] - y[i]), k);
    return s;
  }
  double e = p.to_double();
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(std::fabs(to_double(x[i] - y[i])), e);
  return Cost::approximate(s);
}

// d_t(x, y): the p-norm for p >= 1 and |.|_1 ^ 1 in weak mode.
inline double step_distance(const Value& x, const Value& y, const Order& p) {
  double c = step_cost(x, y, p).to_double();
  if (p.weak()) return std::min(c, 1.0);
  return std::pow(c, 1.0 / p.to_double());
}

inline Cost finish_path_cost(Cost accumulated, const Order& p) {
  if (p.weak()) return min(accumulated, Cost(1));
  return accumulated;
}

// Root of a powered cost: (c)^(1/p); the identity in weak mode.
inline double cost_root(const Cost& c, const Order& p) {
  if (p.weak() || p.value == 1) return c.to_double();
  return std::pow(std::max(0.0, c.to_double()), 1.0 / p.to_double());
}

using Path = std::vector<Value>;

// d(x, y)^p = sum_t d_t(x_t, y_t)^p, or min(sum_t |x_t - y_t|_1, 1) in weak mode.
inline Cost path_cost(const Path& x, const Path& y, const MetricConfig& config) {
  if (x.size() != static_cast<std::size_t>(config.N) || y.size() != static_cast<std::size_t>(config.N)) {
    throw Error(ErrorCode::kDimensionMismatch, "paths must have N = " + std::to_string(config.N) + " steps");
  }
  Cost total = 0;
  for (int t = 0; t < config.N; ++t) {
    if (x[t].size() != static_cast<std::size_t>(config.d) || y[t].size() != static_cast<std::size_t>(config.d)) {
      throw Error(ErrorCode::kDimensionMismatch, "path values must have dimension d = " + std::to_string(config.d));
    }
    total += step_cost(x[t], y[t], config.p);
  }
  return finish_path_cost(total, config.p);
}

// A finite measure with exact weights over an indexed atom set.
template <class Atom>
struct DiscreteMeasure {
  std::vector<Atom> atoms;
  std::vector<Rational> weights;

  std::size_t size() const { return atoms.size(); }

  Rational total() const {
    Rational s = 0;
    for (const auto& w : weights) s += w;
    return s;
  }

  void validate() const {
    if (atoms.size() != weights.size()) throw Error(ErrorCode::kInvalidArgument, "atom/weight count mismatch");
    for (const auto& w : weights) {
      if (w < 0) throw Error(ErrorCode::kInvalidArgument, "negative weight " + to_string(w));
    }
    if (total() != 1) throw Error(ErrorCode::kInvalidArgument, "weights sum to " + to_string(total()));
  }

  friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;
};

struct Edge {
  NodeIndex child;
  Rational prob;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Node {
  std::string id;
  int time = 0;
  Value value;
  std::string info;
  NodeIndex parent = kRoot;
  std::vector<Edge> children;

  friend bool operator==(const Node&, const Node&) = default;
};

class TreeBuilder;

class FilteredTree {
 public:
  FilteredTree() = default;

  const MetricConfig& config() const { return config_; }
  int N() const { return config_.N; }
  int d() const { return config_.d; }

  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeIndex i) const { return nodes_.at(i); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& root_children() const { return root_children_; }

  // Children of node i, or the time-1 distribution for kRoot.
  const std::vector<Edge>& children(NodeIndex i) const { return i == kRoot ? root_children_ : nodes_[i].children; }

  // Nodes at time t (1-based), in insertion order.
  const std::vector<NodeIndex>& level(int t) const { return levels_.at(static_cast<std::size_t>(t - 1)); }
  const std::vector<NodeIndex>& leaves() const { return levels_.back(); }

  // Unconditional probability of the atom.
  const Rational& mass(NodeIndex i) const { return mass_.at(i); }

  Path value_path(NodeIndex i) const {
    Path path(static_cast<std::size_t>(nodes_[i].time));
    for (NodeIndex u = i; u != kRoot; u = nodes_[u].parent) path[static_cast<std::size_t>(nodes_[u].time - 1)] = nodes_[u].value;
    return path;
  }

  // Ancestor of i at time t (t <= time(i)).
  NodeIndex ancestor(NodeIndex i, int t) const {
    NodeIndex u = i;
    while (nodes_[u].time > t) u = nodes_[u].parent;
    return u;
  }

  FilteredTree with_config(const MetricConfig& config) const {
    FilteredTree copy = *this;
    copy.config_ = config;
    return copy;
  }

  friend bool operator==(const FilteredTree& a, const FilteredTree& b) {
    return a.config_ == b.config_ && a.nodes_ == b.nodes_ && a.root_children_ == b.root_children_;
  }

 private:
  friend class TreeBuilder;

  MetricConfig config_;
  std::vector<Node> nodes_;
  std::vector<Edge> root_children_;
  std::vector<std::vector<NodeIndex>> levels_;
  std::vector<Rational> mass_;
};

// Incremental construction of a FilteredTree; build() enforces every tree invariant.
class TreeBuilder {
 public:
  explicit TreeBuilder(MetricConfig config) : config_(config) { config_.validate(); }

  NodeIndex add(NodeIndex parent, Value value, Rational prob, std::string info = "", std::string id = "") {
    int time = parent == kRoot ? 1 : nodes_.at(parent).time + 1;
    NodeIndex index = nodes_.size();
    Node n;
    n.id = id.empty() ? "n" + std::to_string(index) : std::move(id);
    n.time = time;
    n.value = std::move(value);
    n.info = std::move(info);
    n.parent = parent;
    nodes_.push_back(std::move(n));
    Edge e{index, std::move(prob)};
    if (parent == kRoot) {
      root_children_.push_back(std::move(e));
    } else {
      nodes_[parent].children.push_back(std::move(e));
    }
    return index;
  }

  const Node& node(NodeIndex i) const { return nodes_.at(i); }
  std::size_t size() const { return nodes_.size(); }

  FilteredTree build() && {
    check_children(kRoot, root_children_);
    std::set<std::string> ids;
    for (NodeIndex i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      if (!ids.insert(n.id).second) throw Error(ErrorCode::kInvalidTree, "duplicate node id '" + n.id + "'");
      if (n.time < 1 || n.time > config_.N) {
        throw Error(ErrorCode::kInvalidTree, "node '" + n.id + "' has time " + std::to_string(n.time) +
                                                 " outside 1.." + std::to_string(config_.N));
      }
      if (n.value.size() != static_cast<std::size_t>(config_.d)) {
        throw Error(ErrorCode::kInvalidTree, "node '" + n.id + "' has value of dimension " +
                                                 std::to_string(n.value.size()) + ", expected " +
                                                 std::to_string(config_.d));
      }
      if (n.time == config_.N && !n.children.empty()) {
        throw Error(ErrorCode::kInvalidTree, "node '" + n.id + "' at time N has children");
      }
      if (n.time < config_.N) {
        if (n.children.empty()) {
          throw Error(ErrorCode::kInvalidTree, "non-uniform depth: leaf '" + n.id + "' at time " +
                                                   std::to_string(n.time) + " < N");
        }
        check_children(i, n.children);
      }
    }
    FilteredTree tree;
    tree.config_ = config_;
    tree.nodes_ = std::move(nodes_);
    tree.root_children_ = std::move(root_children_);
    tree.levels_.assign(static_cast<std::size_t>(config_.N), {});
    tree.mass_.assign(tree.nodes_.size(), Rational(0));
    for (NodeIndex i = 0; i < tree.nodes_.size(); ++i) {
      tree.levels_[static_cast<std::size_t>(tree.nodes_[i].time - 1)].push_back(i);
    }
    // Parents precede children in insertion order.
    for (const Edge& e : tree.root_children_) tree.mass_[e.child] = e.prob;
    for (NodeIndex i = 0; i < tree.nodes_.size(); ++i) {
      for (const Edge& e : tree.nodes_[i].children) tree.mass_[e.child] = tree.mass_[i] * e.prob;
    }
    return tree;
  }

 private:
  std::string label(NodeIndex i) const { return i == kRoot ? std::string("<root>") : nodes_[i].id; }

  void check_children(NodeIndex parent, const std::vector<Edge>& children) const {
    if (children.empty()) throw Error(ErrorCode::kInvalidTree, "node " + label(parent) + " has no children");
    Rational sum = 0;
    std::set<std::pair<std::string, std::string>> seen;
    for (const Edge& e : children) {
      if (e.prob <= 0) {
        throw Error(ErrorCode::kInvalidTree, "non-positive probability " + to_string(e.prob) + " on edge " +
                                                 label(parent) + " -> " + nodes_[e.child].id);
      }
      sum += e.prob;
      const Node& c = nodes_[e.child];
      if (!seen.insert({to_string(c.value), c.info}).second) {
        throw Error(ErrorCode::kInvalidTree, "duplicate sibling (value, info) = (" + to_string(c.value) + ", '" +
                                                 c.info + "') at node " + c.id);
      }
    }
    if (sum != 1) {
      throw Error(ErrorCode::kInvalidTree, "probabilities sum to " + to_string(sum) + " at node " + label(parent));
    }
  }

  MetricConfig config_;
  std::vector<Node> nodes_;
  std::vector<Edge> root_children_;
};

// Law of the value process on path space; info labels are marginalized out.
// Atoms are sorted lexicographically.
inline DiscreteMeasure<Path> law_on_paths(const FilteredTree& tree) {
  std::map<Path, Rational> law;
  for (NodeIndex leaf : tree.leaves()) law[tree.value_path(leaf)] += tree.mass(leaf);
  DiscreteMeasure<Path> out;
  for (auto& [path, w] : law) {
    out.atoms.push_back(path);
    out.weights.push_back(w);
  }
  return out;
}

// Copy of a tree with every node value replaced by f(node index).
template <class F>
FilteredTree map_values(const FilteredTree& tree, int new_d, F&& f) {
  MetricConfig config = tree.config();
  config.d = new_d;
  TreeBuilder builder(config);
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    const Node& n = tree.node(i);
    Rational prob = 0;
    for (const Edge& e : tree.children(n.parent)) {
      if (e.child == i) prob = e.prob;
    }
    builder.add(n.parent, f(i), prob, n.info, n.id);
  }
  return std::move(builder).build();
}

// Probability of edge parent -> i.
inline const Rational& edge_probability(const FilteredTree& tree, NodeIndex i) {
  for (const Edge& e : tree.children(tree.node(i).parent)) {
    if (e.child == i) return e.prob;
  }
  throw Error(ErrorCode::kInvalidTree, "dangling node " + tree.node(i).id);
}

}  // namespace adt
