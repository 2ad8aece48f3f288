#pragma once

// Canonical forms of filtered trees.
//
// The information process is computed by backward recursion: a leaf maps to
// its value, an internal node u maps to (value(u), law of the children's
// atoms). Atoms are hash-consed in an AtomSpace, so two atoms are equal iff
// their ids are equal. The canonical form of a tree is the law of its time-1
// atoms; two trees are Hoover-Keisler equivalent iff their canonical forms
// coincide.
//
// An AtomSpace is not synchronized. Confine each space to one thread.

#include <openssl/evp.h>

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adt/ot.hpp"
#include "adt/process.hpp"

namespace adt {

using AtomId = std::size_t;
using AtomLaw = std::vector<std::pair<AtomId, Rational>>;

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

// Element of the canonical space Z_t: a value and, for t < N, a law over Z_{t+1}.
struct NestedAtom {
  int time = 0;
  Value value;
  AtomLaw successors;  // sorted by atom id, weights merged
};

class AtomSpace {
 public:
  AtomId intern(int time, Value value, AtomLaw successors) {
    normalize(successors);
    Key key{time, std::move(value), std::move(successors)};
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    AtomId id = atoms_.size();
    atoms_.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key)});
    index_.emplace(std::move(key), id);
    return id;
  }

  const NestedAtom& atom(AtomId id) const { return atoms_.at(id); }
  std::size_t size() const { return atoms_.size(); }

  // Canonical total order: values lexicographically, then successor laws
  // as (atom, weight) sequences in canonical order.
  int compare(AtomId a, AtomId b) const {
    if (a == b) return 0;
    const NestedAtom& x = atoms_[a];
    const NestedAtom& y = atoms_[b];
    if (x.time != y.time) return x.time < y.time ? -1 : 1;
    if (x.value != y.value) return x.value < y.value ? -1 : 1;
    const AtomLaw& sx = ordered_successors(a);
    const AtomLaw& sy = ordered_successors(b);
    for (std::size_t k = 0; k < std::min(sx.size(), sy.size()); ++k) {
      if (int c = compare(sx[k].first, sy[k].first)) return c;
      if (sx[k].second != sy[k].second) return sx[k].second < sy[k].second ? -1 : 1;
    }
    if (sx.size() != sy.size()) return sx.size() < sy.size() ? -1 : 1;
    return 0;
  }

  bool less(AtomId a, AtomId b) const { return compare(a, b) < 0; }

  // Successors sorted in canonical order.
  const AtomLaw& ordered_successors(AtomId id) const {
    grow_caches();
    auto& slot = ordered_[id];
    if (!slot) {
      AtomLaw law = atoms_[id].successors;
      std::sort(law.begin(), law.end(), [this](const auto& x, const auto& y) { return less(x.first, y.first); });
      slot = std::move(law);
    }
    return *slot;
  }

  AtomLaw ordered(AtomLaw law) const {
    std::sort(law.begin(), law.end(), [this](const auto& x, const auto& y) { return less(x.first, y.first); });
    return law;
  }

  // Serialization of the nested structure, independent of atom ids.
  const std::string& canonical_string(AtomId id) const {
    grow_caches();
    auto& slot = strings_[id];
    if (!slot) {
      const NestedAtom& a = atoms_[id];
      std::string s = "<" + to_string(a.value);
      if (!a.successors.empty()) s += law_string(ordered_successors(id));
      slot = s + ">";
    }
    return *slot;
  }

  std::string law_string(const AtomLaw& ordered_law) const {
    std::string s = "[";
    for (std::size_t k = 0; k < ordered_law.size(); ++k) {
      if (k) s += ";";
      s += to_string(ordered_law[k].second) + ":" + canonical_string(ordered_law[k].first);
    }
    return s + "]";
  }

  // Short stable label derived from the canonical string.
  std::string label(AtomId id) const { return sha256_hex(canonical_string(id)).substr(0, 16); }

 private:
  using Key = std::tuple<int, Value, AtomLaw>;

  static void normalize(AtomLaw& law) {
    std::sort(law.begin(), law.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    AtomLaw merged;
    for (auto& entry : law) {
      if (!merged.empty() && merged.back().first == entry.first) {
        merged.back().second += entry.second;
      } else {
        merged.push_back(std::move(entry));
      }
    }
    law = std::move(merged);
  }

  void grow_caches() const {
    if (ordered_.size() < atoms_.size()) {
      ordered_.resize(atoms_.size());
      strings_.resize(atoms_.size());
    }
  }

  std::deque<NestedAtom> atoms_;  // stable references across intern()
  std::map<Key, AtomId> index_;
  mutable std::vector<std::optional<AtomLaw>> ordered_;
  mutable std::vector<std::optional<std::string>> strings_;
};

// Law of ip_1: a distribution over time-1 atoms of a shared AtomSpace.
struct CanonicalForm {
  MetricConfig config;
  std::shared_ptr<AtomSpace> space;
  AtomLaw law;  // sorted by atom id

  AtomLaw ordered_law() const { return space->ordered(law); }

  std::string canonical_string() const {
    return "N=" + std::to_string(config.N) + ";d=" + std::to_string(config.d) + ";" + space->law_string(ordered_law());
  }

  // Stable digest used to compare canonical forms across runs and files.
  std::string digest() const { return sha256_hex(canonical_string()); }

  DiscreteMeasure<AtomId> measure() const {
    DiscreteMeasure<AtomId> m;
    for (const auto& [a, w] : law) {
      m.atoms.push_back(a);
      m.weights.push_back(w);
    }
    return m;
  }

  friend bool operator==(const CanonicalForm& a, const CanonicalForm& b) {
    if (a.config.N != b.config.N || a.config.d != b.config.d) return false;
    if (a.space == b.space) return a.law == b.law;
    return a.canonical_string() == b.canonical_string();
  }
};

struct InformationProcess {
  std::vector<AtomId> node_atom;  // ip_t at every tree node
  CanonicalForm form;
};

inline InformationProcess information_process(const FilteredTree& tree, std::shared_ptr<AtomSpace> space) {
  InformationProcess ip;
  ip.node_atom.assign(tree.size(), 0);
  for (int t = tree.N(); t >= 1; --t) {
    for (NodeIndex u : tree.level(t)) {
      const Node& n = tree.node(u);
      AtomLaw successors;
      for (const Edge& e : n.children) successors.emplace_back(ip.node_atom[e.child], e.prob);
      ip.node_atom[u] = space->intern(t, n.value, std::move(successors));
    }
  }
  AtomLaw law;
  for (const Edge& e : tree.root_children()) law.emplace_back(ip.node_atom[e.child], e.prob);
  std::sort(law.begin(), law.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  AtomLaw merged;
  for (auto& entry : law) {
    if (!merged.empty() && merged.back().first == entry.first) {
      merged.back().second += entry.second;
    } else {
      merged.push_back(entry);
    }
  }
  ip.form = CanonicalForm{tree.config(), std::move(space), std::move(merged)};
  return ip;
}

inline InformationProcess information_process(const FilteredTree& tree) {
  return information_process(tree, std::make_shared<AtomSpace>());
}

// Expands the canonical form into a tree: one node per atom path, children
// in canonical order, info labels derived from the atoms' digests.
inline FilteredTree canonical_tree(const CanonicalForm& form) {
  TreeBuilder builder(form.config);
  const AtomSpace& space = *form.space;
  std::function<void(NodeIndex, const AtomLaw&, const std::string&)> expand =
      [&](NodeIndex parent, const AtomLaw& law, const std::string& prefix) {
        std::size_t k = 0;
        for (const auto& [atom, weight] : law) {
          ++k;
          std::string id = prefix.empty() ? "z" + std::to_string(k) : prefix + "." + std::to_string(k);
          NodeIndex node = builder.add(parent, space.atom(atom).value, weight, space.label(atom), id);
          if (space.atom(atom).time < form.config.N) expand(node, space.ordered_successors(atom), id);
        }
      };
  expand(kRoot, form.ordered_law(), "");
  return std::move(builder).build();
}

inline FilteredTree canonical_tree(const FilteredTree& tree) { return canonical_tree(information_process(tree).form); }

inline bool hk_equivalent(const FilteredTree& a, const FilteredTree& b) {
  require_same_config(a.config(), b.config());
  auto space = std::make_shared<AtomSpace>();
  return information_process(a, space).form.law == information_process(b, space).form.law;
}

// Tree of a path law with the natural filtration (the process S^mu).
inline FilteredTree natural_filtration_tree(const DiscreteMeasure<Path>& law, const MetricConfig& config) {
  TreeBuilder builder(config);
  std::map<std::vector<Value>, NodeIndex> prefix_node;
  std::map<std::vector<Value>, Rational> prefix_mass;
  for (std::size_t k = 0; k < law.size(); ++k) {
    for (int t = 1; t <= config.N; ++t) {
      prefix_mass[Path(law.atoms[k].begin(), law.atoms[k].begin() + t)] += law.weights[k];
    }
  }
  for (int t = 1; t <= config.N; ++t) {
    for (const auto& [prefix, mass] : prefix_mass) {
      if (static_cast<int>(prefix.size()) != t) continue;
      Path parent_prefix(prefix.begin(), prefix.end() - 1);
      NodeIndex parent = t == 1 ? kRoot : prefix_node.at(parent_prefix);
      Rational prob = t == 1 ? mass : mass / prefix_mass.at(parent_prefix);
      prefix_node[prefix] = builder.add(parent, prefix.back(), prob);
    }
  }
  return std::move(builder).build();
}

namespace detail {

// Conditional law of the value path from time t+1 on, given node u at time t.
inline std::map<Path, Rational> future_law(const FilteredTree& tree, NodeIndex u) {
  std::map<Path, Rational> law;
  std::function<void(NodeIndex, Path&, const Rational&)> walk = [&](NodeIndex v, Path& suffix, const Rational& prob) {
    const Node& n = tree.node(v);
    if (n.children.empty()) {
      law[suffix] += prob;
      return;
    }
    for (const Edge& e : n.children) {
      suffix.push_back(tree.node(e.child).value);
      walk(e.child, suffix, prob * e.prob);
      suffix.pop_back();
    }
  };
  Path suffix;
  walk(u, suffix, Rational(1));
  return law;
}

// Rank (1-based, canonical order) of each node's ip atom among the atoms at its level.
inline std::vector<Rational> atom_ranks(const FilteredTree& tree, const InformationProcess& ip) {
  std::vector<Rational> rank(tree.size());
  const AtomSpace& space = *ip.form.space;
  for (int t = 1; t <= tree.N(); ++t) {
    std::vector<AtomId> atoms;
    for (NodeIndex u : tree.level(t)) atoms.push_back(ip.node_atom[u]);
    std::sort(atoms.begin(), atoms.end(), [&](AtomId a, AtomId b) { return space.less(a, b); });
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    for (NodeIndex u : tree.level(t)) {
      auto it = std::lower_bound(atoms.begin(), atoms.end(), ip.node_atom[u],
                                 [&](AtomId a, AtomId b) { return space.less(a, b); });
      rank[u] = Rational(static_cast<long>(it - atoms.begin()) + 1);
    }
  }
  return rank;
}

}  // namespace detail

// L(X | F_t) = L(X | X_{1:t}) for every t: the conditional future path law
// depends on the value prefix only.
inline bool is_self_aware(const FilteredTree& tree) {
  for (int t = 1; t < tree.N(); ++t) {
    std::map<Path, std::map<Path, Rational>> by_prefix;
    for (NodeIndex u : tree.level(t)) {
      auto law = detail::future_law(tree, u);
      auto [it, inserted] = by_prefix.emplace(tree.value_path(u), law);
      if (!inserted && it->second != law) return false;
    }
  }
  return true;
}

// Lift with time-t value (X_t, rank of ip_t); info labels are kept.
inline FilteredTree self_aware_lift(const FilteredTree& tree) {
  InformationProcess ip = information_process(tree);
  std::vector<Rational> rank = detail::atom_ranks(tree, ip);
  return map_values(tree, tree.d() + 1, [&](NodeIndex u) {
    Value v = tree.node(u).value;
    v.push_back(rank[u]);
    return v;
  });
}

// Whether there are maps phi_t with onto_t = phi_t(from_{1:t}) on every node.
// Both trees must share the same node structure.
inline bool admits_adapted_map(const FilteredTree& from, const FilteredTree& onto) {
  if (from.size() != onto.size() || from.N() != onto.N()) {
    throw Error(ErrorCode::kConfigMismatch, "lifts must live on the same tree");
  }
  for (NodeIndex u = 0; u < from.size(); ++u) {
    if (from.node(u).parent != onto.node(u).parent || from.node(u).time != onto.node(u).time) {
      throw Error(ErrorCode::kConfigMismatch, "lifts must live on the same tree (node " + from.node(u).id + ")");
    }
  }
  for (int t = 1; t <= from.N(); ++t) {
    std::map<Path, Value> image;
    for (NodeIndex u : from.level(t)) {
      auto [it, inserted] = image.emplace(from.value_path(u), onto.node(u).value);
      if (!inserted && it->second != onto.node(u).value) return false;
    }
  }
  return true;
}

// Lift with time-t value (X_t, X_1..X_t, k_1..k_t) where k_s is the ip rank;
// unused prefix slots are zero so the dimension is constant.
inline FilteredTree markov_lift(const FilteredTree& tree) {
  InformationProcess ip = information_process(tree);
  std::vector<Rational> rank = detail::atom_ranks(tree, ip);
  const int d = tree.d();
  const int N = tree.N();
  const int lifted_d = d + d * N + N;
  return map_values(tree, lifted_d, [&](NodeIndex u) {
    Value v(static_cast<std::size_t>(lifted_d), Rational(0));
    const Node& n = tree.node(u);
    for (int i = 0; i < d; ++i) v[i] = n.value[i];
    for (NodeIndex w = u; w != kRoot; w = tree.node(w).parent) {
      const Node& a = tree.node(w);
      for (int i = 0; i < d; ++i) v[d + (a.time - 1) * d + i] = a.value[i];
      v[d + d * N + (a.time - 1)] = rank[w];
    }
    return v;
  });
}

namespace detail {

inline std::map<Value, Rational> one_step_kernel(const FilteredTree& tree, NodeIndex u) {
  std::map<Value, Rational> kernel;
  for (const Edge& e : tree.children(u)) kernel[tree.node(e.child).value] += e.prob;
  return kernel;
}

// Kernels keyed by time-t value, or nullopt if some value has two kernels.
inline std::optional<std::map<Value, std::map<Value, Rational>>> markov_kernels(const FilteredTree& tree, int t) {
  std::map<Value, std::map<Value, Rational>> kernels;
  for (NodeIndex u : tree.level(t)) {
    auto kernel = one_step_kernel(tree, u);
    auto [it, inserted] = kernels.emplace(tree.node(u).value, kernel);
    if (!inserted && it->second != kernel) return std::nullopt;
  }
  return kernels;
}

}  // namespace detail

// L(X_{t+1} | F_t) = L(X_{t+1} | X_t) for every t.
inline bool is_markov(const FilteredTree& tree) {
  for (int t = 1; t < tree.N(); ++t) {
    if (!detail::markov_kernels(tree, t)) return false;
  }
  return true;
}

// Metric on time-t states (1-based t).
using StateMetric = std::function<double(int, const Value&, const Value&)>;

inline StateMetric value_metric(const MetricConfig& config) {
  return [p = config.p](int, const Value& x, const Value& y) { return step_distance(x, y, p); };
}

struct LipschitzReport {
  bool lipschitz = true;
  double ratio = 0.0;  // max W_1(kernel(x), kernel(x')) / d_t(x, x')
};

// Checks W_1(K_t(x), K_t(x')) <= L d_t(x, x'), W_1 taken w.r.t. the time-(t+1) metric.
inline LipschitzReport is_lipschitz_markov(const FilteredTree& tree, double L, const StateMetric& metric) {
  LipschitzReport report;
  for (int t = 1; t < tree.N(); ++t) {
    auto kernels = detail::markov_kernels(tree, t);
    if (!kernels) throw Error(ErrorCode::kNotMarkov, "process is not Markov at time " + std::to_string(t));
    for (auto a = kernels->begin(); a != kernels->end(); ++a) {
      for (auto b = std::next(a); b != kernels->end(); ++b) {
        double gap = metric(t, a->first, b->first);
        std::vector<Rational> mu;
        std::vector<Rational> nu;
        std::vector<const Value*> xs;
        std::vector<const Value*> ys;
        for (const auto& [v, w] : a->second) {
          xs.push_back(&v);
          mu.push_back(w);
        }
        for (const auto& [v, w] : b->second) {
          ys.push_back(&v);
          nu.push_back(w);
        }
        CostMatrix cost(xs.size(), ys.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
          for (std::size_t j = 0; j < ys.size(); ++j) cost(i, j) = Cost::approximate(metric(t + 1, *xs[i], *ys[j]));
        }
        double w1 = ot_solve(mu, nu, cost).value.to_double();
        if (w1 <= 1e-15) continue;
        double ratio = gap > 0 ? w1 / gap : std::numeric_limits<double>::infinity();
        report.ratio = std::max(report.ratio, ratio);
      }
    }
  }
  report.lipschitz = report.ratio <= L * (1 + 1e-12);
  return report;
}

inline LipschitzReport is_lipschitz_markov(const FilteredTree& tree, double L) {
  return is_lipschitz_markov(tree, L, value_metric(tree.config()));
}

// Whether the label process `sub` (one label per node) generates a
// subfiltration that is self-contained: for every t the conditional law of
// the whole label path given F_t equals that given the label prefix.
inline bool self_contained_check(const FilteredTree& tree, const std::vector<std::string>& sub) {
  if (sub.size() != tree.size()) {
    throw Error(ErrorCode::kInvalidArgument, "label process must assign one label per node (" +
                                                 std::to_string(sub.size()) + " labels for " +
                                                 std::to_string(tree.size()) + " nodes)");
  }
  auto label_path = [&](NodeIndex u) {
    std::vector<std::string> path(static_cast<std::size_t>(tree.node(u).time));
    for (NodeIndex w = u; w != kRoot; w = tree.node(w).parent) path[static_cast<std::size_t>(tree.node(w).time - 1)] = sub[w];
    return path;
  };
  for (int t = 1; t <= tree.N(); ++t) {
    std::map<std::vector<std::string>, std::map<std::vector<std::string>, Rational>> by_prefix;
    for (NodeIndex u : tree.level(t)) {
      std::map<std::vector<std::string>, Rational> law;
      for (NodeIndex leaf : tree.leaves()) {
        if (tree.ancestor(leaf, t) == u) law[label_path(leaf)] += tree.mass(leaf) / tree.mass(u);
      }
      auto [it, inserted] = by_prefix.emplace(label_path(u), law);
      if (!inserted && it->second != law) return false;
    }
  }
  return true;
}

}  // namespace adt
