#pragma once

// Couplings between filtered trees: assembly of optimal bicausal couplings
// from the nested recursion, causality checks, process couplings on the
// product basis, geodesics, randomized extensions and the transfer of a
// process coupling onto an extension.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "adt/canonical.hpp"
#include "adt/transport.hpp"

namespace adt {

struct CouplingEntry {
  NodeIndex left;   // leaf of the left tree
  NodeIndex right;  // leaf of the right tree
  Rational weight;

  friend bool operator==(const CouplingEntry&, const CouplingEntry&) = default;
};

// Joint law on (left leaf, right leaf) pairs.
struct PathCoupling {
  FilteredTree left;
  FilteredTree right;
  std::vector<CouplingEntry> support;

  // Marginals must equal the leaf measures exactly.
  void validate() const {
    std::map<NodeIndex, Rational> ml;
    std::map<NodeIndex, Rational> mr;
    for (const auto& e : support) {
      if (e.weight < 0) throw Error(ErrorCode::kInvalidArgument, "negative coupling weight");
      if (e.left >= left.size() || left.node(e.left).time != left.N() || e.right >= right.size() ||
          right.node(e.right).time != right.N()) {
        throw Error(ErrorCode::kInvalidArgument, "coupling support must consist of leaf pairs");
      }
      ml[e.left] += e.weight;
      mr[e.right] += e.weight;
    }
    for (NodeIndex leaf : left.leaves()) {
      if (ml[leaf] != left.mass(leaf)) {
        throw Error(ErrorCode::kInvalidArgument, "left marginal at leaf " + left.node(leaf).id + " is " +
                                                     to_string(ml[leaf]) + ", expected " + to_string(left.mass(leaf)));
      }
    }
    for (NodeIndex leaf : right.leaves()) {
      if (mr[leaf] != right.mass(leaf)) {
        throw Error(ErrorCode::kInvalidArgument, "right marginal at leaf " + right.node(leaf).id + " is " +
                                                     to_string(mr[leaf]) + ", expected " + to_string(right.mass(leaf)));
      }
    }
  }

  // E_pi[d(X, Y)^p].
  Cost cost() const {
    require_same_config(left.config(), right.config());
    Cost total = 0;
    for (const auto& e : support) {
      total += path_cost(left.value_path(e.left), right.value_path(e.right), left.config()) * e.weight;
    }
    return total;
  }
};

inline PathCoupling product_coupling(const FilteredTree& a, const FilteredTree& b) {
  PathCoupling pi{a, b, {}};
  for (NodeIndex x : a.leaves()) {
    for (NodeIndex y : b.leaves()) pi.support.push_back({x, y, a.mass(x) * b.mass(y)});
  }
  return pi;
}

// Composes the stage-optimal plans of `table` into a coupling of a and b.
// Within an atom, mass is split proportionally to the tree's own edge weights.
inline PathCoupling assemble_optimal_coupling(const NestedDistanceTable& table, const FilteredTree& a,
                                              const FilteredTree& b) {
  if (!(a.config() == table.config()) || !(b.config() == table.config()) || !table.atoms()) {
    throw Error(ErrorCode::kStaleTable, "table was computed for a different configuration");
  }
  InformationProcess ipa = information_process(a, table.atoms());
  InformationProcess ipb = information_process(b, table.atoms());
  if (ipa.form.law != table.left_form().law || ipb.form.law != table.right_form().law) {
    throw Error(ErrorCode::kStaleTable, "table was computed for different trees");
  }
  const DpSpace& L = table.left();
  const DpSpace& R = table.right();
  using Successors = std::vector<std::pair<std::size_t, Rational>>;

  // Position of each child in its parent state's successor list.
  auto position = [](const DpSpace& space, const Successors& succ, AtomId atom) {
    for (std::size_t k = 0; k < succ.size(); ++k) {
      if (space.states[succ[k].first].atom == atom) return k;
    }
    throw Error(ErrorCode::kStaleTable, "tree node has no matching state in the table");
  };

  PathCoupling pi{a, b, {}};
  std::function<void(NodeIndex, NodeIndex, const Successors&, const Successors&, const TransportPlan&, const Rational&)>
      walk = [&](NodeIndex u, NodeIndex v, const Successors& su, const Successors& sv, const TransportPlan& plan,
                 const Rational& mass) {
        std::vector<std::vector<NodeIndex>> by_k(su.size());
        std::vector<std::vector<NodeIndex>> by_l(sv.size());
        for (const Edge& e : a.children(u)) by_k[position(L, su, ipa.node_atom[e.child])].push_back(e.child);
        for (const Edge& e : b.children(v)) by_l[position(R, sv, ipb.node_atom[e.child])].push_back(e.child);
        for (const PlanEntry& pe : plan.support) {
          for (NodeIndex x : by_k[pe.row]) {
            Rational fx = edge_probability(a, x) / su[pe.row].second;
            for (NodeIndex y : by_l[pe.col]) {
              Rational fy = edge_probability(b, y) / sv[pe.col].second;
              Rational m = mass * pe.weight * fx * fy;
              std::size_t sx = su[pe.row].first;
              std::size_t sy = sv[pe.col].first;
              if (a.node(x).time == a.N()) {
                pi.support.push_back({x, y, m});
              } else {
                walk(x, y, L.states[sx].successors, R.states[sy].successors, table.entry(sx, sy).plan, m);
              }
            }
          }
        }
      };
  walk(kRoot, kRoot, L.initial, R.initial, table.top().plan, Rational(1));
  return pi;
}

enum class Direction { kLeftToRight, kRightToLeft };

struct CausalityWitness {
  int time = 0;
  std::string source_atom;  // level-t node of the conditioning process
  std::string source_leaf;  // leaf whose full history changes the law
  std::string target_atom;  // level-t node of the other process
};

struct CausalityReport {
  bool causal = true;
  std::optional<CausalityWitness> witness;
};

// Causality from the source to the target process: for every t and every
// level-t atom B of the target, P(B | source leaf) = P(B | source atom at t).
inline CausalityReport check_causal(const PathCoupling& pi, Direction direction) {
  const bool l2r = direction == Direction::kLeftToRight;
  const FilteredTree& source = l2r ? pi.left : pi.right;
  const FilteredTree& target = l2r ? pi.right : pi.left;
  for (int t = 1; t <= source.N(); ++t) {
    // joint[source leaf][target level-t node]
    std::map<NodeIndex, std::map<NodeIndex, Rational>> joint;
    std::map<NodeIndex, Rational> leaf_mass;
    for (const auto& e : pi.support) {
      if (e.weight == 0) continue;
      NodeIndex s = l2r ? e.left : e.right;
      NodeIndex g = l2r ? e.right : e.left;
      joint[s][target.ancestor(g, t)] += e.weight;
      leaf_mass[s] += e.weight;
    }
    std::map<NodeIndex, std::map<NodeIndex, Rational>> by_atom;
    std::map<NodeIndex, Rational> atom_mass;
    for (const auto& [s, row] : joint) {
      NodeIndex atom = source.ancestor(s, t);
      atom_mass[atom] += leaf_mass[s];
      for (const auto& [g, w] : row) by_atom[atom][g] += w;
    }
    for (const auto& [s, row] : joint) {
      NodeIndex atom = source.ancestor(s, t);
      for (NodeIndex g : target.level(t)) {
        auto it = row.find(g);
        Rational given_leaf = it == row.end() ? Rational(0) : it->second / leaf_mass[s];
        auto jt = by_atom[atom].find(g);
        Rational given_atom = jt == by_atom[atom].end() ? Rational(0) : jt->second / atom_mass[atom];
        if (given_leaf != given_atom) {
          return {false, CausalityWitness{t, source.node(atom).id, source.node(s).id, target.node(g).id}};
        }
      }
    }
  }
  return {true, std::nullopt};
}

inline bool check_bicausal(const PathCoupling& pi) {
  return check_causal(pi, Direction::kLeftToRight).causal && check_causal(pi, Direction::kRightToLeft).causal;
}

// The pair process (X_t, Y_t) on the product basis charged by a coupling.
struct ProductTree {
  FilteredTree tree;  // values (x_t, y_t) in R^{2d}
  MetricConfig base_config;

  int d() const { return base_config.d; }

  FilteredTree left_projection() const { return project(0); }
  FilteredTree right_projection() const { return project(1); }

  // E[d(X_t, Y_t)^p] over the product leaves.
  Cost expected_cost() const {
    Cost total = 0;
    for (NodeIndex leaf : tree.leaves()) {
      Path x;
      Path y;
      for (const Value& v : tree.value_path(leaf)) {
        x.emplace_back(v.begin(), v.begin() + d());
        y.emplace_back(v.begin() + d(), v.end());
      }
      total += path_cost(x, y, base_config) * tree.mass(leaf);
    }
    return total;
  }

 private:
  FilteredTree project(int side) const {
    FilteredTree p = map_values(tree, d(), [&](NodeIndex u) {
      const Value& v = tree.node(u).value;
      return Value(v.begin() + side * d(), v.begin() + (side + 1) * d());
    });
    return p.with_config(base_config);
  }
};

namespace detail {

inline std::string pair_label(const std::string& a, const std::string& b) {
  return std::to_string(a.size()) + ":" + a + "|" + b;
}

}  // namespace detail

inline ProductTree product_process(const PathCoupling& pi) {
  require_same_config(pi.left.config(), pi.right.config());
  pi.validate();
  if (!check_bicausal(pi)) throw Error(ErrorCode::kNotBicausal, "product_process requires a bicausal coupling");
  const FilteredTree& a = pi.left;
  const FilteredTree& b = pi.right;
  const int N = a.N();
  std::vector<std::map<std::pair<NodeIndex, NodeIndex>, Rational>> mass(static_cast<std::size_t>(N));
  for (const auto& e : pi.support) {
    if (e.weight == 0) continue;
    for (int t = 1; t <= N; ++t) mass[t - 1][{a.ancestor(e.left, t), b.ancestor(e.right, t)}] += e.weight;
  }
  MetricConfig config = a.config();
  config.d = 2 * a.d();
  TreeBuilder builder(config);
  std::map<std::pair<NodeIndex, NodeIndex>, NodeIndex> index;
  for (int t = 1; t <= N; ++t) {
    for (const auto& [key, m] : mass[t - 1]) {
      const Node& x = a.node(key.first);
      const Node& y = b.node(key.second);
      Value value = x.value;
      value.insert(value.end(), y.value.begin(), y.value.end());
      NodeIndex parent = kRoot;
      Rational prob = m;
      if (t > 1) {
        std::pair<NodeIndex, NodeIndex> pk{x.parent, y.parent};
        parent = index.at(pk);
        prob = m / mass[t - 2].at(pk);
      }
      std::string id = detail::pair_label(x.id, y.id);
      index[key] = builder.add(parent, std::move(value), prob, id, id);
    }
  }
  return ProductTree{std::move(builder).build(), a.config()};
}

// X^lambda with values (1 - lambda) x_t + lambda y_t on the product basis.
inline FilteredTree geodesic(const ProductTree& pi_tree, const Rational& lambda) {
  if (lambda < 0 || lambda > 1) throw Error(ErrorCode::kInvalidArgument, "lambda must lie in [0, 1]");
  if (pi_tree.base_config.p.weak()) throw Error(ErrorCode::kInvalidArgument, "geodesics require p >= 1");
  const int d = pi_tree.d();
  FilteredTree g = map_values(pi_tree.tree, d, [&](NodeIndex u) {
    const Value& v = pi_tree.tree.node(u).value;
    Value out(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) out[i] = (1 - lambda) * v[i] + lambda * v[d + i];
    return out;
  });
  return g.with_config(pi_tree.base_config);
}

// ---------------------------------------------------------------------------
// Randomized extensions.

// The base tree times a uniform grid of m_t points at every step t, product
// filtration.
struct RandomizedExtension {
  FilteredTree base;
  std::vector<int> m;                // grid size per step
  FilteredTree tree;                 // embedded process: base values on extension atoms
  std::vector<NodeIndex> base_node;  // base node under each extension node
  std::vector<int> grid;             // grid coordinate U_t of each extension node

  int grid_size(int t) const { return m.at(static_cast<std::size_t>(t - 1)); }
};

inline RandomizedExtension extend_with_randomization(const FilteredTree& base, std::vector<int> m) {
  if (m.size() != static_cast<std::size_t>(base.N())) {
    throw Error(ErrorCode::kDimensionMismatch, "need one grid size per step, got " + std::to_string(m.size()) +
                                                   " for N = " + std::to_string(base.N()));
  }
  for (int k : m) {
    if (k < 2) throw Error(ErrorCode::kInvalidArgument, "randomization needs m >= 2 atoms per step");
  }
  RandomizedExtension ext;
  ext.base = base;
  ext.m = std::move(m);
  TreeBuilder builder(base.config());
  std::function<void(NodeIndex, NodeIndex, const std::string&)> grow = [&](NodeIndex base_parent, NodeIndex ext_parent,
                                                                           const std::string& grid_path) {
    for (const Edge& e : base.children(base_parent)) {
      const Node& n = base.node(e.child);
      const int size = ext.grid_size(n.time);
      for (int g = 0; g < size; ++g) {
        std::string path = grid_path.empty() ? std::to_string(g) : grid_path + "." + std::to_string(g);
        NodeIndex x =
            builder.add(ext_parent, n.value, e.prob / size, n.info + "#" + std::to_string(g), n.id + "@" + path);
        ext.base_node.push_back(e.child);
        ext.grid.push_back(g);
        if (n.time < base.N()) grow(e.child, x, path);
      }
    }
  };
  grow(kRoot, kRoot, "");
  ext.tree = std::move(builder).build();
  return ext;
}

inline RandomizedExtension extend_with_randomization(const FilteredTree& base, int m) {
  return extend_with_randomization(base, std::vector<int>(static_cast<std::size_t>(base.N()), m));
}

// Uniform grid process with values g_t in {0, ..., m_t - 1} (natural filtration).
inline FilteredTree grid_tree(const std::vector<int>& m, const Order& p) {
  const int N = static_cast<int>(m.size());
  TreeBuilder builder(MetricConfig{N, 1, p});
  std::function<void(NodeIndex, int)> grow = [&](NodeIndex parent, int t) {
    for (int g = 0; g < m[t - 1]; ++g) {
      NodeIndex x = builder.add(parent, Value{Rational(g)}, Rational(1, m[t - 1]));
      if (t < N) grow(x, t + 1);
    }
  };
  grow(kRoot, 1);
  return std::move(builder).build();
}

// Marginal preservation Q(F x Xi) = P(F) and causality of Q from the base to the grid factor.
inline bool check_extension_axioms(const RandomizedExtension& ext) {
  const FilteredTree& base = ext.base;
  std::map<NodeIndex, Rational> base_marginal;
  for (NodeIndex leaf : ext.tree.leaves()) base_marginal[ext.base_node[leaf]] += ext.tree.mass(leaf);
  for (NodeIndex leaf : base.leaves()) {
    if (base_marginal[leaf] != base.mass(leaf)) return false;
  }
  FilteredTree grid = grid_tree(ext.m, base.config().p);
  std::map<std::vector<int>, NodeIndex> grid_leaf;
  for (NodeIndex leaf : grid.leaves()) {
    std::vector<int> path;
    for (const Value& v : grid.value_path(leaf)) path.push_back(v[0].convert_to<int>());
    grid_leaf[path] = leaf;
  }
  PathCoupling q{base, grid, {}};
  for (NodeIndex leaf : ext.tree.leaves()) {
    std::vector<int> path(static_cast<std::size_t>(base.N()));
    for (NodeIndex u = leaf; u != kRoot; u = ext.tree.node(u).parent) path[ext.tree.node(u).time - 1] = ext.grid[u];
    q.support.push_back({ext.base_node[leaf], grid_leaf.at(path), ext.tree.mass(leaf)});
  }
  q.validate();
  return check_causal(q, Direction::kLeftToRight).causal;
}

// The lift (X_t, ip rank_t, U_t) on the extension.
inline FilteredTree augmented_lift(const RandomizedExtension& ext) {
  InformationProcess ip = information_process(ext.base);
  std::vector<Rational> rank = detail::atom_ranks(ext.base, ip);
  return map_values(ext.tree, ext.base.d() + 2, [&](NodeIndex u) {
    Value v = ext.tree.node(u).value;
    v.push_back(rank[ext.base_node[u]]);
    v.push_back(Rational(ext.grid[u]));
    return v;
  });
}

// U_t is independent of (self-aware lift, F_{t-1}): at every extension atom of
// time t-1 the joint conditional law of (U_t, lifted future path) factorizes.
inline bool randomization_is_independent(const RandomizedExtension& ext) {
  InformationProcess ip = information_process(ext.base);
  std::vector<Rational> rank = detail::atom_ranks(ext.base, ip);
  FilteredTree lifted = map_values(ext.tree, ext.base.d() + 1, [&](NodeIndex u) {
    Value v = ext.tree.node(u).value;
    v.push_back(rank[ext.base_node[u]]);
    return v;
  });
  auto check = [&](NodeIndex e) {
    std::map<std::pair<Path, int>, Rational> joint;
    std::map<Path, Rational> paths;
    std::map<int, Rational> grids;
    for (const Edge& c : ext.tree.children(e)) {
      auto below = detail::future_law(lifted, c.child);
      for (const auto& [suffix, w] : below) {
        Path path{lifted.node(c.child).value};
        path.insert(path.end(), suffix.begin(), suffix.end());
        joint[{path, ext.grid[c.child]}] += c.prob * w;
        paths[path] += c.prob * w;
        grids[ext.grid[c.child]] += c.prob * w;
      }
    }
    for (const auto& [path, wp] : paths) {
      for (const auto& [g, wg] : grids) {
        auto it = joint.find({path, g});
        Rational w = it == joint.end() ? Rational(0) : it->second;
        if (w != wp * wg) return false;
      }
    }
    return true;
  };
  if (!check(kRoot)) return false;
  for (NodeIndex e = 0; e < ext.tree.size(); ++e) {
    if (ext.tree.node(e).time < ext.tree.N() && !check(e)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Transfer of a process coupling onto a randomized extension.

namespace detail {

class TransferPlanner {
 public:
  TransferPlanner(const ProductTree& pi_tree, std::shared_ptr<AtomSpace> space)
      : space_(std::move(space)), d_(pi_tree.d()) {
    pair_ip_ = information_process(pi_tree.tree, space_);
  }

  const InformationProcess& pair_ip() const { return pair_ip_; }

  // X-part of a pair atom: (x value, pushforward of the successor law).
  AtomId x_part(AtomId zeta) {
    auto it = x_part_.find(zeta);
    if (it != x_part_.end()) return it->second;
    const NestedAtom& a = space_->atom(zeta);
    Value x(a.value.begin(), a.value.begin() + d_);
    AtomLaw law;
    for (const auto& [s, w] : a.successors) law.emplace_back(x_part(s), w);
    AtomId out = space_->intern(a.time, std::move(x), std::move(law));
    x_part_.emplace(zeta, out);
    return out;
  }

  // Successor atoms of `law` whose X-part is `alpha`, in canonical order, with
  // their conditional weights given alpha.
  AtomLaw candidates(const AtomLaw& law, AtomId alpha) {
    AtomLaw out;
    Rational total = 0;
    for (const auto& [z, w] : space_->ordered(law)) {
      if (x_part(z) == alpha) {
        out.emplace_back(z, w);
        total += w;
      }
    }
    for (auto& entry : out) entry.second /= total;
    return out;
  }

  // Least grid size per step realizing every conditional law exactly.
  std::vector<Integer> resolution() {
    std::vector<Integer> m;
    std::set<const AtomLaw*> done;
    std::function<void(const AtomLaw&)> visit = [&](const AtomLaw& law) {
      if (!done.insert(&law).second) return;
      const auto t = static_cast<std::size_t>(space_->atom(law.front().first).time);
      if (m.size() < t) m.resize(t, Integer(1));
      std::set<AtomId> seen;
      for (const auto& [z, w] : law) {
        AtomId alpha = x_part(z);
        if (!seen.insert(alpha).second) continue;
        for (const auto& [c, r] : candidates(law, alpha)) m[t - 1] = lcm(m[t - 1], denominator_of(r));
      }
      for (const auto& [z, w] : law) {
        if (!space_->atom(z).successors.empty()) visit(space_->atom(z).successors);
      }
    };
    visit(pair_ip_.form.law);
    return m;
  }

 private:
  std::shared_ptr<AtomSpace> space_;
  int d_;
  InformationProcess pair_ip_;
  std::map<AtomId, AtomId> x_part_;
};

}  // namespace detail

// Least grid size per step for which transfer() can realize the coupling.
inline std::vector<Integer> transfer_resolution(const ProductTree& pi_tree) {
  detail::TransferPlanner planner(pi_tree, std::make_shared<AtomSpace>());
  return planner.resolution();
}

// The same sizes as ints, each at least 2.
inline std::vector<int> adequate_grid(const ProductTree& pi_tree) {
  std::vector<int> out;
  for (const Integer& k : transfer_resolution(pi_tree)) out.push_back(std::max(2, k.convert_to<int>()));
  return out;
}

// Builds (X~, Y~) on the extension of X~: every extension atom is assigned a
// pair atom by conditional-quantile realization of the pair law on the grid
// coordinate. The result has values (x~_t, y~_t) and the extension's atoms.
inline ProductTree transfer(const ProductTree& pi_tree, const RandomizedExtension& target) {
  if (!(pi_tree.base_config == target.base.config())) {
    require_same_config(pi_tree.base_config, target.base.config());
  }
  auto space = std::make_shared<AtomSpace>();
  detail::TransferPlanner planner(pi_tree, space);
  InformationProcess target_ip = information_process(target.tree, space);
  InformationProcess left_ip = information_process(pi_tree.left_projection(), space);
  if (target_ip.form.law != left_ip.form.law) {
    throw Error(ErrorCode::kInvalidArgument, "target process is not HK-equivalent to the coupling's left marginal");
  }
  std::vector<Integer> needed = planner.resolution();
  for (int t = 1; t <= target.base.N(); ++t) {
    if (Integer(target.grid_size(t)) % needed[t - 1] != 0) {
      throw Error(ErrorCode::kInsufficientResolution,
                  "grid of m = " + std::to_string(target.grid_size(t)) + " atoms at step " + std::to_string(t) +
                      " cannot realize the coupling; m must be a multiple of " + needed[t - 1].str());
    }
  }
  const FilteredTree& ext = target.tree;
  MetricConfig config = ext.config();
  config.d = 2 * ext.d();
  TreeBuilder builder(config);
  std::vector<AtomId> assigned(ext.size());
  for (NodeIndex e = 0; e < ext.size(); ++e) {
    const Node& n = ext.node(e);
    const AtomLaw& law = n.parent == kRoot ? planner.pair_ip().form.law : space->atom(assigned[n.parent]).successors;
    AtomLaw cands = planner.candidates(law, target_ip.node_atom[e]);
    Rational u = Rational(target.grid[e], target.grid_size(n.time));
    Rational lo = 0;
    AtomId chosen = cands.back().first;
    for (const auto& [z, r] : cands) {
      if (u < lo + r) {
        chosen = z;
        break;
      }
      lo += r;
    }
    assigned[e] = chosen;
    const Value& pair_value = space->atom(chosen).value;
    // The label keeps siblings distinct in both projections.
    builder.add(n.parent, pair_value, edge_probability(ext, e), detail::pair_label(n.info, to_string(n.value)), n.id);
  }
  return ProductTree{std::move(builder).build(), pi_tree.base_config};
}

}  // namespace adt
