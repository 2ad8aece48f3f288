// Command-line front end for the adapted-transport library.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adt/adt.hpp"

namespace fs = std::filesystem;
using namespace adt;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240611;

struct Globals {
  std::string p;
  bool weak = false;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  bool emit_plan = false;
  bool emit_table = false;
};

std::optional<int> env_decimals() {
  const char* text = std::getenv("ADT_VALUE_DECIMALS");
  if (text == nullptr || *text == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    int d = std::stoi(text, &used);
    if (used != std::string(text).size() || d < 0) throw std::invalid_argument(text);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, std::string("ADT_VALUE_DECIMALS must be a nonnegative integer, got '") +
                                                 text + "'");
  }
}

int print_digits() { return env_decimals().value_or(kDefaultValueDecimals); }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMalformedDocument, "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

class Session {
 public:
  explicit Session(const Globals& g) : g_(g) {}

  std::optional<Order> order_override() const {
    if (g_.weak) return Order{0};
    if (!g_.p.empty()) return parse_order(g_.p);
    return std::nullopt;
  }

  FilteredTree load(const std::string& path) const {
    FilteredTree tree = load_tree_string(read_file(path), env_decimals());
    if (auto p = order_override()) {
      MetricConfig config = tree.config();
      config.p = *p;
      tree = tree.with_config(config);
    }
    return tree;
  }

  const Globals& globals() const { return g_; }

  // Writes `name` under --out when given.
  void write(const std::string& name, const std::string& content) const {
    if (g_.out.empty()) return;
    fs::create_directories(g_.out);
    fs::path path = fs::path(g_.out) / name;
    std::ofstream file(path);
    if (!file) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
    file << content;
    std::cout << "wrote " << path.string() << "\n";
  }

  void write_json(const std::string& name, const Json& doc) const { write(name, doc.dump(2) + "\n"); }

 private:
  Globals g_;
};

std::string order_label(const Order& p) { return p.weak() ? "0" : to_string(p.value); }

// "1.1 (exact: 11/10)" or "1.41421356237 (approximate)".
std::string show(const Rational& q) { return to_decimal_string(q, print_digits()) + " (exact: " + to_string(q) + ")"; }

std::string show(double x) {
  std::ostringstream os;
  os.precision(print_digits());
  os << x << " (approximate)";
  return os.str();
}

std::string show(const Cost& c) { return c.exact() ? show(c.rational()) : show(c.to_double()); }

Json number_json(const Rational& q) {
  return Json{{"exact", true}, {"rational", to_string(q)}, {"decimal", to_decimal_string(q, print_digits())}};
}

Json number_json(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return Json{{"exact", false}, {"decimal", os.str()}};
}

Json number_json(const Cost& c) { return c.exact() ? number_json(c.rational()) : number_json(c.to_double()); }

// c^(1/p), exact when the root is rational.
Cost distance_of(const Cost& c, const Order& p) {
  if (p.weak() || !c.exact()) return p.weak() ? c : Cost::approximate(cost_root(c, p));
  if (p.integral()) {
    if (auto r = exact_root(c.rational(), p.integer())) return *r;
  }
  return Cost::approximate(cost_root(c, p));
}

Json plan_json(const TransportPlan& plan) {
  Json out = Json::array();
  for (const auto& e : plan.support) out.push_back(Json{{"row", e.row}, {"col", e.col}, {"weight", to_string(e.weight)}});
  return out;
}

Json table_json(const NestedDistanceTable& table) {
  const AtomSpace& space = *table.atoms();
  auto label = [&](const DpSpace& s, std::size_t i) { return space.label(s.states[i].atom); };
  Json entries = Json::array();
  for (const auto& [key, entry] : table.entries()) {
    entries.push_back(Json{{"time", table.left().states[key.first].time},
                           {"left", label(table.left(), key.first)},
                           {"right", label(table.right(), key.second)},
                           {"value", number_json(entry.value)}});
  }
  return Json{{"config", config_to_json(table.config())}, {"top", number_json(table.top().value)}, {"entries", entries}};
}

// ---------------------------------------------------------------------------

int cmd_validate(const Session& s, const std::string& path) {
  FilteredTree t = s.load(path);
  std::cout << "valid tree: N=" << t.N() << " d=" << t.d() << " p=" << order_label(t.config().p) << " nodes=" << t.size()
            << " leaves=" << t.leaves().size() << "\n";
  s.write_json("validate.json", Json{{"valid", true},
                                     {"config", config_to_json(t.config())},
                                     {"nodes", t.size()},
                                     {"leaves", t.leaves().size()}});
  return 0;
}

int cmd_distance(const Session& s, const std::string& a_path, const std::string& b_path) {
  FilteredTree a = s.load(a_path);
  FilteredTree b = s.load(b_path);
  require_same_config(a.config(), b.config());
  const Order& p = a.config().p;
  AwResult aw = aw_distance(a, b);
  Cost w = wasserstein_paths(a, b);
  std::string P = order_label(p);
  Cost aw_d = distance_of(aw.value, p);
  Cost w_d = distance_of(w, p);
  std::cout << "AW_" << P << "^" << P << " = " << show(aw.value) << "\n";
  std::cout << "AW_" << P << " = " << show(aw_d) << "\n";
  std::cout << "W_" << P << "^" << P << " = " << show(w) << "\n";
  std::cout << "W_" << P << " = " << show(w_d) << "\n";
  Json doc{{"config", config_to_json(a.config())},
           {"aw_power", number_json(aw.value)},
           {"aw", number_json(aw_d)},
           {"w_power", number_json(w)},
           {"w", number_json(w_d)}};
  if (s.globals().emit_plan) {
    doc["plan"] = plan_json(aw.table.top().plan);
    std::cout << "top-level plan:";
    for (const auto& e : aw.table.top().plan.support) std::cout << " (" << e.row << "," << e.col << "," << e.weight << ")";
    std::cout << "\n";
  }
  if (s.globals().emit_table) s.write_json("table.json", table_json(aw.table));
  s.write_json("distance.json", doc);
  return 0;
}

int cmd_wasserstein(const Session& s, const std::string& a_path, const std::string& b_path) {
  FilteredTree a = s.load(a_path);
  FilteredTree b = s.load(b_path);
  require_same_config(a.config(), b.config());
  const Order& p = a.config().p;
  Cost w = wasserstein_paths(a, b);
  std::string P = order_label(p);
  std::cout << "W_" << P << "^" << P << " = " << show(w) << "\n";
  std::cout << "W_" << P << " = " << show(distance_of(w, p)) << "\n";
  s.write_json("wasserstein.json", Json{{"w_power", number_json(w)}, {"w", number_json(distance_of(w, p))}});
  return 0;
}

int cmd_canonicalize(const Session& s, const std::string& path) {
  FilteredTree t = s.load(path);
  InformationProcess ip = information_process(t);
  FilteredTree canon = canonical_tree(ip.form);
  std::string digest = ip.form.digest();
  std::cout << "digest: " << digest << "\n";
  std::cout << "nodes: " << t.size() << " -> " << canon.size() << "\n";
  Json doc = tree_to_json(canon);
  doc["digest"] = digest;
  s.write_json("canonical.json", doc);
  return 0;
}

int cmd_equivalent(const Session& s, const std::string& a_path, const std::string& b_path) {
  FilteredTree a = s.load(a_path);
  FilteredTree b = s.load(b_path);
  require_same_config(a.config(), b.config());
  std::string da = information_process(a).form.digest();
  std::string db = information_process(b).form.digest();
  bool eq = da == db;
  std::cout << "equivalent: " << (eq ? "yes" : "no") << "\n" << "digest a: " << da << "\n" << "digest b: " << db << "\n";
  s.write_json("equivalent.json", Json{{"equivalent", eq}, {"digest_a", da}, {"digest_b", db}});
  return 0;
}

int cmd_lift(const Session& s, const std::string& path, const std::string& kind) {
  FilteredTree t = s.load(path);
  FilteredTree lifted = kind == "markov" ? markov_lift(t) : self_aware_lift(t);
  std::cout << "input: self-aware=" << (is_self_aware(t) ? "yes" : "no") << " markov=" << (is_markov(t) ? "yes" : "no")
            << "\n";
  std::cout << kind << " lift: d=" << lifted.d() << " self-aware=" << (is_self_aware(lifted) ? "yes" : "no")
            << " markov=" << (is_markov(lifted) ? "yes" : "no") << "\n";
  if (kind == "self-aware") {
    LipschitzReport r = is_lipschitz_markov(lifted, 1.0, information_lift_metric(lifted));
    std::cout << "1-Lipschitz Markov under the nested metric: " << (r.lipschitz ? "yes" : "no")
              << " (max ratio " << r.ratio << ")\n";
  }
  s.write_json("lift.json", tree_to_json(lifted));
  return 0;
}

void print_witness(const char* label, const CausalityReport& r) {
  std::cout << label << ": " << (r.causal ? "yes" : "no");
  if (r.witness) {
    std::cout << " (witness: t=" << r.witness->time << ", atom " << r.witness->source_atom << ", leaf "
              << r.witness->source_leaf << ", target atom " << r.witness->target_atom << ")";
  }
  std::cout << "\n";
}

struct Assembled {
  FilteredTree a;
  FilteredTree b;
  AwResult aw;
  PathCoupling pi;
};

Assembled assemble(const Session& s, const std::string& a_path, const std::string& b_path) {
  FilteredTree a = s.load(a_path);
  FilteredTree b = s.load(b_path);
  require_same_config(a.config(), b.config());
  AwResult aw = aw_distance(a, b);
  PathCoupling pi = assemble_optimal_coupling(aw.table, a, b);
  return {std::move(a), std::move(b), std::move(aw), std::move(pi)};
}

int emit_geodesic(const Session& s, const Assembled& x, const std::string& lambda_text) {
  Rational lambda = parse_rational(lambda_text);
  ProductTree product = product_process(x.pi);
  FilteredTree g = geodesic(product, lambda);
  Cost to_a = aw_distance(x.a, g).value;
  Cost to_b = aw_distance(g, x.b).value;
  const Order& p = x.a.config().p;
  std::cout << "lambda = " << show(lambda) << "\n";
  std::cout << "AW(X, X^lambda) = " << show(distance_of(to_a, p)) << "\n";
  std::cout << "AW(X^lambda, Y) = " << show(distance_of(to_b, p)) << "\n";
  std::cout << "AW(X, Y) = " << show(distance_of(x.aw.value, p)) << "\n";
  s.write_json("geodesic.json", tree_to_json(g));
  return 0;
}

int cmd_coupling(const Session& s, const std::vector<std::string>& files, bool check, bool do_assemble,
                 const std::string& geodesic_lambda, bool do_transfer, int m) {
  int modes = int(check) + int(do_assemble) + int(!geodesic_lambda.empty()) + int(do_transfer);
  if (modes != 1) throw Error(ErrorCode::kInvalidArgument, "choose exactly one of --check, --assemble, --geodesic, --transfer");
  if (check) {
    if (files.size() != 1) throw Error(ErrorCode::kInvalidArgument, "--check takes one coupling document");
    PathCoupling pi = load_coupling_string(read_file(files[0]), env_decimals());
    if (auto p = s.order_override()) {
      MetricConfig c = pi.left.config();
      c.p = *p;
      pi.left = pi.left.with_config(c);
      pi.right = pi.right.with_config(c);
    }
    CausalityReport l2r = check_causal(pi, Direction::kLeftToRight);
    CausalityReport r2l = check_causal(pi, Direction::kRightToLeft);
    print_witness("causal left->right", l2r);
    print_witness("causal right->left", r2l);
    std::cout << "bicausal: " << (l2r.causal && r2l.causal ? "yes" : "no") << "\n";
    std::cout << "cost = " << show(pi.cost()) << "\n";
    s.write_json("check.json", Json{{"causal_left_to_right", l2r.causal},
                                    {"causal_right_to_left", r2l.causal},
                                    {"cost", number_json(pi.cost())}});
    return 0;
  }
  if (files.size() != 2) throw Error(ErrorCode::kInvalidArgument, "expected two tree documents");
  Assembled x = assemble(s, files[0], files[1]);
  if (do_assemble) {
    std::cout << "support size: " << x.pi.support.size() << "\n";
    std::cout << "cost = " << show(x.pi.cost()) << "\n";
    std::cout << "AW^p = " << show(x.aw.value) << "\n";
    std::cout << "bicausal: " << (check_bicausal(x.pi) ? "yes" : "no") << "\n";
    s.write_json("coupling.json", coupling_to_json(x.pi));
    return 0;
  }
  if (!geodesic_lambda.empty()) return emit_geodesic(s, x, geodesic_lambda);
  ProductTree product = product_process(x.pi);
  std::vector<int> needed = adequate_grid(product);
  std::vector<int> grid = m > 0 ? std::vector<int>(needed.size(), m) : needed;
  RandomizedExtension ext = extend_with_randomization(x.a, grid);
  ProductTree moved = transfer(product, ext);
  bool same = information_process(moved.tree).form == information_process(product.tree).form;
  auto join = [](const std::vector<int>& v) {
    std::string out;
    for (int k : v) out += (out.empty() ? "" : ",") + std::to_string(k);
    return out;
  };
  std::cout << "grid sizes per step: " << join(grid) << " (least admissible " << join(needed) << ")\n";
  std::cout << "canonical form preserved: " << (same ? "yes" : "no") << "\n";
  std::cout << "E[d^p] before = " << show(product.expected_cost()) << "\n";
  std::cout << "E[d^p] after = " << show(moved.expected_cost()) << "\n";
  s.write_json("transfer.json", tree_to_json(moved.tree));
  return 0;
}

int cmd_quantile(const Session& s, const std::string& path) {
  FilteredTree t = s.load(path);
  QuantileMap q = quantile_map(t);
  std::ostringstream csv;
  csv << "box";
  for (int k = 1; k <= t.N(); ++k) csv << ",lo" << k << ",hi" << k;
  for (int k = 1; k <= t.N(); ++k) {
    for (int i = 1; i <= t.d(); ++i) csv << ",x" << k << (t.d() > 1 ? "_" + std::to_string(i) : "");
  }
  csv << ",measure\n";
  Json boxes = Json::array();
  std::size_t row = 0;
  for (std::size_t leaf : q.partition.leaves()) {
    std::vector<std::size_t> chain;
    for (std::size_t b = leaf; b != kNoParent; b = q.partition.boxes[b].parent) chain.insert(chain.begin(), b);
    csv << row;
    Json intervals = Json::array();
    for (std::size_t b : chain) {
      csv << "," << q.partition.boxes[b].lo << "," << q.partition.boxes[b].hi;
      intervals.push_back(Json::array({to_string(q.partition.boxes[b].lo), to_string(q.partition.boxes[b].hi)}));
    }
    Json values = Json::array();
    for (const Value& v : q.path(leaf)) {
      Json comp = Json::array();
      for (const Rational& c : v) {
        csv << "," << value_component_string(c);
        comp.push_back(value_component_string(c));
      }
      values.push_back(comp);
    }
    Rational measure = q.partition.measure(leaf);
    csv << "," << measure << "\n";
    boxes.push_back(Json{{"intervals", intervals}, {"values", values}, {"measure", to_string(measure)}});
    ++row;
  }
  Json breakpoints = Json::array();
  for (int k = 1; k <= t.N(); ++k) {
    Json list = Json::array();
    for (const Rational& r : q.partition.breakpoints(k)) list.push_back(to_string(r));
    breakpoints.push_back(list);
  }
  std::cout << csv.str();
  s.write("quantile.csv", csv.str());
  s.write_json("quantile.json", Json{{"config", config_to_json(t.config())}, {"breakpoints", breakpoints}, {"boxes", boxes}});
  return 0;
}

std::vector<FilteredTree> builtin_family(const std::string& family, int count, const Order& p) {
  std::vector<FilteredTree> out;
  for (int n = 1; n <= count; ++n) {
    if (family == "perturbed") {
      out.push_back(fixtures::perturbed_x(n, p));
    } else if (family == "epsilon") {
      out.push_back(fixtures::worked_y(Rational(1, n), p));
    } else if (family == "constant") {
      out.push_back(fixtures::worked_x(p));
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown family '" + family + "' (perturbed, epsilon, constant)");
    }
  }
  return out;
}

std::pair<std::vector<FilteredTree>, FilteredTree> load_sequence(const Session& s, const std::vector<std::string>& files,
                                                                 const std::string& limit_path,
                                                                 const std::string& family, int count) {
  if (!family.empty()) {
    Order p = s.order_override().value_or(Order{1});
    return {builtin_family(family, count, p), fixtures::worked_x(p)};
  }
  if (limit_path.empty() || files.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "give --limit and sequence documents, or --family");
  }
  std::vector<FilteredTree> seq;
  for (const auto& f : files) seq.push_back(s.load(f));
  return {std::move(seq), s.load(limit_path)};
}

int cmd_convergence(const Session& s, const std::vector<std::string>& files, const std::string& limit_path,
                    const std::string& family, int count) {
  auto [seq, limit] = load_sequence(s, files, limit_path, family, count);
  ConvergenceReport r = convergence_report(seq, limit);
  std::ostringstream csv;
  csv.precision(17);
  csv << "n,aw,aw_exact,lp,lp_exact,grid_max\n";
  for (const auto& row : r.rows) {
    csv << row.n << "," << row.aw_distance << "," << (row.aw.exact() ? to_string(row.aw.rational()) : "") << ","
        << row.lp_distance << "," << (row.lp.exact() ? to_string(row.lp.rational()) : "") << "," << row.grid_max << "\n";
  }
  std::cout << csv.str();
  std::cout << "# aw convergent: " << (r.aw_convergent ? "yes" : "no") << "\n";
  std::cout << "# lp convergent: " << (r.lp_convergent ? "yes" : "no") << "\n";
  std::cout << "# grid convergent: " << (r.grid_convergent ? "yes" : "no") << "\n";
  std::cout << "# consistent: " << (r.consistent() ? "yes" : "no") << "\n";
  s.write("convergence.csv", csv.str());
  return 0;
}

int cmd_stop(const Session& s, const std::string& path, const std::string& payoff_text, double lipschitz,
             const std::string& compare) {
  FilteredTree t = s.load(path);
  PayoffSpec payoff = PayoffSpec::parse(payoff_text, lipschitz);
  StoppingResult r = optimal_stopping(t, payoff);
  std::cout << "value = " << show(r.value) << "\n";
  std::cout << "node,time,payoff,snell,decision\n";
  Json nodes = Json::array();
  for (NodeIndex u = 0; u < t.size(); ++u) {
    const Node& n = t.node(u);
    std::cout << n.id << "," << n.time << "," << r.payoff[u] << "," << r.snell[u] << "," << (r.stop[u] ? "stop" : "continue")
              << "\n";
    nodes.push_back(Json{{"id", n.id},
                         {"payoff", to_string(r.payoff[u])},
                         {"snell", to_string(r.snell[u])},
                         {"stop", static_cast<bool>(r.stop[u])}});
  }
  Json doc{{"value", number_json(r.value)}, {"nodes", nodes}};
  if (!compare.empty()) {
    FilteredTree other = s.load(compare);
    StoppingStability st = stopping_stability_report(t, other, payoff, s.globals().seed);
    std::cout << "|v(a) - v(b)| = " << show(st.gap) << "\n";
    std::cout << "L * AW_1(a, b) = " << show(st.bound) << "\n";
    std::cout << "stability bound holds: " << (st.holds ? "yes" : "no") << "\n";
    std::cout << "Lipschitz spot check: " << st.lipschitz.violations << " violations in " << st.lipschitz.samples
              << " samples\n";
    doc["stability"] = Json{{"gap", number_json(st.gap)},
                            {"bound", number_json(st.bound)},
                            {"holds", st.holds},
                            {"lipschitz_violations", st.lipschitz.violations}};
    if (!st.holds) {
      std::cerr << "error: stability bound violated for a payoff declared " << lipschitz << "-Lipschitz\n";
      s.write_json("stop.json", doc);
      return st.lipschitz.violations > 0 ? static_cast<int>(ErrorCode::kInvalidArgument) : 1;
    }
  }
  s.write_json("stop.json", doc);
  return 0;
}

int cmd_doob(const Session& s, const std::string& path) {
  FilteredTree t = s.load(path);
  DoobDecomposition dec = doob(t);
  std::ostringstream csv;
  csv << "node,time";
  for (const char* col : {"x", "M", "A"}) {
    for (int i = 1; i <= t.d(); ++i) csv << "," << col << (t.d() > 1 ? "_" + std::to_string(i) : "");
  }
  csv << "\n";
  for (NodeIndex u = 0; u < t.size(); ++u) {
    const Node& n = t.node(u);
    csv << n.id << "," << n.time;
    for (const Value* v : std::initializer_list<const Value*>{&n.value, &dec.martingale[u], &dec.predictable[u]}) {
      for (const Rational& c : *v) csv << "," << c;
    }
    csv << "\n";
  }
  std::cout << csv.str();
  s.write("doob.csv", csv.str());
  return 0;
}

int cmd_fixture(const Session& s, const std::string& name, const std::string& eps_text, int n, int k, int N, int d) {
  Order p = s.order_override().value_or(Order{1});
  if (name == "non-coexistence") {
    int grid = k > 0 ? k : aligned_grid(n);
    NonCoexistenceFixture fx = non_coexistence_fixture(n, grid, p);
    std::cout << "n = " << n << ", k = " << grid << ", grid aligned: " << (fx.grid_aligned ? "yes" : "no") << "\n";
    std::cout << "segment [" << fx.segment_start << ", " << fx.segment_end << ") length " << fx.segment_length << "\n";
    std::cout << "W^p = " << show(fx.w) << "\n";
    std::cout << "optimal plan diagonal: " << (fx.diagonal_plan ? "yes" : "no") << "\n";
    std::cout << "cheapest one-cell perturbation = " << show(fx.min_perturbed) << "\n";
    s.write_json("mu_n.json", tree_to_json(fx.mu_n));
    s.write_json("mu.json", tree_to_json(fx.mu));
    return 0;
  }
  FilteredTree t = [&]() -> FilteredTree {
    if (name == "x") return fixtures::worked_x(p);
    if (name == "y") return fixtures::worked_y(parse_rational(eps_text), p);
    if (name == "sign-lift") return fixtures::sign_revealing_lift(p);
    if (name == "redundant-lift") return fixtures::redundant_lift(p);
    if (name == "perturbed") return fixtures::perturbed_x(n, p);
    if (name == "three-period") return fixtures::three_period(p);
    if (name == "random") {
      SplitRng rng(s.globals().seed);
      return fixtures::random_tree(rng, N, d, p);
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown fixture '" + name +
                                                 "' (x, y, sign-lift, redundant-lift, perturbed, three-period, random, "
                                                 "non-coexistence)");
  }();
  std::string doc = tree_to_json(t).dump(2) + "\n";
  if (s.globals().out.empty()) {
    std::cout << doc;
  } else {
    s.write(name + ".json", doc);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adapted Wasserstein distances between finite filtered processes"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--p", g.p, "order p >= 1 (overrides the documents); 0 selects the weak metric");
  app.add_flag("--weak", g.weak, "weak (truncated L^1) metric");
  app.add_option("--seed", g.seed, "seed for sampling");
  app.add_option("--out", g.out, "directory for JSON/CSV artifacts");
  app.add_flag("--emit-plan", g.emit_plan, "print the top-level optimal plan");
  app.add_flag("--emit-table", g.emit_table, "write the nested distance table (needs --out)");
  app.fallthrough();

  std::string a;
  std::string b;
  auto* validate = app.add_subcommand("validate", "validate a tree document");
  validate->add_option("tree", a)->required()->check(CLI::ExistingFile);

  auto* distance = app.add_subcommand("distance", "adapted and plain Wasserstein distances");
  distance->add_option("a", a)->required()->check(CLI::ExistingFile);
  distance->add_option("b", b)->required()->check(CLI::ExistingFile);

  auto* wasserstein = app.add_subcommand("wasserstein", "plain Wasserstein distance between path laws");
  wasserstein->add_option("a", a)->required()->check(CLI::ExistingFile);
  wasserstein->add_option("b", b)->required()->check(CLI::ExistingFile);

  auto* canonicalize = app.add_subcommand("canonicalize", "canonical tree and digest");
  canonicalize->add_option("tree", a)->required()->check(CLI::ExistingFile);

  auto* equivalent = app.add_subcommand("equivalent", "Hoover-Keisler equivalence test");
  equivalent->add_option("a", a)->required()->check(CLI::ExistingFile);
  equivalent->add_option("b", b)->required()->check(CLI::ExistingFile);

  std::string lift_kind = "self-aware";
  auto* lift = app.add_subcommand("lift", "self-aware or Markov lift");
  lift->add_option("tree", a)->required()->check(CLI::ExistingFile);
  lift->add_option("--kind", lift_kind, "self-aware or markov")->check(CLI::IsMember({"self-aware", "markov"}));

  std::vector<std::string> files;
  bool check = false;
  bool do_assemble = false;
  bool do_transfer = false;
  std::string lambda;
  int m = 0;
  auto* coupling = app.add_subcommand("coupling", "assemble, check, interpolate or transfer couplings");
  coupling->add_option("files", files, "two trees, or one coupling document with --check")->check(CLI::ExistingFile);
  coupling->add_flag("--check", check, "check causality of a coupling document");
  coupling->add_flag("--assemble", do_assemble, "assemble an optimal bicausal coupling");
  coupling->add_option("--geodesic", lambda, "point of the geodesic at lambda in [0,1]");
  coupling->add_flag("--transfer", do_transfer, "transfer the optimal process coupling onto a randomized extension");
  coupling->add_option("--m", m, "grid size at every step of the extension (default: least admissible per step)");

  std::string geo_lambda = "1/2";
  auto* geo = app.add_subcommand("geodesic", "point of the AW geodesic between two trees");
  geo->add_option("a", a)->required()->check(CLI::ExistingFile);
  geo->add_option("b", b)->required()->check(CLI::ExistingFile);
  geo->add_option("--lambda", geo_lambda, "interpolation parameter in [0,1]");

  auto* quantile = app.add_subcommand("quantile", "quantile box partition");
  quantile->add_option("tree", a)->required()->check(CLI::ExistingFile);

  std::string limit;
  std::string family;
  int count = 32;
  auto* convergence = app.add_subcommand("convergence", "AW, L^p and grid distances along a sequence");
  convergence->add_option("sequence", files)->check(CLI::ExistingFile);
  convergence->add_option("--limit", limit)->check(CLI::ExistingFile);
  convergence->add_option("--family", family, "built-in family: perturbed, epsilon, constant");
  convergence->add_option("--count", count, "length of the built-in family")->check(CLI::PositiveNumber);

  std::string payoff;
  double lipschitz = 1.0;
  std::string compare;
  auto* stop = app.add_subcommand("stop", "optimal stopping by backward induction");
  stop->add_option("tree", a)->required()->check(CLI::ExistingFile);
  stop->add_option("--payoff", payoff, "payoff expression, or one per time separated by ';'")->required();
  stop->add_option("--lipschitz", lipschitz, "declared Lipschitz constant");
  stop->add_option("--compare", compare, "second tree for the stability report")->check(CLI::ExistingFile);

  auto* doob_cmd = app.add_subcommand("doob", "Doob decomposition per node (CSV)");
  doob_cmd->add_option("tree", a)->required()->check(CLI::ExistingFile);

  std::string fixture_name;
  std::string eps = "1/10";
  int fn = 2;
  int fk = 0;
  int fN = 2;
  int fd = 1;
  auto* fixture = app.add_subcommand("fixture", "emit an example tree");
  fixture->add_option("name", fixture_name)->required();
  fixture->add_option("--eps", eps, "epsilon for y");
  fixture->add_option("--n", fn, "index for perturbed and non-coexistence")->check(CLI::PositiveNumber);
  fixture->add_option("--k", fk, "grid size for non-coexistence (default: least aligned)");
  fixture->add_option("--N", fN, "horizon for random")->check(CLI::Range(1, 3));
  fixture->add_option("--d", fd, "dimension for random")->check(CLI::Range(1, 3));

  CLI11_PARSE(app, argc, argv);

  try {
    Session s(g);
    if (validate->parsed()) return cmd_validate(s, a);
    if (distance->parsed()) return cmd_distance(s, a, b);
    if (wasserstein->parsed()) return cmd_wasserstein(s, a, b);
    if (canonicalize->parsed()) return cmd_canonicalize(s, a);
    if (equivalent->parsed()) return cmd_equivalent(s, a, b);
    if (lift->parsed()) return cmd_lift(s, a, lift_kind);
    if (coupling->parsed()) return cmd_coupling(s, files, check, do_assemble, lambda, do_transfer, m);
    if (geo->parsed()) {
      Assembled x = assemble(s, a, b);
      return emit_geodesic(s, x, geo_lambda);
    }
    if (quantile->parsed()) return cmd_quantile(s, a);
    if (convergence->parsed()) return cmd_convergence(s, files, limit, family, count);
    if (stop->parsed()) return cmd_stop(s, a, payoff, lipschitz, compare);
    if (doob_cmd->parsed()) return cmd_doob(s, a);
    if (fixture->parsed()) return cmd_fixture(s, fixture_name, eps, fn, fk, fN, fd);
  } catch (const Error& e) {
    std::cerr << "error [" << error_name(e.code()) << "]: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
