// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "adt/adt.hpp"

using namespace adt;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void require(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failure_.empty()) failure_ = what;
  }
  Outcome outcome(const std::string& summary) const {
    if (failure_.empty()) return {true, summary + " (" + std::to_string(checks_) + " checks)"};
    return {false, failure_};
  }

 private:
  std::size_t checks_ = 0;
  std::string failure_;
};

std::vector<std::pair<FilteredTree, FilteredTree>> random_pairs(std::uint64_t seed, std::size_t count, const Order& p) {
  SplitRng rng(seed);
  std::vector<std::pair<FilteredTree, FilteredTree>> out;
  for (std::size_t k = 0; k < count; ++k) {
    int N = 1 + static_cast<int>(rng.below(3));
    FilteredTree a = fixtures::random_tree(rng, N, 1, p);
    FilteredTree b = fixtures::random_tree(rng, N, 1, p);
    out.emplace_back(std::move(a), std::move(b));
  }
  return out;
}

std::string str(const Cost& c) { return c.str(); }

// 1. aw_distance equals the minimum over sampled compositional bicausal couplings.
Outcome isometry_oracle() {
  Check check;
  for (const Order& p : {Order{1}, Order{2}}) {
    auto pairs = random_pairs(1000 + p.integer(), 200, p);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto& [a, b] = pairs[k];
      Cost aw = aw_distance(a, b).value;
      std::vector<Cost> sampled = random_bicausal_cost(a, b, 7 * k + 1, 500);
      Cost best = sampled[0];
      for (const Cost& c : sampled) best = min(best, c);
      std::string where = "p=" + to_string(p.value) + " pair " + std::to_string(k);
      check.require(best.exact() && aw.exact(), where + ": inexact cost");
      check.require(best == aw, where + ": min sampled " + str(best) + " != AW " + str(aw));
      for (const Cost& c : sampled) check.require(!(c < aw), where + ": sampled coupling " + str(c) + " < AW");
      if (p.integer() == 2) {
        check.require(std::fabs(cost_root(best, p) - cost_root(aw, p)) <= 1e-9, where + ": root mismatch");
      }
    }
  }
  return check.outcome("400 pairs x 500 couplings, p in {1, 2}");
}

// 2. Worked example.
Outcome worked_example() {
  Check check;
  for (const Rational& eps : {Rational(1, 10), Rational(1, 100)}) {
    FilteredTree x = fixtures::worked_x();
    FilteredTree y = fixtures::worked_y(eps);
    Cost w = wasserstein_paths(x, y);
    Cost aw = aw_distance(x, y).value;
    check.require(w == Cost(eps), "W_1 = " + str(w) + " for eps " + to_string(eps));
    check.require(aw == Cost(1 + eps), "AW_1 = " + str(aw) + " for eps " + to_string(eps));
    std::vector<Cost> sampled = random_bicausal_cost(x, y, 3, 200);
    Cost best = sampled[0];
    for (const Cost& c : sampled) best = min(best, c);
    check.require(best == aw, "oracle minimum " + str(best));
  }
  return check.outcome("W_1 = eps, AW_1 = 1 + eps for eps in {1/10, 1/100}");
}

// 3. hk_equivalent <=> AW = 0 on the regression pairs.
Outcome equivalence_theorem() {
  Check check;
  for (const auto& [a, b] : fixtures::regression_pairs()) {
    bool hk = hk_equivalent(a.tree, b.tree);
    bool zero = aw_distance(a.tree, b.tree).value.is_zero();
    check.require(hk == zero, a.name + " vs " + b.name + ": hk " + std::to_string(hk) + ", AW zero " + std::to_string(zero));
  }
  FilteredTree x = fixtures::worked_x();
  check.require(hk_equivalent(x, fixtures::redundant_lift()), "redundant lift does not collapse");
  check.require(aw_distance(x, fixtures::redundant_lift()).value.is_zero(), "redundant lift at positive distance");
  check.require(!hk_equivalent(x, fixtures::sign_revealing_lift()), "sign-revealing lift collapses");
  check.require(aw_distance(x, fixtures::sign_revealing_lift()).value == Cost(1), "sign-revealing lift AW_1 != 1");
  check.require(hk_equivalent(fixtures::three_period(), fixtures::three_period_natural()) ==
                    aw_distance(fixtures::three_period(), fixtures::three_period_natural()).value.is_zero(),
                "three-period pair");
  return check.outcome(std::to_string(fixtures::regression_pairs().size()) + " regression pairs");
}

// 4. Triangle inequality and symmetry.
Outcome metric_axioms() {
  Check check;
  for (const Order& p : {Order{1}, Order{2}}) {
    SplitRng rng(4000 + p.integer());
    for (int k = 0; k < 200; ++k) {
      int N = 1 + static_cast<int>(rng.below(3));
      FilteredTree a = fixtures::random_tree(rng, N, 1, p);
      FilteredTree b = fixtures::random_tree(rng, N, 1, p);
      FilteredTree c = fixtures::random_tree(rng, N, 1, p);
      Cost ab = aw_distance(a, b).value;
      Cost ba = aw_distance(b, a).value;
      Cost bc = aw_distance(b, c).value;
      Cost ac = aw_distance(a, c).value;
      std::string where = "p=" + to_string(p.value) + " triple " + std::to_string(k);
      check.require(ab == ba, where + ": asymmetric " + str(ab) + " vs " + str(ba));
      double lhs = cost_root(ac, p);
      double rhs = cost_root(ab, p) + cost_root(bc, p);
      check.require(lhs <= rhs + 1e-9, where + ": triangle violated " + std::to_string(lhs) + " > " + std::to_string(rhs));
    }
  }
  return check.outcome("200 triples for p in {1, 2}");
}

// 5. Assembled coupling is bicausal and attains AW.
Outcome attainment() {
  Check check;
  for (const Order& p : {Order{1}, Order{2}}) {
    for (const auto& [a, b] : fixtures::regression_pairs(p)) {
      AwResult aw = aw_distance(a.tree, b.tree);
      PathCoupling pi = assemble_optimal_coupling(aw.table, a.tree, b.tree);
      pi.validate();
      std::string where = a.name + " vs " + b.name + " p=" + to_string(p.value);
      check.require(check_bicausal(pi), where + ": not bicausal");
      check.require(pi.cost() == aw.value, where + ": cost " + str(pi.cost()) + " != " + str(aw.value));
    }
  }
  return check.outcome("regression pairs, p in {1, 2}");
}

// 6. Geodesics scale linearly.
Outcome geodesics() {
  Check check;
  const std::vector<Rational> grid{0, Rational(1, 4), Rational(1, 2), Rational(3, 4), 1};
  for (const Order& p : {Order{1}, Order{2}}) {
    SplitRng rng(6000 + p.integer());
    for (int k = 0; k < 50; ++k) {
      int N = 1 + static_cast<int>(rng.below(3));
      FilteredTree a = fixtures::random_tree(rng, N, 1, p);
      FilteredTree b = fixtures::random_tree(rng, N, 1, p);
      AwResult aw = aw_distance(a, b);
      ProductTree product = product_process(assemble_optimal_coupling(aw.table, a, b));
      std::vector<FilteredTree> points;
      for (const Rational& l : grid) points.push_back(geodesic(product, l));
      std::string where = "p=" + to_string(p.value) + " pair " + std::to_string(k);
      check.require(hk_equivalent(points.front(), a), where + ": X^0 not equivalent to X");
      check.require(hk_equivalent(points.back(), b), where + ": X^1 not equivalent to Y");
      double full = aw.distance();
      for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
          double got = aw_distance(points[i], points[j]).distance();
          double want = to_double(grid[j] - grid[i]) * full;
          check.require(std::fabs(got - want) <= 1e-9, where + ": AW(X^" + to_string(grid[i]) + ", X^" +
                                                            to_string(grid[j]) + ") = " + std::to_string(got) +
                                                            ", expected " + std::to_string(want));
        }
      }
    }
  }
  return check.outcome("50 product trees for p in {1, 2}, lambda grid of 5");
}

// 7. Quantile pushforward and HK-equivalence of the induced process.
Outcome skorokhod_pushforward() {
  Check check;
  for (const auto& t : fixtures::regression_trees()) {
    QuantileMap q = quantile_map(t.tree);
    std::map<Path, Rational> canonical;
    DiscreteMeasure<Path> law = law_on_paths(canonical_tree(t.tree));
    for (std::size_t i = 0; i < law.size(); ++i) canonical[law.atoms[i]] = law.weights[i];
    check.require(q.pushforward() == canonical, t.name + ": pushforward differs from canonical path law");
    check.require(hk_equivalent(q.induced_process(), t.tree), t.name + ": induced process not equivalent");
  }
  return check.outcome(std::to_string(fixtures::regression_trees().size()) + " regression trees");
}

// 8. Convergent and non-convergent families.
Outcome skorokhod_convergence() {
  Check check;
  FilteredTree x = fixtures::worked_x();
  std::vector<FilteredTree> good;
  std::vector<FilteredTree> bad;
  for (int n = 1; n <= 32; ++n) {
    good.push_back(fixtures::perturbed_x(n));
    bad.push_back(fixtures::worked_y(Rational(1, n)));
  }
  ConvergenceReport g = convergence_report(good, x);
  for (std::size_t i = 1; i < g.rows.size(); ++i) {
    check.require(g.rows[i].aw < g.rows[i - 1].aw, "AW column not decreasing at n=" + std::to_string(i + 1));
    check.require(g.rows[i].lp < g.rows[i - 1].lp, "L^p column not decreasing at n=" + std::to_string(i + 1));
  }
  check.require(g.rows.back().aw <= Cost(Rational(1, 32)), "final AW " + str(g.rows.back().aw) + " > 1/32");
  check.require(g.rows.back().lp <= Cost(Rational(1, 32)), "final L^p " + str(g.rows.back().lp) + " > 1/32");
  check.require(g.aw_convergent && g.lp_convergent && g.consistent(), "convergent family not flagged convergent");
  ConvergenceReport b = convergence_report(bad, x);
  for (const auto& row : b.rows) check.require(row.aw >= Cost(1), "AW_1 below 1 at n=" + std::to_string(row.n));
  check.require(!b.aw_convergent && !b.lp_convergent, "non-convergent family flagged convergent");
  return check.outcome("n = 1..32, final AW_1 = " + str(g.rows.back().aw) + ", L^1 = " + str(g.rows.back().lp));
}

// 9. Stopping stability.
Outcome stopping_stability() {
  Check check;
  PayoffSpec x = PayoffSpec::parse("x");
  check.require(optimal_stopping(fixtures::worked_x(), x).value == 0, "v(X) != 0");
  for (const Rational& eps : {Rational(1, 10), Rational(1, 100)}) {
    Rational v = optimal_stopping(fixtures::worked_y(eps), x).value;
    check.require(v == (1 - eps) / 2, "v(Y_eps) = " + to_string(v));
  }
  check.require(optimal_stopping(fixtures::sign_revealing_lift(), x).value == Rational(1, 2), "v(lift) != 1/2");
  const std::vector<std::string> scalar{"x", "-x", "abs(x)", "max(x, 0)", "min(x, 1/2) + 1", "max(x1, x)"};
  const std::vector<std::string> planar{"x_1 + x_2", "max(x_1, x_2)", "abs(x_1) - x1_2"};
  std::size_t tested = 0;
  for (const auto& [a, b] : fixtures::regression_pairs()) {
    const auto& list = a.tree.d() == 1 ? scalar : planar;
    for (const std::string& text : list) {
      PayoffSpec payoff = PayoffSpec::parse(text, 1.0);
      StoppingStability s = stopping_stability_report(a.tree, b.tree, payoff, 99);
      check.require(s.lipschitz.violations == 0, "payoff '" + text + "' fails the Lipschitz spot check");
      check.require(s.holds, a.name + " vs " + b.name + " payoff '" + text + "': gap " + to_string(s.gap) +
                                 " > L*AW " + std::to_string(s.bound));
      ++tested;
    }
  }
  return check.outcome(std::to_string(tested) + " (pair, payoff) combinations");
}

// 10. Randomized extensions preserve canonical forms.
Outcome extension_invariance() {
  Check check;
  for (const auto& t : fixtures::regression_trees()) {
    for (int m : {2, 3}) {
      RandomizedExtension ext = extend_with_randomization(t.tree, m);
      std::string where = t.name + " m=" + std::to_string(m);
      check.require(information_process(ext.tree).form == information_process(t.tree).form,
                    where + ": canonical form changed");
      check.require(is_self_aware(augmented_lift(ext)), where + ": augmented lift not self-aware");
      check.require(check_extension_axioms(ext), where + ": extension axioms fail");
      check.require(randomization_is_independent(ext), where + ": randomization not independent");
    }
  }
  return check.outcome("regression trees, m in {2, 3}");
}

// 11. Transfer principle.
Outcome transfer_principle() {
  Check check;
  for (const auto& [a, b] : fixtures::regression_pairs()) {
    AwResult aw = aw_distance(a.tree, b.tree);
    ProductTree product = product_process(assemble_optimal_coupling(aw.table, a.tree, b.tree));
    std::vector<int> m = adequate_grid(product);
    ProductTree moved = transfer(product, extend_with_randomization(a.tree, m));
    std::string grid;
    for (int k : m) grid += (grid.empty() ? "" : "x") + std::to_string(k);
    std::string where = a.name + " vs " + b.name + " m=" + grid;
    check.require(information_process(moved.tree).form == information_process(product.tree).form,
                  where + ": canonical form differs");
    check.require(moved.expected_cost() == product.expected_cost(), where + ": E[d^p] differs");
    check.require(moved.expected_cost() == aw.value, where + ": E[d^p] != AW^p");
  }
  return check.outcome(std::to_string(fixtures::regression_pairs().size()) + " regression pairs");
}

// 12. Non-coexistence fixture.
Outcome non_coexistence() {
  Check check;
  std::string ks;
  for (int n = 2; n <= 10; ++n) {
    int k = aligned_grid(n);
    NonCoexistenceFixture fx = non_coexistence_fixture(n, k);
    std::string where = "n=" + std::to_string(n) + " k=" + std::to_string(k);
    check.require(fx.grid_aligned, where + ": segment not grid aligned");
    check.require(fx.w == Cost(Rational(1, n)), where + ": W_1 = " + str(fx.w));
    check.require(fx.diagonal_plan, where + ": optimal plan not diagonal");
    check.require(fx.min_perturbed > Cost(Rational(1, n)), where + ": perturbed plan not more expensive");
    ks += (ks.empty() ? "" : ",") + std::to_string(k);
  }
  return check.outcome("n = 2..10, k = " + ks);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"isometry and oracle agreement", isometry_oracle},
      {"worked example", worked_example},
      {"equivalence theorem", equivalence_theorem},
      {"metric axioms", metric_axioms},
      {"attainment and representation", attainment},
      {"geodesics", geodesics},
      {"Skorokhod pushforward", skorokhod_pushforward},
      {"Skorokhod convergence", skorokhod_convergence},
      {"stopping stability", stopping_stability},
      {"extension invariance", extension_invariance},
      {"transfer", transfer_principle},
      {"non-coexistence fixture", non_coexistence},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream line;
    line.precision(2);
    line << std::fixed << (o.pass ? "PASS" : "FAIL") << " [" << (i + 1) << "] " << criteria[i].first << ": " << o.detail
         << " (" << secs << "s)";
    std::cout << line.str() << std::endl;
    if (!o.pass) ++failures;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
