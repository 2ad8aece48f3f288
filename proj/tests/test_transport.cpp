#include <gtest/gtest.h>

#include "adt/fixtures.hpp"
#include "adt/transport.hpp"

using namespace adt;

namespace {

// Additive nested recursion on the raw trees, p integral.
Rational naive_nested(const FilteredTree& a, const FilteredTree& b, NodeIndex u, NodeIndex v) {
  Rational here = 0;
  if (u != kRoot) here = step_cost(a.node(u).value, b.node(v).value, a.config().p).rational();
  const auto& cu = a.children(u);
  if (u != kRoot && cu.empty()) return here;
  const auto& cv = b.children(v);
  std::vector<Rational> mu;
  std::vector<Rational> nu;
  for (const Edge& e : cu) mu.push_back(e.prob);
  for (const Edge& e : cv) nu.push_back(e.prob);
  CostMatrix cost(cu.size(), cv.size());
  for (std::size_t i = 0; i < cu.size(); ++i) {
    for (std::size_t j = 0; j < cv.size(); ++j) cost(i, j) = naive_nested(a, b, cu[i].child, cv[j].child);
  }
  return here + ot_solve(mu, nu, cost).value.rational();
}

Rational aw_value(const FilteredTree& a, const FilteredTree& b) { return aw_distance(a, b).value.rational(); }

}  // namespace

TEST(Transport, WorkedExample) {
  FilteredTree x = fixtures::worked_x();
  FilteredTree y = fixtures::worked_y(Rational(1, 10));
  EXPECT_EQ(wasserstein_paths(x, y), Cost(Rational(1, 10)));
  EXPECT_EQ(aw_distance(x, y).value, Cost(Rational(11, 10)));
  EXPECT_DOUBLE_EQ(aw_distance(x, y).distance(), 1.1);
}

TEST(Transport, WorkedExampleSquared) {
  FilteredTree x = fixtures::worked_x(Order{2});
  FilteredTree y = fixtures::worked_y(Rational(1, 10), Order{2});
  EXPECT_EQ(wasserstein_paths(x, y), Cost(Rational(1, 100)));
  EXPECT_EQ(aw_distance(x, y).value, Cost(Rational(201, 100)));
}

TEST(Transport, AdaptedGapDoesNotCloseAsEpsilonShrinks) {
  FilteredTree x = fixtures::worked_x();
  for (int n : {1, 10, 1000}) {
    FilteredTree y = fixtures::worked_y(Rational(1, n));
    EXPECT_EQ(aw_value(x, y), 1 + Rational(1, n));
    EXPECT_EQ(wasserstein_paths(x, y), Cost(Rational(1, n)));
  }
  EXPECT_EQ(aw_value(x, fixtures::sign_revealing_lift()), 1);
  EXPECT_EQ(aw_value(x, fixtures::redundant_lift()), 0);
}

TEST(Transport, MatchesNaiveRecursionOnRawTrees) {
  for (int p : {1, 2}) {
    for (const auto& [a, b] : fixtures::regression_pairs(Order{p})) {
      EXPECT_EQ(aw_value(a.tree, b.tree), naive_nested(a.tree, b.tree, kRoot, kRoot)) << a.name << " vs " << b.name;
    }
  }
}

TEST(Transport, TreeRecursionAndCompositionsAgree) {
  for (const auto& [a, b] : fixtures::regression_pairs()) {
    Cost aw = aw_distance(a.tree, b.tree).value;
    EXPECT_EQ(bicausal_dp_on_trees(a.tree, b.tree).top().value, aw) << a.name << " vs " << b.name;
    auto samples = random_bicausal_cost(a.tree, b.tree, 3, 20);
    EXPECT_EQ(samples[0], aw);
    for (const Cost& c : samples) EXPECT_FALSE(c < aw);
  }
}

TEST(Transport, MetricProperties) {
  auto trees = fixtures::regression_trees();
  std::vector<const FilteredTree*> scalar2;
  for (const auto& t : trees) {
    if (t.tree.N() == 2 && t.tree.d() == 1) scalar2.push_back(&t.tree);
  }
  for (const FilteredTree* a : scalar2) {
    EXPECT_EQ(aw_value(*a, *a), 0);
    for (const FilteredTree* b : scalar2) {
      Rational ab = aw_value(*a, *b);
      EXPECT_EQ(ab, aw_value(*b, *a));
      EXPECT_FALSE(ab < wasserstein_paths(*a, *b).rational());
      EXPECT_EQ(ab == 0, hk_equivalent(*a, *b));
      for (const FilteredTree* c : scalar2) EXPECT_LE(ab, aw_value(*a, *c) + aw_value(*c, *b));
    }
  }
}

TEST(Transport, WeakModeTruncatesPathCosts) {
  FilteredTree x = fixtures::worked_x(Order{0});
  FilteredTree y = fixtures::worked_y(Rational(1, 10), Order{0});
  // Half the mass pairs opposite signs at time 2 (cost capped at 1), the rest pays 1/10.
  EXPECT_EQ(aw_distance(x, y).value, Cost(Rational(11, 20)));
  EXPECT_EQ(wasserstein_paths(x, y), Cost(Rational(1, 10)));
  for (const auto& [a, b] : fixtures::regression_pairs(Order{0})) {
    Cost aw = aw_distance(a.tree, b.tree).value;
    EXPECT_EQ(bicausal_dp_on_trees(a.tree, b.tree).top().value, aw) << a.name << " vs " << b.name;
    EXPECT_FALSE(Cost(1) < aw);
  }
}

TEST(Transport, FractionalOrderIsApproximate) {
  FilteredTree x = fixtures::worked_x(Order{Rational(3, 2)});
  FilteredTree y = fixtures::worked_y(Rational(1, 10), Order{Rational(3, 2)});
  AwResult r = aw_distance(x, y);
  EXPECT_FALSE(r.value.exact());
  // One coupling: pair Y_1 = -eps with X_2 = -1 (cost eps^p), the other half pays eps^p + 2^p.
  double expected = std::pow(0.1, 1.5) + 0.5 * std::pow(2.0, 1.5);
  EXPECT_NEAR(r.value.to_double(), expected, 1e-12);
}

TEST(Transport, ConfigMismatchIsReported) {
  try {
    aw_distance(fixtures::worked_x(), fixtures::worked_x(Order{2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigMismatch);
  }
}
