#include <gtest/gtest.h>

#include "adt/coupling_io.hpp"
#include "adt/couplings.hpp"
#include "adt/fixtures.hpp"

using namespace adt;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kMalformedDocument;
}

PathCoupling optimal(const FilteredTree& a, const FilteredTree& b) {
  AwResult aw = aw_distance(a, b);
  return assemble_optimal_coupling(aw.table, a, b);
}

// Pairs each leaf of X with the Y leaf of the same sign: optimal for W, not adapted.
PathCoupling anticipating(const Rational& eps) {
  FilteredTree x = fixtures::worked_x();
  FilteredTree y = fixtures::worked_y(eps);
  PathCoupling pi{x, y, {}};
  for (NodeIndex a : x.leaves()) {
    for (NodeIndex b : y.leaves()) {
      if (x.node(a).value == y.node(b).value) pi.support.push_back({a, b, Rational(1, 2)});
    }
  }
  return pi;
}

}  // namespace

TEST(Couplings, AssembledCouplingIsOptimalAndBicausal) {
  for (int p : {1, 2}) {
    for (const auto& [a, b] : fixtures::regression_pairs(Order{p})) {
      AwResult aw = aw_distance(a.tree, b.tree);
      PathCoupling pi = assemble_optimal_coupling(aw.table, a.tree, b.tree);
      EXPECT_NO_THROW(pi.validate());
      EXPECT_EQ(pi.cost(), aw.value) << a.name << " vs " << b.name;
      EXPECT_TRUE(check_bicausal(pi)) << a.name << " vs " << b.name;
    }
  }
}

TEST(Couplings, StaleTableIsRejected) {
  FilteredTree x = fixtures::worked_x();
  AwResult aw = aw_distance(x, fixtures::worked_y(Rational(1, 10)));
  EXPECT_EQ(code_of([&] { assemble_optimal_coupling(aw.table, x, fixtures::worked_y(Rational(1, 5))); }),
            ErrorCode::kStaleTable);
  EXPECT_EQ(code_of([&] { assemble_optimal_coupling(aw.table, fixtures::worked_x(Order{2}), x); }),
            ErrorCode::kStaleTable);
}

TEST(Couplings, AnticipatingCouplingIsCausalOneWayOnly) {
  PathCoupling pi = anticipating(Rational(1, 10));
  ASSERT_NO_THROW(pi.validate());
  EXPECT_EQ(pi.cost(), Cost(Rational(1, 10)));
  CausalityReport forward = check_causal(pi, Direction::kLeftToRight);
  EXPECT_FALSE(forward.causal);
  ASSERT_TRUE(forward.witness.has_value());
  EXPECT_EQ(forward.witness->time, 1);
  EXPECT_TRUE(check_causal(pi, Direction::kRightToLeft).causal);
  EXPECT_FALSE(check_bicausal(pi));
  EXPECT_EQ(code_of([&] { product_process(pi); }), ErrorCode::kNotBicausal);
}

TEST(Couplings, ProductCouplingIsBicausal) {
  for (const auto& [a, b] : fixtures::regression_pairs()) {
    PathCoupling pi = product_coupling(a.tree, b.tree);
    EXPECT_TRUE(check_bicausal(pi)) << a.name << " vs " << b.name;
    EXPECT_FALSE(pi.cost() < aw_distance(a.tree, b.tree).value);
  }
}

TEST(Couplings, ProductProcessProjectsToTheMarginals) {
  for (const auto& [a, b] : fixtures::regression_pairs()) {
    ProductTree pt = product_process(optimal(a.tree, b.tree));
    EXPECT_EQ(pt.tree.d(), 2 * a.tree.d());
    EXPECT_TRUE(hk_equivalent(pt.left_projection(), a.tree)) << a.name << " vs " << b.name;
    EXPECT_TRUE(hk_equivalent(pt.right_projection(), b.tree)) << a.name << " vs " << b.name;
    EXPECT_EQ(pt.expected_cost(), aw_distance(a.tree, b.tree).value);
  }
}

TEST(Couplings, GeodesicOfWorkedExample) {
  for (int n : {10, 100}) {
    Rational eps(1, n);
    FilteredTree x = fixtures::worked_x();
    FilteredTree y = fixtures::worked_y(eps);
    ProductTree pt = product_process(optimal(x, y));
    FilteredTree mid = geodesic(pt, Rational(1, 2));
    EXPECT_EQ(aw_distance(x, mid).value, Cost((1 + eps) / 2));
    EXPECT_EQ(aw_distance(mid, y).value, Cost((1 + eps) / 2));
    EXPECT_TRUE(hk_equivalent(geodesic(pt, 0), x));
    EXPECT_TRUE(hk_equivalent(geodesic(pt, 1), y));
  }
}

TEST(Couplings, GeodesicScalesSquaredCost) {
  FilteredTree x = fixtures::worked_x(Order{2});
  FilteredTree y = fixtures::worked_y(Rational(1, 10), Order{2});
  ProductTree pt = product_process(optimal(x, y));
  Rational total(201, 100);
  for (Rational lambda : {Rational(1, 4), Rational(1, 2), Rational(2, 3)}) {
    FilteredTree g = geodesic(pt, lambda);
    EXPECT_EQ(aw_distance(x, g).value, Cost(lambda * lambda * total));
    EXPECT_EQ(aw_distance(g, y).value, Cost((1 - lambda) * (1 - lambda) * total));
  }
  EXPECT_EQ(code_of([&] { geodesic(pt, Rational(3, 2)); }), ErrorCode::kInvalidArgument);
}

TEST(Extensions, BuildsIndependentGrid) {
  for (const auto& [name, tree] : fixtures::regression_trees()) {
    if (tree.N() > 2) continue;
    RandomizedExtension ext = extend_with_randomization(tree, std::vector<int>{2, 3});
    std::size_t expected = 0;
    for (NodeIndex u : tree.level(1)) expected += 2 + 2 * 3 * tree.children(u).size();
    EXPECT_EQ(ext.tree.size(), expected) << name;
    EXPECT_TRUE(check_extension_axioms(ext)) << name;
    EXPECT_TRUE(randomization_is_independent(ext)) << name;
    EXPECT_TRUE(hk_equivalent(ext.tree, tree)) << name;
    EXPECT_EQ(law_on_paths(ext.tree), law_on_paths(tree)) << name;
    FilteredTree lift = augmented_lift(ext);
    EXPECT_EQ(lift.d(), tree.d() + 2);
  }
}

TEST(Extensions, RejectsBadGridSizes) {
  FilteredTree x = fixtures::worked_x();
  EXPECT_EQ(code_of([&] { extend_with_randomization(x, 1); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { extend_with_randomization(x, std::vector<int>{2}); }), ErrorCode::kDimensionMismatch);
}

TEST(Transfer, MovesCouplingOntoExtension) {
  for (const auto& [a, b] : fixtures::regression_pairs()) {
    ProductTree pt = product_process(optimal(a.tree, b.tree));
    std::vector<int> grid = adequate_grid(pt);
    RandomizedExtension ext = extend_with_randomization(a.tree, grid);
    ProductTree moved = transfer(pt, ext);
    EXPECT_EQ(moved.expected_cost(), pt.expected_cost()) << a.name << " vs " << b.name;
    EXPECT_TRUE(hk_equivalent(moved.tree, pt.tree)) << a.name << " vs " << b.name;
    EXPECT_EQ(law_on_paths(moved.left_projection()), law_on_paths(ext.tree));
    EXPECT_TRUE(hk_equivalent(moved.right_projection(), b.tree)) << a.name << " vs " << b.name;
  }
}

TEST(Transfer, DiagonalCouplingNeedsNoRandomness) {
  FilteredTree x = fixtures::three_period();
  ProductTree pt = product_process(optimal(x, x));
  EXPECT_EQ(pt.expected_cost(), Cost(0));
  for (const Integer& k : transfer_resolution(pt)) EXPECT_EQ(k, 1);
  ProductTree moved = transfer(pt, extend_with_randomization(x, 2));
  for (NodeIndex u = 0; u < moved.tree.size(); ++u) {
    const Value& v = moved.tree.node(u).value;
    EXPECT_EQ(v[0], v[1]);
  }
}

TEST(Transfer, InsufficientResolutionAndWrongTarget) {
  bool found = false;
  for (const auto& [a, b] : fixtures::regression_pairs()) {
    ProductTree pt = product_process(product_coupling(a.tree, b.tree));
    std::vector<int> grid = adequate_grid(pt);
    std::vector<Integer> needed = transfer_resolution(pt);
    bool coarse = false;
    for (std::size_t t = 0; t < grid.size(); ++t) {
      if (needed[t] > 1) {
        grid[t] += 1;
        coarse = true;
        break;
      }
    }
    if (!coarse) continue;
    found = true;
    RandomizedExtension ext = extend_with_randomization(a.tree, grid);
    EXPECT_EQ(code_of([&] { transfer(pt, ext); }), ErrorCode::kInsufficientResolution) << a.name << " vs " << b.name;
  }
  EXPECT_TRUE(found);
  FilteredTree x = fixtures::worked_x();
  ProductTree pt = product_process(optimal(x, fixtures::worked_y(Rational(1, 10))));
  RandomizedExtension other = extend_with_randomization(fixtures::sign_revealing_lift(), 2);
  EXPECT_EQ(code_of([&] { transfer(pt, other); }), ErrorCode::kInvalidArgument);
}

TEST(CouplingIo, RoundTrip) {
  FilteredTree x = fixtures::three_period();
  FilteredTree y = fixtures::three_period_natural();
  PathCoupling pi = optimal(x, y);
  PathCoupling back = load_coupling(coupling_to_json(pi));
  EXPECT_EQ(back.cost(), pi.cost());
  EXPECT_TRUE(check_bicausal(back));
  EXPECT_EQ(coupling_to_json(load_coupling(coupling_to_json(back))).dump(), coupling_to_json(back).dump());
}

TEST(CouplingIo, RejectsBadDocuments) {
  PathCoupling pi = anticipating(Rational(1, 10));
  Json doc = coupling_to_json(pi);
  doc["support"][0]["weight"] = "1/3";
  EXPECT_EQ(code_of([&] { load_coupling(doc); }), ErrorCode::kInvalidArgument);
  doc = coupling_to_json(pi);
  doc["support"][0]["left"] = "nowhere";
  EXPECT_EQ(code_of([&] { load_coupling(doc); }), ErrorCode::kMalformedDocument);
  EXPECT_EQ(code_of([] { load_coupling_string("{\"left\": 1}"); }), ErrorCode::kMalformedDocument);
}
