#pragma once

// Exact discrete optimal transport by the transportation simplex.
//
// Flows are exact rationals: every basic solution of the transportation
// polytope is determined by the marginals alone. Costs are exact rationals
// (scaled to 64-bit integers when they fit) or doubles for non-integer
// orders. Pricing follows Bland's rule in row-major cell order, which
// rules out cycling and makes the returned plan deterministic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "adt/cost.hpp"
#include "adt/error.hpp"
#include "adt/rational.hpp"

namespace adt {

class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), entries_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Cost& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  const Cost& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  bool exact() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const Cost& c) { return c.exact(); });
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Cost> entries_;
};

struct PlanEntry {
  std::size_t row;
  std::size_t col;
  Rational weight;

  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

// Support of a coupling, sorted row-major, strictly positive weights.
struct TransportPlan {
  std::vector<PlanEntry> support;

  friend bool operator==(const TransportPlan&, const TransportPlan&) = default;
};

struct OtResult {
  Cost value;
  TransportPlan plan;
  // Optimal dual potentials: cost(i, j) >= row[i] + col[j], equality on the support.
  std::vector<Cost> row_potential;
  std::vector<Cost> col_potential;
};

namespace detail {

struct BasicCell {
  std::size_t row;
  std::size_t col;
  Rational flow;
};

// Numeric policy for potentials/reduced costs.
struct IntPolicy {
  using T = std::int64_t;
  static bool negative(T x, T) { return x < 0; }
};
struct RationalPolicy {
  using T = Rational;
  static bool negative(const T& x, const T&) { return x < 0; }
};
struct DoublePolicy {
  using T = double;
  static bool negative(T x, T tol) { return x < -tol; }
};

template <class Policy>
class TransportationSimplex {
  using T = typename Policy::T;

 public:
  TransportationSimplex(std::span<const Rational> supply, std::span<const Rational> demand, std::vector<T> cost,
                        T tol)
      : m_(supply.size()), n_(demand.size()), cost_(std::move(cost)), tol_(tol) {
    northwest_corner(supply, demand);
  }

  void solve() {
    for (;;) {
      compute_potentials();
      auto entering = find_entering();
      if (!entering) return;
      pivot(entering->first, entering->second);
    }
  }

  const std::vector<BasicCell>& basis() const { return basis_; }
  const std::vector<T>& u() const { return u_; }
  const std::vector<T>& v() const { return v_; }

 private:
  const T& c(std::size_t i, std::size_t j) const { return cost_[i * n_ + j]; }

  void northwest_corner(std::span<const Rational> supply, std::span<const Rational> demand) {
    std::vector<Rational> a(supply.begin(), supply.end());
    std::vector<Rational> b(demand.begin(), demand.end());
    std::size_t i = 0;
    std::size_t j = 0;
    for (;;) {
      Rational x = a[i] < b[j] ? a[i] : b[j];
      basis_.push_back({i, j, x});
      a[i] -= x;
      b[j] -= x;
      if (i == m_ - 1 && j == n_ - 1) break;
      if ((a[i] == 0 && i < m_ - 1) || j == n_ - 1) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  // Basis tree on m_ row vertices and n_ column vertices (offset m_).
  void build_adjacency() {
    adj_.assign(m_ + n_, {});
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      adj_[basis_[k].row].push_back(k);
      adj_[m_ + basis_[k].col].push_back(k);
    }
  }

  void compute_potentials() {
    build_adjacency();
    u_.assign(m_, T{});
    v_.assign(n_, T{});
    std::vector<bool> seen(m_ + n_, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      std::size_t vertex = stack.back();
      stack.pop_back();
      for (std::size_t k : adj_[vertex]) {
        const BasicCell& cell = basis_[k];
        std::size_t other = vertex < m_ ? m_ + cell.col : cell.row;
        if (seen[other]) continue;
        seen[other] = true;
        if (vertex < m_) {
          v_[cell.col] = c(cell.row, cell.col) - u_[cell.row];
        } else {
          u_[cell.row] = c(cell.row, cell.col) - v_[cell.col];
        }
        stack.push_back(other);
      }
    }
  }

  std::optional<std::pair<std::size_t, std::size_t>> find_entering() const {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        T reduced = c(i, j) - u_[i] - v_[j];
        if (Policy::negative(reduced, tol_)) return std::make_pair(i, j);
      }
    }
    return std::nullopt;
  }

  void pivot(std::size_t row, std::size_t col) {
    // Path in the basis tree from column `col` to row `row`.
    std::vector<std::size_t> via(m_ + n_, kNone);
    std::vector<bool> seen(m_ + n_, false);
    std::vector<std::size_t> queue{m_ + col};
    seen[m_ + col] = true;
    for (std::size_t head = 0; head < queue.size() && !seen[row]; ++head) {
      std::size_t vertex = queue[head];
      for (std::size_t k : adj_[vertex]) {
        const BasicCell& cell = basis_[k];
        std::size_t other = vertex < m_ ? m_ + cell.col : cell.row;
        if (seen[other]) continue;
        seen[other] = true;
        via[other] = k;
        queue.push_back(other);
      }
    }
    // Walk back from row to col; cells alternate -, +, -, ... starting next to col.
    std::vector<std::size_t> path;
    for (std::size_t vertex = row; vertex != m_ + col;) {
      std::size_t k = via[vertex];
      path.push_back(k);
      const BasicCell& cell = basis_[k];
      vertex = vertex < m_ ? m_ + cell.col : cell.row;
    }
    std::reverse(path.begin(), path.end());  // path[0] touches column `col`
    std::optional<std::size_t> leaving;
    for (std::size_t s = 0; s < path.size(); s += 2) {
      const BasicCell& cell = basis_[path[s]];
      if (!leaving) {
        leaving = path[s];
        continue;
      }
      const BasicCell& best = basis_[*leaving];
      if (cell.flow < best.flow ||
          (cell.flow == best.flow && std::make_pair(cell.row, cell.col) < std::make_pair(best.row, best.col))) {
        leaving = path[s];
      }
    }
    Rational theta = basis_[*leaving].flow;
    for (std::size_t s = 0; s < path.size(); ++s) {
      if (s % 2 == 0) {
        basis_[path[s]].flow -= theta;
      } else {
        basis_[path[s]].flow += theta;
      }
    }
    basis_[*leaving] = {row, col, theta};
  }

  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::size_t m_;
  std::size_t n_;
  std::vector<T> cost_;
  T tol_;
  std::vector<BasicCell> basis_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<T> u_;
  std::vector<T> v_;
};

template <class Policy, class CostAt, class ToCost>
OtResult finish(const TransportationSimplex<Policy>& simplex, CostAt cost, ToCost to_cost) {
  OtResult result;
  result.value = 0;
  for (const BasicCell& cell : simplex.basis()) {
    if (cell.flow == 0) continue;
    result.plan.support.push_back({cell.row, cell.col, cell.flow});
    result.value += cost(cell.row, cell.col) * cell.flow;
  }
  std::sort(result.plan.support.begin(), result.plan.support.end(),
            [](const PlanEntry& a, const PlanEntry& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
  for (const auto& x : simplex.u()) result.row_potential.push_back(to_cost(x));
  for (const auto& x : simplex.v()) result.col_potential.push_back(to_cost(x));
  return result;
}

}  // namespace detail

// Minimizes sum cost(i, j) pi(i, j) over couplings pi of mu and nu.
inline OtResult ot_solve(std::span<const Rational> mu, std::span<const Rational> nu, const CostMatrix& cost) {
  if (mu.empty() || nu.empty()) throw Error(ErrorCode::kDimensionMismatch, "marginals must be non-empty");
  if (cost.rows() != mu.size() || cost.cols() != nu.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "cost matrix is " + std::to_string(cost.rows()) + "x" +
                                                   std::to_string(cost.cols()) + " but marginals have " +
                                                   std::to_string(mu.size()) + " and " + std::to_string(nu.size()) +
                                                   " atoms");
  }
  Rational mass_mu = 0;
  Rational mass_nu = 0;
  for (const auto& w : mu) {
    if (w < 0) throw Error(ErrorCode::kInvalidArgument, "negative marginal weight");
    mass_mu += w;
  }
  for (const auto& w : nu) {
    if (w < 0) throw Error(ErrorCode::kInvalidArgument, "negative marginal weight");
    mass_nu += w;
  }
  if (mass_mu != mass_nu) {
    throw Error(ErrorCode::kInvalidArgument, "marginal masses differ: " + to_string(mass_mu) + " vs " + to_string(mass_nu));
  }
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (cost(i, j).is_negative()) throw Error(ErrorCode::kInvalidArgument, "negative cost entry");
    }
  }

  auto entry = [&](std::size_t i, std::size_t j) -> const Cost& { return cost(i, j); };
  if (!cost.exact()) {
    std::vector<double> c(m * n);
    double scale = 0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        c[i * n + j] = cost(i, j).to_double();
        scale = std::max(scale, std::fabs(c[i * n + j]));
      }
    }
    detail::TransportationSimplex<detail::DoublePolicy> simplex(mu, nu, std::move(c), 1e-12 * std::max(1.0, scale));
    simplex.solve();
    return detail::finish(simplex, entry, [](double x) { return Cost::approximate(x); });
  }

  // Exact costs: try a common denominator with 64-bit numerators first.
  Integer common = 1;
  Integer largest = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) common = lcm(common, denominator_of(cost(i, j).rational()));
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Integer scaled = numerator_of(cost(i, j).rational()) * (common / denominator_of(cost(i, j).rational()));
      if (scaled > largest) largest = scaled;
    }
  }
  // Potentials are alternating sums of at most m + n costs.
  Integer bound = largest * static_cast<long>(4 * (m + n) + 4);
  if (bound < Integer(std::numeric_limits<std::int64_t>::max())) {
    std::vector<std::int64_t> c(m * n);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        Integer scaled = numerator_of(cost(i, j).rational()) * (common / denominator_of(cost(i, j).rational()));
        c[i * n + j] = scaled.convert_to<std::int64_t>();
      }
    }
    detail::TransportationSimplex<detail::IntPolicy> simplex(mu, nu, std::move(c), 0);
    simplex.solve();
    return detail::finish(simplex, entry, [&](std::int64_t x) { return Cost(Rational(Integer(x), common)); });
  }
  std::vector<Rational> c(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = cost(i, j).rational();
  }
  detail::TransportationSimplex<detail::RationalPolicy> simplex(mu, nu, std::move(c), Rational(0));
  simplex.solve();
  return detail::finish(simplex, entry, [](const Rational& x) { return Cost(x); });
}

// Same problem with costs given as integers over a common denominator,
// row-major. Avoids materializing rational costs on large grids; the caller
// guarantees that 4 (m + n) times the largest entry fits in 64 bits.
inline OtResult ot_solve_scaled(std::span<const Rational> mu, std::span<const Rational> nu,
                                std::vector<std::int64_t> scaled, const Integer& denominator) {
  const std::size_t n = nu.size();
  if (mu.empty() || nu.empty() || scaled.size() != mu.size() * n) {
    throw Error(ErrorCode::kDimensionMismatch, "scaled cost vector does not match the marginals");
  }
  if (denominator <= 0) throw Error(ErrorCode::kInvalidArgument, "denominator must be positive");
  Rational mass_mu = 0;
  Rational mass_nu = 0;
  for (const auto& w : mu) mass_mu += w;
  for (const auto& w : nu) mass_nu += w;
  if (mass_mu != mass_nu) {
    throw Error(ErrorCode::kInvalidArgument, "marginal masses differ: " + to_string(mass_mu) + " vs " + to_string(mass_nu));
  }
  for (auto c : scaled) {
    if (c < 0) throw Error(ErrorCode::kInvalidArgument, "negative cost entry");
  }
  const std::vector<std::int64_t> copy = scaled;
  detail::TransportationSimplex<detail::IntPolicy> simplex(mu, nu, std::move(scaled), 0);
  simplex.solve();
  auto entry = [&](std::size_t i, std::size_t j) { return Cost(Rational(Integer(copy[i * n + j]), denominator)); };
  return detail::finish(simplex, entry, [&](std::int64_t x) { return Cost(Rational(Integer(x), denominator)); });
}

}  // namespace adt
