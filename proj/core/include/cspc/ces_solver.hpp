#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cspc/market_model.hpp"

namespace cspc {

/// One CES maximisation instance:
///
///   max  (sum_j (w_j x_j)^(1/r))^r
///   s.t. q . x <= budget,  sum_j x_j <= total_cap,  0 <= x_j <= cap_j.
///
/// An empty `per_good_caps` means every good is uncapped.
struct DemandProblem {
  std::vector<double> weights;
  double exponent = 2.0;
  std::vector<double> prices;
  double budget = 0.0;
  double total_cap = kInf;
  std::vector<double> per_good_caps;

  std::size_t size() const noexcept { return weights.size(); }
  double cap(std::size_t j) const { return per_good_caps.empty() ? kInf : per_good_caps[j]; }

  /// Throws DomainError on non-positive weights/prices, r <= 1, negative
  /// budget/total/caps or mismatched lengths.
  void validate() const;
};

struct ActiveConstraints {
  bool budget = false;
  bool total = false;
  std::vector<std::size_t> capped;   // x_j == cap_j
  std::vector<std::size_t> at_zero;  // x_j == 0
};

struct DemandSolution {
  std::vector<double> bundle;
  double utility = 0.0;
  ActiveConstraints active;
};

struct SolverTolerances {
  double feasibility = 1e-8;  // Mbps / currency
  double utility = 1e-9;      // relative
  double kkt = 1e-7;
};

/// (sum_j (w_j x_j)^(1/r))^r with the continuous extension 0^(1/r) = 0.
/// Throws DomainError for negative components, non-positive weights or r <= 1.
double ces_utility(std::span<const double> bundle, std::span<const double> weights, double exponent);

/// Closed form for the case where only the budget binds:
/// x_j = B a_j / (q . a), a_j = w_j^(1/(r-1)) q_j^(-r/(r-1)).
DemandSolution solve_budget_only(std::span<const double> weights, double exponent,
                                 std::span<const double> prices, double budget);

/// Exact optimum of a DemandProblem. Tries the constraint families in turn
/// (caps only, budget, total, both) and returns the first KKT-consistent
/// candidate. Budget-only and total-only candidates are closed form on the
/// uncapped coordinates; the two-constraint case is a monotone 1-D search
/// over the ratio of the two multipliers.
DemandSolution solve_demand(const DemandProblem& problem, const SolverTolerances& tol = {});

/// Exhaustive search over the feasible lattice with `points_per_axis`
/// values on each axis [0, min(cap_j, R, B/q_j)]. Verification only:
/// refuses N > 4.
DemandSolution grid_oracle(const DemandProblem& problem, int points_per_axis);

}  // namespace cspc
