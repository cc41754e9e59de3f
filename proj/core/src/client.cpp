#include "cspc/client.hpp"

#include <algorithm>
#include <cmath>

#include "cspc/ces_solver.hpp"
#include "cspc/error.hpp"

namespace cspc {

std::vector<double> estimate_fair_prices(double mean_price, std::span<const double> srp) {
  if (!(std::isfinite(mean_price) && mean_price > 0.0))
    throw DomainError("estimate_fair_prices: mean price must be positive");
  std::vector<double> out(srp.size());
  for (std::size_t j = 0; j < srp.size(); ++j) {
    if (!(srp[j] > 0.0)) throw DomainError("estimate_fair_prices: srp must be positive");
    out[j] = mean_price * srp[j];
  }
  return out;
}

std::vector<double> adjust_weights(std::span<const double> initial, std::span<const double> fair_estimate,
                                   std::span<const double> prices, double beta, double floor) {
  if (initial.size() != prices.size() || fair_estimate.size() != prices.size())
    throw DomainError("adjust_weights: length mismatch");
  std::vector<double> w(prices.size());
  for (std::size_t j = 0; j < prices.size(); ++j) {
    if (!(prices[j] > 0.0)) throw DomainError("adjust_weights: prices must be positive");
    w[j] = std::max(floor, initial[j] * (1.0 + beta * (fair_estimate[j] - prices[j]) / prices[j]));
  }
  return w;
}

std::vector<double> prepare_prb(const ClientSpec& client, std::span<const double> fair_estimate,
                                std::span<const double> weights, double exponent) {
  DemandProblem p;
  p.weights.assign(weights.begin(), weights.end());
  p.exponent = exponent;
  p.prices.assign(fair_estimate.begin(), fair_estimate.end());
  p.budget = std::max(0.0, client.budget);
  p.total_cap = std::max(0.0, client.requirement);
  return solve_demand(p).bundle;
}

std::vector<double> prepare_request_bundle(const ClientPccView& view, std::span<const double> prices,
                                           std::span<const double> available, double exponent) {
  DemandProblem p;
  p.weights = view.adjusted_weights;
  p.exponent = exponent;
  p.prices.assign(prices.begin(), prices.end());
  p.budget = std::max(0.0, view.remaining_budget);
  p.total_cap = std::max(0.0, view.remaining_requirement);
  p.per_good_caps.resize(available.size());
  for (std::size_t j = 0; j < available.size(); ++j) p.per_good_caps[j] = std::max(0.0, available[j]);
  return solve_demand(p).bundle;
}

}  // namespace cspc
