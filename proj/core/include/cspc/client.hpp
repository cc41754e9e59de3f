#pragma once

#include <span>
#include <vector>

#include "cspc/market_model.hpp"

namespace cspc {

/// What a client carries through one price controlling cycle.
struct ClientPccView {
  std::vector<double> fair_estimate;     // p_hat
  std::vector<double> adjusted_weights;  // w
  double remaining_budget = 0.0;         // H(t)
  double remaining_requirement = 0.0;    // R(t)
};

/// p_hat_j = mean_price * srp_j. Throws DomainError if mean_price <= 0.
std::vector<double> estimate_fair_prices(double mean_price, std::span<const double> srp);

/// w_j = max(floor, w~_j (1 + beta (p_hat_j - p_j) / p_j)).
std::vector<double> adjust_weights(std::span<const double> initial, std::span<const double> fair_estimate,
                                   std::span<const double> prices, double beta, double floor);

/// Perfect request bundle: the CES demand at the client's fair-price
/// estimate with its full budget and requirement, ignoring provider
/// capacity. This is what gets crowdsourced to the regulator.
std::vector<double> prepare_prb(const ClientSpec& client, std::span<const double> fair_estimate,
                                std::span<const double> weights, double exponent);

/// Request for the current allocation iteration: CES demand at announced
/// prices, limited by what is left of budget, requirement and each
/// provider's unallocated bit-rate.
std::vector<double> prepare_request_bundle(const ClientPccView& view, std::span<const double> prices,
                                           std::span<const double> available, double exponent);

}  // namespace cspc
