#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "cspc/market_model.hpp"

namespace cspc {

enum class PccCondition {
  OverPriced,       // L < S and L < L_max
  CapacityLimited,  // L < S and L == L_max
  FairPriced,       // L >= S
};

std::string_view to_string(PccCondition c);
/// Inverse of to_string; throws DomainError on unknown names.
PccCondition condition_from_string(std::string_view name);

/// `tol` is the slack (Mbps) within which L counts as equal to L_max.
PccCondition classify(double load, double prb_total, double capacity, double tol = 1e-6);

struct CapRule {
  double xi = 1.05;
  double gamma = 0.9;
  double ratio_clamp = 2.0;
  bool reward_capacity_limited = false;

  static CapRule from(const MechanismParams& m) {
    return {m.xi, m.gamma, m.ratio_clamp, m.reward_capacity_limited};
  }
};

/// L/S clamped to [0, ratio_clamp]; S == 0 maps to ratio_clamp.
double adjustment_ratio(double load, double prb_total, double ratio_clamp);

/// Next-cycle ceiling for one provider:
///   L >= S          -> p * ratio * xi
///   otherwise       -> p * max(ratio, gamma)
/// except that CapacityLimited providers get p * xi when the rule says so.
double next_cap(double price, double load, double prb_total, PccCondition condition, const CapRule& rule);

/// Vector form. `conditions` may be empty, in which case every provider
/// goes through the plain two-branch rule.
std::vector<double> update_caps(std::span<const double> prices, std::span<const double> loads,
                                std::span<const double> prb_totals,
                                std::span<const PccCondition> conditions, const CapRule& rule);

}  // namespace cspc
