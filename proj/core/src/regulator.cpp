#include "cspc/regulator.hpp"

#include <algorithm>

#include "cspc/error.hpp"

namespace cspc {

std::string_view to_string(PccCondition c) {
  switch (c) {
    case PccCondition::OverPriced: return "over_priced";
    case PccCondition::CapacityLimited: return "capacity_limited";
    case PccCondition::FairPriced: return "fair_priced";
  }
  return "unknown";
}

PccCondition condition_from_string(std::string_view name) {
  if (name == "over_priced") return PccCondition::OverPriced;
  if (name == "capacity_limited") return PccCondition::CapacityLimited;
  if (name == "fair_priced") return PccCondition::FairPriced;
  throw DomainError("unknown condition '" + std::string(name) + "'");
}

PccCondition classify(double load, double prb_total, double capacity, double tol) {
  if (load >= prb_total) return PccCondition::FairPriced;
  if (load >= capacity - tol) return PccCondition::CapacityLimited;
  return PccCondition::OverPriced;
}

double adjustment_ratio(double load, double prb_total, double ratio_clamp) {
  if (prb_total <= 0.0) return ratio_clamp;
  return std::clamp(load / prb_total, 0.0, ratio_clamp);
}

double next_cap(double price, double load, double prb_total, PccCondition condition, const CapRule& rule) {
  if (!(price > 0.0)) throw DomainError("next_cap: price must be positive");
  const double ratio = adjustment_ratio(load, prb_total, rule.ratio_clamp);
  if (load >= prb_total) return price * ratio * rule.xi;
  if (condition == PccCondition::CapacityLimited && rule.reward_capacity_limited) return price * rule.xi;
  return price * std::max(ratio, rule.gamma);
}

std::vector<double> update_caps(std::span<const double> prices, std::span<const double> loads,
                                std::span<const double> prb_totals,
                                std::span<const PccCondition> conditions, const CapRule& rule) {
  const std::size_t n = prices.size();
  if (loads.size() != n || prb_totals.size() != n || (!conditions.empty() && conditions.size() != n))
    throw DomainError("update_caps: length mismatch");
  std::vector<double> caps(n);
  for (std::size_t j = 0; j < n; ++j) {
    // Without a condition the CapacityLimited exemption cannot apply.
    const auto cond = conditions.empty() ? PccCondition::OverPriced : conditions[j];
    caps[j] = next_cap(prices[j], loads[j], prb_totals[j], cond, rule);
  }
  return caps;
}

}  // namespace cspc
