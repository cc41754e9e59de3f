#include "cspc/provider.hpp"

#include <algorithm>
#include <numeric>

#include "cspc/error.hpp"

namespace cspc {

double announce_price(const WnpSpec& wnp, double cap, bool honest) {
  if (!(cap > 0.0)) throw DomainError("announce_price: cap must be positive");
  return honest ? std::min(fair_price(wnp), cap) : cap;
}

std::vector<double> allocate(std::span<const double> requests, double available,
                             std::span<const std::size_t> order) {
  std::vector<double> granted(requests.size(), 0.0);
  double left = std::max(0.0, available);
  const double demand = std::accumulate(requests.begin(), requests.end(), 0.0);
  if (demand <= left) {
    std::copy(requests.begin(), requests.end(), granted.begin());
    return granted;
  }
  for (std::size_t i : order) {
    if (left <= 0.0) break;
    const double g = std::min(requests[i], left);
    granted[i] = g;
    left -= g;
  }
  return granted;
}

double wnp_profit(double price, double load, const CostModel& cost, double capacity) {
  if (!(load >= 0.0) || load > capacity * (1.0 + 1e-12))
    throw DomainError("wnp_profit: load must lie in [0, capacity]");
  return price * load - total_cost(cost, capacity);
}

bool draw_honesty(const HonestyPolicy& policy, int pcc, Engine64& rng) {
  const auto& v = policy.variant();
  if (std::holds_alternative<AlwaysHonest>(v)) return true;
  if (std::holds_alternative<AlwaysUnfair>(v)) return false;
  if (const auto* p = std::get_if<HonestWithProb>(&v)) return bernoulli(rng, p->sigma);
  const auto& until = std::get<std::shared_ptr<const HonestUntilPcc>>(v);
  if (pcc <= until->last_honest_pcc) return true;
  return draw_honesty(until->then, pcc, rng);
}

}  // namespace cspc
