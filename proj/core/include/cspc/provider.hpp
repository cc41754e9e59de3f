#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cspc/market_model.hpp"
#include "cspc/rng.hpp"

namespace cspc {

/// Honest providers charge min(MC at capacity, cap); unfair ones the cap.
double announce_price(const WnpSpec& wnp, double cap, bool honest);

/// Lottery allocation of one provider's free bit-rate. `requests[i]` is
/// client i's request; `order` is the lottery permutation of client
/// indices. Under-subscribed: every request granted. Otherwise clients are
/// served in `order` until the capacity runs out; the first client that
/// does not fit receives the remainder and everyone after it nothing.
std::vector<double> allocate(std::span<const double> requests, double available,
                             std::span<const std::size_t> order);

/// Profit = price * load - total_cost(capacity). The capacity cost is sunk.
double wnp_profit(double price, double load, const CostModel& cost, double capacity);

/// Honesty draw for cycle `pcc` (1-based). Only probabilistic policies
/// consume `rng`.
bool draw_honesty(const HonestyPolicy& policy, int pcc, Engine64& rng);

}  // namespace cspc
