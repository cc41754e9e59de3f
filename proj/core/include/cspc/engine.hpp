#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cspc/market_model.hpp"
#include "cspc/regulator.hpp"

namespace cspc {

/// Everything observed in one price controlling cycle. `caps` are the
/// ceilings that were in force during the cycle (not the next ones).
struct PccRecord {
  int pcc = 0;
  std::vector<double> caps;
  std::vector<double> prices;
  std::vector<double> loads;
  std::vector<double> prb_totals;
  std::vector<PccCondition> conditions;
  std::vector<bool> honesty;
  double sum_abs_error = 0.0;
  double mean_price = 0.0;
  int bai_count = 0;

  bool operator==(const PccRecord&) const = default;
};

struct SimTrace {
  ScenarioConfig config;
  std::uint64_t seed = 0;
  std::vector<PccRecord> records;
  std::vector<double> wall_seconds;  // per cycle
};

/// Read-only view handed to a BAI observer after each allocation iteration.
struct BaiSnapshot {
  int pcc = 0;
  int bai = 0;
  std::span<const double> prices;
  std::span<const double> available;            // L^A after this iteration
  const Matrix* allocations = nullptr;          // cumulative x^i within the cycle
  std::span<const double> remaining_budget;     // H^i(t+1)
  std::span<const double> remaining_requirement;
};
using BaiObserver = std::function<void(const BaiSnapshot&)>;

struct BaiOutcome {
  Matrix allocations;
  std::vector<double> loads;
  int bai_count = 0;
};

/// Lottery stream for (provider, iteration); iterations are 1-based.
using LotterySource = std::function<Engine64(std::size_t provider, int bai)>;

struct BaiLoopParams {
  double exponent = 2.0;
  int max_bais = 20;
  double stop_tol = 1e-6;
  unsigned workers = 1;
  int pcc = 0;  // only forwarded to the observer
};

/// Inner allocation loop of one cycle. Each iteration every client requests
/// its CES demand against what remains of its budget and requirement and
/// of each provider's capacity; providers then run the lottery. Stops when
/// an iteration allocates less than `stop_tol` in total, or after
/// `max_bais` iterations.
BaiOutcome run_bai_loop(std::span<const ClientSpec> clients, std::span<const std::vector<double>> weights,
                        std::span<const double> capacities, std::span<const double> prices,
                        const BaiLoopParams& params, const LotterySource& lottery,
                        const BaiObserver& observer = {});

/// Owns the mutable market state of one run.
class Simulation {
 public:
  /// Validates the config (ConfigError) and draws clients and initial caps.
  explicit Simulation(ScenarioConfig config);

  const ScenarioConfig& config() const noexcept { return config_; }
  const std::vector<ClientSpec>& clients() const noexcept { return clients_; }
  const MarketState& state() const noexcept { return state_; }
  /// Weights used in the last completed cycle, one vector per client.
  const std::vector<std::vector<double>>& last_weights() const noexcept { return weights_; }
  const std::vector<std::vector<double>>& last_fair_estimates() const noexcept { return fair_estimates_; }

  void set_bai_observer(BaiObserver observer) { observer_ = std::move(observer); }

  /// One full cycle: honesty draws, prices, weights, crowdsourced PRBs,
  /// allocation loop, classification, and the caps for the next cycle.
  PccRecord run_pcc();

  /// Runs the remaining cycles up to max_pccs.
  SimTrace run();

 private:
  ScenarioConfig config_;
  std::vector<ClientSpec> clients_;
  std::vector<double> capacities_;
  std::vector<double> fair_;
  MarketState state_;
  std::vector<std::vector<double>> weights_;
  std::vector<std::vector<double>> fair_estimates_;
  BaiObserver observer_;
  SimTrace trace_;
};

SimTrace run_simulation(const ScenarioConfig& config);

/// sum_j |p_j - MC_j(L_max_j)|.
double sum_abs_error(std::span<const double> prices, std::span<const WnpSpec> wnps);

/// Mean of the per-cycle mean price over the last `last_k` records. Throws
/// DomainError if the trace is shorter or last_k == 0.
double windowed_mean_price(const SimTrace& trace, std::size_t last_k);

/// Per provider: MC_j(L_j) <= p_j + tol at the final cycle.
std::vector<bool> demand_consistency_check(const SimTrace& trace, std::span<const WnpSpec> wnps,
                                           double tol = 1e-9);

}  // namespace cspc
