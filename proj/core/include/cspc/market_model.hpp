#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cspc/rng.hpp"

namespace cspc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Cost models
// ---------------------------------------------------------------------------

/// Flat marginal cost `c` per Mbps; total cost c*l.
struct ConstantMarginalCost {
  double c = 0.0;
};

/// Total cost a + b*l + q*l^2 with q > 0, giving a strictly increasing
/// marginal cost b + 2*q*l.
struct QuadraticTotalCost {
  double a = 0.0;
  double b = 0.0;
  double q = 0.0;
};

using CostModel = std::variant<ConstantMarginalCost, QuadraticTotalCost>;

/// Throws DomainError for load < 0.
double total_cost(const CostModel& model, double load);
/// Derivative of total_cost. Throws DomainError for load < 0.
double marginal_cost(const CostModel& model, double load);

/// Quadratic model whose marginal cost at `capacity` equals `target_mc`.
/// `slope_share` in [0, 1) is the fraction of target_mc contributed by the
/// load-dependent term, so marginal_cost(0) = (1 - slope_share) * target_mc.
QuadraticTotalCost calibrated_quadratic(double target_mc, double capacity, double fixed_cost,
                                        double slope_share);

/// Rejects non-finite or non-positive parameters. `field` prefixes errors.
void validate_cost_model(const CostModel& model, double capacity, const std::string& field);

// ---------------------------------------------------------------------------
// Provider honesty
// ---------------------------------------------------------------------------

struct AlwaysHonest {};
struct AlwaysUnfair {};
struct HonestWithProb {
  double sigma = 1.0;
};
struct HonestUntilPcc;

/// How a provider decides, each price controlling cycle, whether to price at
/// min(MC, cap) or at the cap.
class HonestyPolicy {
 public:
  using Variant = std::variant<AlwaysHonest, AlwaysUnfair, HonestWithProb,
                               std::shared_ptr<const HonestUntilPcc>>;

  HonestyPolicy() : v_(AlwaysHonest{}) {}
  HonestyPolicy(AlwaysHonest p) : v_(p) {}
  HonestyPolicy(AlwaysUnfair p) : v_(p) {}
  HonestyPolicy(HonestWithProb p) : v_(p) {}
  /// Honest for every cycle f <= last_honest_pcc, then `then`.
  static HonestyPolicy honest_until(int last_honest_pcc, HonestyPolicy then);

  const Variant& variant() const noexcept { return v_; }
  /// Cycle-independent name: "honest", "unfair", "prob", "until".
  std::string kind() const;

 private:
  Variant v_;
};

struct HonestUntilPcc {
  int last_honest_pcc = 0;
  HonestyPolicy then;
};

void validate_honesty(const HonestyPolicy& policy, const std::string& field);

// ---------------------------------------------------------------------------
// Agents' static descriptions
// ---------------------------------------------------------------------------

struct WnpSpec {
  std::size_t id = 0;
  double spectrum_mhz = 0.0;  // allocated spectrum
  double efficiency = 0.0;    // bps/Hz
  CostModel cost = ConstantMarginalCost{};
  HonestyPolicy honesty;
};

/// Maximum bit-rate (Mbps) = spectrum * efficiency. Throws DomainError when
/// either factor is not strictly positive and finite.
double capacity(const WnpSpec& wnp);

/// Marginal cost evaluated at full capacity: the fair price the regulator
/// is steering toward.
double fair_price(const WnpSpec& wnp);

struct ClientSpec {
  std::size_t id = 0;
  double budget = 0.0;       // currency per cycle
  double requirement = 0.0;  // Mbps
  std::vector<double> initial_weights;
  std::vector<double> srp;  // suitable ratio of prices, one per provider

  bool operator==(const ClientSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Scenario configuration
// ---------------------------------------------------------------------------

struct MechanismParams {
  double xi = 1.05;      // reward factor for fairly priced providers
  double gamma = 0.9;    // punishment floor (at most 1-gamma cut per cycle)
  double beta = 2.0;     // weight adjustment coefficient
  double exponent = 2.0; // CES exponent r > 1
  double weight_floor = 1e-6;
  double ratio_clamp = 2.0;
  /// When true, a provider whose load hit capacity while the crowdsourced
  /// demand exceeded it receives the xi reward instead of the L/S cut.
  bool reward_capacity_limited = false;
  /// Weights used for the crowdsourced bundle: the price-adjusted ones, or
  /// the client's initial weights (which the adjusted ones equal at fair prices).
  bool prb_initial_weights = true;
};

enum class WeightCalibration {
  None,      // w~ drawn from Uniform(weight_low, weight_high)
  Capacity,  // scaled so CES demand at fair prices is proportional to capacity
};

/// Parameters for drawing a client population. Requirement is drawn from
/// Uniform(req_low, req_high) * R_bar where
/// R_bar = demand_scale * total capacity / count; budget from
/// requirement * MC_bar * Uniform(budget_low, budget_high).
struct ClientGenerator {
  std::size_t count = 0;
  double demand_scale = 0.5;
  double req_low = 0.5;
  double req_high = 1.5;
  double budget_low = 0.8;
  double budget_high = 1.5;
  double weight_low = 0.8;
  double weight_high = 1.2;
  double tolerance = 0.1;  // srp noise half-width tau
  WeightCalibration calibration = WeightCalibration::None;
};

struct ScenarioConfig {
  std::string name = "custom";
  std::vector<WnpSpec> wnps;
  std::vector<ClientSpec> clients;          // explicit population, or
  std::optional<ClientGenerator> generator; // generated one (takes precedence)
  MechanismParams mechanism;
  int max_pccs = 60;   // F
  int max_bais = 20;   // T
  double bai_stop_tol = 1e-6;
  std::uint64_t seed = 1;
  double initial_cap_low = 0.1;   // as fraction of MC_bar
  double initial_cap_high = 0.5;
  std::vector<double> initial_caps;  // overrides the random draw when set
  bool resample_srp_per_pcc = false;
  unsigned workers = 1;

  /// Throws ConfigError naming the first violated field.
  void validate() const;
};

double mean_fair_price(std::span<const WnpSpec> wnps);
std::vector<double> capacities(std::span<const WnpSpec> wnps);
std::vector<double> fair_prices(std::span<const WnpSpec> wnps);

/// Provider-level base weights for the Capacity calibration: demand at fair
/// prices with these weights is proportional to capacity. Mean-normalised.
std::vector<double> capacity_calibrated_weights(std::span<const WnpSpec> wnps, double exponent);

/// Srp noise draw for one client: (MC_j / MC_bar) * (1 + eps_j),
/// eps_j ~ Uniform(-tolerance, tolerance).
std::vector<double> draw_srp(std::span<const double> fair, double fair_mean, double tolerance,
                             Engine64& rng);

/// Clients the engine will simulate: generated from `generator` using the
/// per-client substreams, or the explicit list.
std::vector<ClientSpec> materialize_clients(const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// Per-cycle state
// ---------------------------------------------------------------------------

/// Dense row-major matrix; rows are clients, columns providers.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<double> column_sums() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct MarketState {
  int pcc = 0;
  std::vector<double> caps;
  std::vector<double> prices;
  double mean_price = 0.0;
  std::vector<double> prb_totals;
  std::vector<double> loads;
  Matrix allocations;
  std::vector<bool> honesty_draws;
};

}  // namespace cspc
