#include "cspc/market_model.hpp"

#include <cmath>
#include <numeric>

#include "cspc/error.hpp"

namespace cspc {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_load(double load) {
  if (!(load >= 0.0)) throw DomainError("cost model: load must be non-negative");
}

}  // namespace

double total_cost(const CostModel& model, double load) {
  check_load(load);
  return std::visit(overloaded{
                        [&](const ConstantMarginalCost& m) { return m.c * load; },
                        [&](const QuadraticTotalCost& m) { return m.a + m.b * load + m.q * load * load; },
                    },
                    model);
}

double marginal_cost(const CostModel& model, double load) {
  check_load(load);
  return std::visit(overloaded{
                        [](const ConstantMarginalCost& m) { return m.c; },
                        [&](const QuadraticTotalCost& m) { return m.b + 2.0 * m.q * load; },
                    },
                    model);
}

QuadraticTotalCost calibrated_quadratic(double target_mc, double capacity, double fixed_cost,
                                        double slope_share) {
  if (!positive_finite(target_mc) || !positive_finite(capacity))
    throw DomainError("calibrated_quadratic: target and capacity must be positive");
  if (!(slope_share > 0.0 && slope_share < 1.0))
    throw DomainError("calibrated_quadratic: slope_share must lie in (0, 1)");
  QuadraticTotalCost m;
  m.a = fixed_cost;
  m.b = target_mc * (1.0 - slope_share);
  m.q = target_mc * slope_share / (2.0 * capacity);
  return m;
}

void validate_cost_model(const CostModel& model, double capacity, const std::string& field) {
  std::visit(overloaded{
                 [&](const ConstantMarginalCost& m) {
                   require(positive_finite(m.c), field + ".c", "marginal cost must be positive");
                 },
                 [&](const QuadraticTotalCost& m) {
                   require(std::isfinite(m.a) && m.a >= 0.0, field + ".a",
                           "fixed cost must be non-negative");
                   require(positive_finite(m.q), field + ".q", "curvature must be positive");
                   // b + 2ql is increasing, so positivity on [0, L_max] reduces to b > 0.
                   require(positive_finite(m.b), field + ".b",
                           "marginal cost must be positive on [0, capacity]");
                   (void)capacity;
                 },
             },
             model);
}

HonestyPolicy HonestyPolicy::honest_until(int last_honest_pcc, HonestyPolicy then) {
  HonestyPolicy p;
  p.v_ = std::make_shared<const HonestUntilPcc>(HonestUntilPcc{last_honest_pcc, std::move(then)});
  return p;
}

std::string HonestyPolicy::kind() const {
  return std::visit(overloaded{
                        [](const AlwaysHonest&) { return std::string("honest"); },
                        [](const AlwaysUnfair&) { return std::string("unfair"); },
                        [](const HonestWithProb&) { return std::string("prob"); },
                        [](const std::shared_ptr<const HonestUntilPcc>&) { return std::string("until"); },
                    },
                    v_);
}

void validate_honesty(const HonestyPolicy& policy, const std::string& field) {
  std::visit(overloaded{
                 [](const AlwaysHonest&) {},
                 [](const AlwaysUnfair&) {},
                 [&](const HonestWithProb& p) {
                   require(p.sigma >= 0.0 && p.sigma <= 1.0, field + ".sigma",
                           "probability must lie in [0, 1]");
                 },
                 [&](const std::shared_ptr<const HonestUntilPcc>& p) {
                   require(p != nullptr, field, "missing switch policy");
                   require(p->last_honest_pcc >= 0, field + ".until_pcc", "must be >= 0");
                   validate_honesty(p->then, field + ".then");
                 },
             },
             policy.variant());
}

double capacity(const WnpSpec& wnp) {
  if (!positive_finite(wnp.spectrum_mhz) || !positive_finite(wnp.efficiency))
    throw DomainError("capacity: spectrum and efficiency must be positive");
  return wnp.spectrum_mhz * wnp.efficiency;
}

double fair_price(const WnpSpec& wnp) { return marginal_cost(wnp.cost, capacity(wnp)); }

double mean_fair_price(std::span<const WnpSpec> wnps) {
  if (wnps.empty()) throw DomainError("mean_fair_price: no providers");
  double sum = 0.0;
  for (const auto& w : wnps) sum += fair_price(w);
  return sum / static_cast<double>(wnps.size());
}

std::vector<double> capacities(std::span<const WnpSpec> wnps) {
  std::vector<double> out;
  out.reserve(wnps.size());
  for (const auto& w : wnps) out.push_back(capacity(w));
  return out;
}

std::vector<double> fair_prices(std::span<const WnpSpec> wnps) {
  std::vector<double> out;
  out.reserve(wnps.size());
  for (const auto& w : wnps) out.push_back(fair_price(w));
  return out;
}

std::vector<double> capacity_calibrated_weights(std::span<const WnpSpec> wnps, double exponent) {
  // CES demand at prices q is proportional to w^(1/(r-1)) q^(-r/(r-1)), so
  // w_j ~ L_j^(r-1) * MC_j^r makes demand at fair prices ~ capacity.
  std::vector<double> logw;
  logw.reserve(wnps.size());
  for (const auto& w : wnps)
    logw.push_back((exponent - 1.0) * std::log(capacity(w)) + exponent * std::log(fair_price(w)));
  const double shift = std::accumulate(logw.begin(), logw.end(), 0.0) / static_cast<double>(logw.size());
  std::vector<double> out;
  out.reserve(logw.size());
  for (double lw : logw) out.push_back(std::exp(lw - shift));
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(out.size());
  for (double& v : out) v /= mean;
  return out;
}

std::vector<double> draw_srp(std::span<const double> fair, double fair_mean, double tolerance,
                             Engine64& rng) {
  std::vector<double> srp(fair.size());
  for (std::size_t j = 0; j < fair.size(); ++j) {
    const double eps = tolerance > 0.0 ? uniform(rng, -tolerance, tolerance) : 0.0;
    srp[j] = fair[j] / fair_mean * (1.0 + eps);
  }
  return srp;
}

std::vector<ClientSpec> materialize_clients(const ScenarioConfig& config) {
  if (!config.generator) return config.clients;
  const auto& g = *config.generator;
  const auto caps = capacities(config.wnps);
  const auto fair = fair_prices(config.wnps);
  const double fair_mean = mean_fair_price(config.wnps);
  const std::size_t n = config.wnps.size();
  const double total_capacity = std::accumulate(caps.begin(), caps.end(), 0.0);
  const double mean_req = g.count > 0 ? g.demand_scale * total_capacity / static_cast<double>(g.count) : 0.0;

  std::vector<double> base(n, 1.0);
  if (g.calibration == WeightCalibration::Capacity)
    base = capacity_calibrated_weights(config.wnps, config.mechanism.exponent);

  std::vector<ClientSpec> clients;
  clients.reserve(g.count);
  for (std::size_t i = 0; i < g.count; ++i) {
    auto rng = make_stream(config.seed, StreamKind::Client, i);
    ClientSpec c;
    c.id = i;
    c.requirement = mean_req * uniform(rng, g.req_low, g.req_high);
    c.budget = c.requirement * fair_mean * uniform(rng, g.budget_low, g.budget_high);
    c.initial_weights.resize(n);
    for (std::size_t j = 0; j < n; ++j) c.initial_weights[j] = base[j] * uniform(rng, g.weight_low, g.weight_high);
    c.srp = draw_srp(fair, fair_mean, g.tolerance, rng);
    clients.push_back(std::move(c));
  }
  return clients;
}

std::vector<double> Matrix::column_sums() const {
  std::vector<double> sums(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) sums[c] += (*this)(r, c);
  return sums;
}

void ScenarioConfig::validate() const {
  require(!wnps.empty(), "wnps", "at least one provider is required");
  for (std::size_t j = 0; j < wnps.size(); ++j) {
    const std::string f = "wnps[" + std::to_string(j) + "]";
    require(positive_finite(wnps[j].spectrum_mhz), f + ".spectrum_mhz", "must be > 0");
    require(positive_finite(wnps[j].efficiency), f + ".efficiency", "must be > 0");
    validate_cost_model(wnps[j].cost, wnps[j].spectrum_mhz * wnps[j].efficiency, f + ".cost");
    validate_honesty(wnps[j].honesty, f + ".honesty");
  }
  const auto& m = mechanism;
  require(std::isfinite(m.xi) && m.xi > 1.0, "mechanism.xi", "must be > 1");
  require(m.gamma > 0.0 && m.gamma < 1.0, "mechanism.gamma", "must lie in (0, 1)");
  require(positive_finite(m.beta), "mechanism.beta", "must be > 0");
  require(std::isfinite(m.exponent) && m.exponent > 1.0, "mechanism.exponent", "must be > 1");
  require(positive_finite(m.weight_floor), "mechanism.weight_floor", "must be > 0");
  require(std::isfinite(m.ratio_clamp) && m.ratio_clamp >= m.xi, "mechanism.ratio_clamp",
          "must be >= xi");
  require(max_pccs >= 1, "max_pccs", "must be >= 1");
  require(max_bais >= 1, "max_bais", "must be >= 1");
  require(positive_finite(bai_stop_tol), "bai_stop_tol", "must be > 0");
  require(workers >= 1, "workers", "must be >= 1");

  if (initial_caps.empty()) {
    require(positive_finite(initial_cap_low), "initial_cap_low", "must be > 0");
    require(std::isfinite(initial_cap_high) && initial_cap_high >= initial_cap_low,
            "initial_cap_high", "must be >= initial_cap_low");
  } else {
    require(initial_caps.size() == wnps.size(), "initial_caps", "one entry per provider required");
    for (std::size_t j = 0; j < initial_caps.size(); ++j)
      require(positive_finite(initial_caps[j]), "initial_caps[" + std::to_string(j) + "]", "must be > 0");
  }

  const std::size_t n = wnps.size();
  if (generator) {
    const auto& g = *generator;
    require(positive_finite(g.demand_scale), "clients.demand_scale", "must be > 0");
    require(g.req_low > 0.0 && g.req_high >= g.req_low, "clients.requirement",
            "need 0 < low <= high");
    require(g.budget_low > 0.0 && g.budget_high >= g.budget_low, "clients.budget",
            "need 0 < low <= high");
    require(g.weight_low > 0.0 && g.weight_high >= g.weight_low, "clients.weights",
            "need 0 < low <= high");
    require(g.tolerance >= 0.0 && g.tolerance < 1.0, "clients.tolerance", "must lie in [0, 1)");
  } else {
    for (std::size_t i = 0; i < clients.size(); ++i) {
      const auto& c = clients[i];
      const std::string f = "clients.list[" + std::to_string(i) + "]";
      require(positive_finite(c.budget), f + ".budget", "must be > 0");
      require(positive_finite(c.requirement), f + ".requirement", "must be > 0");
      require(c.initial_weights.size() == n, f + ".initial_weights", "one entry per provider required");
      require(c.srp.size() == n, f + ".srp", "one entry per provider required");
      for (std::size_t j = 0; j < n; ++j) {
        require(positive_finite(c.initial_weights[j]), f + ".initial_weights", "entries must be > 0");
        require(positive_finite(c.srp[j]), f + ".srp", "entries must be > 0");
      }
    }
  }
}

}  // namespace cspc
