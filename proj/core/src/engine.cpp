#include "cspc/engine.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "cspc/client.hpp"
#include "cspc/error.hpp"
#include "cspc/parallel.hpp"
#include "cspc/provider.hpp"

namespace cspc {

BaiOutcome run_bai_loop(std::span<const ClientSpec> clients, std::span<const std::vector<double>> weights,
                        std::span<const double> capacities, std::span<const double> prices,
                        const BaiLoopParams& params, const LotterySource& lottery,
                        const BaiObserver& observer) {
  const std::size_t m = clients.size();
  const std::size_t n = capacities.size();
  BaiOutcome out;
  out.allocations = Matrix(m, n);
  std::vector<double> available(capacities.begin(), capacities.end());
  std::vector<double> budget(m);
  std::vector<double> requirement(m);
  for (std::size_t i = 0; i < m; ++i) {
    budget[i] = clients[i].budget;
    requirement[i] = clients[i].requirement;
  }

  Matrix requests(m, n);
  std::vector<double> column(m);
  for (int t = 1; t <= params.max_bais; ++t) {
    out.bai_count = t;
    parallel_for(m, params.workers, [&](std::size_t i) {
      auto row = requests.row(i);
      if (budget[i] <= 0.0 || requirement[i] <= 0.0) {
        std::fill(row.begin(), row.end(), 0.0);
        return;
      }
      ClientPccView view{{}, weights[i], budget[i], requirement[i]};
      const auto r = prepare_request_bundle(view, prices, available, params.exponent);
      std::copy(r.begin(), r.end(), row.begin());
    });

    double granted_total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < m; ++i) column[i] = requests(i, j);
      auto rng = lottery(j, t);
      const auto order = random_permutation(rng, m);
      const auto granted = allocate(column, available[j], order);
      double provider_total = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (granted[i] <= 0.0) continue;
        out.allocations(i, j) += granted[i];
        budget[i] = std::max(0.0, budget[i] - prices[j] * granted[i]);
        requirement[i] = std::max(0.0, requirement[i] - granted[i]);
        provider_total += granted[i];
      }
      available[j] = std::max(0.0, available[j] - provider_total);
      granted_total += provider_total;
    }

    if (observer) {
      BaiSnapshot snap;
      snap.pcc = params.pcc;
      snap.bai = t;
      snap.prices = prices;
      snap.available = available;
      snap.allocations = &out.allocations;
      snap.remaining_budget = budget;
      snap.remaining_requirement = requirement;
      observer(snap);
    }
    if (granted_total < params.stop_tol) break;
  }
  out.loads = out.allocations.column_sums();
  return out;
}

Simulation::Simulation(ScenarioConfig config) : config_(std::move(config)) {
  config_.validate();
  clients_ = materialize_clients(config_);
  capacities_ = capacities(config_.wnps);
  fair_ = fair_prices(config_.wnps);
  const std::size_t n = config_.wnps.size();

  state_.caps.resize(n);
  if (!config_.initial_caps.empty()) {
    state_.caps = config_.initial_caps;
  } else {
    const double fair_mean = mean_fair_price(config_.wnps);
    for (std::size_t j = 0; j < n; ++j) {
      auto rng = make_stream(config_.seed, StreamKind::InitialCaps, j);
      state_.caps[j] = fair_mean * uniform(rng, config_.initial_cap_low, config_.initial_cap_high);
    }
  }
  trace_.config = config_;
  trace_.seed = config_.seed;
}

PccRecord Simulation::run_pcc() {
  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  const auto& mech = config_.mechanism;
  const std::size_t n = config_.wnps.size();
  const std::size_t m = clients_.size();
  const int f = state_.pcc + 1;

  PccRecord rec;
  rec.pcc = f;
  rec.caps = state_.caps;

  // Providers: honesty and prices.
  rec.honesty.resize(n);
  rec.prices.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto rng = make_stream(config_.seed, StreamKind::Honesty, j, static_cast<std::uint64_t>(f));
    rec.honesty[j] = draw_honesty(config_.wnps[j].honesty, f, rng);
    rec.prices[j] = announce_price(config_.wnps[j], state_.caps[j], rec.honesty[j]);
  }
  rec.mean_price = std::accumulate(rec.prices.begin(), rec.prices.end(), 0.0) / static_cast<double>(n);

  // Clients: fair-price estimates, weights and perfect request bundles.
  if (config_.resample_srp_per_pcc && config_.generator) {
    const double fair_mean = mean_fair_price(config_.wnps);
    for (std::size_t i = 0; i < m; ++i) {
      auto rng = make_stream(config_.seed, StreamKind::SrpResample, i, static_cast<std::uint64_t>(f));
      clients_[i].srp = draw_srp(fair_, fair_mean, config_.generator->tolerance, rng);
    }
  }
  weights_.assign(m, {});
  fair_estimates_.assign(m, {});
  Matrix prbs(m, n);
  parallel_for(m, config_.workers, [&](std::size_t i) {
    fair_estimates_[i] = estimate_fair_prices(rec.mean_price, clients_[i].srp);
    weights_[i] = adjust_weights(clients_[i].initial_weights, fair_estimates_[i], rec.prices, mech.beta,
                                 mech.weight_floor);
    const auto s = prepare_prb(clients_[i], fair_estimates_[i],
                               mech.prb_initial_weights ? clients_[i].initial_weights : weights_[i],
                               mech.exponent);
    std::copy(s.begin(), s.end(), prbs.row(i).begin());
  });
  rec.prb_totals = prbs.column_sums();

  // Allocation iterations.
  BaiLoopParams params;
  params.exponent = mech.exponent;
  params.max_bais = config_.max_bais;
  params.stop_tol = config_.bai_stop_tol;
  params.workers = config_.workers;
  params.pcc = f;
  const std::uint64_t seed = config_.seed;
  auto lottery = [seed, f](std::size_t j, int t) {
    return make_stream(seed, StreamKind::Lottery, j, static_cast<std::uint64_t>(f), static_cast<std::uint64_t>(t));
  };
  auto bai = run_bai_loop(clients_, weights_, capacities_, rec.prices, params, lottery, observer_);
  rec.loads = bai.loads;
  rec.bai_count = bai.bai_count;

  // Regulator.
  rec.conditions.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    rec.conditions[j] = classify(rec.loads[j], rec.prb_totals[j], capacities_[j]);
  rec.sum_abs_error = sum_abs_error(rec.prices, config_.wnps);
  const auto next = update_caps(rec.prices, rec.loads, rec.prb_totals, rec.conditions, CapRule::from(mech));

  state_.pcc = f;
  state_.prices = rec.prices;
  state_.mean_price = rec.mean_price;
  state_.prb_totals = rec.prb_totals;
  state_.loads = rec.loads;
  state_.allocations = std::move(bai.allocations);
  state_.honesty_draws = rec.honesty;
  state_.caps = next;

  trace_.records.push_back(rec);
  trace_.wall_seconds.push_back(std::chrono::duration<double>(clock::now() - started).count());
  return rec;
}

SimTrace Simulation::run() {
  while (state_.pcc < config_.max_pccs) run_pcc();
  return trace_;
}

SimTrace run_simulation(const ScenarioConfig& config) { return Simulation(config).run(); }

double sum_abs_error(std::span<const double> prices, std::span<const WnpSpec> wnps) {
  if (prices.size() != wnps.size()) throw DomainError("sum_abs_error: length mismatch");
  double err = 0.0;
  for (std::size_t j = 0; j < prices.size(); ++j) err += std::abs(prices[j] - fair_price(wnps[j]));
  return err;
}

double windowed_mean_price(const SimTrace& trace, std::size_t last_k) {
  if (last_k == 0 || trace.records.size() < last_k)
    throw DomainError("windowed_mean_price: trace shorter than window");
  double acc = 0.0;
  for (std::size_t k = trace.records.size() - last_k; k < trace.records.size(); ++k)
    acc += trace.records[k].mean_price;
  return acc / static_cast<double>(last_k);
}

std::vector<bool> demand_consistency_check(const SimTrace& trace, std::span<const WnpSpec> wnps, double tol) {
  std::vector<bool> ok(wnps.size(), true);
  if (trace.records.empty()) return ok;
  const auto& last = trace.records.back();
  for (std::size_t j = 0; j < wnps.size(); ++j)
    ok[j] = marginal_cost(wnps[j].cost, last.loads[j]) <= last.prices[j] + tol;
  return ok;
}

}  // namespace cspc
