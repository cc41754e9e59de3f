#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cspc/client.hpp"
#include "cspc/config.hpp"
#include "cspc/error.hpp"
#include "cspc/provider.hpp"
#include "cspc/regulator.hpp"

using namespace cspc;

namespace {

ClientSpec client(double budget, double requirement, std::vector<double> w) {
  ClientSpec c;
  c.budget = budget;
  c.requirement = requirement;
  c.srp.assign(w.size(), 1.0);
  c.initial_weights = std::move(w);
  return c;
}

WnpSpec wnp(double spectrum, double eff, double mc) {
  WnpSpec w;
  w.spectrum_mhz = spectrum;
  w.efficiency = eff;
  w.cost = ConstantMarginalCost{mc};
  return w;
}

}  // namespace

// ---------------------------------------------------------------- client

TEST_CASE("fair price estimates") {
  const auto p = estimate_fair_prices(20.0, std::vector<double>{1.1, 0.9});
  CHECK(p[0] == doctest::Approx(22.0));
  CHECK(p[1] == doctest::Approx(18.0));
  const auto flat = estimate_fair_prices(13.5, std::vector<double>{1, 1, 1});
  CHECK(flat == std::vector<double>{13.5, 13.5, 13.5});
  CHECK_THROWS_AS(estimate_fair_prices(0.0, std::vector<double>{1, 1}), DomainError);
}

TEST_CASE("weight adjustment examples") {
  const std::vector<double> w0{1.0, 0.8, 1.2};
  const std::vector<double> p{20.0, 30.0, 12.0};
  CHECK(adjust_weights(w0, p, p, 2.0, 1e-6) == w0);

  const auto up = adjust_weights(std::vector<double>{1.0}, std::vector<double>{22.0}, std::vector<double>{20.0}, 2.0, 1e-6);
  CHECK(up[0] == doctest::Approx(1.2));
  const auto floor = adjust_weights(std::vector<double>{1.0}, std::vector<double>{10.0}, std::vector<double>{40.0}, 2.0, 1e-6);
  CHECK(floor[0] == 1e-6);
  CHECK_THROWS_AS(adjust_weights(w0, p, std::vector<double>{1, 0, 1}, 2.0, 1e-6), DomainError);
}

TEST_CASE("honest fixed point: estimates equal prices and weights stay put") {
  auto c = preset("setting2");
  c.generator->tolerance = 0.0;
  const auto fair = fair_prices(c.wnps);
  const double mean = std::accumulate(fair.begin(), fair.end(), 0.0) / static_cast<double>(fair.size());
  for (const auto& cl : materialize_clients(c)) {
    const auto est = estimate_fair_prices(mean, cl.srp);
    double worst = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < fair.size(); ++j) {
      worst = std::max(worst, std::abs(est[j] - fair[j]));
      norm = std::max(norm, std::abs(fair[j]));
    }
    CHECK(worst / norm <= 1e-15);
    const auto w = adjust_weights(cl.initial_weights, est, fair, c.mechanism.beta, c.mechanism.weight_floor);
    for (std::size_t j = 0; j < w.size(); ++j) CHECK(w[j] == doctest::Approx(cl.initial_weights[j]).epsilon(1e-14));
  }
}

TEST_CASE("a single overpricing provider loses weight, the others gain") {
  for (const char* name : {"setting1", "setting2"}) {
    auto c = preset(name);
    const auto fair = fair_prices(c.wnps);
    const double tau = c.generator->tolerance;
    for (std::size_t k = 0; k < fair.size(); ++k) {
      // Delta large enough to dominate the srp noise (|eps| <= tau).
      const double delta = 4.0 * tau * *std::max_element(fair.begin(), fair.end()) * static_cast<double>(fair.size());
      auto prices = fair;
      prices[k] += delta;
      const double mean = std::accumulate(prices.begin(), prices.end(), 0.0) / static_cast<double>(prices.size());
      for (const auto& cl : materialize_clients(c)) {
        const auto est = estimate_fair_prices(mean, cl.srp);
        const auto w = adjust_weights(cl.initial_weights, est, prices, c.mechanism.beta, c.mechanism.weight_floor);
        for (std::size_t j = 0; j < w.size(); ++j) {
          if (j == k) {
            CHECK(w[j] < cl.initial_weights[j]);
          } else {
            // The direction holds up to the srp noise: p_hat_j / MC_j >=
            // (mean / MC_bar) (1 - tau), which exceeds 1 for this delta.
            CHECK(w[j] > cl.initial_weights[j]);
          }
        }
      }
    }
  }
}

TEST_CASE("perfect request bundle examples") {
  SUBCASE("symmetric client splits its requirement evenly") {
    const auto c = client(1e6, 9.0, {1, 1, 1});
    const auto s = prepare_prb(c, std::vector<double>{2, 2, 2}, c.initial_weights, 2.0);
    for (double v : s) CHECK(v == doctest::Approx(3.0));
  }
  SUBCASE("budget-limited client") {
    const auto c = client(10.0, kInf, {4, 1});
    const auto s = prepare_prb(c, std::vector<double>{1, 1}, c.initial_weights, 2.0);
    CHECK(s[0] == doctest::Approx(8.0));
    CHECK(s[1] == doctest::Approx(2.0));
  }
  SUBCASE("no budget") {
    const auto c = client(0.0, 5.0, {1, 2});
    const auto s = prepare_prb(c, std::vector<double>{1, 1}, c.initial_weights, 2.0);
    CHECK(s == std::vector<double>{0, 0});
  }
}

TEST_CASE("request bundle examples") {
  ClientPccView v;
  v.adjusted_weights = {4, 1};
  v.remaining_budget = 10.0;
  v.remaining_requirement = kInf;
  SUBCASE("sold-out market") {
    const auto r = prepare_request_bundle(v, std::vector<double>{1, 1}, std::vector<double>{0, 0}, 2.0);
    CHECK(r == std::vector<double>{0, 0});
  }
  SUBCASE("provider capacity binds") {
    const auto r = prepare_request_bundle(v, std::vector<double>{1, 1}, std::vector<double>{3, kInf}, 2.0);
    CHECK(r[0] == doctest::Approx(3.0));
    CHECK(r[1] == doctest::Approx(7.0));
  }
  SUBCASE("equals the perfect bundle when nothing else differs") {
    const auto c = client(12.0, 7.0, {1.3, 0.7, 1.1});
    const std::vector<double> p{1.5, 2.5, 1.0};
    const auto s = prepare_prb(c, p, c.initial_weights, 2.0);
    ClientPccView w;
    w.adjusted_weights = c.initial_weights;
    w.remaining_budget = c.budget;
    w.remaining_requirement = c.requirement;
    const auto r = prepare_request_bundle(w, p, std::vector<double>{kInf, kInf, kInf}, 2.0);
    for (std::size_t j = 0; j < 3; ++j) CHECK(r[j] == doctest::Approx(s[j]));
  }
}

// -------------------------------------------------------------- provider

TEST_CASE("price announcement") {
  const auto w = wnp(30, 8, 19.68);
  CHECK(announce_price(w, 50.0, true) == 19.68);
  CHECK(announce_price(w, 15.0, true) == 15.0);
  CHECK(announce_price(w, 41.05, false) == 41.05);
}

TEST_CASE("lottery allocation examples") {
  const std::vector<std::size_t> id{0, 1};
  CHECK(allocate(std::vector<double>{2, 3}, 10.0, id) == std::vector<double>{2, 3});
  // Clients c1, c2, c3 at indices 0, 1, 2; lottery order c2, c1, c3.
  const auto x = allocate(std::vector<double>{6, 5, 4}, 10.0, std::vector<std::size_t>{1, 0, 2});
  CHECK(x == std::vector<double>{5, 5, 0});
  CHECK(allocate(std::vector<double>{1, 2, 3}, 0.0, std::vector<std::size_t>{2, 1, 0}) ==
        std::vector<double>{0, 0, 0});
}

TEST_CASE("lottery grants min(demand, supply) and never more than requested") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int k = 0; k < 500; ++k) {
    const std::size_t m = 1 + static_cast<std::size_t>(k % 9);
    std::vector<double> req(m);
    for (double& v : req) v = u(rng) < 2.0 ? 0.0 : u(rng);
    const double avail = u(rng) * static_cast<double>(m) * 0.7;
    auto e = make_stream(5, StreamKind::Lottery, static_cast<std::uint64_t>(k));
    const auto order = random_permutation(e, m);
    const auto x = allocate(req, avail, order);
    const double total = std::accumulate(req.begin(), req.end(), 0.0);
    CHECK(std::accumulate(x.begin(), x.end(), 0.0) == doctest::Approx(std::min(total, avail)).epsilon(1e-12));
    for (std::size_t i = 0; i < m; ++i) {
      CHECK(x[i] >= 0.0);
      CHECK(x[i] <= req[i]);
    }
  }
}

TEST_CASE("profit examples") {
  const CostModel c = ConstantMarginalCost{19.68};
  CHECK(wnp_profit(20.0, 240.0, c, 240.0) == doctest::Approx(76.8));
  CHECK(wnp_profit(20.0, 0.0, c, 240.0) == doctest::Approx(-19.68 * 240.0));
  CHECK(wnp_profit(19.68, 240.0, c, 240.0) == doctest::Approx(0.0));
  for (double p : {19.68, 21.0, 50.0}) CHECK(wnp_profit(p, 240.0, c, 240.0) >= -1e-9);
}

TEST_CASE("honesty draws") {
  auto rng = make_stream(1, StreamKind::Honesty);
  CHECK(draw_honesty(AlwaysHonest{}, 5, rng));
  CHECK_FALSE(draw_honesty(AlwaysUnfair{}, 5, rng));
  const auto until = HonestyPolicy::honest_until(3, AlwaysUnfair{});
  CHECK(draw_honesty(until, 1, rng));
  CHECK(draw_honesty(until, 3, rng));
  CHECK_FALSE(draw_honesty(until, 4, rng));
  CHECK_FALSE(draw_honesty(HonestWithProb{0.0}, 2, rng));
  CHECK(draw_honesty(HonestWithProb{1.0}, 2, rng));

  int honest = 0;
  for (int f = 0; f < 4000; ++f) {
    auto e = make_stream(9, StreamKind::Honesty, 0, static_cast<std::uint64_t>(f));
    honest += draw_honesty(HonestWithProb{0.3}, f, e) ? 1 : 0;
  }
  CHECK(honest / 4000.0 == doctest::Approx(0.3).epsilon(0.1));
}

// ------------------------------------------------------------- regulator

TEST_CASE("classification examples") {
  CHECK(classify(100, 200, 240) == PccCondition::OverPriced);
  CHECK(classify(240, 300, 240) == PccCondition::CapacityLimited);
  CHECK(classify(200, 150, 240) == PccCondition::FairPriced);
  CHECK(classify(50, 50, 240) == PccCondition::FairPriced);
  CHECK(to_string(PccCondition::CapacityLimited) == "capacity_limited");
  CHECK(condition_from_string("over_priced") == PccCondition::OverPriced);
  CHECK_THROWS_AS(condition_from_string("cheap"), DomainError);
}

TEST_CASE("cap update examples") {
  CapRule rule;
  rule.reward_capacity_limited = false;
  CHECK(next_cap(10.0, 50, 50, PccCondition::FairPriced, rule) == doctest::Approx(10.5));
  CHECK(next_cap(10.0, 100, 200, PccCondition::OverPriced, rule) == doctest::Approx(9.0));
  CHECK(next_cap(10.0, 0, 0, PccCondition::FairPriced, rule) == doctest::Approx(21.0));
  CHECK(next_cap(10.0, 190, 200, PccCondition::OverPriced, rule) == doctest::Approx(9.5));
  CHECK(next_cap(10.0, 240, 300, PccCondition::CapacityLimited, rule) == doctest::Approx(9.0));
  rule.reward_capacity_limited = true;
  CHECK(next_cap(10.0, 240, 300, PccCondition::CapacityLimited, rule) == doctest::Approx(10.5));
  CHECK(next_cap(10.0, 100, 200, PccCondition::OverPriced, rule) == doctest::Approx(9.0));

  const std::vector<double> p{10, 20}, l{50, 100}, s{50, 200};
  const auto caps = update_caps(p, l, s, {}, rule);
  CHECK(caps[0] == doctest::Approx(10.5));
  CHECK(caps[1] == doctest::Approx(18.0));
}

TEST_CASE("cap update stays within the punishment and reward bounds") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (bool reward : {false, true}) {
    CapRule rule;
    rule.reward_capacity_limited = reward;
    for (int k = 0; k < 2000; ++k) {
      const double p = 0.1 + 100 * u(rng);
      const double cap = 500 * u(rng);
      const double load = cap * u(rng);
      const double prb = u(rng) < 0.05 ? 0.0 : 600 * u(rng);
      const auto cond = classify(load, prb, cap);
      const double next = next_cap(p, load, prb, cond, rule);
      CHECK(next >= rule.gamma * p - 1e-12);
      CHECK(next <= rule.ratio_clamp * rule.xi * p + 1e-12);
    }
  }
}
