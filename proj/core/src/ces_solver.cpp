#include "cspc/ces_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cspc/error.hpp"

namespace cspc {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double sum(std::span<const double> a) { return std::accumulate(a.begin(), a.end(), 0.0); }

void check_common(std::span<const double> weights, double exponent, std::span<const double> prices) {
  if (weights.size() != prices.size()) throw DomainError("demand problem: weights/prices length mismatch");
  if (!(std::isfinite(exponent) && exponent > 1.0)) throw DomainError("demand problem: exponent must be > 1");
  for (double w : weights)
    if (!(std::isfinite(w) && w > 0.0)) throw DomainError("demand problem: weights must be positive");
  for (double q : prices)
    if (!(std::isfinite(q) && q > 0.0)) throw DomainError("demand problem: prices must be positive");
}

/// exp(log_shape - max) so the largest entry is 1.
std::vector<double> normalised(std::vector<double> log_shape) {
  const double top = *std::max_element(log_shape.begin(), log_shape.end());
  for (double& v : log_shape) v = std::exp(v - top);
  return log_shape;
}

struct Fill {
  std::vector<double> x;
  bool active = false;  // the linear constraint holds with equality
};

// Spends `rhs` of sum_j coef_j x_j along direction `shape`, pinning goods at
// their caps when the proportional share would exceed them. For one linear
// constraint plus boxes the pinned set only grows, so at most n passes.
Fill water_fill(std::span<const double> coef, std::span<const double> shape,
                std::span<const double> caps, double rhs) {
  const std::size_t n = shape.size();
  Fill out;
  out.x.assign(n, 0.0);
  std::vector<char> pinned(n, 0);
  double pinned_spend = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (caps[j] <= 0.0 || shape[j] <= 0.0) pinned[j] = 1;  // stays at 0
  }
  for (;;) {
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (!pinned[j]) denom += coef[j] * shape[j];
    if (denom <= 0.0) return out;  // everything pinned; constraint slack
    const double t = (rhs - pinned_spend) / denom;
    bool moved = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (!pinned[j] && t * shape[j] > caps[j]) {
        pinned[j] = 1;
        out.x[j] = caps[j];
        pinned_spend += coef[j] * caps[j];
        moved = true;
      }
    }
    if (!moved) {
      for (std::size_t j = 0; j < n; ++j)
        if (!pinned[j]) out.x[j] = t * shape[j];
      out.active = true;
      return out;
    }
  }
}

DemandSolution finish(const DemandProblem& p, std::vector<double> x, const SolverTolerances& tol) {
  DemandSolution s;
  for (double& v : x) v = std::max(v, 0.0);
  s.utility = ces_utility(x, p.weights, p.exponent);
  const double spend = dot(p.prices, x);
  const double total = sum(x);
  s.active.budget = p.budget - spend <= tol.feasibility * std::max(1.0, p.budget);
  s.active.total = std::isfinite(p.total_cap) && p.total_cap - total <= tol.feasibility * std::max(1.0, p.total_cap);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double c = p.cap(j);
    if (std::isfinite(c) && x[j] >= c - tol.feasibility) s.active.capped.push_back(j);
    if (x[j] <= tol.feasibility) s.active.at_zero.push_back(j);
  }
  s.bundle = std::move(x);
  return s;
}

}  // namespace

void DemandProblem::validate() const {
  check_common(weights, exponent, prices);
  if (!(budget >= 0.0) || std::isnan(budget)) throw DomainError("demand problem: budget must be >= 0");
  if (!(total_cap >= 0.0)) throw DomainError("demand problem: total cap must be >= 0");
  if (!per_good_caps.empty()) {
    if (per_good_caps.size() != weights.size()) throw DomainError("demand problem: caps length mismatch");
    for (double c : per_good_caps)
      if (!(c >= 0.0)) throw DomainError("demand problem: caps must be >= 0");
  }
}

double ces_utility(std::span<const double> bundle, std::span<const double> weights, double exponent) {
  if (bundle.size() != weights.size()) throw DomainError("ces_utility: length mismatch");
  if (!(exponent > 1.0)) throw DomainError("ces_utility: exponent must be > 1");
  double acc = 0.0;
  for (std::size_t j = 0; j < bundle.size(); ++j) {
    if (!(bundle[j] >= 0.0)) throw DomainError("ces_utility: bundle must be non-negative");
    if (!(weights[j] > 0.0)) throw DomainError("ces_utility: weights must be positive");
    if (bundle[j] > 0.0) acc += std::pow(weights[j] * bundle[j], 1.0 / exponent);
  }
  return std::pow(acc, exponent);
}

DemandSolution solve_budget_only(std::span<const double> weights, double exponent,
                                 std::span<const double> prices, double budget) {
  check_common(weights, exponent, prices);
  if (!(budget >= 0.0)) throw DomainError("solve_budget_only: budget must be >= 0");
  const std::size_t n = weights.size();
  DemandProblem p{{weights.begin(), weights.end()}, exponent, {prices.begin(), prices.end()}, budget, kInf, {}};
  if (n == 0 || budget == 0.0) return finish(p, std::vector<double>(n, 0.0), {});

  std::vector<double> log_a(n);
  for (std::size_t j = 0; j < n; ++j)
    log_a[j] = (std::log(weights[j]) - exponent * std::log(prices[j])) / (exponent - 1.0);
  const auto a = normalised(std::move(log_a));
  const double scale = budget / dot(prices, a);
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = scale * a[j];
  return finish(p, std::move(x), {});
}

DemandSolution solve_demand(const DemandProblem& p, const SolverTolerances& tol) {
  p.validate();
  const std::size_t n = p.size();
  const double r = p.exponent;
  const double budget = p.budget;
  const double total = p.total_cap;
  if (n == 0 || budget == 0.0 || total == 0.0) return finish(p, std::vector<double>(n, 0.0), tol);

  std::vector<double> caps(n);
  for (std::size_t j = 0; j < n; ++j) caps[j] = p.cap(j);
  const std::vector<double> ones(n, 1.0);
  auto slack = [](double used, double bound) { return used <= bound + 1e-12 * std::max(1.0, bound); };

  // Caps alone.
  if (std::all_of(caps.begin(), caps.end(), [](double c) { return std::isfinite(c); }) &&
      slack(dot(p.prices, caps), budget) && slack(sum(caps), total))
    return finish(p, caps, tol);

  std::vector<double> log_w(n);
  for (std::size_t j = 0; j < n; ++j) log_w[j] = std::log(p.weights[j]) / (r - 1.0);

  // Budget binds, total slack.
  {
    std::vector<double> log_a(n);
    for (std::size_t j = 0; j < n; ++j) log_a[j] = log_w[j] - r / (r - 1.0) * std::log(p.prices[j]);
    auto fb = water_fill(p.prices, normalised(std::move(log_a)), caps, budget);
    if (fb.active && slack(sum(fb.x), total)) return finish(p, std::move(fb.x), tol);
  }

  // Total binds, budget slack.
  {
    auto ft = water_fill(ones, normalised(log_w), caps, total);
    if (slack(dot(p.prices, ft.x), budget)) return finish(p, std::move(ft.x), tol);
  }

  // Both bind. With multipliers (lambda, mu) the free goods satisfy
  // x_j ~ w_j^(1/(r-1)) (lambda q_j + mu)^(-r/(r-1)). Parametrise the ratio
  // by k = lambda / (lambda + mu) on mean-normalised prices; for each k the
  // total constraint fixes the scale, and spend q.x falls as k grows.
  const double q_mean = sum(p.prices) / static_cast<double>(n);
  auto bundle_at = [&](double k) {
    std::vector<double> log_shape(n);
    for (std::size_t j = 0; j < n; ++j)
      log_shape[j] = log_w[j] - r / (r - 1.0) * std::log(k * p.prices[j] / q_mean + (1.0 - k));
    return water_fill(ones, normalised(std::move(log_shape)), caps, total).x;
  };
  double lo = 0.0;  // spend > budget
  double hi = 1.0;  // spend <= budget
  std::vector<double> best = bundle_at(hi);
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    auto x = bundle_at(mid);
    if (dot(p.prices, x) > budget) {
      lo = mid;
    } else {
      hi = mid;
      best = std::move(x);
    }
  }
  return finish(p, std::move(best), tol);
}

DemandSolution grid_oracle(const DemandProblem& p, int points_per_axis) {
  p.validate();
  const std::size_t n = p.size();
  if (n > 4) throw DomainError("grid_oracle: refusing problems with more than 4 goods");
  if (points_per_axis < 2) throw DomainError("grid_oracle: need at least 2 points per axis");

  std::vector<double> step(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double upper = std::min({p.cap(j), p.total_cap, p.budget / p.prices[j]});
    step[j] = upper / static_cast<double>(points_per_axis - 1);
  }
  const double budget_bound = p.budget * (1.0 + 1e-12);
  const double total_bound = p.total_cap * (1.0 + 1e-12);

  std::vector<int> idx(n, 0);
  std::vector<double> x(n, 0.0);
  std::vector<double> best(n, 0.0);
  double best_u = 0.0;
  for (;;) {
    double spend = 0.0;
    double amount = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      x[j] = step[j] * idx[j];
      spend += p.prices[j] * x[j];
      amount += x[j];
    }
    if (spend <= budget_bound && amount <= total_bound) {
      const double u = ces_utility(x, p.weights, p.exponent);
      if (u > best_u) {
        best_u = u;
        best = x;
      }
    }
    std::size_t d = 0;
    while (d < n && ++idx[d] == points_per_axis) idx[d++] = 0;
    if (d == n) break;
  }
  return finish(p, std::move(best), {});
}

}  // namespace cspc
