#include <doctest.h>

#include <cmath>

#include "deephedge/black_scholes.hpp"
#include "deephedge/rng.hpp"

using namespace deephedge;

namespace {

const TimeGrid kDailyGrid(30, 30.0 / 365.0);

}  // namespace

TEST_CASE("bs_price ATM value cross-checked against a Monte Carlo oracle") {
  const double sigma = 0.33;
  const double tau = 30.0 / 365.0;
  const double price = bs_price(1.0, 1.0, sigma, tau);
  // Frozen from an extended-precision evaluation of s N(d1) - K N(d2).
  CHECK(price == doctest::Approx(0.0377290836152783).epsilon(1e-12));

  // Independent oracle: mean payoff over exact GBM terminal draws.
  PathRng rng(substream_key(2024, 0));
  const int n = 10'000'000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double st = std::exp(-0.5 * sigma * sigma * tau + sigma * std::sqrt(tau) * rng.normal());
    const double pay = st > 1.0 ? st - 1.0 : 0.0;
    sum += pay;
    sq += pay * pay;
  }
  const double mc_mean = sum / n;
  const double mc_stderr = std::sqrt((sq / n - mc_mean * mc_mean) / n);
  CHECK(std::abs(price - mc_mean) < 3.0 * mc_stderr);
}

TEST_CASE("bs_price degenerates to intrinsic value and saturates for large vol") {
  CHECK(bs_price(1.2, 1.0, 0.33, 0.0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(bs_price(0.8, 1.0, 0.33, 0.0) == 0.0);
  // Monotone in total vol and approaching s from below.
  double prev = 0.0;
  for (double sigma : {0.5, 1.0, 2.0, 5.0}) {
    const double p = bs_price(1.0, 1.0, sigma, 4.0);
    CHECK(p > prev);
    CHECK(p < 1.0);
    prev = p;
  }
  CHECK(prev > 0.999);
}

TEST_CASE("bs_delta matches a finite-difference oracle and its limits") {
  const double sigma = 0.33;
  const double tau = 30.0 / 365.0;
  CHECK(bs_delta(1.0, 1.0, sigma, tau) == doctest::Approx(0.518864541807639).epsilon(1e-12));

  const double h = 1e-6;
  for (double s : {0.85, 0.95, 1.0, 1.1, 1.25}) {
    const double fd = (bs_price(s + h, 1.0, sigma, tau) - bs_price(s - h, 1.0, sigma, tau)) / (2 * h);
    CHECK(std::abs(bs_delta(s, 1.0, sigma, tau) - fd) < 1e-6);
  }

  CHECK(bs_delta(10.0, 1.0, sigma, tau) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(bs_delta(0.1, 1.0, sigma, tau) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("delta equals dprice/ds on a grid of spots and maturities") {
  const double h = 1e-6;
  for (double tau : {5.0 / 365.0, 30.0 / 365.0, 0.5}) {
    for (double s = 0.8; s <= 1.21; s += 0.05) {
      const double fd = (bs_price(s + h, 1.0, 0.4, tau) - bs_price(s - h, 1.0, 0.4, tau)) / (2 * h);
      CHECK(std::abs(bs_delta(s, 1.0, 0.4, tau) - fd) < 1e-6);
    }
  }
}

TEST_CASE("realized_vol recovers the GBM volatility and handles degenerate inputs") {
  SUBCASE("consistency on a large GBM sample") {
    const PathSet paths = simulate(GbmParams{0.0, 0.2}, TimeGrid(30, 30.0 / 365.0), 100'000, 1.0, 5);
    CHECK(realized_vol(paths) == doctest::Approx(0.2).epsilon(1.5e-3));
  }
  SUBCASE("constant paths have zero volatility") {
    const PathSet paths = simulate(GbmParams{0.0, 0.0}, TimeGrid(4, 4.0 / 365.0), 3, 1.0, 5);
    CHECK(realized_vol(paths) == 0.0);
  }
  SUBCASE("two equal and opposite log moves give sqrt(x^2 * 365) on a daily grid") {
    const double x = 0.01;
    PathSet paths = simulate(GbmParams{0.0, 0.0}, TimeGrid(2, 2.0 / 365.0), 1, 1.0, 5);
    paths.spot(0, 0) = 1.0;
    paths.spot(0, 1) = std::exp(x);
    paths.spot(0, 2) = 1.0;
    CHECK(realized_vol(paths) == doctest::Approx(x * std::sqrt(365.0)).epsilon(1e-12));
  }
  SUBCASE("single observation is rejected") {
    const PathSet paths = simulate(GbmParams{0.0, 0.1}, TimeGrid(1, 1.0 / 365.0), 1, 1.0, 5);
    CHECK_THROWS_AS(realized_vol(paths), std::invalid_argument);
  }
}

TEST_CASE("bs_hedge_pnl on constant paths is exactly zero for an ATM short call") {
  PathSet paths = simulate(GbmParams{0.0, 0.0}, kDailyGrid, 4, 1.0, 1);
  const HedgeResult result = bs_hedge_pnl(paths, Claim::short_call(1.0), 0.33);
  CHECK((result.pnl.array() == 0.0).all());
  CHECK(result.premium == 0.0);
}

TEST_CASE("bs_hedge_pnl matches an independent reimplementation") {
  const PathSet paths = simulate(GbmParams{0.0, 0.33}, kDailyGrid, 200, 1.0, 77);
  const Claim claim = Claim::short_call(1.0);
  const HedgeResult result = bs_hedge_pnl(paths, claim, 0.33, 0.0);

  // Straightforward per-path loop written independently of the implementation.
  for (int p = 0; p < paths.n_paths(); ++p) {
    double cash = 0.0;
    double prev_delta = 0.0;
    for (int k = 0; k < paths.n_steps(); ++k) {
      const double tau = paths.grid.maturity - paths.grid.time(k);
      const double s = paths.spot(p, k);
      const double d1 = (std::log(s / 1.0) + 0.5 * 0.33 * 0.33 * tau) / (0.33 * std::sqrt(tau));
      const double delta = 0.5 * std::erfc(-d1 / std::sqrt(2.0));
      cash -= (delta - prev_delta) * s;  // rebalance
      prev_delta = delta;
    }
    const double s_t = paths.spot(p, paths.n_steps());
    const double liquidation = prev_delta * s_t + cash;
    const double payoff_short = -(s_t > 1.0 ? s_t - 1.0 : 0.0);
    CHECK(result.pnl(p) == doctest::Approx(payoff_short + liquidation).epsilon(1e-10));
  }
  CHECK(result.deltas.minCoeff() >= 0.0);
  CHECK(result.deltas.maxCoeff() <= 1.0);
}

TEST_CASE("bs_hedge_pnl applies vol shifts and rejects non-positive shifted vols") {
  const PathSet paths = simulate(GbmParams{0.0, 0.3}, kDailyGrid, 50, 1.0, 9);
  const Claim claim = Claim::short_call(1.0);
  const HedgeResult down = bs_hedge_pnl(paths, claim, 0.3, -0.05);
  const HedgeResult up = bs_hedge_pnl(paths, claim, 0.3, +0.05);
  CHECK(down.deltas(0, 0) != up.deltas(0, 0));
  CHECK_THROWS_AS(bs_hedge_pnl(paths, claim, 0.05, -0.05), std::invalid_argument);
}

TEST_CASE("discrete-hedging error shrinks roughly like 1/sqrt(n_steps)") {
  const Claim claim = Claim::short_call(1.0);
  auto hedged_std = [&](int n_steps) {
    const PathSet paths =
        simulate(GbmParams{0.0, 0.33}, TimeGrid(n_steps, 30.0 / 365.0), 20'000, 1.0, 123);
    const HedgeResult r = bs_hedge_pnl(paths, claim, 0.33);
    const double mean = r.pnl.mean();
    return std::sqrt((r.pnl.array() - mean).square().sum() / (r.pnl.size() - 1));
  };
  const double ratio = hedged_std(60) / hedged_std(30);
  CHECK(ratio > 0.6);
  CHECK(ratio < 0.85);
}
