#include "deephedge/black_scholes.hpp"

#include <cmath>

namespace deephedge {

double norm_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

double bs_price(double s, double strike, double sigma, double tau) {
  if (!(s > 0.0) || !(strike > 0.0)) throw std::invalid_argument("bs_price: s, K must be > 0");
  if (!(tau >= 0.0)) throw std::invalid_argument("bs_price: tau must be >= 0");
  const double vol_sqrt_tau = sigma * std::sqrt(tau);
  if (vol_sqrt_tau <= 0.0) {
    const double intrinsic = s - strike;
    return intrinsic > 0.0 ? intrinsic : 0.0;
  }
  const double d1 = (std::log(s / strike) + 0.5 * vol_sqrt_tau * vol_sqrt_tau) / vol_sqrt_tau;
  const double d2 = d1 - vol_sqrt_tau;
  return s * norm_cdf(d1) - strike * norm_cdf(d2);
}

double bs_delta(double s, double strike, double sigma, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("bs_delta: tau must be > 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("bs_delta: sigma must be > 0");
  const double vol_sqrt_tau = sigma * std::sqrt(tau);
  const double d1 = (std::log(s / strike) + 0.5 * vol_sqrt_tau * vol_sqrt_tau) / vol_sqrt_tau;
  return norm_cdf(d1);
}

double realized_vol(const PathSet& paths) {
  const int n_paths = paths.n_paths();
  const int n_steps = paths.n_steps();
  const long n_obs = static_cast<long>(n_paths) * n_steps;
  if (n_obs < 2) throw std::invalid_argument("realized_vol: needs at least two log returns");

  double sum = 0.0;
  for (int p = 0; p < n_paths; ++p) {
    for (int k = 0; k < n_steps; ++k) {
      sum += std::log(paths.spot(p, k + 1) / paths.spot(p, k));
    }
  }
  const double mean = sum / static_cast<double>(n_obs);

  double sq = 0.0;
  for (int p = 0; p < n_paths; ++p) {
    for (int k = 0; k < n_steps; ++k) {
      const double d = std::log(paths.spot(p, k + 1) / paths.spot(p, k)) - mean;
      sq += d * d;
    }
  }
  return std::sqrt(sq / static_cast<double>(n_obs) / paths.grid.dt());
}

HedgeResult bs_hedge_pnl(const PathSet& paths, const Claim& claim, double sigma_hedge,
                         double vol_shift) {
  const double vol = sigma_hedge + vol_shift;
  if (!(vol > 0.0)) throw std::invalid_argument("bs_hedge_pnl: shifted volatility must be > 0");

  const int n_paths = paths.n_paths();
  const int n_steps = paths.n_steps();
  HedgeResult out;
  out.task_id = paths.task_id;
  out.deltas.resize(n_paths, n_steps);
  out.pnl.resize(n_paths);

  // Hedge position offsetting the claim: -sign * N(d1), i.e. +N(d1) when short.
  const double hedge_sign = -claim.sign;
  double premium_sum = 0.0;
  for (int p = 0; p < n_paths; ++p) {
    double gains_acc = 0.0;
    for (int k = 0; k < n_steps; ++k) {
      const double tau = paths.grid.maturity - paths.grid.time(k);
      const double delta = hedge_sign * bs_delta(paths.spot(p, k), claim.strike, vol, tau);
      out.deltas(p, k) = delta;
      gains_acc += delta * (paths.spot(p, k + 1) - paths.spot(p, k));
    }
    const double terminal = paths.spot(p, n_steps);
    out.pnl(p) = payoff(claim, terminal) + gains_acc;
    const double call = terminal - claim.strike;
    premium_sum += call > 0.0 ? call : 0.0;
  }
  out.premium = premium_sum / n_paths;
  return out;
}

}  // namespace deephedge
