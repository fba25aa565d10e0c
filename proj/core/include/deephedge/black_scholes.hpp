#pragma once

#include "deephedge/claims.hpp"
#include "deephedge/market_models.hpp"

namespace deephedge {

// Standard normal CDF via the error-function identity N(x) = erfc(-x/sqrt2)/2;
// absolute error well below 1e-10 everywhere.
double norm_cdf(double x);

// Zero-rate Black-Scholes call price s N(d1) - K N(d2) with
// d1 = (ln(s/K) + sigma^2 tau / 2) / (sigma sqrt(tau)). At tau = 0 (or
// sigma = 0) the price degenerates to the intrinsic value (s - K)^+.
double bs_price(double s, double strike, double sigma, double tau);

// Call delta N(d1); requires tau > 0.
double bs_delta(double s, double strike, double sigma, double tau);

// Annualized volatility of the pooled per-step log returns over all paths,
// mean log-return removed: sqrt(mean((dlog S - mean)^2) / dt).
double realized_vol(const PathSet& paths);

// Delta-hedges the claim along every path with the Black-Scholes hedge ratio
// at volatility sigma_hedge + vol_shift. For a short call this holds
// +N(d1) units of the underlying. The premium reported in the result is the
// Monte Carlo mean of the undiscounted call payoff over these paths.
HedgeResult bs_hedge_pnl(const PathSet& paths, const Claim& claim, double sigma_hedge,
                         double vol_shift = 0.0);

}  // namespace deephedge
