#pragma once

#include <span>
#include <string>
#include <vector>

#include "deephedge/black_scholes.hpp"
#include "deephedge/claims.hpp"
#include "deephedge/market_models.hpp"
#include "deephedge/neural.hpp"

namespace deephedge {

// Aggregate PnL statistics in the layout of the reported tables: pooled
// mean/std over all tasks' PnLs, per-task std extremes and empirical
// quantiles. Sample statistics use the n-1 denominator; quantiles use linear
// interpolation between order statistics.
struct TaskStat {
  int task_id = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double variance = 0.0;
};

struct PnLStats {
  double mean = 0.0;
  double stddev = 0.0;   // pooled
  double std_min = 0.0;  // per-task extremes
  double std_max = 0.0;
  double quantile_1pct = 0.0;
  double quantile_10pct = 0.0;
  std::vector<TaskStat> per_task;
};

PnLStats pnl_stats(std::span<const HedgeResult> results);

// Mean/median/max over the per-task PnL variances.
struct VarianceAggregate {
  double mean_variance = 0.0;
  double median_variance = 0.0;
  double max_variance = 0.0;
};

VarianceAggregate variance_aggregate(std::span<const HedgeResult> results);

// Fixed-width histogram over [lo, hi); samples outside the range are clipped
// into the end bins, so the counts always sum to the sample count.
struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<long> counts;

  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
};

Histogram histogram(std::span<const double> samples, int n_bins, double lo, double hi);

// Network hedge ratio against the Black-Scholes benchmark delta on a spot
// grid at fixed time to maturity (the delta-versus-spot figure).
struct DeltaSlicePoint {
  double spot = 0.0;
  double model_delta = 0.0;
  double bs_delta = 0.0;
};

std::vector<DeltaSlicePoint> delta_slice(const NetworkParams& params, int task_id,
                                         const Claim& claim, double tau,
                                         std::span<const double> spots, double bs_sigma);

// Implied volatility of a zero-rate call by bracketed bisection to
// |d sigma| < 1e-8. The price must lie strictly inside the arbitrage bounds
// ((s-K)^+, s); otherwise throws std::domain_error.
double implied_vol(double price, double s, double strike, double tau);

// Per-task metadata for the embedding export.
struct TaskMeta {
  int task_id = 0;
  ModelSpec model;
  double atm_price = 0.0;
};

struct EmbeddingRow {
  int task_id = 0;
  std::string model_kind;
  std::vector<double> embedding;
  double atm_price = 0.0;
};

// One row per task: id, model kind, embedding components (bit-equal to the
// parameter table) and the task's ATM option price.
std::vector<EmbeddingRow> export_embeddings(const NetworkParams& params,
                                            std::span<const TaskMeta> tasks);

// Spearman rank correlation (average ranks on ties).
double spearman(std::span<const double> a, std::span<const double> b);

// Empirical quantile with linear interpolation between order statistics
// (values need not be sorted).
double quantile(std::span<const double> values, double p);

// Hedges every path of `paths` with the network (embedding row task_id) and
// returns deltas, terminal PnLs (premium excluded) and the Monte Carlo
// premium. Deterministic for fixed inputs.
HedgeResult evaluate_hedge(const NetworkParams& params, const Claim& claim, const PathSet& paths,
                           int task_id);

}  // namespace deephedge
