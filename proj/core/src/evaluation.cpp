#include "deephedge/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace deephedge {

namespace {

double sample_mean(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Sample variance, n-1 denominator.
double sample_variance(std::span<const double> xs, double mean) {
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  return sq / static_cast<double>(xs.size() - 1);
}

}  // namespace

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p must be in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

PnLStats pnl_stats(std::span<const HedgeResult> results) {
  if (results.empty()) throw std::invalid_argument("pnl_stats: no results");

  PnLStats stats;
  std::vector<double> pooled;
  for (const HedgeResult& r : results) {
    if (r.n_paths() < 2) throw std::invalid_argument("pnl_stats: each task needs >= 2 samples");
    std::span<const double> pnl(r.pnl.data(), static_cast<std::size_t>(r.pnl.size()));
    const double mean = sample_mean(pnl);
    const double var = sample_variance(pnl, mean);
    stats.per_task.push_back({r.task_id, mean, std::sqrt(var), var});
    pooled.insert(pooled.end(), pnl.begin(), pnl.end());
  }

  stats.mean = sample_mean(pooled);
  stats.stddev = std::sqrt(sample_variance(pooled, stats.mean));
  auto [min_it, max_it] =
      std::minmax_element(stats.per_task.begin(), stats.per_task.end(),
                          [](const TaskStat& a, const TaskStat& b) { return a.stddev < b.stddev; });
  stats.std_min = min_it->stddev;
  stats.std_max = max_it->stddev;
  stats.quantile_1pct = quantile(pooled, 0.01);
  stats.quantile_10pct = quantile(pooled, 0.10);
  return stats;
}

VarianceAggregate variance_aggregate(std::span<const HedgeResult> results) {
  if (results.empty()) throw std::invalid_argument("variance_aggregate: no results");
  std::vector<double> variances;
  variances.reserve(results.size());
  for (const HedgeResult& r : results) {
    std::span<const double> pnl(r.pnl.data(), static_cast<std::size_t>(r.pnl.size()));
    variances.push_back(sample_variance(pnl, sample_mean(pnl)));
  }
  VarianceAggregate agg;
  agg.mean_variance = sample_mean(variances);
  agg.median_variance = quantile(variances, 0.5);
  agg.max_variance = *std::max_element(variances.begin(), variances.end());
  return agg;
}

Histogram histogram(std::span<const double> samples, int n_bins, double lo, double hi) {
  if (n_bins < 1) throw std::invalid_argument("histogram: n_bins must be >= 1");
  if (!(hi > lo)) throw std::invalid_argument("histogram: range must satisfy hi > lo");
  Histogram h{lo, hi, std::vector<long>(static_cast<std::size_t>(n_bins), 0)};
  const double width = (hi - lo) / n_bins;
  for (double x : samples) {
    auto bin = static_cast<long>(std::floor((x - lo) / width));
    bin = std::clamp(bin, 0L, static_cast<long>(n_bins - 1));
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  return h;
}

std::vector<DeltaSlicePoint> delta_slice(const NetworkParams& params, int task_id,
                                         const Claim& claim, double tau,
                                         std::span<const double> spots, double bs_sigma) {
  if (!(tau > 0.0)) throw std::invalid_argument("delta_slice: tau must be > 0");
  std::vector<DeltaSlicePoint> out;
  out.reserve(spots.size());
  const double hedge_sign = -claim.sign;
  for (double s : spots) {
    FeatureRow feature{std::log(s / claim.strike), tau};
    out.push_back({s, forward_delta(params, task_id, feature),
                   hedge_sign * bs_delta(s, claim.strike, bs_sigma, tau)});
  }
  return out;
}

double implied_vol(double price, double s, double strike, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("implied_vol: tau must be > 0");
  const double intrinsic = s > strike ? s - strike : 0.0;
  if (!(price > intrinsic) || !(price < s))
    throw std::domain_error("implied_vol: price outside arbitrage bounds");

  double lo = 1e-10;
  double hi = 1.0;
  while (bs_price(s, strike, hi, tau) < price) {
    hi *= 2.0;
    if (hi > 1e3) throw std::domain_error("implied_vol: no bracketing volatility");
  }
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    if (bs_price(s, strike, mid, tau) < price) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<EmbeddingRow> export_embeddings(const NetworkParams& params,
                                            std::span<const TaskMeta> tasks) {
  std::vector<EmbeddingRow> rows;
  rows.reserve(tasks.size());
  for (const TaskMeta& t : tasks) {
    EmbeddingRow row;
    row.task_id = t.task_id;
    row.model_kind = t.model.kind_name();
    const auto e = embed(params, t.task_id);
    row.embedding.assign(e.data(), e.data() + e.size());
    row.atm_price = t.atm_price;
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

// Average ranks, ties share the mean rank.
std::vector<double> ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> rank(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mean_rank;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("spearman: need two samples of equal size >= 2");
  const std::vector<double> ra = ranks(a);
  const std::vector<double> rb = ranks(b);
  const double ma = sample_mean(ra);
  const double mb = sample_mean(rb);
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) throw std::invalid_argument("spearman: constant input");
  return cov / std::sqrt(va * vb);
}

HedgeResult evaluate_hedge(const NetworkParams& params, const Claim& claim, const PathSet& paths,
                           int task_id) {
  const int n_paths = paths.n_paths();
  const int n_steps = paths.n_steps();
  HedgeResult out;
  out.task_id = task_id;
  out.deltas.resize(n_paths, n_steps);
  out.pnl.resize(n_paths);

  std::vector<double> taus(static_cast<std::size_t>(n_steps));
  for (int k = 0; k < n_steps; ++k)
    taus[static_cast<std::size_t>(k)] = paths.grid.maturity - paths.grid.time(k);
  const auto embedding = embed(params, task_id);

  // Fixed chunking keeps the evaluation bit-stable for a given path count.
  constexpr int kChunk = 4096;
  Eigen::MatrixXd input(params.arch.input_dim(), static_cast<Eigen::Index>(kChunk) * n_steps);
  ForwardCache cache;
  double premium_sum = 0.0;
  for (int begin = 0; begin < n_paths; begin += kChunk) {
    const int count = std::min(kChunk, n_paths - begin);
    const Eigen::Index n_samples = static_cast<Eigen::Index>(count) * n_steps;
    input.resize(Eigen::NoChange, n_samples);
    for (int i = 0; i < count; ++i) {
      for (int k = 0; k < n_steps; ++k) {
        const Eigen::Index col = static_cast<Eigen::Index>(i) * n_steps + k;
        input(0, col) = std::log(paths.spot(begin + i, k) / claim.strike);
        input(1, col) = taus[static_cast<std::size_t>(k)];
        input.col(col).tail(params.arch.embed_dim) = embedding;
      }
    }
    forward_batch(params, input, cache);
    for (int i = 0; i < count; ++i) {
      const int p = begin + i;
      double acc = payoff(claim, paths.spot(p, n_steps));
      for (int k = 0; k < n_steps; ++k) {
        const double delta = cache.output(static_cast<Eigen::Index>(i) * n_steps + k);
        out.deltas(p, k) = delta;
        acc += delta * (paths.spot(p, k + 1) - paths.spot(p, k));
      }
      out.pnl(p) = acc;
      const double call = paths.spot(p, n_steps) - claim.strike;
      premium_sum += call > 0.0 ? call : 0.0;
    }
  }
  out.premium = premium_sum / n_paths;
  return out;
}

}  // namespace deephedge
