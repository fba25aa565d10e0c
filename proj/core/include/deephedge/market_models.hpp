#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "deephedge/time_grid.hpp"

namespace deephedge {

// ---------------------------------------------------------------------------
// Model parameterizations. All dynamics are simulated with zero rates and
// dividends; the discounted spot is a martingale for every model (the jump
// models carry explicit compensators).
// ---------------------------------------------------------------------------

// dS = mu * S dt + sigma * S dW
struct GbmParams {
  double mu = 0.0;
  double sigma = 0.0;  // per sqrt(year), > 0 (0 allowed only for degenerate tests)
};

// dS = sqrt(v) S dW,  dv = kappa (eta - v) dt + theta sqrt(v) dW~,
// Cov[dW dW~] = rho dt
struct HestonParams {
  double v0 = 0.0;     // initial variance
  double kappa = 0.0;  // mean-reversion rate
  double eta = 0.0;    // long-run variance
  double theta = 0.0;  // vol of vol
  double rho = 0.0;    // correlation in [-1, 1]
};

// Heston diffusion plus lognormal jumps arriving as a Poisson process with
// intensity jump_intensity; log(1+J) ~ N(log(1+jump_mean) - jump_vol^2/2,
// jump_vol^2) so E[1+J] = 1 + jump_mean, and the drift compensator
// -jump_intensity * jump_mean * dt keeps the spot a martingale.
struct HestonJumpParams {
  HestonParams heston;
  double jump_intensity = 0.0;  // per year, >= 0
  double jump_mean = 0.0;       // mean relative jump size, > -1
  double jump_vol = 0.0;        // std of log(1+J), >= 0
};

// Barndorff-Nielsen-Shephard: log-price with OU variance driven by a compound
// Poisson subordinator z (intensity a, exponential marks with mean 1/b) under
// the time change t -> lambda t. rho <= 0 couples variance jumps into the
// log-price.
struct BnsParams {
  double sigma0_sq = 0.0;  // initial variance
  double lambda = 0.0;     // OU decay rate, > 0
  double a = 0.0;          // subordinator jump intensity, > 0
  double b = 0.0;          // inverse mean jump size, > 0
  double rho = 0.0;        // leverage constant, <= 0
};

enum class ModelKind { Gbm, Heston, HestonJump, Bns };

const char* model_kind_name(ModelKind kind);

void validate(const GbmParams& p);
void validate(const HestonParams& p);
void validate(const HestonJumpParams& p);
void validate(const BnsParams& p);

// Tagged union over the four model parameterizations. Construction validates
// all parameter bounds and throws std::invalid_argument on violation.
class ModelSpec {
 public:
  using Variant = std::variant<GbmParams, HestonParams, HestonJumpParams, BnsParams>;

  ModelSpec(GbmParams p) : v_(p) { validate(p); }              // NOLINT(google-explicit-constructor)
  ModelSpec(HestonParams p) : v_(p) { validate(p); }           // NOLINT
  ModelSpec(HestonJumpParams p) : v_(p) { validate(p); }       // NOLINT
  ModelSpec(BnsParams p) : v_(p) { validate(p); }              // NOLINT

  ModelKind kind() const { return static_cast<ModelKind>(v_.index()); }
  const char* kind_name() const { return model_kind_name(kind()); }
  bool has_variance_process() const { return kind() != ModelKind::Gbm; }

  const Variant& params() const { return v_; }

  template <typename T>
  const T& as() const { return std::get<T>(v_); }

 private:
  Variant v_;
};

// Simulated trajectories for one task on a fixed grid. spot is
// n_paths x (n_steps + 1); variance has the same shape for the stochastic-
// volatility models and is empty for GBM. All spots are strictly positive
// (every scheme updates the price in log space).
struct PathSet {
  int task_id = 0;
  TimeGrid grid;
  ModelSpec model;
  std::uint64_t seed = 0;
  Eigen::MatrixXd spot;
  Eigen::MatrixXd variance;

  int n_paths() const { return static_cast<int>(spot.rows()); }
  int n_steps() const { return grid.n_steps; }
  bool has_variance() const { return variance.size() > 0; }
};

// Copy of paths [begin, end) of a PathSet; used to carve train/eval subsets.
PathSet slice_paths(const PathSet& paths, int begin, int end);

// ---------------------------------------------------------------------------
// Per-model step kernels. These are the single source of truth for the
// discretization; simulate() only wires them to the per-path random streams.
// ---------------------------------------------------------------------------

// Exact log-Euler update of GBM over one step.
inline double gbm_step(double s, double z, double dt, double mu, double sigma) {
  return s * std::exp((mu - 0.5 * sigma * sigma) * dt + sigma * std::sqrt(dt) * z);
}

// Full-truncation Euler on the variance, exact-in-variance log-spot update.
// z1 drives the spot; the variance noise is w~ = rho z1 + sqrt(1-rho^2) z2.
// Negative variance is truncated inside the step, never an error.
inline std::pair<double, double> heston_step(double s, double v, double z1, double z2,
                                             double dt, const HestonParams& p) {
  const double v_plus = v > 0.0 ? v : 0.0;
  const double w = p.rho * z1 + std::sqrt(1.0 - p.rho * p.rho) * z2;
  const double vol_dt = std::sqrt(v_plus * dt);
  const double v_next = v + p.kappa * (p.eta - v_plus) * dt + p.theta * vol_dt * w;
  const double s_next = s * std::exp(-0.5 * v_plus * dt + vol_dt * z1);
  return {s_next, v_next};
}

// Heston diffusion step plus n_jumps multiplicative jumps and the martingale
// compensator exp(-jump_intensity * jump_mean * dt). jump_normals must hold
// one standard normal per jump.
inline std::pair<double, double> heston_jump_step(double s, double v, double z1, double z2,
                                                  int n_jumps, std::span<const double> jump_normals,
                                                  double dt, const HestonJumpParams& p) {
  auto [s_next, v_next] = heston_step(s, v, z1, z2, dt, p.heston);
  if (p.jump_intensity > 0.0) {
    s_next *= std::exp(-p.jump_intensity * p.jump_mean * dt);
  }
  const double log_jump_mean = std::log1p(p.jump_mean) - 0.5 * p.jump_vol * p.jump_vol;
  for (int i = 0; i < n_jumps; ++i) {
    s_next *= std::exp(log_jump_mean + p.jump_vol * jump_normals[i]);
  }
  return {s_next, v_next};
}

// Cumulant function of the BNS subordinator, k(u) = -a u / (b + u).
// Throws std::domain_error for b + u <= 0.
double bns_cumulant(double u, double a, double b);

// One subordinator jump inside a step: arrival offset in (0, dt] and mark size.
struct BnsJump {
  double offset = 0.0;
  double size = 0.0;
};

// Exact OU recursion for the variance with in-interval jump placement; the
// log-price diffusion freezes the variance at the left endpoint of the step.
// The drift -lambda k(-rho) dt compensates the price jumps rho * sum(x_i)
// exactly, so the discretized spot stays a martingale.
inline std::pair<double, double> bns_step(double log_s, double v, double z, double dt,
                                          std::span<const BnsJump> jumps, const BnsParams& p,
                                          double compensator) {
  const double decay = std::exp(-p.lambda * dt);
  double v_next = decay * v;
  double jump_sum = 0.0;
  for (const auto& j : jumps) {
    v_next += std::exp(-p.lambda * (dt - j.offset)) * j.size;
    jump_sum += j.size;
  }
  const double log_next =
      log_s + (compensator - 0.5 * v) * dt + std::sqrt(v * dt) * z + p.rho * jump_sum;
  return {log_next, v_next};
}

// compensator = -lambda * k(-rho); split out so callers can hoist it.
double bns_price_drift(const BnsParams& p);

// ---------------------------------------------------------------------------
// Path generation
// ---------------------------------------------------------------------------

// Simulates n_paths trajectories from s0 under `model`. Deterministic in
// (model, grid, n_paths, s0, seed): path p draws from substream_key(seed, p),
// so results are bit-identical regardless of parallel execution order.
//
// Per-path draw order, one step at a time:
//   Gbm:        z
//   Heston:     z1, z2
//   HestonJump: z1, z2, n = poisson(jump_intensity * dt), n jump normals
//   Bns:        n = poisson(a * lambda * dt), per jump (uniform offset,
//               exponential mark), then z
PathSet simulate(const ModelSpec& model, const TimeGrid& grid, int n_paths, double s0,
                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic stochastic-volatility family sampling
// ---------------------------------------------------------------------------

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Sampling ranges for the three stochastic-volatility model kinds. Volatility
// levels are sampled on the vol scale and squared; Heston starts at its
// long-run variance, BNS at its stationary mean a/b (with a derived from the
// sampled level and b). Defaults put the 30-day ATM implied vol roughly in
// [0.1, 0.8]; all values are configuration, not constants.
struct SvFamilyRanges {
  Interval heston_long_run_vol{0.15, 0.65};
  Interval heston_kappa{1.0, 6.0};
  Interval heston_vol_of_vol{0.2, 1.0};
  Interval heston_rho{-0.85, -0.15};
  Interval jump_intensity{0.5, 4.0};
  Interval jump_mean{-0.25, 0.05};
  Interval jump_vol{0.05, 0.35};
  Interval bns_stationary_vol{0.15, 0.65};
  Interval bns_lambda{1.0, 8.0};
  Interval bns_b{10.0, 60.0};
  Interval bns_rho{-3.0, -0.0};
};

// Deterministically samples n_models parameter sets, cycling over the kinds
// Heston, HestonJump, Bns. Every returned spec satisfies its invariants.
std::vector<ModelSpec> sample_sv_family(int n_models, const SvFamilyRanges& ranges,
                                        std::uint64_t seed);

}  // namespace deephedge
