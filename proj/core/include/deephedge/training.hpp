#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "deephedge/claims.hpp"
#include "deephedge/market_models.hpp"
#include "deephedge/neural.hpp"

namespace deephedge {

// Thrown when training hits a non-finite loss; the CLI maps it to exit code 2.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TrainMode { Full, EmbeddingOnly };

struct TrainConfig {
  int batch_size = 1024;
  int epochs = 1000;
  double lr_initial = 5e-4;
  double lr_final = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::Full;

  void validate() const {
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (!(lr_final > 0.0) || !(lr_final <= lr_initial))
      throw std::invalid_argument("TrainConfig: need 0 < lr_final <= lr_initial");
  }
};

// Adam moment tensors, shape-congruent with the parameters they track.
struct OptimizerState {
  Gradients m;
  Gradients v;
  long step = 0;
};

OptimizerState make_optimizer_state(const NetworkArch& arch);

// Exponential interpolation from lr_initial (step 0) to lr_final (last step);
// both endpoints are exact.
double lr_schedule(long step, long total_steps, double lr_initial, double lr_final);

// Standard bias-corrected Adam update, applied in place to every tensor.
void adam_step(NetworkParams& params, const Gradients& grads, OptimizerState& state, double lr,
               const TrainConfig& config);

// One element of a mini-batch: path `path` of tasks[task].
struct PathRef {
  int task = 0;
  int path = 0;
};

// Quadratic hedging loss over a batch: mean over paths of
// (Z + sum_k delta_k (S_{k+1} - S_k))^2, premium excluded.
double hedging_loss(const NetworkParams& params, const Claim& claim,
                    std::span<const PathSet> tasks, std::span<const PathRef> batch);

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double eval_loss = 0.0;
};

struct TrainResult {
  NetworkParams params;
  std::vector<EpochLog> log;
};

// Paths [0, train_path_count) of each task train; the rest evaluate
// (fixed 80/20 split by path index).
int train_path_count(int n_paths);

// Fits the network to all tasks simultaneously. datasets[i].task_id must
// equal i (dense task ids) and all grids must agree. Mini-batches are drawn
// across tasks each epoch from a seeded shuffle; the result is deterministic
// in (datasets, arch, config). epochs == 0 returns the initialization and an
// empty log.
TrainResult train(std::span<const PathSet> datasets, const Claim& claim, const NetworkArch& arch,
                  const TrainConfig& config);

// Same loop, but starting from existing parameters (checkpoint resume).
// Optimizer moments start fresh.
TrainResult train_from(const NetworkParams& initial, std::span<const PathSet> datasets,
                       const Claim& claim, const TrainConfig& config);

// Adapts a trained network to an unseen task by fitting one new embedding
// row (initialized to the mean of the existing rows) on the new task's
// paths. Shared weights and existing rows are returned bit-identical; Adam
// moments start fresh. The new task's id is params.arch.n_tasks.
TrainResult recalibrate(const NetworkParams& params, const PathSet& new_task_paths,
                        const Claim& claim, const TrainConfig& config);

}  // namespace deephedge
