#include "deephedge/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "deephedge/rng.hpp"

namespace deephedge {

OptimizerState make_optimizer_state(const NetworkArch& arch) {
  return {zero_gradients(arch), zero_gradients(arch), 0};
}

double lr_schedule(long step, long total_steps, double lr_initial, double lr_final) {
  if (total_steps <= 0) throw std::invalid_argument("lr_schedule: total_steps must be > 0");
  if (step < 0 || step > total_steps) throw std::invalid_argument("lr_schedule: step out of range");
  if (step == 0) return lr_initial;
  if (step == total_steps) return lr_final;
  return lr_initial *
         std::pow(lr_final / lr_initial, static_cast<double>(step) / static_cast<double>(total_steps));
}

namespace {

void adam_update_block(Eigen::Ref<Eigen::MatrixXd> p, const Eigen::Ref<const Eigen::MatrixXd>& g,
                       Eigen::Ref<Eigen::MatrixXd> m, Eigen::Ref<Eigen::MatrixXd> v,
                       double lr, double b1, double b2, double eps, double bc1, double bc2) {
  m.array() = b1 * m.array() + (1.0 - b1) * g.array();
  v.array() = b2 * v.array() + (1.0 - b2) * g.array().square();
  p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
}

}  // namespace

void adam_step(NetworkParams& params, const Gradients& grads, OptimizerState& state, double lr,
               const TrainConfig& config) {
  state.step += 1;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

  adam_update_block(params.embedding, grads.embedding, state.m.embedding, state.v.embedding, lr,
                    b1, b2, config.adam_eps, bc1, bc2);
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    adam_update_block(params.weights[l], grads.weights[l], state.m.weights[l], state.v.weights[l],
                      lr, b1, b2, config.adam_eps, bc1, bc2);
    adam_update_block(params.biases[l], grads.biases[l], state.m.biases[l], state.v.biases[l], lr,
                      b1, b2, config.adam_eps, bc1, bc2);
  }
}

int train_path_count(int n_paths) {
  const int count = (4 * n_paths) / 5;
  return count > 0 ? count : 1;
}

namespace {

// Assembles flat sample batches (one column per trading date of each path in
// the batch), runs the network forward, folds deltas into terminal PnLs and,
// when requested, runs the exact backward pass. Reused across batches so the
// big buffers are allocated once.
class LossEngine {
 public:
  LossEngine(const Claim& claim, std::span<const PathSet> tasks)
      : claim_(claim), tasks_(tasks) {
    if (tasks.empty()) throw std::invalid_argument("hedging loss: no datasets");
    const TimeGrid& grid = tasks.front().grid;
    for (const PathSet& t : tasks) {
      if (!(t.grid == grid))
        throw std::invalid_argument("hedging loss: datasets disagree on the time grid");
    }
    n_steps_ = grid.n_steps;
    taus_.resize(static_cast<std::size_t>(n_steps_));
    for (int k = 0; k < n_steps_; ++k) taus_[static_cast<std::size_t>(k)] = grid.maturity - grid.time(k);
  }

  // Mean squared hedged PnL over the batch. If grads is non-null the
  // gradients are accumulated into it. embedding_row_override >= 0 redirects
  // every sample's embedding lookup to that row (recalibration).
  double evaluate(const NetworkParams& params, std::span<const PathRef> batch, Gradients* grads,
                  bool embedding_only, int embedding_row_override = -1) {
    if (batch.empty()) throw std::invalid_argument("hedging loss: empty batch");
    const int n_paths = static_cast<int>(batch.size());
    const Eigen::Index n_samples = static_cast<Eigen::Index>(n_paths) * n_steps_;
    const int embed_dim = params.arch.embed_dim;

    input_.resize(params.arch.input_dim(), n_samples);
    spot_diff_.resize(n_samples);
    task_rows_.resize(static_cast<std::size_t>(n_samples));

    for (int i = 0; i < n_paths; ++i) {
      const PathRef ref = batch[static_cast<std::size_t>(i)];
      if (ref.task < 0 || ref.task >= static_cast<int>(tasks_.size()))
        throw std::out_of_range("hedging loss: task index out of range");
      const PathSet& task = tasks_[static_cast<std::size_t>(ref.task)];
      if (ref.path < 0 || ref.path >= task.n_paths())
        throw std::out_of_range("hedging loss: path index out of range");
      const int row = embedding_row_override >= 0 ? embedding_row_override : task.task_id;
      const auto embedding = params.embedding.row(row);
      for (int k = 0; k < n_steps_; ++k) {
        const Eigen::Index col = static_cast<Eigen::Index>(i) * n_steps_ + k;
        const double s = task.spot(ref.path, k);
        input_(0, col) = std::log(s / claim_.strike);
        input_(1, col) = taus_[static_cast<std::size_t>(k)];
        input_.col(col).tail(embed_dim) = embedding.transpose();
        spot_diff_(col) = task.spot(ref.path, k + 1) - s;
        task_rows_[static_cast<std::size_t>(col)] = row;
      }
    }

    forward_batch(params, input_, cache_);

    double loss = 0.0;
    pnl_.resize(n_paths);
    for (int i = 0; i < n_paths; ++i) {
      const PathRef ref = batch[static_cast<std::size_t>(i)];
      const PathSet& task = tasks_[static_cast<std::size_t>(ref.task)];
      double acc = payoff(claim_, task.spot(ref.path, n_steps_));
      const Eigen::Index base = static_cast<Eigen::Index>(i) * n_steps_;
      for (int k = 0; k < n_steps_; ++k) acc += cache_.output(base + k) * spot_diff_(base + k);
      pnl_(i) = acc;
      loss += acc * acc;
    }
    loss /= n_paths;

    if (grads != nullptr) {
      upstream_.resize(n_samples);
      const double scale = 2.0 / n_paths;
      for (int i = 0; i < n_paths; ++i) {
        const Eigen::Index base = static_cast<Eigen::Index>(i) * n_steps_;
        for (int k = 0; k < n_steps_; ++k)
          upstream_(base + k) = scale * pnl_(i) * spot_diff_(base + k);
      }
      backward_batch(params, cache_, upstream_, task_rows_, *grads, embedding_only);
    }
    return loss;
  }

  int n_steps() const { return n_steps_; }

 private:
  Claim claim_;
  std::span<const PathSet> tasks_;
  int n_steps_ = 0;
  std::vector<double> taus_;
  Eigen::MatrixXd input_;
  Eigen::VectorXd spot_diff_;
  Eigen::VectorXd pnl_;
  Eigen::RowVectorXd upstream_;
  std::vector<int> task_rows_;
  ForwardCache cache_;
};

// Weighted mean loss over refs, evaluated in fixed-size chunks.
double chunked_loss(LossEngine& engine, const NetworkParams& params,
                    std::span<const PathRef> refs, int chunk,
                    int embedding_row_override = -1) {
  if (refs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (std::size_t begin = 0; begin < refs.size(); begin += static_cast<std::size_t>(chunk)) {
    const std::size_t count = std::min(static_cast<std::size_t>(chunk), refs.size() - begin);
    sum += engine.evaluate(params, refs.subspan(begin, count), nullptr, false,
                           embedding_row_override) *
           static_cast<double>(count);
  }
  return sum / static_cast<double>(refs.size());
}

struct SplitRefs {
  std::vector<PathRef> train;
  std::vector<PathRef> eval;
};

SplitRefs split_refs(std::span<const PathSet> datasets) {
  SplitRefs refs;
  for (std::size_t t = 0; t < datasets.size(); ++t) {
    const int n = datasets[t].n_paths();
    const int tc = train_path_count(n);
    for (int p = 0; p < tc; ++p) refs.train.push_back({static_cast<int>(t), p});
    for (int p = tc; p < n; ++p) refs.eval.push_back({static_cast<int>(t), p});
  }
  return refs;
}

// Runs the optimization loop shared by train() and recalibrate().
void run_loop(NetworkParams& params, LossEngine& engine, SplitRefs& refs,
              const TrainConfig& config, std::vector<EpochLog>& log, bool embedding_only,
              int embedding_row_override) {
  OptimizerState state = make_optimizer_state(params.arch);
  Gradients grads = zero_gradients(params.arch);

  const long steps_per_epoch =
      static_cast<long>((refs.train.size() + static_cast<std::size_t>(config.batch_size) - 1) /
                        static_cast<std::size_t>(config.batch_size));
  const long total_steps = steps_per_epoch * config.epochs;
  PathRng shuffle_rng(substream_key(config.seed, 1));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_in_place(refs.train, shuffle_rng);
    double loss_sum = 0.0;
    const double epoch_lr = lr_schedule(state.step, total_steps, config.lr_initial, config.lr_final);
    for (std::size_t begin = 0; begin < refs.train.size();
         begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t count =
          std::min(static_cast<std::size_t>(config.batch_size), refs.train.size() - begin);
      grads.set_zero();
      const double loss =
          engine.evaluate(params, std::span<const PathRef>(refs.train).subspan(begin, count),
                          &grads, embedding_only, embedding_row_override);
      if (!std::isfinite(loss)) throw NumericalError("training loss is not finite");
      const double lr = lr_schedule(state.step, total_steps, config.lr_initial, config.lr_final);
      if (embedding_only) {
        // Fresh per-row Adam on the single trainable embedding row.
        state.step += 1;
        const double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(state.step));
        const double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(state.step));
        auto p = params.embedding.row(embedding_row_override);
        auto g = grads.embedding.row(embedding_row_override);
        auto m = state.m.embedding.row(embedding_row_override);
        auto v = state.v.embedding.row(embedding_row_override);
        m.array() = config.adam_beta1 * m.array() + (1.0 - config.adam_beta1) * g.array();
        v.array() = config.adam_beta2 * v.array() + (1.0 - config.adam_beta2) * g.array().square();
        p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + config.adam_eps);
      } else {
        adam_step(params, grads, state, lr, config);
      }
      loss_sum += loss * static_cast<double>(count);
    }
    const double train_loss = loss_sum / static_cast<double>(refs.train.size());
    const double eval_loss = chunked_loss(engine, params, refs.eval, config.batch_size,
                                          embedding_row_override);
    log.push_back({epoch, epoch_lr, train_loss, eval_loss});
  }
}

}  // namespace

double hedging_loss(const NetworkParams& params, const Claim& claim,
                    std::span<const PathSet> tasks, std::span<const PathRef> batch) {
  LossEngine engine(claim, tasks);
  return engine.evaluate(params, batch, nullptr, false);
}

TrainResult train_from(const NetworkParams& initial, std::span<const PathSet> datasets,
                       const Claim& claim, const TrainConfig& config) {
  config.validate();
  initial.arch.validate();
  if (datasets.empty()) throw std::invalid_argument("train: no datasets");
  if (static_cast<int>(datasets.size()) != initial.arch.n_tasks)
    throw std::invalid_argument("train: arch.n_tasks must match the number of datasets");
  for (std::size_t t = 0; t < datasets.size(); ++t) {
    if (datasets[t].task_id != static_cast<int>(t))
      throw std::invalid_argument("train: task ids must be dense 0..m-1 in order");
  }

  TrainResult result{initial, {}};
  if (config.epochs == 0) return result;

  LossEngine engine(claim, datasets);
  SplitRefs refs = split_refs(datasets);
  run_loop(result.params, engine, refs, config, result.log, /*embedding_only=*/false,
           /*embedding_row_override=*/-1);
  return result;
}

TrainResult train(std::span<const PathSet> datasets, const Claim& claim, const NetworkArch& arch,
                  const TrainConfig& config) {
  arch.validate();
  config.validate();
  return train_from(init_params(arch, config.seed), datasets, claim, config);
}

TrainResult recalibrate(const NetworkParams& params, const PathSet& new_task_paths,
                        const Claim& claim, const TrainConfig& config) {
  config.validate();
  if (new_task_paths.n_paths() < 1)
    throw std::invalid_argument("recalibrate: empty new-task paths");

  const int new_task = params.arch.n_tasks;
  TrainResult result{params, {}};
  result.params.arch.n_tasks = new_task + 1;
  result.params.embedding.conservativeResize(new_task + 1, Eigen::NoChange);
  result.params.embedding.row(new_task) =
      params.embedding.colwise().mean();  // start value per the recalibration scheme

  if (config.epochs == 0) return result;

  std::span<const PathSet> tasks(&new_task_paths, 1);
  LossEngine engine(claim, tasks);
  SplitRefs refs = split_refs(tasks);
  run_loop(result.params, engine, refs, config, result.log, /*embedding_only=*/true,
           /*embedding_row_override=*/new_task);
  return result;
}

}  // namespace deephedge
