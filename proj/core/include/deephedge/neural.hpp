#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace deephedge {

// SELU constants (Klambauer et al.); the hidden layers are self-normalizing
// when paired with LeCun-normal initialization.
inline constexpr double kSeluAlpha = 1.6732632423543772;
inline constexpr double kSeluScale = 1.0507009873554805;

inline double selu(double x) {
  return x > 0.0 ? kSeluScale * x : kSeluScale * kSeluAlpha * std::expm1(x);
}

// Architecture of the parameterized hedging network: a task-embedding table
// of shape n_tasks x embed_dim whose selected row is concatenated with the
// per-step market features and fed through a shared MLP with SELU hidden
// layers and a linear scalar output (the hedge ratio, unbounded).
struct NetworkArch {
  int n_tasks = 1;
  int embed_dim = 1;
  int n_features = 2;
  std::vector<int> hidden = {128, 128, 128};
  double embed_init_scale = 0.001;  // stddev of the embedding initialization

  int input_dim() const { return n_features + embed_dim; }

  void validate() const {
    if (n_tasks < 1) throw std::invalid_argument("NetworkArch: n_tasks must be >= 1");
    if (embed_dim < 1) throw std::invalid_argument("NetworkArch: embed_dim must be >= 1");
    if (n_features < 1) throw std::invalid_argument("NetworkArch: n_features must be >= 1");
    for (int w : hidden)
      if (w < 1) throw std::invalid_argument("NetworkArch: hidden widths must be >= 1");
  }

  bool operator==(const NetworkArch&) const = default;
};

// The single trainable object: embedding table plus the shared MLP weights.
// weights[i] has shape out_i x in_i; the final layer has one output row.
struct NetworkParams {
  NetworkArch arch;
  Eigen::MatrixXd embedding;             // n_tasks x embed_dim
  std::vector<Eigen::MatrixXd> weights;  // per layer, out x in
  std::vector<Eigen::VectorXd> biases;   // per layer, out
};

// Gradients (or Adam moments) shaped exactly like NetworkParams.
struct Gradients {
  Eigen::MatrixXd embedding;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  void set_zero();
};

Gradients zero_gradients(const NetworkArch& arch);

// LeCun-normal weights (variance 1/fan_in), zero biases, embedding rows
// i.i.d. Normal(0, embed_init_scale^2). A near-common starting point lets the
// rows spread apart ordered by each task's loss signal, which keeps the
// learned embedding monotone in the underlying model parameter.
// Deterministic in the seed; the draw order is embedding row-major first,
// then each layer's weight matrix row-major.
NetworkParams init_params(const NetworkArch& arch, std::uint64_t seed);

// Market features observed by the network at one trading date.
struct FeatureRow {
  double log_moneyness = 0.0;      // log(S_t / K)
  double time_to_maturity = 0.0;   // year fraction, >= 0
};

// Embedding-row lookup; throws std::out_of_range for an invalid task id.
Eigen::VectorXd embed(const NetworkParams& params, int task_id);

// Scalar hedge ratio for a single (task, feature) pair.
double forward_delta(const NetworkParams& params, int task_id, const FeatureRow& feature);

// Activations cached by a batched forward pass for the matching backward
// pass. input holds one column per sample: [features ; embedding row].
struct ForwardCache {
  Eigen::MatrixXd input;                // input_dim x batch
  std::vector<Eigen::MatrixXd> acts;    // hidden activations, width x batch
  Eigen::RowVectorXd output;            // 1 x batch
};

// Forward pass over a batch of sample columns. Bit-stable for fixed
// parameters, inputs and batch composition.
void forward_batch(const NetworkParams& params, const Eigen::MatrixXd& input, ForwardCache& cache);

// Exact reverse-mode gradients of a scalar loss L given the per-sample
// upstream sensitivities dL/dy. task_ids names the embedding row each sample
// column used; rows of tasks absent from the batch receive zero gradient.
// Accumulates into `grads` (callers zero it first); the embedding scatter is
// sequential over the batch so the reduction order is fixed.
// embedding_only skips the weight/bias gradients (the chain to the input is
// still propagated).
void backward_batch(const NetworkParams& params, const ForwardCache& cache,
                    const Eigen::RowVectorXd& upstream, std::span<const int> task_ids,
                    Gradients& grads, bool embedding_only = false);

}  // namespace deephedge
