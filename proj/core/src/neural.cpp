#include "deephedge/neural.hpp"

#include "deephedge/rng.hpp"

namespace deephedge {

namespace {

// Elementwise SELU on a matrix of pre-activations.
Eigen::MatrixXd selu_matrix(const Eigen::MatrixXd& z) {
  return (z.array() > 0.0)
      .select(kSeluScale * z.array(), kSeluScale * kSeluAlpha * (z.array().exp() - 1.0));
}

// SELU derivative recovered from the activation value: for x > 0 the
// activation is positive and the slope is kSeluScale; for x <= 0 the slope
// scale*alpha*exp(x) equals activation + scale*alpha.
Eigen::ArrayXXd selu_deriv_from_act(const Eigen::MatrixXd& act) {
  return (act.array() > 0.0).select(Eigen::ArrayXXd::Constant(act.rows(), act.cols(), kSeluScale),
                                    act.array() + kSeluScale * kSeluAlpha);
}

}  // namespace

void Gradients::set_zero() {
  embedding.setZero();
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

Gradients zero_gradients(const NetworkArch& arch) {
  Gradients g;
  g.embedding = Eigen::MatrixXd::Zero(arch.n_tasks, arch.embed_dim);
  int in = arch.input_dim();
  for (int width : arch.hidden) {
    g.weights.emplace_back(Eigen::MatrixXd::Zero(width, in));
    g.biases.emplace_back(Eigen::VectorXd::Zero(width));
    in = width;
  }
  g.weights.emplace_back(Eigen::MatrixXd::Zero(1, in));
  g.biases.emplace_back(Eigen::VectorXd::Zero(1));
  return g;
}

NetworkParams init_params(const NetworkArch& arch, std::uint64_t seed) {
  arch.validate();
  PathRng rng(substream_key(seed, 0));

  NetworkParams params;
  params.arch = arch;
  params.embedding.resize(arch.n_tasks, arch.embed_dim);
  for (int r = 0; r < arch.n_tasks; ++r)
    for (int c = 0; c < arch.embed_dim; ++c)
      params.embedding(r, c) = arch.embed_init_scale * rng.normal();

  int in = arch.input_dim();
  std::vector<int> outs = arch.hidden;
  outs.push_back(1);
  for (int width : outs) {
    Eigen::MatrixXd w(width, in);
    const double stddev = 1.0 / std::sqrt(static_cast<double>(in));
    for (int r = 0; r < width; ++r)
      for (int c = 0; c < in; ++c) w(r, c) = stddev * rng.normal();
    params.weights.push_back(std::move(w));
    params.biases.emplace_back(Eigen::VectorXd::Zero(width));
    in = width;
  }
  return params;
}

Eigen::VectorXd embed(const NetworkParams& params, int task_id) {
  if (task_id < 0 || task_id >= params.arch.n_tasks)
    throw std::out_of_range("embed: task_id outside embedding table");
  return params.embedding.row(task_id).transpose();
}

void forward_batch(const NetworkParams& params, const Eigen::MatrixXd& input,
                   ForwardCache& cache) {
  if (input.rows() != params.arch.input_dim())
    throw std::invalid_argument("forward_batch: input row count != network input dimension");

  const std::size_t n_hidden = params.arch.hidden.size();
  cache.input = input;
  cache.acts.resize(n_hidden);

  const Eigen::MatrixXd* prev = &cache.input;
  for (std::size_t l = 0; l < n_hidden; ++l) {
    Eigen::MatrixXd z = params.weights[l] * (*prev);
    z.colwise() += params.biases[l];
    cache.acts[l] = selu_matrix(z);
    prev = &cache.acts[l];
  }
  const std::size_t last = n_hidden;
  cache.output = params.weights[last] * (*prev);
  cache.output.array() += params.biases[last](0);
}

double forward_delta(const NetworkParams& params, int task_id, const FeatureRow& feature) {
  Eigen::MatrixXd input(params.arch.input_dim(), 1);
  input(0, 0) = feature.log_moneyness;
  input(1, 0) = feature.time_to_maturity;
  input.col(0).tail(params.arch.embed_dim) = embed(params, task_id);
  ForwardCache cache;
  forward_batch(params, input, cache);
  return cache.output(0);
}

void backward_batch(const NetworkParams& params, const ForwardCache& cache,
                    const Eigen::RowVectorXd& upstream, std::span<const int> task_ids,
                    Gradients& grads, bool embedding_only) {
  const auto batch = cache.input.cols();
  if (upstream.cols() != batch)
    throw std::invalid_argument("backward_batch: upstream size != batch size");
  if (static_cast<Eigen::Index>(task_ids.size()) != batch)
    throw std::invalid_argument("backward_batch: task_ids size != batch size");

  const std::size_t n_hidden = params.arch.hidden.size();
  const std::size_t last = n_hidden;

  // Output layer: y = W_last a_{last-1} + b_last.
  const Eigen::MatrixXd& last_act = n_hidden > 0 ? cache.acts[n_hidden - 1] : cache.input;
  if (!embedding_only) {
    grads.weights[last].noalias() += upstream * last_act.transpose();
    grads.biases[last](0) += upstream.sum();
  }

  // Walk the hidden layers with d = dL/d(pre-activation of layer l).
  Eigen::MatrixXd d = params.weights[last].transpose() * upstream;
  for (std::size_t l = n_hidden; l-- > 0;) {
    d.array() *= selu_deriv_from_act(cache.acts[l]);
    const Eigen::MatrixXd& prev_act = l > 0 ? cache.acts[l - 1] : cache.input;
    if (!embedding_only) {
      grads.weights[l].noalias() += d * prev_act.transpose();
      grads.biases[l].noalias() += d.rowwise().sum();
    }
    if (l > 0) {
      d = params.weights[l].transpose() * d;
    } else {
      d = params.weights[0].transpose() * d;  // dL/d(input), input_dim x batch
    }
  }

  // Scatter the embedding part of the input gradient into the selected rows;
  // sequential over the batch for a fixed reduction order.
  const int embed_dim = params.arch.embed_dim;
  const int n_features = params.arch.n_features;
  for (Eigen::Index b = 0; b < batch; ++b) {
    grads.embedding.row(task_ids[static_cast<std::size_t>(b)]) +=
        d.col(b).segment(n_features, embed_dim).transpose();
  }
}

}  // namespace deephedge
