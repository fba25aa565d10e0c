#include <doctest.h>

#include <cmath>
#include <vector>

#include "deephedge/neural.hpp"
#include "deephedge/rng.hpp"

using namespace deephedge;

namespace {

// Independent scalar-loop evaluation of the network, kept free of any code
// shared with forward_batch.
double reference_forward(const NetworkParams& params, int task_id, const FeatureRow& feature) {
  std::vector<double> act(static_cast<std::size_t>(params.arch.input_dim()));
  act[0] = feature.log_moneyness;
  act[1] = feature.time_to_maturity;
  for (int c = 0; c < params.arch.embed_dim; ++c)
    act[static_cast<std::size_t>(params.arch.n_features + c)] = params.embedding(task_id, c);

  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const auto& w = params.weights[l];
    std::vector<double> next(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      double z = params.biases[l](r);
      for (Eigen::Index c = 0; c < w.cols(); ++c) z += w(r, c) * act[static_cast<std::size_t>(c)];
      next[static_cast<std::size_t>(r)] =
          l + 1 < params.weights.size()
              ? (z > 0.0 ? kSeluScale * z : kSeluScale * kSeluAlpha * (std::exp(z) - 1.0))
              : z;
    }
    act = std::move(next);
  }
  return act[0];
}

NetworkArch small_arch(int n_tasks, int embed_dim, std::vector<int> hidden) {
  NetworkArch arch;
  arch.n_tasks = n_tasks;
  arch.embed_dim = embed_dim;
  arch.hidden = std::move(hidden);
  return arch;
}

}  // namespace

TEST_CASE("selu evaluates the standard constants") {
  CHECK(selu(0.0) == 0.0);
  CHECK(selu(1.0) == doctest::Approx(1.0507009873554805).epsilon(1e-15));
  // Frozen from an extended-precision evaluation of scale*alpha*(exp(-20)-1).
  CHECK(selu(-20.0) == doctest::Approx(-1.7580993372236640).epsilon(1e-14));
  CHECK(selu(3.5) == doctest::Approx(kSeluScale * 3.5).epsilon(1e-15));
}

TEST_CASE("embed looks up rows and rejects out-of-range ids") {
  const NetworkArch arch = small_arch(3, 2, {4});
  NetworkParams params = init_params(arch, 1);
  params.embedding << 1, 2, 3, 4, 5, 6;
  CHECK(embed(params, 1)(0) == 3.0);
  CHECK(embed(params, 1)(1) == 4.0);
  CHECK_THROWS_AS(embed(params, 3), std::out_of_range);
  CHECK_THROWS_AS(embed(params, -1), std::out_of_range);

  SUBCASE("1x1 identity table returns the stored scalar") {
    NetworkParams tiny = init_params(small_arch(1, 1, {2}), 7);
    tiny.embedding(0, 0) = 0.731;
    CHECK(embed(tiny, 0)(0) == 0.731);
  }
}

TEST_CASE("forward_delta degenerate parameter cases") {
  const NetworkArch arch = small_arch(2, 1, {8, 8});
  NetworkParams params = init_params(arch, 3);

  SUBCASE("all-zero weights and biases produce zero") {
    for (auto& w : params.weights) w.setZero();
    for (auto& b : params.biases) b.setZero();
    CHECK(forward_delta(params, 0, {0.3, 0.05}) == 0.0);
    CHECK(forward_delta(params, 1, {-2.0, 0.5}) == 0.0);
  }
  SUBCASE("constant network: output bias only") {
    for (auto& w : params.weights) w.setZero();
    for (auto& b : params.biases) b.setZero();
    params.biases.back()(0) = 0.42;
    CHECK(forward_delta(params, 0, {0.3, 0.05}) == 0.42);
    CHECK(forward_delta(params, 1, {9.9, 0.0}) == 0.42);
  }
}

TEST_CASE("forward_delta agrees with an independent matrix-arithmetic oracle and is bit-stable") {
  const NetworkArch arch = small_arch(4, 3, {128, 128, 128});
  const NetworkParams params = init_params(arch, 20260809);
  const FeatureRow feature{0.0231435513, 30.0 / 365.0};

  const double value = forward_delta(params, 2, feature);
  const double reference = reference_forward(params, 2, feature);
  CHECK(value == doctest::Approx(reference).epsilon(1e-12));

  for (int i = 0; i < 5; ++i) CHECK(forward_delta(params, 2, feature) == value);
}

TEST_CASE("forward_batch equals per-sample forward_delta") {
  const NetworkArch arch = small_arch(5, 2, {16, 16});
  const NetworkParams params = init_params(arch, 11);
  PathRng rng(substream_key(4, 0));

  const int batch = 37;
  Eigen::MatrixXd input(arch.input_dim(), batch);
  std::vector<int> tasks(batch);
  std::vector<FeatureRow> features(batch);
  for (int b = 0; b < batch; ++b) {
    tasks[static_cast<std::size_t>(b)] = static_cast<int>(rng.uniform_below(5));
    features[static_cast<std::size_t>(b)] = {0.3 * rng.normal(), rng.uniform()};
    input(0, b) = features[static_cast<std::size_t>(b)].log_moneyness;
    input(1, b) = features[static_cast<std::size_t>(b)].time_to_maturity;
    input.col(b).tail(arch.embed_dim) =
        params.embedding.row(tasks[static_cast<std::size_t>(b)]).transpose();
  }
  ForwardCache cache;
  forward_batch(params, input, cache);
  for (int b = 0; b < batch; ++b) {
    CHECK(cache.output(b) ==
          doctest::Approx(forward_delta(params, tasks[static_cast<std::size_t>(b)],
                                        features[static_cast<std::size_t>(b)]))
              .epsilon(1e-13));
  }
}

TEST_CASE("backward: zero upstream sensitivity gives zero gradients") {
  const NetworkArch arch = small_arch(3, 2, {6});
  const NetworkParams params = init_params(arch, 5);
  Eigen::MatrixXd input = Eigen::MatrixXd::Random(arch.input_dim(), 9);
  ForwardCache cache;
  forward_batch(params, input, cache);

  Gradients grads = zero_gradients(arch);
  const std::vector<int> tasks(9, 1);
  backward_batch(params, cache, Eigen::RowVectorXd::Zero(9), tasks, grads);
  CHECK(grads.embedding.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& w : grads.weights) CHECK(w.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& b : grads.biases) CHECK(b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward: single linear layer gradient equals the closed-form outer product") {
  // No hidden layers: y = W x + b, so dW = sum_b g_b x_b^T and db = sum g.
  NetworkArch arch = small_arch(2, 2, {});
  const NetworkParams params = init_params(arch, 6);
  Eigen::MatrixXd input = Eigen::MatrixXd::Random(arch.input_dim(), 5);
  ForwardCache cache;
  forward_batch(params, input, cache);

  Eigen::RowVectorXd upstream = Eigen::RowVectorXd::Random(5);
  const std::vector<int> tasks = {0, 1, 0, 0, 1};
  Gradients grads = zero_gradients(arch);
  backward_batch(params, cache, upstream, tasks, grads);

  const Eigen::MatrixXd expected_dw = upstream * input.transpose();
  CHECK((grads.weights[0] - expected_dw).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(grads.biases[0](0) == doctest::Approx(upstream.sum()).epsilon(1e-14));

  // Embedding rows receive W^T g restricted to the embedding coordinates.
  Eigen::MatrixXd dx = params.weights[0].transpose() * upstream;
  Eigen::MatrixXd expected_embed = Eigen::MatrixXd::Zero(2, 2);
  for (int b = 0; b < 5; ++b)
    expected_embed.row(tasks[static_cast<std::size_t>(b)]) +=
        dx.col(b).tail(2).transpose();
  CHECK((grads.embedding - expected_embed).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("backward: embedding rows of tasks absent from the batch stay zero") {
  const NetworkArch arch = small_arch(6, 2, {8, 8});
  const NetworkParams params = init_params(arch, 8);
  Eigen::MatrixXd input = Eigen::MatrixXd::Random(arch.input_dim(), 12);
  ForwardCache cache;
  forward_batch(params, input, cache);

  const std::vector<int> tasks = {1, 1, 3, 3, 1, 3, 1, 1, 3, 1, 3, 3};  // tasks 0,2,4,5 absent
  Gradients grads = zero_gradients(arch);
  backward_batch(params, cache, Eigen::RowVectorXd::Random(12), tasks, grads);
  for (int absent : {0, 2, 4, 5}) CHECK(grads.embedding.row(absent).cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.embedding.row(1).cwiseAbs().maxCoeff() > 0.0);
  CHECK(grads.embedding.row(3).cwiseAbs().maxCoeff() > 0.0);
}

namespace {

// L(params) = sum_b upstream_b * y_b(params); analytic gradient from
// backward_batch, checked against central finite differences.
struct FdProbe {
  NetworkParams params;
  Eigen::MatrixXd input;
  Eigen::RowVectorXd upstream;
  std::vector<int> tasks;

  double loss() const {
    ForwardCache cache;
    forward_batch(params, input, cache);
    return (cache.output.array() * upstream.array()).sum();
  }

  Gradients analytic() const {
    ForwardCache cache;
    forward_batch(params, input, cache);
    Gradients grads = zero_gradients(params.arch);
    backward_batch(params, cache, upstream, tasks, grads);
    return grads;
  }

  double fd(double* coeff) {
    const double h = 1e-4;
    const double saved = *coeff;
    *coeff = saved + h;
    const double up = loss();
    *coeff = saved - h;
    const double down = loss();
    *coeff = saved;
    return (up - down) / (2 * h);
  }
};

bool rel_close(double analytic, double fd) {
  return std::abs(analytic - fd) / (std::abs(analytic) + 1e-8) < 1e-4;
}

}  // namespace

TEST_CASE("gradients match central finite differences over all four tensors") {
  PathRng rng(substream_key(314159, 0));
  int checked = 0;
  for (int draw = 0; draw < 100; ++draw) {
    FdProbe probe;
    const int n_tasks = 2 + static_cast<int>(rng.uniform_below(3));
    const int embed_dim = 1 + static_cast<int>(rng.uniform_below(3));
    const int width = 3 + static_cast<int>(rng.uniform_below(6));
    probe.params = init_params(small_arch(n_tasks, embed_dim, {width, width}), 1000 + draw);
    const int batch = 4;
    probe.input.resize(probe.params.arch.input_dim(), batch);
    probe.upstream.resize(batch);
    for (int b = 0; b < batch; ++b) {
      const int task = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n_tasks)));
      probe.tasks.push_back(task);
      probe.input(0, b) = 0.3 * rng.normal();
      probe.input(1, b) = rng.uniform();
      probe.input.col(b).tail(embed_dim) = probe.params.embedding.row(task).transpose();
      probe.upstream(b) = rng.normal();
    }

    const Gradients grads = probe.analytic();

    // One random coefficient from each tensor class per draw.
    {
      const int t = probe.tasks[static_cast<std::size_t>(rng.uniform_below(batch))];
      const int c = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(embed_dim)));
      // Perturbing the table requires rebuilding the input columns that used it.
      FdProbe perturbed = probe;
      const double h = 1e-4;
      auto loss_at = [&](double delta) {
        perturbed.params.embedding(t, c) = probe.params.embedding(t, c) + delta;
        for (int b = 0; b < batch; ++b)
          perturbed.input.col(b).tail(embed_dim) =
              perturbed.params.embedding.row(perturbed.tasks[static_cast<std::size_t>(b)])
                  .transpose();
        return perturbed.loss();
      };
      const double fd = (loss_at(h) - loss_at(-h)) / (2 * h);
      CHECK(rel_close(grads.embedding(t, c), fd));
    }
    for (std::size_t l = 0; l < probe.params.weights.size(); ++l) {
      auto& w = probe.params.weights[l];
      const Eigen::Index r = static_cast<Eigen::Index>(rng.uniform_below(static_cast<std::uint64_t>(w.rows())));
      const Eigen::Index c = static_cast<Eigen::Index>(rng.uniform_below(static_cast<std::uint64_t>(w.cols())));
      CHECK(rel_close(grads.weights[l](r, c), probe.fd(&w(r, c))));
      auto& b = probe.params.biases[l];
      const Eigen::Index i = static_cast<Eigen::Index>(rng.uniform_below(static_cast<std::uint64_t>(b.size())));
      CHECK(rel_close(grads.biases[l](i), probe.fd(&b(i))));
    }
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("init_params is deterministic and LeCun-scaled") {
  const NetworkArch arch = small_arch(8, 4, {128, 128});
  const NetworkParams a = init_params(arch, 42);
  const NetworkParams b = init_params(arch, 42);
  CHECK((a.embedding.array() == b.embedding.array()).all());
  for (std::size_t l = 0; l < a.weights.size(); ++l)
    CHECK((a.weights[l].array() == b.weights[l].array()).all());

  // Biases start at zero; weight variance tracks 1/fan_in.
  for (const auto& bias : a.biases) CHECK(bias.cwiseAbs().maxCoeff() == 0.0);
  const auto& w = a.weights[1];  // 128 x 128
  const double var = w.array().square().mean();
  CHECK(var == doctest::Approx(1.0 / 128.0).epsilon(0.2));
  const double embed_var = a.embedding.array().square().mean();
  CHECK(embed_var == doctest::Approx(arch.embed_init_scale * arch.embed_init_scale).epsilon(0.5));
}
