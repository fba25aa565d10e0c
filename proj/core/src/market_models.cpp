#include "deephedge/market_models.hpp"

#include <algorithm>

#include "deephedge/rng.hpp"

namespace deephedge {

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Gbm: return "gbm";
    case ModelKind::Heston: return "heston";
    case ModelKind::HestonJump: return "heston_jump";
    case ModelKind::Bns: return "bns";
  }
  return "unknown";
}

void validate(const GbmParams& p) {
  if (!(p.sigma >= 0.0) || !std::isfinite(p.sigma) || !std::isfinite(p.mu))
    throw std::invalid_argument("GbmParams: sigma must be finite and >= 0");
}

void validate(const HestonParams& p) {
  if (!(p.v0 >= 0.0)) throw std::invalid_argument("HestonParams: v0 must be >= 0");
  if (!(p.kappa > 0.0)) throw std::invalid_argument("HestonParams: kappa must be > 0");
  if (!(p.eta > 0.0)) throw std::invalid_argument("HestonParams: eta must be > 0");
  if (!(p.theta >= 0.0)) throw std::invalid_argument("HestonParams: theta must be >= 0");
  if (!(p.rho >= -1.0 && p.rho <= 1.0))
    throw std::invalid_argument("HestonParams: rho must be in [-1, 1]");
}

void validate(const HestonJumpParams& p) {
  validate(p.heston);
  if (!(p.jump_intensity >= 0.0))
    throw std::invalid_argument("HestonJumpParams: jump_intensity must be >= 0");
  if (!(p.jump_mean > -1.0))
    throw std::invalid_argument("HestonJumpParams: jump_mean must be > -1");
  if (!(p.jump_vol >= 0.0))
    throw std::invalid_argument("HestonJumpParams: jump_vol must be >= 0");
}

void validate(const BnsParams& p) {
  if (!(p.sigma0_sq >= 0.0)) throw std::invalid_argument("BnsParams: sigma0_sq must be >= 0");
  if (!(p.lambda > 0.0)) throw std::invalid_argument("BnsParams: lambda must be > 0");
  if (!(p.a > 0.0)) throw std::invalid_argument("BnsParams: a must be > 0");
  if (!(p.b > 0.0)) throw std::invalid_argument("BnsParams: b must be > 0");
  if (!(p.rho <= 0.0)) throw std::invalid_argument("BnsParams: rho must be <= 0");
  // k(-rho) must be evaluable for the price-jump compensator.
  if (!(p.b - p.rho > 0.0))
    throw std::invalid_argument("BnsParams: b - rho must be > 0");
}

double bns_cumulant(double u, double a, double b) {
  if (!(b + u > 0.0)) throw std::domain_error("bns_cumulant: requires b + u > 0");
  return -a * u / (b + u);
}

double bns_price_drift(const BnsParams& p) {
  return -p.lambda * bns_cumulant(-p.rho, p.a, p.b);
}

PathSet slice_paths(const PathSet& paths, int begin, int end) {
  if (begin < 0 || end > paths.n_paths() || begin > end)
    throw std::invalid_argument("slice_paths: index range out of bounds");
  PathSet out{paths.task_id, paths.grid, paths.model, paths.seed, {}, {}};
  out.spot = paths.spot.middleRows(begin, end - begin);
  if (paths.has_variance()) out.variance = paths.variance.middleRows(begin, end - begin);
  return out;
}

namespace {

void simulate_gbm(const GbmParams& p, const TimeGrid& grid, double s0, std::uint64_t seed,
                  Eigen::MatrixXd& spot) {
  const double dt = grid.dt();
  const auto n_paths = spot.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index path = 0; path < n_paths; ++path) {
    PathRng rng(substream_key(seed, static_cast<std::uint64_t>(path)));
    double s = s0;
    spot(path, 0) = s;
    for (int k = 0; k < grid.n_steps; ++k) {
      s = gbm_step(s, rng.normal(), dt, p.mu, p.sigma);
      spot(path, k + 1) = s;
    }
  }
}

void simulate_heston(const HestonParams& p, const TimeGrid& grid, double s0, std::uint64_t seed,
                     Eigen::MatrixXd& spot, Eigen::MatrixXd& variance) {
  const double dt = grid.dt();
  const auto n_paths = spot.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index path = 0; path < n_paths; ++path) {
    PathRng rng(substream_key(seed, static_cast<std::uint64_t>(path)));
    double s = s0;
    double v = p.v0;
    spot(path, 0) = s;
    variance(path, 0) = v;
    for (int k = 0; k < grid.n_steps; ++k) {
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      std::tie(s, v) = heston_step(s, v, z1, z2, dt, p);
      spot(path, k + 1) = s;
      variance(path, k + 1) = v;
    }
  }
}

void simulate_heston_jump(const HestonJumpParams& p, const TimeGrid& grid, double s0,
                          std::uint64_t seed, Eigen::MatrixXd& spot, Eigen::MatrixXd& variance) {
  const double dt = grid.dt();
  const double jump_mean_per_step = p.jump_intensity * dt;
  const auto n_paths = spot.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index path = 0; path < n_paths; ++path) {
    PathRng rng(substream_key(seed, static_cast<std::uint64_t>(path)));
    std::vector<double> jump_normals;
    double s = s0;
    double v = p.heston.v0;
    spot(path, 0) = s;
    variance(path, 0) = v;
    for (int k = 0; k < grid.n_steps; ++k) {
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      const int n_jumps = rng.poisson(jump_mean_per_step);
      jump_normals.resize(static_cast<std::size_t>(n_jumps));
      for (int j = 0; j < n_jumps; ++j) jump_normals[static_cast<std::size_t>(j)] = rng.normal();
      std::tie(s, v) = heston_jump_step(s, v, z1, z2, n_jumps, jump_normals, dt, p);
      spot(path, k + 1) = s;
      variance(path, k + 1) = v;
    }
  }
}

void simulate_bns(const BnsParams& p, const TimeGrid& grid, double s0, std::uint64_t seed,
                  Eigen::MatrixXd& spot, Eigen::MatrixXd& variance) {
  const double dt = grid.dt();
  const double jump_mean_per_step = p.a * p.lambda * dt;  // time-changed intensity
  const double mark_mean = 1.0 / p.b;
  const double drift = bns_price_drift(p);
  const auto n_paths = spot.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index path = 0; path < n_paths; ++path) {
    PathRng rng(substream_key(seed, static_cast<std::uint64_t>(path)));
    std::vector<BnsJump> jumps;
    double log_s = std::log(s0);
    double v = p.sigma0_sq;
    spot(path, 0) = s0;
    variance(path, 0) = v;
    for (int k = 0; k < grid.n_steps; ++k) {
      const int n_jumps = rng.poisson(jump_mean_per_step);
      jumps.resize(static_cast<std::size_t>(n_jumps));
      for (auto& j : jumps) {
        j.offset = dt * rng.uniform();
        j.size = rng.exponential(mark_mean);
      }
      const double z = rng.normal();
      std::tie(log_s, v) = bns_step(log_s, v, z, dt, jumps, p, drift);
      spot(path, k + 1) = std::exp(log_s);
      variance(path, k + 1) = v;
    }
  }
}

}  // namespace

PathSet simulate(const ModelSpec& model, const TimeGrid& grid, int n_paths, double s0,
                 std::uint64_t seed) {
  if (n_paths < 1) throw std::invalid_argument("simulate: n_paths must be >= 1");
  if (!(s0 > 0.0)) throw std::invalid_argument("simulate: s0 must be > 0");

  PathSet out{0, grid, model, seed, {}, {}};
  out.spot.resize(n_paths, grid.n_steps + 1);
  if (model.has_variance_process()) out.variance.resize(n_paths, grid.n_steps + 1);

  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GbmParams>) {
          simulate_gbm(p, grid, s0, seed, out.spot);
        } else if constexpr (std::is_same_v<T, HestonParams>) {
          simulate_heston(p, grid, s0, seed, out.spot, out.variance);
        } else if constexpr (std::is_same_v<T, HestonJumpParams>) {
          simulate_heston_jump(p, grid, s0, seed, out.spot, out.variance);
        } else {
          simulate_bns(p, grid, s0, seed, out.spot, out.variance);
        }
      },
      model.params());
  return out;
}

namespace {

double sample(PathRng& rng, const Interval& iv) {
  if (!(iv.hi >= iv.lo)) throw std::invalid_argument("sample_sv_family: interval with hi < lo");
  return iv.lo == iv.hi ? iv.lo : rng.uniform(iv.lo, iv.hi);
}

}  // namespace

std::vector<ModelSpec> sample_sv_family(int n_models, const SvFamilyRanges& ranges,
                                        std::uint64_t seed) {
  if (n_models < 1) throw std::invalid_argument("sample_sv_family: n_models must be >= 1");
  PathRng rng(substream_key(seed, 0));
  std::vector<ModelSpec> out;
  out.reserve(static_cast<std::size_t>(n_models));
  for (int i = 0; i < n_models; ++i) {
    switch (i % 3) {
      case 0: {
        const double vol = sample(rng, ranges.heston_long_run_vol);
        HestonParams p;
        p.eta = vol * vol;
        p.v0 = p.eta;  // start at the long-run variance
        p.kappa = sample(rng, ranges.heston_kappa);
        p.theta = sample(rng, ranges.heston_vol_of_vol);
        p.rho = sample(rng, ranges.heston_rho);
        out.emplace_back(p);
        break;
      }
      case 1: {
        const double vol = sample(rng, ranges.heston_long_run_vol);
        HestonJumpParams p;
        p.heston.eta = vol * vol;
        p.heston.v0 = p.heston.eta;
        p.heston.kappa = sample(rng, ranges.heston_kappa);
        p.heston.theta = sample(rng, ranges.heston_vol_of_vol);
        p.heston.rho = sample(rng, ranges.heston_rho);
        p.jump_intensity = sample(rng, ranges.jump_intensity);
        p.jump_mean = sample(rng, ranges.jump_mean);
        p.jump_vol = sample(rng, ranges.jump_vol);
        out.emplace_back(p);
        break;
      }
      default: {
        const double vol = sample(rng, ranges.bns_stationary_vol);
        BnsParams p;
        p.sigma0_sq = vol * vol;
        p.lambda = sample(rng, ranges.bns_lambda);
        p.b = sample(rng, ranges.bns_b);
        p.a = p.sigma0_sq * p.b;  // stationary mean a/b equals the sampled level
        p.rho = sample(rng, ranges.bns_rho);
        out.emplace_back(p);
        break;
      }
    }
  }
  return out;
}

}  // namespace deephedge
