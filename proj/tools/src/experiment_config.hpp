#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "deephedge/market_models.hpp"
#include "deephedge/neural.hpp"
#include "deephedge/training.hpp"

namespace deephedge::cli {

// Raised for malformed or semantically invalid configuration; the CLI maps
// it to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model family: an explicit model list or one of two sampling rules.
struct FamilyConfig {
  std::string type = "gbm_sigma_uniform";  // gbm_sigma_uniform | sv_sampled | explicit
  int n_tasks = 8;
  double sigma_lo = 0.1;  // gbm_sigma_uniform
  double sigma_hi = 0.8;
  SvFamilyRanges sv_ranges;          // sv_sampled
  std::vector<ModelSpec> models;     // explicit
};

struct ArchConfig {
  int embed_dim = 1;
  std::vector<int> hidden = {128, 128, 128};
  double embed_init_scale = 0.001;
};

struct RecalibrateConfig {
  std::optional<ModelSpec> model;  // unseen task; required by the recalibrate command
  int paths = 100;
  int eval_paths = 4000;
  int epochs = 300;
  bool compare_from_scratch = true;
};

struct EvaluateConfig {
  int histogram_bins = 60;
  double histogram_lo = -0.25;
  double histogram_hi = 0.05;
  double delta_slice_tau = 10.0 / 365.0;
  double delta_spot_lo = 0.8;
  double delta_spot_hi = 1.2;
  int delta_spot_points = 41;
};

struct ReportConfig {
  std::vector<int> table1_paths_per_task = {100, 2000, 6400};
};

// One experiment: everything the pipeline needs, parsed from a single
// versioned JSON document.
struct ExperimentConfig {
  int version = 1;
  std::string name = "experiment";
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  TimeGrid grid{30, 30.0 / 365.0};
  double s0 = 1.0;
  double strike = 1.0;
  int position_sign = -1;  // -1 short (the experiments), +1 long
  FamilyConfig family;
  int paths_per_task = 1000;
  ArchConfig arch;
  TrainConfig train;  // seed/mode fields ignored in the file; seed comes from `seed`
  RecalibrateConfig recalibrate;
  EvaluateConfig evaluate;
  ReportConfig report;

  Claim claim() const { return Claim(strike, position_sign); }
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& file);
void save_config(const std::filesystem::path& file, const ExperimentConfig& config);

// Model <-> JSON (used by configs and the dataset manifest).
nlohmann::json model_to_json(const ModelSpec& model);
ModelSpec model_from_json(const nlohmann::json& j);

// Materializes the family into one ModelSpec per task. Sampling rules draw
// from substream 0 of `seed`.
std::vector<ModelSpec> resolve_family(const FamilyConfig& family, std::uint64_t seed);

}  // namespace deephedge::cli
