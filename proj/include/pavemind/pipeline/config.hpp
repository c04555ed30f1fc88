#pragma once
// Pipeline configuration: flat "key = value" text with dotted keys.
//
//   input.detection = data/detection.csv
//   dqn.gamma = 0.9
//   lstm.hidden_candidates = 32, 64, 128
//
// '#' starts a comment. Relative paths (the default output.dir included)
// resolve against the config file's directory. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pavemind/core/csv_io.hpp"
#include "pavemind/core/types.hpp"
#include "pavemind/forecast/forecaster.hpp"
#include "pavemind/priority/bayes_opt.hpp"
#include "pavemind/priority/logistic.hpp"
#include "pavemind/recommend/dqn.hpp"

namespace pavemind::pipeline {

struct PipelineConfig {
  std::filesystem::path detection_path;
  std::filesystem::path maintenance_path;
  std::filesystem::path route_meta_path;
  // Optional structure files overriding the default networks.
  std::optional<std::filesystem::path> rank_structure;
  std::optional<std::filesystem::path> measure_structure;
  std::optional<std::filesystem::path> location_structure;
  std::optional<std::filesystem::path> treatment_structure;
  std::optional<std::filesystem::path> effect_structure;
  std::filesystem::path out_dir = "out";

  std::uint64_t seed = 42;

  forecast::ForecastConfig forecast;

  recommend::DqnConfig dqn;  // dqn.seed is derived from `seed`
  int start_year = 2019;
  int end_year = 2020;
  double reward_scale = 0.01;

  priority::LogisticConfig logistic;
  priority::BayesOptConfig bayes_opt;
  double alpha = 1.0;  // Laplace smoothing for every network

  core::Budget budget{10.0, core::BudgetScope::Network};

  // Disease codes counting as structural damage (the SD factor).
  std::vector<std::string> structural_codes{"crack_3"};
  core::Vocabulary disease_vocab;
  core::Vocabulary treatment_vocab;

  // Throws InputError when a value is out of range.
  void check() const;
};

// Throws InputError naming the line of a malformed entry or unknown key.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

// Text that parse_config turns back into `config`.
std::string format_config(const PipelineConfig& config);

}  // namespace pavemind::pipeline
