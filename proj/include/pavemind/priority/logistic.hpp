#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pavemind::priority {

struct LogisticModel {
  std::vector<double> weights;
  double intercept = 0.0;
  std::vector<double> loss_trace;  // mean log-loss before each iteration, then final

  // Linear score w.x + b (the log-odds).
  double score(std::span<const double> x) const;
  double probability(std::span<const double> x) const;
};

struct LogisticConfig {
  double learning_rate = 0.1;
  int iterations = 2000;
  double init_scale = 1e-3;  // weights start uniform in [-init_scale, init_scale]
  std::uint64_t seed = 0;
};

double log_loss(std::span<const double> weights, double intercept,
                const std::vector<std::vector<double>>& features, std::span<const int> decisions);

// Gradient of the mean log-loss. The last entry is the intercept component.
std::vector<double> log_loss_gradient(std::span<const double> weights, double intercept,
                                      const std::vector<std::vector<double>>& features,
                                      std::span<const int> decisions);

// Full-batch gradient descent on the mean log-loss. Decisions are 0/1.
// Throws std::invalid_argument when only one class is present.
LogisticModel fit_logistic(const std::vector<std::vector<double>>& features,
                           std::span<const int> decisions, const LogisticConfig& config = {});

}  // namespace pavemind::priority
