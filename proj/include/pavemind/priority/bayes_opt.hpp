#pragma once
// Box-constrained maximisation with a Gaussian-process surrogate
// (squared-exponential kernel) and expected-improvement acquisition.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace pavemind::priority {

struct SearchSpace {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dims() const { return lower.size(); }
};

struct BayesOptConfig {
  int iterations = 50;      // total objective evaluations, initial design included
  int initial_points = 5;   // uniform random design
  int candidates = 512;     // random acquisition candidates per step
  double length_scale = 0.2;  // in unit-cube coordinates
  double noise = 1e-6;
  double xi = 0.01;  // exploration margin on standardised values
  std::uint64_t seed = 0;
};

struct BayesOptResult {
  std::vector<double> best_point;
  double best_value = 0.0;
  std::vector<std::vector<double>> points;  // in evaluation order
  std::vector<double> values;
};

using Objective = std::function<double(std::span<const double>)>;

// Returns the best evaluated point. Throws std::invalid_argument on an empty
// or inverted space.
BayesOptResult bayes_opt(const Objective& objective, const SearchSpace& space,
                         const BayesOptConfig& config = {});

}  // namespace pavemind::priority
