#pragma once
// Fully connected Q-network: ReLU hidden layers, linear output (one value per action).

#include <span>
#include <vector>

#include "pavemind/core/rng.hpp"

namespace pavemind::recommend {

// Reference parameter count for the Q-network.
inline constexpr std::size_t kReferenceParameterCount = 75589;

class QNetwork {
 public:
  QNetwork() = default;
  // layer_sizes = {input, hidden..., output}. He-uniform weights, zero biases.
  QNetwork(std::vector<std::size_t> layer_sizes, Rng& rng);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t num_layers() const { return sizes_.size(); }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const;

  std::vector<double> forward(std::span<const double> x) const;

  // Per-layer weight (out x in, row-major) and bias blocks.
  std::vector<std::vector<double>>& weights() { return weights_; }
  std::vector<std::vector<double>>& biases() { return biases_; }
  const std::vector<std::vector<double>>& weights() const { return weights_; }
  const std::vector<std::vector<double>>& biases() const { return biases_; }

  // Adds d/dtheta of scale * (Q(x)[action] - target)^2 into grad (same layout
  // as this network) and returns the unscaled squared error.
  double accumulate_gradient(std::span<const double> x, std::size_t action, double target, double scale,
                             QNetwork& grad) const;

  // Copy with every parameter set to zero.
  QNetwork zeros_like() const;

  bool operator==(const QNetwork&) const = default;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::vector<double>> weights_;
  std::vector<std::vector<double>> biases_;
};

// Three hidden layers sized (h, h, h/2) with h chosen so the total parameter
// count is as close as possible to `budget`.
std::vector<std::size_t> layout_for_budget(std::size_t input_size, std::size_t output_size,
                                           std::size_t budget = kReferenceParameterCount);

std::size_t count_parameters(const std::vector<std::size_t>& layer_sizes);

}  // namespace pavemind::recommend
