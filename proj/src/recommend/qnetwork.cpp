#include "pavemind/recommend/qnetwork.hpp"

#include <cmath>
#include <stdexcept>

#include "pavemind/simd/kernels.hpp"

namespace pavemind::recommend {

QNetwork::QNetwork(std::vector<std::size_t> layer_sizes, Rng& rng) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("QNetwork: need input and output layers");
  for (std::size_t s : sizes_)
    if (s == 0) throw std::invalid_argument("QNetwork: layer sizes must be positive");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(sizes_[l]));
    std::uniform_real_distribution<double> u(-bound, bound);
    std::vector<double> w(sizes_[l + 1] * sizes_[l]);
    for (double& v : w) v = u(rng);
    weights_.push_back(std::move(w));
    biases_.emplace_back(sizes_[l + 1], 0.0);
  }
}

std::size_t QNetwork::parameter_count() const { return count_parameters(sizes_); }

std::vector<double> QNetwork::forward(std::span<const double> x) const {
  if (x.size() != input_size()) throw std::invalid_argument("QNetwork: input width mismatch");
  std::vector<double> a(x.begin(), x.end()), z;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    z = biases_[l];
    simd::gemv(weights_[l], sizes_[l + 1], sizes_[l], a, z, true);
    if (l + 1 < weights_.size())
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    a.swap(z);
  }
  return a;
}

double QNetwork::accumulate_gradient(std::span<const double> x, std::size_t action, double target,
                                     double scale, QNetwork& grad) const {
  if (x.size() != input_size()) throw std::invalid_argument("QNetwork: input width mismatch");
  if (action >= output_size()) throw std::invalid_argument("QNetwork: action out of range");
  const std::size_t layers = weights_.size();
  std::vector<std::vector<double>> acts(layers + 1);
  acts[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers; ++l) {
    acts[l + 1] = biases_[l];
    simd::gemv(weights_[l], sizes_[l + 1], sizes_[l], acts[l], acts[l + 1], true);
    if (l + 1 < layers)
      for (double& v : acts[l + 1]) v = v > 0.0 ? v : 0.0;
  }
  const double err = acts[layers][action] - target;
  std::vector<double> delta(output_size(), 0.0);
  delta[action] = 2.0 * scale * err;
  for (std::size_t l = layers; l-- > 0;) {
    simd::ger(grad.weights_[l], sizes_[l + 1], sizes_[l], 1.0, delta, acts[l]);
    simd::axpy(1.0, delta, grad.biases_[l]);
    if (l == 0) break;
    std::vector<double> prev(sizes_[l], 0.0);
    simd::gemv_t(weights_[l], sizes_[l + 1], sizes_[l], delta, prev);
    // ReLU derivative on the stored post-activation.
    for (std::size_t j = 0; j < prev.size(); ++j)
      if (acts[l][j] <= 0.0) prev[j] = 0.0;
    delta.swap(prev);
  }
  return err * err;
}

QNetwork QNetwork::zeros_like() const {
  QNetwork z = *this;
  for (auto& w : z.weights_) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : z.biases_) std::fill(b.begin(), b.end(), 0.0);
  return z;
}

std::size_t count_parameters(const std::vector<std::size_t>& sizes) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) n += sizes[l] * sizes[l + 1] + sizes[l + 1];
  return n;
}

std::vector<std::size_t> layout_for_budget(std::size_t input_size, std::size_t output_size, std::size_t budget) {
  std::vector<std::size_t> best;
  std::size_t best_gap = static_cast<std::size_t>(-1);
  for (std::size_t h = 2; h <= 4096; h += 2) {
    std::vector<std::size_t> layout{input_size, h, h, h / 2, output_size};
    const std::size_t n = count_parameters(layout);
    const std::size_t gap = n > budget ? n - budget : budget - n;
    if (gap < best_gap) {
      best_gap = gap;
      best = layout;
    }
    if (n > budget) break;
  }
  return best;
}

}  // namespace pavemind::recommend
