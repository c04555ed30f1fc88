#include "pavemind/priority/logistic.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "pavemind/core/rng.hpp"

namespace pavemind::priority {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double linear(std::span<const double> w, double b, const std::vector<double>& x) {
  double z = b;
  for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * x[j];
  return z;
}

void check_shapes(std::span<const double> w, const std::vector<std::vector<double>>& features,
                  std::span<const int> decisions) {
  if (features.size() != decisions.size())
    throw std::invalid_argument("logistic: features and decisions differ in length");
  for (const auto& x : features)
    if (x.size() != w.size()) throw std::invalid_argument("logistic: feature width mismatch");
  for (int d : decisions)
    if (d != 0 && d != 1) throw std::invalid_argument("logistic: decisions must be 0 or 1");
}

}  // namespace

double LogisticModel::score(std::span<const double> x) const {
  if (x.size() != weights.size()) throw std::invalid_argument("LogisticModel: feature width mismatch");
  double z = intercept;
  for (std::size_t j = 0; j < x.size(); ++j) z += weights[j] * x[j];
  return z;
}

double LogisticModel::probability(std::span<const double> x) const { return sigmoid(score(x)); }

double log_loss(std::span<const double> weights, double intercept,
                const std::vector<std::vector<double>>& features, std::span<const int> decisions) {
  check_shapes(weights, features, decisions);
  if (features.empty()) return 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double z = linear(weights, intercept, features[i]);
    loss += softplus(z) - decisions[i] * z;
  }
  return loss / static_cast<double>(features.size());
}

std::vector<double> log_loss_gradient(std::span<const double> weights, double intercept,
                                      const std::vector<std::vector<double>>& features,
                                      std::span<const int> decisions) {
  check_shapes(weights, features, decisions);
  std::vector<double> g(weights.size() + 1, 0.0);
  if (features.empty()) return g;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double r = sigmoid(linear(weights, intercept, features[i])) - decisions[i];
    for (std::size_t j = 0; j < weights.size(); ++j) g[j] += r * features[i][j];
    g.back() += r;
  }
  for (double& v : g) v /= static_cast<double>(features.size());
  return g;
}

LogisticModel fit_logistic(const std::vector<std::vector<double>>& features,
                           std::span<const int> decisions, const LogisticConfig& config) {
  if (features.empty()) throw std::invalid_argument("fit_logistic: no data");
  const std::size_t k = features.front().size();
  LogisticModel m;
  m.weights.assign(k, 0.0);
  check_shapes(m.weights, features, decisions);
  std::size_t positives = 0;
  for (int d : decisions) positives += static_cast<std::size_t>(d);
  if (positives == 0 || positives == decisions.size())
    throw std::invalid_argument("fit_logistic: need both positive and negative decisions");
  if (!(config.learning_rate > 0.0)) throw std::invalid_argument("fit_logistic: learning rate must be > 0");

  Rng rng(config.seed);
  std::uniform_real_distribution<double> u(-config.init_scale, config.init_scale);
  for (double& w : m.weights) w = u(rng);

  for (int it = 0; it < config.iterations; ++it) {
    m.loss_trace.push_back(log_loss(m.weights, m.intercept, features, decisions));
    const auto g = log_loss_gradient(m.weights, m.intercept, features, decisions);
    for (std::size_t j = 0; j < k; ++j) m.weights[j] -= config.learning_rate * g[j];
    m.intercept -= config.learning_rate * g.back();
  }
  m.loss_trace.push_back(log_loss(m.weights, m.intercept, features, decisions));
  return m;
}

}  // namespace pavemind::priority
