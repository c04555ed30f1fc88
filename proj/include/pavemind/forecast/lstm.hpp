#pragma once
// Single-layer LSTM with a dense read-out, trained by backpropagation
// through time on the sum of squared residuals.
//
//   forget    f = sigmoid(Wf x + Uf h + bf)
//   input     i = sigmoid(Wi x + Ui h + bi)
//   candidate g = tanh(Wg x + Ug h + bg)
//   output    o = sigmoid(Wo x + Uo h + bo)
//   c' = f * c + i * g,   h' = o * tanh(c'),   y = Wy h' + by

#include <cstdint>
#include <span>
#include <vector>

#include "pavemind/core/rng.hpp"

namespace pavemind::forecast {

struct GateParams {
  std::vector<double> input_weights;      // hidden x input, row-major
  std::vector<double> recurrent_weights;  // hidden x hidden
  std::vector<double> bias;               // hidden

  bool operator==(const GateParams&) const = default;
};

struct LstmParams {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  std::size_t output_size = 0;
  GateParams forget, input, candidate, output;
  std::vector<double> dense_weights;  // output x hidden
  std::vector<double> dense_bias;     // output

  static LstmParams zeros(std::size_t input_size, std::size_t hidden_size,
                          std::size_t output_size);
  // Entries uniform in [-scale, scale].
  static LstmParams random(std::size_t input_size, std::size_t hidden_size,
                           std::size_t output_size, Rng& rng, double scale = 0.1);

  // Throws std::invalid_argument when any block has the wrong size.
  void check() const;
  std::size_t parameter_count() const;

  // All 14 parameter blocks in a fixed order; used by optimizers and gradient checks.
  std::vector<std::vector<double>*> blocks();
  std::vector<const std::vector<double>*> blocks() const;

  bool operator==(const LstmParams&) const = default;
};

struct LstmStep {
  std::vector<double> h, c;
  std::vector<double> f, i, g, o;
};

LstmStep lstm_step(const LstmParams& p, std::span<const double> x, std::span<const double> h_prev,
                   std::span<const double> c_prev);

// y = Wy h + by
std::vector<double> dense(const LstmParams& p, std::span<const double> h);

using Row = std::vector<double>;

struct TrainingPair {
  std::vector<Row> inputs;  // `window` consecutive rows
  Row target;               // the row that follows
};

// rows: t x k series. Throws std::invalid_argument when t <= window.
std::vector<TrainingPair> make_windows(const std::vector<Row>& rows, std::size_t window = 3);

// Runs the sequence from zero state and returns the dense output of the last step.
Row predict_sequence(const LstmParams& p, const std::vector<Row>& inputs);

double ssr_loss(const LstmParams& p, const std::vector<TrainingPair>& pairs);

// Gradient of ssr_loss, laid out like the parameters.
LstmParams ssr_gradient(const LstmParams& p, const std::vector<TrainingPair>& pairs,
                        double* loss_out = nullptr);

struct LstmTrainConfig {
  double learning_rate = 0.01;
  std::size_t hidden_size = 32;
  std::size_t window = 3;
  int max_epochs = 2000;
  int early_stop_epochs = 100;
  double early_stop_tol = 1e-6;
  double init_scale = 0.1;
  std::uint64_t seed = 0;
};

struct LstmFit {
  LstmParams params;
  std::vector<double> loss_trace;  // loss at the start of each epoch, plus final loss
};

// Adam on the full batch of windows. Deterministic given config.seed.
// Throws DivergenceError if the loss becomes non-finite.
LstmFit fit_lstm(const std::vector<TrainingPair>& pairs, std::size_t input_size,
                 std::size_t output_size, const LstmTrainConfig& config);

}  // namespace pavemind::forecast
