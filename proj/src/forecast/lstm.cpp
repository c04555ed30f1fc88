#include "pavemind/forecast/lstm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pavemind/core/errors.hpp"
#include "pavemind/simd/kernels.hpp"

namespace pavemind::forecast {

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

GateParams gate_zeros(std::size_t in, std::size_t hid) {
  return {std::vector<double>(hid * in, 0.0), std::vector<double>(hid * hid, 0.0),
          std::vector<double>(hid, 0.0)};
}

void check_size(const std::vector<double>& v, std::size_t n, const char* what) {
  if (v.size() != n)
    throw std::invalid_argument(std::string("LstmParams: ") + what + " has " +
                                std::to_string(v.size()) + " entries, expected " +
                                std::to_string(n));
}

// pre = W x + U h + b
void gate_preactivation(const GateParams& g, std::size_t in, std::size_t hid,
                        std::span<const double> x, std::span<const double> h,
                        std::vector<double>& pre) {
  pre = g.bias;
  simd::gemv(g.input_weights, hid, in, x, pre, true);
  simd::gemv(g.recurrent_weights, hid, hid, h, pre, true);
}

void gate_backward(const GateParams& g, GateParams& grad, std::size_t in, std::size_t hid,
                   std::span<const double> da, std::span<const double> x,
                   std::span<const double> h_prev, std::span<double> dh_prev) {
  simd::ger(grad.input_weights, hid, in, 1.0, da, x);
  simd::ger(grad.recurrent_weights, hid, hid, 1.0, da, h_prev);
  simd::axpy(1.0, da, grad.bias);
  simd::gemv_t(g.recurrent_weights, hid, hid, da, dh_prev);
}

struct StepCache {
  Row x;
  std::vector<double> h_prev, c_prev;
  LstmStep step;
};

}  // namespace

LstmParams LstmParams::zeros(std::size_t in, std::size_t hid, std::size_t out) {
  if (in == 0 || hid == 0 || out == 0)
    throw std::invalid_argument("LstmParams: dimensions must be positive");
  LstmParams p;
  p.input_size = in;
  p.hidden_size = hid;
  p.output_size = out;
  p.forget = p.input = p.candidate = p.output = gate_zeros(in, hid);
  p.dense_weights.assign(out * hid, 0.0);
  p.dense_bias.assign(out, 0.0);
  return p;
}

LstmParams LstmParams::random(std::size_t in, std::size_t hid, std::size_t out, Rng& rng,
                              double scale) {
  LstmParams p = zeros(in, hid, out);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto* b : p.blocks())
    for (double& v : *b) v = u(rng);
  return p;
}

void LstmParams::check() const {
  const std::size_t in = input_size, hid = hidden_size;
  for (const GateParams* g : {&forget, &input, &candidate, &output}) {
    check_size(g->input_weights, hid * in, "gate input weights");
    check_size(g->recurrent_weights, hid * hid, "gate recurrent weights");
    check_size(g->bias, hid, "gate bias");
  }
  check_size(dense_weights, output_size * hid, "dense weights");
  check_size(dense_bias, output_size, "dense bias");
}

std::size_t LstmParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto* b : blocks()) n += b->size();
  return n;
}

std::vector<std::vector<double>*> LstmParams::blocks() {
  std::vector<std::vector<double>*> out;
  for (GateParams* g : {&forget, &input, &candidate, &output}) {
    out.push_back(&g->input_weights);
    out.push_back(&g->recurrent_weights);
    out.push_back(&g->bias);
  }
  out.push_back(&dense_weights);
  out.push_back(&dense_bias);
  return out;
}

std::vector<const std::vector<double>*> LstmParams::blocks() const {
  auto mut = const_cast<LstmParams*>(this)->blocks();
  return {mut.begin(), mut.end()};
}

LstmStep lstm_step(const LstmParams& p, std::span<const double> x, std::span<const double> h_prev,
                   std::span<const double> c_prev) {
  p.check();
  const std::size_t in = p.input_size, hid = p.hidden_size;
  if (x.size() != in || h_prev.size() != hid || c_prev.size() != hid)
    throw std::invalid_argument("lstm_step: dimension mismatch");
  LstmStep s;
  gate_preactivation(p.forget, in, hid, x, h_prev, s.f);
  gate_preactivation(p.input, in, hid, x, h_prev, s.i);
  gate_preactivation(p.candidate, in, hid, x, h_prev, s.g);
  gate_preactivation(p.output, in, hid, x, h_prev, s.o);
  s.c.resize(hid);
  s.h.resize(hid);
  for (std::size_t j = 0; j < hid; ++j) {
    s.f[j] = sigmoid(s.f[j]);
    s.i[j] = sigmoid(s.i[j]);
    s.g[j] = std::tanh(s.g[j]);
    s.o[j] = sigmoid(s.o[j]);
    s.c[j] = s.f[j] * c_prev[j] + s.i[j] * s.g[j];
    s.h[j] = s.o[j] * std::tanh(s.c[j]);
  }
  return s;
}

std::vector<double> dense(const LstmParams& p, std::span<const double> h) {
  if (h.size() != p.hidden_size || p.dense_weights.size() != p.output_size * p.hidden_size ||
      p.dense_bias.size() != p.output_size)
    throw std::invalid_argument("dense: dimension mismatch");
  std::vector<double> y = p.dense_bias;
  simd::gemv(p.dense_weights, p.output_size, p.hidden_size, h, y, true);
  return y;
}

std::vector<TrainingPair> make_windows(const std::vector<Row>& rows, std::size_t window) {
  if (window == 0) throw std::invalid_argument("make_windows: window must be positive");
  if (rows.size() <= window)
    throw std::invalid_argument("make_windows: series length " + std::to_string(rows.size()) +
                                " must exceed window " + std::to_string(window));
  std::vector<TrainingPair> pairs;
  for (std::size_t s = 0; s + window < rows.size(); ++s) {
    TrainingPair tp;
    tp.inputs.assign(rows.begin() + static_cast<std::ptrdiff_t>(s),
                     rows.begin() + static_cast<std::ptrdiff_t>(s + window));
    tp.target = rows[s + window];
    pairs.push_back(std::move(tp));
  }
  return pairs;
}

Row predict_sequence(const LstmParams& p, const std::vector<Row>& inputs) {
  std::vector<double> h(p.hidden_size, 0.0), c(p.hidden_size, 0.0);
  for (const Row& x : inputs) {
    LstmStep s = lstm_step(p, x, h, c);
    h = std::move(s.h);
    c = std::move(s.c);
  }
  return dense(p, h);
}

double ssr_loss(const LstmParams& p, const std::vector<TrainingPair>& pairs) {
  double loss = 0.0;
  for (const auto& tp : pairs) {
    const Row y = predict_sequence(p, tp.inputs);
    if (y.size() != tp.target.size()) throw std::invalid_argument("ssr_loss: target size");
    for (std::size_t k = 0; k < y.size(); ++k) loss += (y[k] - tp.target[k]) * (y[k] - tp.target[k]);
  }
  return loss;
}

LstmParams ssr_gradient(const LstmParams& p, const std::vector<TrainingPair>& pairs,
                        double* loss_out) {
  p.check();
  const std::size_t in = p.input_size, hid = p.hidden_size, out = p.output_size;
  LstmParams grad = LstmParams::zeros(in, hid, out);
  double loss = 0.0;
  std::vector<StepCache> cache;
  std::vector<double> da_f(hid), da_i(hid), da_g(hid), da_o(hid);

  for (const auto& tp : pairs) {
    if (tp.target.size() != out) throw std::invalid_argument("ssr_gradient: target size");
    cache.clear();
    std::vector<double> h(hid, 0.0), c(hid, 0.0);
    for (const Row& x : tp.inputs) {
      StepCache sc{x, h, c, lstm_step(p, x, h, c)};
      h = sc.step.h;
      c = sc.step.c;
      cache.push_back(std::move(sc));
    }
    std::vector<double> y = dense(p, h);
    std::vector<double> dy(out);
    for (std::size_t k = 0; k < out; ++k) {
      const double r = y[k] - tp.target[k];
      loss += r * r;
      dy[k] = 2.0 * r;
    }
    simd::ger(grad.dense_weights, out, hid, 1.0, dy, h);
    simd::axpy(1.0, dy, grad.dense_bias);
    std::vector<double> dh(hid, 0.0), dc(hid, 0.0);
    simd::gemv_t(p.dense_weights, out, hid, dy, dh);

    for (std::size_t t = cache.size(); t-- > 0;) {
      const StepCache& sc = cache[t];
      const LstmStep& s = sc.step;
      for (std::size_t j = 0; j < hid; ++j) {
        const double tc = std::tanh(s.c[j]);
        const double d_o = dh[j] * tc;
        dc[j] += dh[j] * s.o[j] * (1.0 - tc * tc);
        da_f[j] = dc[j] * sc.c_prev[j] * s.f[j] * (1.0 - s.f[j]);
        da_i[j] = dc[j] * s.g[j] * s.i[j] * (1.0 - s.i[j]);
        da_g[j] = dc[j] * s.i[j] * (1.0 - s.g[j] * s.g[j]);
        da_o[j] = d_o * s.o[j] * (1.0 - s.o[j]);
        dc[j] *= s.f[j];
      }
      std::fill(dh.begin(), dh.end(), 0.0);
      gate_backward(p.forget, grad.forget, in, hid, da_f, sc.x, sc.h_prev, dh);
      gate_backward(p.input, grad.input, in, hid, da_i, sc.x, sc.h_prev, dh);
      gate_backward(p.candidate, grad.candidate, in, hid, da_g, sc.x, sc.h_prev, dh);
      gate_backward(p.output, grad.output, in, hid, da_o, sc.x, sc.h_prev, dh);
    }
  }
  if (loss_out) *loss_out = loss;
  return grad;
}

LstmFit fit_lstm(const std::vector<TrainingPair>& pairs, std::size_t input_size,
                 std::size_t output_size, const LstmTrainConfig& config) {
  if (pairs.empty()) throw std::invalid_argument("fit_lstm: no training pairs");
  if (!(config.learning_rate > 0.0)) throw std::invalid_argument("fit_lstm: learning rate must be > 0");
  if (config.max_epochs < 1) throw std::invalid_argument("fit_lstm: epochs must be >= 1");
  Rng rng(config.seed);
  LstmFit fit;
  fit.params = LstmParams::random(input_size, config.hidden_size, output_size, rng,
                                  config.init_scale);

  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  LstmParams m = LstmParams::zeros(input_size, config.hidden_size, output_size);
  LstmParams v = m;
  auto pb = fit.params.blocks();
  auto mb = m.blocks();
  auto vb = v.blocks();

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    double loss = 0.0;
    LstmParams grad = ssr_gradient(fit.params, pairs, &loss);
    if (!std::isfinite(loss)) throw DivergenceError("LSTM training diverged", epoch);
    fit.loss_trace.push_back(loss);
    const std::size_t n = fit.loss_trace.size();
    const auto window = static_cast<std::size_t>(config.early_stop_epochs);
    if (config.early_stop_epochs > 0 && n > window &&
        fit.loss_trace[n - 1 - window] - loss < config.early_stop_tol)
      return fit;

    const double bc1 = 1.0 - std::pow(beta1, epoch);
    const double bc2 = 1.0 - std::pow(beta2, epoch);
    auto gb = grad.blocks();
    for (std::size_t b = 0; b < pb.size(); ++b) {
      auto& pv = *pb[b];
      auto& mv = *mb[b];
      auto& vv = *vb[b];
      const auto& gv = *gb[b];
      for (std::size_t j = 0; j < pv.size(); ++j) {
        mv[j] = beta1 * mv[j] + (1 - beta1) * gv[j];
        vv[j] = beta2 * vv[j] + (1 - beta2) * gv[j] * gv[j];
        pv[j] -= config.learning_rate * (mv[j] / bc1) / (std::sqrt(vv[j] / bc2) + eps);
      }
    }
  }
  const double final_loss = ssr_loss(fit.params, pairs);
  if (!std::isfinite(final_loss)) throw DivergenceError("LSTM training diverged", config.max_epochs);
  fit.loss_trace.push_back(final_loss);
  return fit;
}

}  // namespace pavemind::forecast
