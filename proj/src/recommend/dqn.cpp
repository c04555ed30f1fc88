#include "pavemind/recommend/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pavemind/core/errors.hpp"

namespace pavemind::recommend {

namespace {

struct Transition {
  std::vector<double> observation;
  std::size_t action;
  double reward;
  std::vector<double> next_observation;
  bool terminal;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) { items_.reserve(capacity); }

  void push(Transition t) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(t));
    } else {
      items_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
  }
  std::size_t size() const { return items_.size(); }
  const Transition& at(std::size_t i) const { return items_[i]; }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Transition> items_;
};

class Adam {
 public:
  Adam(const QNetwork& shape, double lr) : lr_(lr), m_(shape.zeros_like()), v_(shape.zeros_like()) {}

  void step(QNetwork& net, const QNetwork& grad) {
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, t_);
    const double bc2 = 1.0 - std::pow(kBeta2, t_);
    update(net.weights(), grad.weights(), m_.weights(), v_.weights(), bc1, bc2);
    update(net.biases(), grad.biases(), m_.biases(), v_.biases(), bc1, bc2);
  }

 private:
  static constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  void update(std::vector<std::vector<double>>& p, const std::vector<std::vector<double>>& g,
              std::vector<std::vector<double>>& m, std::vector<std::vector<double>>& v, double bc1,
              double bc2) const {
    for (std::size_t l = 0; l < p.size(); ++l)
      for (std::size_t j = 0; j < p[l].size(); ++j) {
        m[l][j] = kBeta1 * m[l][j] + (1 - kBeta1) * g[l][j];
        v[l][j] = kBeta2 * v[l][j] + (1 - kBeta2) * g[l][j] * g[l][j];
        p[l][j] -= lr_ * (m[l][j] / bc1) / (std::sqrt(v[l][j] / bc2) + kEps);
      }
  }

  double lr_;
  int t_ = 0;
  QNetwork m_, v_;
};

void check_config(const DqnConfig& c) {
  if (!(c.gamma >= 0.0 && c.gamma < 1.0)) throw std::invalid_argument("dqn: gamma must lie in [0, 1)");
  if (!(c.learning_rate > 0.0)) throw std::invalid_argument("dqn: learning rate must be > 0");
  if (c.epochs < 1) throw std::invalid_argument("dqn: epochs must be >= 1");
  if (c.max_steps_per_epoch < 1) throw std::invalid_argument("dqn: episode length must be >= 1");
  if (c.replay_capacity == 0 || c.batch_size == 0) throw std::invalid_argument("dqn: empty replay or batch");
  if (c.target_sync_updates < 1) throw std::invalid_argument("dqn: target sync interval must be >= 1");
}

}  // namespace

std::size_t greedy_action(const QNetwork& q, std::span<const double> observation) {
  return argmax_lowest(q.forward(observation));
}

DqnResult dqn_train(Environment& env, const DqnConfig& config) {
  check_config(config);
  if (env.action_count() == 0) throw std::invalid_argument("dqn: empty action set");
  Rng rng(config.seed);

  std::vector<std::size_t> layout;
  if (config.hidden_layers.empty()) {
    layout = layout_for_budget(env.observation_size(), env.action_count(), config.parameter_budget);
  } else {
    layout.push_back(env.observation_size());
    layout.insert(layout.end(), config.hidden_layers.begin(), config.hidden_layers.end());
    layout.push_back(env.action_count());
  }

  DqnResult res;
  res.network = QNetwork(layout, rng);
  QNetwork target = res.network;
  Adam adam(res.network, config.learning_rate);
  ReplayBuffer replay(config.replay_capacity);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any_action(0, env.action_count() - 1);
  QNetwork grad = res.network.zeros_like();

  const double decay_epochs = std::max(1.0, config.epsilon_decay_fraction * config.epochs);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double frac = std::min(1.0, epoch / decay_epochs);
    const double epsilon = config.epsilon_start + frac * (config.epsilon_end - config.epsilon_start);
    std::vector<double> obs = env.reset(rng);
    double epoch_loss = 0.0;
    int epoch_updates = 0;

    for (int t = 0; t < config.max_steps_per_epoch; ++t) {
      const std::size_t action = unit(rng) < epsilon ? any_action(rng) : greedy_action(res.network, obs);
      EnvStep st = env.step(action, rng);
      const bool terminal = st.terminal;
      replay.push({obs, action, st.reward, st.observation, terminal});
      obs = std::move(st.observation);

      // One minibatch update per environment step, sampled with replacement.
      std::uniform_int_distribution<std::size_t> pick(0, replay.size() - 1);
      for (auto& w : grad.weights()) std::fill(w.begin(), w.end(), 0.0);
      for (auto& b : grad.biases()) std::fill(b.begin(), b.end(), 0.0);
      double batch_loss = 0.0;
      const double scale = 1.0 / static_cast<double>(config.batch_size);
      for (std::size_t b = 0; b < config.batch_size; ++b) {
        const Transition& tr = replay.at(pick(rng));
        double y = tr.reward;
        if (!tr.terminal) {
          const auto qn = target.forward(tr.next_observation);
          y += config.gamma * *std::max_element(qn.begin(), qn.end());
        }
        batch_loss += res.network.accumulate_gradient(tr.observation, tr.action, y, scale, grad);
      }
      batch_loss *= scale;
      if (!std::isfinite(batch_loss)) throw DivergenceError("DQN training diverged", epoch + 1);
      adam.step(res.network, grad);
      ++res.updates;
      if (res.updates % config.target_sync_updates == 0) target = res.network;
      epoch_loss += batch_loss;
      ++epoch_updates;
      if (terminal) break;
    }
    res.loss_trace.push_back(epoch_updates ? epoch_loss / epoch_updates : 0.0);
  }
  return res;
}

FiniteMdpEnvironment::FiniteMdpEnvironment(FiniteMdp mdp) : mdp_(std::move(mdp)) { mdp_.check(); }

std::vector<double> FiniteMdpEnvironment::one_hot(std::size_t state) const {
  std::vector<double> v(mdp_.num_states, 0.0);
  v.at(state) = 1.0;
  return v;
}

std::vector<double> FiniteMdpEnvironment::reset(Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, mdp_.num_states - 1);
  state_ = pick(rng);
  return one_hot(state_);
}

EnvStep FiniteMdpEnvironment::step(std::size_t action, Rng& rng) {
  if (action >= mdp_.num_actions) throw std::invalid_argument("FiniteMdpEnvironment: action out of range");
  const auto& outs = mdp_.outcomes[state_][action];
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  const Outcome* chosen = &outs.back();
  for (const auto& o : outs) {
    acc += o.probability;
    if (u < acc) {
      chosen = &o;
      break;
    }
  }
  state_ = chosen->next;
  return {one_hot(state_), chosen->reward, false};
}

std::vector<std::size_t> FiniteMdpEnvironment::greedy_policy(const QNetwork& q) const {
  std::vector<std::size_t> policy(mdp_.num_states);
  for (std::size_t s = 0; s < mdp_.num_states; ++s) policy[s] = greedy_action(q, one_hot(s));
  return policy;
}

}  // namespace pavemind::recommend
