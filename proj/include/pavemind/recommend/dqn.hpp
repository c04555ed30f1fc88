#pragma once
// Deep Q-learning: epsilon-greedy exploration, uniform experience replay and
// a periodically synchronised target network.

#include <cstdint>
#include <memory>
#include <vector>

#include "pavemind/core/rng.hpp"
#include "pavemind/recommend/mdp.hpp"
#include "pavemind/recommend/qnetwork.hpp"

namespace pavemind::recommend {

struct EnvStep {
  std::vector<double> observation;
  double reward = 0.0;
  bool terminal = false;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::size_t observation_size() const = 0;
  virtual std::size_t action_count() const = 0;
  virtual std::vector<double> reset(Rng& rng) = 0;
  virtual EnvStep step(std::size_t action, Rng& rng) = 0;
};

struct DqnConfig {
  double gamma = 0.9;
  double learning_rate = 0.001;
  int epochs = 5000;             // one episode per epoch
  int max_steps_per_epoch = 20;  // episodes are truncated (not terminated) here
  std::size_t replay_capacity = 10'000;
  std::size_t batch_size = 32;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.5;  // share of epochs over which epsilon anneals
  int target_sync_updates = 100;
  std::vector<std::size_t> hidden_layers;  // empty: sized by layout_for_budget
  std::size_t parameter_budget = kReferenceParameterCount;
  std::uint64_t seed = 0;
};

struct DqnResult {
  QNetwork network;
  std::vector<double> loss_trace;  // mean TD loss per epoch
  long updates = 0;
};

// Throws std::invalid_argument on an invalid config and DivergenceError on a
// non-finite loss.
DqnResult dqn_train(Environment& env, const DqnConfig& config);

// Greedy action for an observation; ties go to the lowest action index.
std::size_t greedy_action(const QNetwork& q, std::span<const double> observation);

// Tabular MDP exposed through one-hot state observations. Episodes start in
// a uniformly drawn state and never terminate.
class FiniteMdpEnvironment : public Environment {
 public:
  explicit FiniteMdpEnvironment(FiniteMdp mdp);

  std::size_t observation_size() const override { return mdp_.num_states; }
  std::size_t action_count() const override { return mdp_.num_actions; }
  std::vector<double> reset(Rng& rng) override;
  EnvStep step(std::size_t action, Rng& rng) override;

  std::vector<double> one_hot(std::size_t state) const;
  std::vector<std::size_t> greedy_policy(const QNetwork& q) const;

 private:
  FiniteMdp mdp_;
  std::size_t state_ = 0;
};

}  // namespace pavemind::recommend
