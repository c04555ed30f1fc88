#include "pavemind/recommend/mdp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pavemind::recommend {

void FiniteMdp::check() const {
  if (num_states == 0 || num_actions == 0) throw std::invalid_argument("FiniteMdp: empty state or action set");
  if (outcomes.size() != num_states) throw std::invalid_argument("FiniteMdp: outcome table rows");
  for (std::size_t s = 0; s < num_states; ++s) {
    if (outcomes[s].size() != num_actions) throw std::invalid_argument("FiniteMdp: outcome table columns");
    for (std::size_t a = 0; a < num_actions; ++a) {
      double total = 0.0;
      for (const auto& o : outcomes[s][a]) {
        if (o.next >= num_states) throw std::invalid_argument("FiniteMdp: successor out of range");
        if (o.probability < 0.0) throw std::invalid_argument("FiniteMdp: negative probability");
        total += o.probability;
      }
      if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("FiniteMdp: distribution of state " + std::to_string(s) + " action " +
                                    std::to_string(a) + " sums to " + std::to_string(total));
    }
  }
}

double expected_utility(std::span<const std::pair<double, double>> outcomes) {
  double total = 0.0, eu = 0.0;
  for (const auto& [p, u] : outcomes) {
    if (p < 0.0) throw std::invalid_argument("expected_utility: negative probability");
    total += p;
    eu += p * u;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("expected_utility: probabilities do not sum to 1");
  return eu;
}

double action_value(const FiniteMdp& mdp, std::size_t s, std::size_t a, std::span<const double> utility,
                    double gamma) {
  double q = 0.0;
  for (const auto& o : mdp.outcomes[s][a]) q += o.probability * (o.reward + gamma * utility[o.next]);
  return q;
}

std::size_t argmax_lowest(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax_lowest: empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

std::vector<std::size_t> greedy_policy(const FiniteMdp& mdp, std::span<const double> utility, double gamma) {
  std::vector<std::size_t> policy(mdp.num_states);
  std::vector<double> q(mdp.num_actions);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    for (std::size_t a = 0; a < mdp.num_actions; ++a) q[a] = action_value(mdp, s, a, utility, gamma);
    policy[s] = argmax_lowest(q);
  }
  return policy;
}

ValueIterationResult value_iteration(const FiniteMdp& mdp, double gamma, double epsilon, int max_iterations) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("value_iteration: gamma must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("value_iteration: epsilon must be > 0");
  mdp.check();
  ValueIterationResult res;
  std::vector<double> u(mdp.num_states, 0.0), next(mdp.num_states);
  for (res.iterations = 1; res.iterations <= max_iterations; ++res.iterations) {
    double delta = 0.0;
    for (std::size_t s = 0; s < mdp.num_states; ++s) {
      double best = action_value(mdp, s, 0, u, gamma);
      for (std::size_t a = 1; a < mdp.num_actions; ++a) best = std::max(best, action_value(mdp, s, a, u, gamma));
      next[s] = best;
      delta = std::max(delta, std::abs(best - u[s]));
    }
    u.swap(next);
    res.residual = delta;
    if (delta < epsilon) break;
  }
  res.utility = u;
  res.policy = greedy_policy(mdp, u, gamma);
  return res;
}

std::vector<double> evaluate_policy(const FiniteMdp& mdp, std::span<const std::size_t> policy, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("evaluate_policy: gamma must lie in [0, 1)");
  if (policy.size() != mdp.num_states) throw std::invalid_argument("evaluate_policy: policy length");
  const auto n = static_cast<Eigen::Index>(mdp.num_states);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    if (policy[s] >= mdp.num_actions) throw std::invalid_argument("evaluate_policy: action out of range");
    for (const auto& o : mdp.outcomes[s][policy[s]]) {
      a(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(o.next)) -= gamma * o.probability;
      r(static_cast<Eigen::Index>(s)) += o.probability * o.reward;
    }
  }
  const Eigen::VectorXd u = a.partialPivLu().solve(r);
  return {u.data(), u.data() + n};
}

std::vector<std::vector<std::size_t>> optimal_action_sets(const FiniteMdp& mdp, std::span<const double> utility,
                                                          double gamma, double tol) {
  std::vector<std::vector<std::size_t>> sets(mdp.num_states);
  std::vector<double> q(mdp.num_actions);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    for (std::size_t a = 0; a < mdp.num_actions; ++a) q[a] = action_value(mdp, s, a, utility, gamma);
    const double best = *std::max_element(q.begin(), q.end());
    for (std::size_t a = 0; a < mdp.num_actions; ++a)
      if (q[a] >= best - tol) sets[s].push_back(a);
  }
  return sets;
}

}  // namespace pavemind::recommend
