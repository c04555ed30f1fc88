#pragma once
// Finite discounted MDPs: expected utility, Bellman backups, value
// iteration and exact policy evaluation.

#include <span>
#include <utility>
#include <vector>

namespace pavemind::recommend {

struct Outcome {
  std::size_t next = 0;
  double probability = 0.0;
  double reward = 0.0;  // R(s, a, s')
};

struct FiniteMdp {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  // outcomes[s][a]: successor distribution of action a in state s
  std::vector<std::vector<std::vector<Outcome>>> outcomes;

  // Throws std::invalid_argument on shape errors or distributions that do
  // not sum to 1 within 1e-9.
  void check() const;
};

// sum_i p_i U(S_i). Throws std::invalid_argument when the probabilities are
// negative or do not sum to 1 within 1e-9.
double expected_utility(std::span<const std::pair<double, double>> outcomes);

// Q(s, a) = sum_s' P(s'|s,a) [R(s,a,s') + gamma U(s')]
double action_value(const FiniteMdp& mdp, std::size_t s, std::size_t a,
                    std::span<const double> utility, double gamma);

// Index of the largest value; the lowest index wins ties.
std::size_t argmax_lowest(std::span<const double> values);

struct ValueIterationResult {
  std::vector<double> utility;
  std::vector<std::size_t> policy;
  int iterations = 0;
  double residual = 0.0;  // sup-norm change of the final backup
};

// Iterates the Bellman optimality backup until the sup-norm change falls
// below epsilon. Throws std::invalid_argument unless 0 <= gamma < 1.
ValueIterationResult value_iteration(const FiniteMdp& mdp, double gamma, double epsilon = 1e-10,
                                     int max_iterations = 1'000'000);

// U^pi solved exactly from the linear Bellman equation (I - gamma P_pi) U = r_pi.
std::vector<double> evaluate_policy(const FiniteMdp& mdp, std::span<const std::size_t> policy,
                                    double gamma);

// Greedy actions with respect to `utility`.
std::vector<std::size_t> greedy_policy(const FiniteMdp& mdp, std::span<const double> utility,
                                       double gamma);

// Actions whose value is within `tol` of the best, per state.
std::vector<std::vector<std::size_t>> optimal_action_sets(const FiniteMdp& mdp,
                                                          std::span<const double> utility,
                                                          double gamma, double tol = 1e-9);

}  // namespace pavemind::recommend
