#include "pavemind/priority/bayes_opt.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "pavemind/core/rng.hpp"

namespace pavemind::priority {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

class GaussianProcess {
 public:
  GaussianProcess(const std::vector<std::vector<double>>& xs, const std::vector<double>& ys,
                  double length_scale, double noise)
      : xs_(xs), inv2l2_(1.0 / (2.0 * length_scale * length_scale)) {
    const auto n = static_cast<Eigen::Index>(xs.size());
    mean_ = 0.0;
    for (double y : ys) mean_ += y;
    mean_ /= static_cast<double>(ys.size());
    double var = 0.0;
    for (double y : ys) var += (y - mean_) * (y - mean_);
    scale_ = ys.size() > 1 ? std::sqrt(var / static_cast<double>(ys.size() - 1)) : 0.0;
    if (!(scale_ > 1e-12)) scale_ = 1.0;

    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) k(i, j) = kernel(xs[i], xs[j]);
    k.diagonal().array() += noise;
    llt_.compute(k);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = (ys[static_cast<std::size_t>(i)] - mean_) / scale_;
    alpha_ = llt_.solve(y);
  }

  // Posterior mean and standard deviation in standardised units.
  std::pair<double, double> predict(const std::vector<double>& x) const {
    const auto n = static_cast<Eigen::Index>(xs_.size());
    Eigen::VectorXd ks(n);
    for (Eigen::Index i = 0; i < n; ++i) ks(i) = kernel(x, xs_[static_cast<std::size_t>(i)]);
    const double mu = ks.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(ks);
    const double var = std::max(0.0, 1.0 - v.squaredNorm());
    return {mu, std::sqrt(var)};
  }

  double standardise(double y) const { return (y - mean_) / scale_; }

 private:
  double kernel(const std::vector<double>& a, const std::vector<double>& b) const {
    return std::exp(-sq_dist(a, b) * inv2l2_);
  }

  const std::vector<std::vector<double>>& xs_;
  double inv2l2_;
  double mean_ = 0.0, scale_ = 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

}  // namespace

BayesOptResult bayes_opt(const Objective& objective, const SearchSpace& space,
                         const BayesOptConfig& config) {
  const std::size_t d = space.dims();
  if (d == 0 || space.upper.size() != d) throw std::invalid_argument("bayes_opt: empty search space");
  for (std::size_t i = 0; i < d; ++i)
    if (!(space.lower[i] <= space.upper[i])) throw std::invalid_argument("bayes_opt: inverted bounds");
  if (config.iterations < 1) throw std::invalid_argument("bayes_opt: iterations must be >= 1");

  Rng rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const auto to_space = [&](const std::vector<double>& u) {
    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = space.lower[i] + u[i] * (space.upper[i] - space.lower[i]);
    return x;
  };
  const auto random_unit = [&] {
    std::vector<double> u(d);
    for (double& v : u) v = unit(rng);
    return u;
  };

  BayesOptResult res;
  std::vector<std::vector<double>> unit_points;
  std::size_t best = 0;
  const auto evaluate = [&](std::vector<double> u) {
    const auto x = to_space(u);
    const double y = objective(x);
    res.points.push_back(x);
    res.values.push_back(y);
    unit_points.push_back(std::move(u));
    if (res.values.size() == 1 || y > res.values[best]) best = res.values.size() - 1;
  };

  const int initial = std::clamp(config.initial_points, 1, config.iterations);
  for (int i = 0; i < initial; ++i) evaluate(random_unit());

  while (static_cast<int>(res.values.size()) < config.iterations) {
    const GaussianProcess gp(unit_points, res.values, config.length_scale, config.noise);
    const double incumbent = gp.standardise(res.values[best]);
    std::vector<double> best_candidate;
    double best_ei = -1.0;
    for (int c = 0; c < config.candidates; ++c) {
      std::vector<double> u;
      if (c % 2 == 0) {
        u = random_unit();
      } else {
        // Local perturbation around the incumbent.
        u = unit_points[best];
        const double radius = 0.1 * std::pow(0.5, (c / 2) % 6);
        for (double& v : u) v = std::clamp(v + radius * gauss(rng), 0.0, 1.0);
      }
      const auto [mu, sigma] = gp.predict(u);
      double ei = 0.0;
      if (sigma > 1e-12) {
        const double z = (mu - incumbent - config.xi) / sigma;
        ei = (mu - incumbent - config.xi) * normal_cdf(z) + sigma * normal_pdf(z);
      }
      if (ei > best_ei) {
        best_ei = ei;
        best_candidate = std::move(u);
      }
    }
    evaluate(std::move(best_candidate));
  }
  res.best_point = res.points[best];
  res.best_value = res.values[best];
  return res;
}

}  // namespace pavemind::priority
