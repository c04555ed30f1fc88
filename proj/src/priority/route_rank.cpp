#include "pavemind/priority/route_rank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace pavemind::priority {

std::vector<double> assign_probabilities(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("assign_probabilities: empty input");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("assign_probabilities: non-finite value");

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double lo = values[order.front()];
  const double hi = values[order.back()];

  std::vector<double> p(values.size(), 1.0);
  if (hi == lo) return p;
  const auto cdf = [&](double x) { return (x - lo) / (hi - lo); };
  double prev = 0.0;
  for (std::size_t j = 0; j < order.size(); ++j) {
    const double c = cdf(values[order[j]]);
    p[order[j]] = 1.0 - (c - prev);
    prev = c;
  }
  return p;
}

double route_priority(double p_route, double p_segment_assign) {
  if (!(p_route >= 0.0 && p_route <= 1.0) || !(p_segment_assign >= 0.0 && p_segment_assign <= 1.0))
    throw std::invalid_argument("route_priority: probabilities must lie in [0, 1]");
  return p_route * (1.0 - p_segment_assign);
}

std::vector<RoutePriority> order_routes(std::vector<RoutePriority> routes) {
  for (auto& r : routes) r.priority = route_priority(r.p_route, r.p_segment_assign);
  std::stable_sort(routes.begin(), routes.end(), [](const auto& a, const auto& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    return a.route_id < b.route_id;
  });
  return routes;
}

std::vector<RoutePriority> rank_routes(std::vector<RoutePriority> routes) {
  if (routes.empty()) return routes;
  std::vector<double> pci;
  for (const auto& r : routes) pci.push_back(r.predicted_pci);
  const auto p = assign_probabilities(pci);
  for (std::size_t i = 0; i < routes.size(); ++i) routes[i].p_route = p[i];
  return order_routes(std::move(routes));
}

}  // namespace pavemind::priority
