#pragma once
// Route-level maintenance priority.

#include <span>
#include <string>
#include <vector>

namespace pavemind::priority {

// Probability per predicted route PCI, by a min-max CDF walk over the values
// sorted ascending: the lowest value gets 1 - CDF(x) and every later value
// gets 1 - (CDF(x) - CDF(previous)). Results come back in input order. When
// all values are equal every point gets 1. Throws std::invalid_argument on
// empty or non-finite input.
//
// Note: for predicted PCIs (73.67, 52.87, 0) this yields (0.7177, 0.2823, 1),
// which is not the (0, 0.72, 1) reported alongside the same inputs in the
// reference route table.
std::vector<double> assign_probabilities(std::span<const double> predicted_pci);

// p_route * (1 - p_segment_assign). Throws std::invalid_argument when either
// argument is outside [0, 1].
double route_priority(double p_route, double p_segment_assign);

struct RoutePriority {
  std::string route_id;
  double predicted_pci = 0.0;
  double p_route = 0.0;
  double p_segment_assign = 0.0;
  double priority = 0.0;
};

// Fills p_route and priority, then sorts by priority descending (route id ascending on ties).
// Priority from the p_route / p_segment_assign already set, sorted descending (route id on ties).
std::vector<RoutePriority> order_routes(std::vector<RoutePriority> routes);

// Fills p_route from predicted_pci, then orders.
std::vector<RoutePriority> rank_routes(std::vector<RoutePriority> routes);

}  // namespace pavemind::priority
