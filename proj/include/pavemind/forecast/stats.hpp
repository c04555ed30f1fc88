#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pavemind/core/types.hpp"

namespace pavemind::forecast {

inline constexpr double kDefaultCorrelationThreshold = 0.7;

// Sample Pearson correlation. Throws std::invalid_argument on length mismatch,
// fewer than two points, or a (numerically) constant input.
double pearson(std::span<const double> x, std::span<const double> y);

struct SelectedFeature {
  std::string code;
  double r = 0.0;
};

struct FeatureSelection {
  std::string route_id;
  std::vector<SelectedFeature> selected;  // |r| descending, then code ascending
  double threshold = kDefaultCorrelationThreshold;

  std::vector<std::string> codes() const;
  bool empty() const { return selected.empty(); }
};

// Disease series with |pearson(disease, pci)| >= threshold. Constant series are skipped.
FeatureSelection select_features(const core::RouteSeries& series,
                                 double threshold = kDefaultCorrelationThreshold);

// Every non-constant disease ranked by |r|, regardless of threshold.
std::vector<SelectedFeature> rank_correlations(const core::RouteSeries& series);

}  // namespace pavemind::forecast
