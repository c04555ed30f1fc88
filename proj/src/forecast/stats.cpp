#include "pavemind/forecast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pavemind::forecast {

namespace {

bool numerically_constant(std::span<const double> v, double sum_sq_dev) {
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  const double tol = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  return sum_sq_dev <= tol * tol * static_cast<double>(v.size());
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("pearson: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (numerically_constant(x, sxx) || numerically_constant(y, syy))
    throw std::invalid_argument("pearson: zero variance, correlation undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<std::string> FeatureSelection::codes() const {
  std::vector<std::string> out;
  for (const auto& f : selected) out.push_back(f.code);
  return out;
}

std::vector<SelectedFeature> rank_correlations(const core::RouteSeries& series) {
  std::vector<SelectedFeature> all;
  for (const auto& [code, values] : series.disease_series) {
    try {
      all.push_back({code, pearson(values, series.pci)});
    } catch (const std::invalid_argument&) {
      // constant disease series carry no signal
    }
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    const double ra = std::abs(a.r), rb = std::abs(b.r);
    if (ra != rb) return ra > rb;
    return a.code < b.code;
  });
  return all;
}

FeatureSelection select_features(const core::RouteSeries& series, double threshold) {
  FeatureSelection sel;
  sel.route_id = series.route_id;
  sel.threshold = threshold;
  for (const auto& f : rank_correlations(series))
    if (std::abs(f.r) >= threshold) sel.selected.push_back(f);
  return sel;
}

}  // namespace pavemind::forecast
