#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace pavemind::forecast {

// pci = intercept + sum_k weights[k] * feature_k
struct MlrModel {
  double intercept = 0.0;
  std::vector<double> weights;
  std::vector<std::string> features;

  double evaluate(std::span<const double> row) const;
};

// Closed-form least squares through the normal equations. `rows` is n x k.
// Requires n > k; throws RankDeficientError naming the dependent columns when
// the intercept-augmented design matrix lacks full column rank.
MlrModel fit_mlr(const std::vector<std::vector<double>>& rows, std::span<const double> targets,
                 std::vector<std::string> feature_names = {});

double mlr_ssr(const MlrModel& model, const std::vector<std::vector<double>>& rows,
               std::span<const double> targets);

// Evaluates the model on per-code forecast vectors and clamps to [0, 100].
// Throws std::invalid_argument if a model feature is missing or lengths differ.
std::vector<double> predict_pci(const MlrModel& model,
                                const std::map<std::string, std::vector<double>>& disease_forecasts);

}  // namespace pavemind::forecast
